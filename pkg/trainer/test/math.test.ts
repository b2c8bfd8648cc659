import { describe, expect, test } from "vitest";

import { Adam } from "../src/adam.js";
import {
  ModelParams,
  arraysOf,
  initParams,
  wordLoss,
  zerosLike,
} from "../src/model.js";
import { Rng } from "../src/rng.js";

describe("rng", () => {
  test("same seed gives the same stream", () => {
    const a = new Rng(42);
    const b = new Rng(42);
    for (let i = 0; i < 100; i++) expect(a.next()).toBe(b.next());
  });

  test("different seeds diverge", () => {
    const a = new Rng(1);
    const b = new Rng(2);
    const same = Array.from({ length: 20 }, () => a.next() === b.next());
    expect(same.every(Boolean)).toBe(false);
  });

  test("uniform draws stay in range with a sane mean", () => {
    const rng = new Rng(7);
    let sum = 0;
    for (let i = 0; i < 20_000; i++) {
      const u = rng.next();
      expect(u).toBeGreaterThanOrEqual(0);
      expect(u).toBeLessThan(1);
      sum += u;
    }
    expect(sum / 20_000).toBeGreaterThan(0.49);
    expect(sum / 20_000).toBeLessThan(0.51);
  });

  test("normal draws have roughly unit variance", () => {
    const rng = new Rng(11);
    const n = 20_000;
    let sum = 0;
    let sumSq = 0;
    for (let i = 0; i < n; i++) {
      const z = rng.normal();
      sum += z;
      sumSq += z * z;
    }
    expect(Math.abs(sum / n)).toBeLessThan(0.03);
    expect(sumSq / n).toBeGreaterThan(0.95);
    expect(sumSq / n).toBeLessThan(1.05);
  });

  test("shuffle permutes without losing elements", () => {
    const rng = new Rng(3);
    const items = Array.from({ length: 50 }, (_, i) => i);
    const shuffled = items.slice();
    rng.shuffle(shuffled);
    expect(shuffled).not.toEqual(items);
    expect([...shuffled].sort((x, y) => x - y)).toEqual(items);
  });
});

describe("adam", () => {
  test("minimizes a quadratic through the model parameter layout", () => {
    // treat every parameter as an independent quadratic (p - 1)^2
    const params = initParams(["a"], 2, 2, 1, new Rng(0));
    const adam = new Adam(params, { lr: 0.05 });
    const grads = zerosLike(params);
    for (let step = 0; step < 400; step++) {
      const ps = arraysOf(params);
      const gs = arraysOf(grads);
      for (let k = 0; k < ps.length; k++) {
        for (let i = 0; i < ps[k].length; i++) gs[k][i] = 2 * (ps[k][i] - 1);
      }
      adam.step(grads);
    }
    for (const arr of arraysOf(params)) {
      for (const x of arr) expect(Math.abs(x - 1)).toBeLessThan(1e-3);
    }
  });
});

describe("gradients", () => {
  const WORDS = [[0, 1, 2], [2, 2], []];

  function totalLoss(params: ModelParams, dropout: number, grads?: ModelParams): number {
    let loss = 0;
    for (let wi = 0; wi < WORDS.length; wi++) {
      loss += wordLoss(params, WORDS[wi], {
        dropout,
        rng: dropout > 0 ? new Rng(1000 + wi) : undefined,
        grads,
      });
    }
    return loss;
  }

  function maxRelError(dropout: number): number {
    const params = initParams(["p", "q", "r"], 3, 4, 2, new Rng(5));
    const grads = zerosLike(params);
    totalLoss(params, dropout, grads);
    const ps = arraysOf(params);
    const gs = arraysOf(grads);
    const eps = 1e-5;
    let worst = 0;
    for (let k = 0; k < ps.length; k++) {
      for (let i = 0; i < ps[k].length; i++) {
        const orig = ps[k][i];
        ps[k][i] = orig + eps;
        const plus = totalLoss(params, dropout);
        ps[k][i] = orig - eps;
        const minus = totalLoss(params, dropout);
        ps[k][i] = orig;
        const numeric = (plus - minus) / (2 * eps);
        const analytic = gs[k][i];
        const rel =
          Math.abs(analytic - numeric) /
          Math.max(1e-8, Math.abs(analytic) + Math.abs(numeric));
        if (rel > worst) worst = rel;
      }
    }
    return worst;
  }

  test("backprop matches central differences with dropout off", () => {
    expect(maxRelError(0)).toBeLessThan(1e-6);
  });

  test("backprop matches central differences through fixed dropout masks", () => {
    // the same rng seed per word reproduces the same masks in every
    // evaluation, so the finite differences see one fixed network
    expect(maxRelError(0.4)).toBeLessThan(1e-6);
  });

  test("loss is positive and additive over steps for the empty word", () => {
    const params = initParams(["a", "b"], 2, 3, 1, new Rng(9));
    const loss = wordLoss(params, []);
    expect(loss).toBeGreaterThan(0);
    // zero output layer at init: exactly one uniform step over 3 outcomes
    expect(loss).toBeCloseTo(Math.log(3), 12);
  });
});
