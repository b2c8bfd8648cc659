/** Stacked LSTM over phone sequences, with exact gradients via
 * backpropagation through time.
 *
 * Conventions shared with the weight-file format so export is a plain dump:
 * gate blocks are stacked input, forget, cell-candidate, output (i, f, g, o)
 * along the rows of w_ih / w_hh; the embedding table covers phones plus a
 * begin-of-word row at index P; the output layer covers phones plus an
 * end-of-word row at index P.  One step computes
 *
 *     a  = w_ih @ x + b_ih + w_hh @ h + b_hh
 *     i, f, o = sigmoid of their blocks;  g = tanh of its block
 *     c' = f*c + i*g;   h' = o*tanh(c')
 *
 * Inter-layer dropout (inverted, train-time only) is applied to h' where it
 * feeds the next layer up, never to the recurrent path or the output layer.
 *
 * A word w = p1..pL is scored by teacher forcing: inputs BOW, p1, .., pL;
 * targets p1, .., pL, EOW; the loss is the word's negative log-likelihood
 * in nats.
 */

import {
  Mat,
  addMatTVec,
  addOuter,
  addVec,
  copyMat,
  matvec,
  rowOf,
  zerosMat,
  zerosVec,
} from "./mat.js";
import { Rng } from "./rng.js";

export const LN2 = Math.LN2;

export interface LayerParams {
  wIh: Mat; // (4H, in)
  wHh: Mat; // (4H, H)
  bIh: Float64Array; // 4H
  bHh: Float64Array; // 4H
}

export interface ModelParams {
  phones: string[];
  embedding: Mat; // (P+1, E), row P = BOW
  layers: LayerParams[];
  outW: Mat; // (P+1, H), row P = EOW
  outB: Float64Array; // P+1
}

function sigmoid(z: number): number {
  return z >= 0 ? 1 / (1 + Math.exp(-z)) : Math.exp(z) / (1 + Math.exp(z));
}

/** Small random recurrent weights, zero output layer: the untrained model
 * emits exactly uniform next-symbol distributions (all logits zero). */
export function initParams(
  phones: string[],
  embedDim: number,
  hiddenDim: number,
  nLayers: number,
  rng: Rng,
): ModelParams {
  const P = phones.length;
  const bound = 1 / Math.sqrt(hiddenDim);
  const fill = (m: Mat, scale: number) => {
    for (let i = 0; i < m.data.length; i++) {
      m.data[i] = (2 * rng.next() - 1) * scale;
    }
  };
  const embedding = zerosMat(P + 1, embedDim);
  fill(embedding, 0.1);
  const layers: LayerParams[] = [];
  for (let l = 0; l < nLayers; l++) {
    const inDim = l === 0 ? embedDim : hiddenDim;
    const layer: LayerParams = {
      wIh: zerosMat(4 * hiddenDim, inDim),
      wHh: zerosMat(4 * hiddenDim, hiddenDim),
      bIh: zerosVec(4 * hiddenDim),
      bHh: zerosVec(4 * hiddenDim),
    };
    fill(layer.wIh, bound);
    fill(layer.wHh, bound);
    for (let j = 0; j < 4 * hiddenDim; j++) {
      layer.bIh[j] = (2 * rng.next() - 1) * bound;
    }
    // forget-gate bias starts at one so early cells remember by default
    for (let j = hiddenDim; j < 2 * hiddenDim; j++) layer.bIh[j] += 1;
    layers.push(layer);
  }
  return {
    phones: phones.slice(),
    embedding,
    layers,
    outW: zerosMat(P + 1, hiddenDim),
    outB: zerosVec(P + 1),
  };
}

export function zerosLike(p: ModelParams): ModelParams {
  return {
    phones: p.phones.slice(),
    embedding: zerosMat(p.embedding.rows, p.embedding.cols),
    layers: p.layers.map((l) => ({
      wIh: zerosMat(l.wIh.rows, l.wIh.cols),
      wHh: zerosMat(l.wHh.rows, l.wHh.cols),
      bIh: zerosVec(l.bIh.length),
      bHh: zerosVec(l.bHh.length),
    })),
    outW: zerosMat(p.outW.rows, p.outW.cols),
    outB: zerosVec(p.outB.length),
  };
}

export function copyParams(p: ModelParams): ModelParams {
  return {
    phones: p.phones.slice(),
    embedding: copyMat(p.embedding),
    layers: p.layers.map((l) => ({
      wIh: copyMat(l.wIh),
      wHh: copyMat(l.wHh),
      bIh: l.bIh.slice(),
      bHh: l.bHh.slice(),
    })),
    outW: copyMat(p.outW),
    outB: p.outB.slice(),
  };
}

/** Every parameter array in a fixed order; optimizer state and snapshots
 * index into this. */
export function arraysOf(p: ModelParams): Float64Array[] {
  const out: Float64Array[] = [p.embedding.data];
  for (const l of p.layers) out.push(l.wIh.data, l.wHh.data, l.bIh, l.bHh);
  out.push(p.outW.data, p.outB);
  return out;
}

export interface LossOptions {
  /** Inter-layer dropout probability; requires rng when positive. */
  dropout?: number;
  rng?: Rng;
  /** When given, gradients of the word loss are accumulated in place. */
  grads?: ModelParams;
}

/** Negative log-likelihood of one word in nats; optionally accumulates
 * d(loss)/d(params) into opts.grads. */
export function wordLoss(
  params: ModelParams,
  word: number[],
  opts: LossOptions = {},
): number {
  const { embedding, layers, outW, outB } = params;
  const P = params.phones.length;
  const L = layers.length;
  const H = layers[0].wHh.cols;
  const dropout = opts.dropout ?? 0;
  if (dropout < 0 || dropout >= 1) throw new Error(`bad dropout ${dropout}`);
  if (dropout > 0 && !opts.rng) throw new Error("dropout needs an rng");
  const keep = 1 - dropout;
  const T = word.length + 1;
  const inputs = [P, ...word];
  const targets = [...word, P];
  const backprop = opts.grads !== undefined;

  // per-layer running state plus per-step caches for the backward pass
  const h = layers.map(() => zerosVec(H));
  const c = layers.map(() => zerosVec(H));
  const cache = backprop
    ? {
        xIn: layers.map(() => [] as Float64Array[]),
        hPrev: layers.map(() => [] as Float64Array[]),
        cPrev: layers.map(() => [] as Float64Array[]),
        gi: layers.map(() => [] as Float64Array[]),
        gf: layers.map(() => [] as Float64Array[]),
        gg: layers.map(() => [] as Float64Array[]),
        go: layers.map(() => [] as Float64Array[]),
        tanhC: layers.map(() => [] as Float64Array[]),
        mask: layers.map(() => [] as (Float64Array | null)[]),
        probs: [] as Float64Array[],
        hTop: [] as Float64Array[],
      }
    : null;

  const a = zerosVec(4 * H);
  const tmp = zerosVec(4 * H);
  const logits = zerosVec(P + 1);
  let loss = 0;

  for (let t = 0; t < T; t++) {
    let x: Float64Array = rowOf(embedding, inputs[t]);
    for (let l = 0; l < L; l++) {
      const layer = layers[l];
      matvec(layer.wIh, x, a);
      matvec(layer.wHh, h[l], tmp);
      for (let j = 0; j < 4 * H; j++) {
        a[j] += tmp[j] + layer.bIh[j] + layer.bHh[j];
      }
      const gi = zerosVec(H);
      const gf = zerosVec(H);
      const gg = zerosVec(H);
      const go = zerosVec(H);
      const cNew = zerosVec(H);
      const hNew = zerosVec(H);
      const tanhC = zerosVec(H);
      for (let j = 0; j < H; j++) {
        gi[j] = sigmoid(a[j]);
        gf[j] = sigmoid(a[H + j]);
        gg[j] = Math.tanh(a[2 * H + j]);
        go[j] = sigmoid(a[3 * H + j]);
        cNew[j] = gf[j] * c[l][j] + gi[j] * gg[j];
        tanhC[j] = Math.tanh(cNew[j]);
        hNew[j] = go[j] * tanhC[j];
      }
      if (cache) {
        cache.xIn[l].push(x.slice());
        cache.hPrev[l].push(h[l]);
        cache.cPrev[l].push(c[l]);
        cache.gi[l].push(gi);
        cache.gf[l].push(gf);
        cache.gg[l].push(gg);
        cache.go[l].push(go);
        cache.tanhC[l].push(tanhC);
      }
      h[l] = hNew;
      c[l] = cNew;
      // feed upward, possibly dropped; the recurrent copy stays intact
      if (l < L - 1 && dropout > 0) {
        const mask = zerosVec(H);
        const dropped = hNew.slice();
        for (let j = 0; j < H; j++) {
          mask[j] = opts.rng!.next() < keep ? 1 / keep : 0;
          dropped[j] *= mask[j];
        }
        cache?.mask[l].push(mask);
        x = dropped;
      } else {
        cache?.mask[l].push(null);
        x = hNew;
      }
    }
    matvec(outW, x, logits);
    addVec(logits, outB);
    let maxLogit = -Infinity;
    for (let k = 0; k <= P; k++) if (logits[k] > maxLogit) maxLogit = logits[k];
    let z = 0;
    for (let k = 0; k <= P; k++) z += Math.exp(logits[k] - maxLogit);
    const logZ = maxLogit + Math.log(z);
    loss += logZ - logits[targets[t]];
    if (cache) {
      const probs = zerosVec(P + 1);
      for (let k = 0; k <= P; k++) probs[k] = Math.exp(logits[k] - logZ);
      cache.probs.push(probs);
      cache.hTop.push(x.slice());
    }
  }

  if (!cache) return loss;

  const grads = opts.grads!;
  const dhNext = layers.map(() => zerosVec(H));
  const dcNext = layers.map(() => zerosVec(H));
  const da = zerosVec(4 * H);
  for (let t = T - 1; t >= 0; t--) {
    // output layer: dlogits = softmax - onehot(target)
    const dlogits = cache.probs[t].slice();
    dlogits[targets[t]] -= 1;
    addOuter(grads.outW, dlogits, cache.hTop[t]);
    addVec(grads.outB, dlogits);
    let dFromAbove = zerosVec(L === 1 ? H : layers[L - 1].wHh.cols);
    addMatTVec(outW, dlogits, dFromAbove);
    for (let l = L - 1; l >= 0; l--) {
      const layer = layers[l];
      const mask = cache.mask[l][t];
      if (mask) {
        for (let j = 0; j < H; j++) dFromAbove[j] *= mask[j];
      }
      const dh = dFromAbove;
      addVec(dh, dhNext[l]);
      const gi = cache.gi[l][t];
      const gf = cache.gf[l][t];
      const gg = cache.gg[l][t];
      const go = cache.go[l][t];
      const tanhC = cache.tanhC[l][t];
      const cPrev = cache.cPrev[l][t];
      const dcn = dcNext[l];
      for (let j = 0; j < H; j++) {
        const doj = dh[j] * tanhC[j];
        const dc = dh[j] * go[j] * (1 - tanhC[j] * tanhC[j]) + dcn[j];
        const dij = dc * gg[j];
        const dfj = dc * cPrev[j];
        const dgj = dc * gi[j];
        da[j] = dij * gi[j] * (1 - gi[j]);
        da[H + j] = dfj * gf[j] * (1 - gf[j]);
        da[2 * H + j] = dgj * (1 - gg[j] * gg[j]);
        da[3 * H + j] = doj * go[j] * (1 - go[j]);
        dcn[j] = dc * gf[j];
      }
      const gl = grads.layers[l];
      addOuter(gl.wIh, da, cache.xIn[l][t]);
      addOuter(gl.wHh, da, cache.hPrev[l][t]);
      addVec(gl.bIh, da);
      addVec(gl.bHh, da);
      dhNext[l].fill(0);
      addMatTVec(layer.wHh, da, dhNext[l]);
      dFromAbove = zerosVec(layer.wIh.cols);
      addMatTVec(layer.wIh, da, dFromAbove);
    }
    // dFromAbove now holds the gradient at the embedding row
    const embRow = rowOf(grads.embedding, inputs[t]);
    addVec(embRow, dFromAbove);
  }
  return loss;
}

/** log2 p(word) under the deterministic (no-dropout) forward pass. */
export function logProb2(params: ModelParams, word: number[]): number {
  return -wordLoss(params, word) / LN2;
}

/** Mean negative log2-likelihood per word; the early-stopping metric. */
export function meanBitsPerWord(params: ModelParams, words: number[][]): number {
  if (words.length === 0) throw new Error("cannot average over zero words");
  let total = 0;
  for (const w of words) total += wordLoss(params, w);
  return total / LN2 / words.length;
}
