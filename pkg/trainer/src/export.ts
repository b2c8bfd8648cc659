/** Serialization to the portable hand-off formats.
 *
 * Weight JSON (version 1): alphabet, declared dims, embedding (phones + BOW
 * rows), per-layer w_ih / w_hh / b_ih / b_hh with gate rows stacked
 * i, f, g, o, and the output layer (phones + EOW rows).  The probe file is
 * JSON lines of {"form", "log2_prob"}, one per scored word, matching the
 * per-word output of the inference engine so the two can be diffed.
 */

import { writeFileSync } from "node:fs";

import { Mat } from "./mat.js";
import { LN2, ModelParams, wordLoss } from "./model.js";

export const WEIGHT_FILE_VERSION = 1;

function matRows(m: Mat): number[][] {
  const rows: number[][] = [];
  for (let r = 0; r < m.rows; r++) {
    rows.push(Array.from(m.data.subarray(r * m.cols, (r + 1) * m.cols)));
  }
  return rows;
}

export function weightsToJson(params: ModelParams): object {
  const hidden = params.layers[0].wHh.cols;
  for (const arr of [
    params.embedding.data,
    ...params.layers.flatMap((l) => [l.wIh.data, l.wHh.data, l.bIh, l.bHh]),
    params.outW.data,
    params.outB,
  ]) {
    for (const x of arr) {
      if (!Number.isFinite(x)) throw new Error("non-finite weight; not exporting");
    }
  }
  return {
    version: WEIGHT_FILE_VERSION,
    alphabet: { phones: params.phones },
    embed_dim: params.embedding.cols,
    hidden_dim: hidden,
    layers: params.layers.length,
    embedding: matRows(params.embedding),
    lstm: params.layers.map((l) => ({
      w_ih: matRows(l.wIh),
      w_hh: matRows(l.wHh),
      b_ih: Array.from(l.bIh),
      b_hh: Array.from(l.bHh),
    })),
    out_w: matRows(params.outW),
    out_b: Array.from(params.outB),
  };
}

export function exportWeights(path: string, params: ModelParams): void {
  writeFileSync(path, JSON.stringify(weightsToJson(params)) + "\n");
}

export interface ProbeEntry {
  form: string;
  log2_prob: number;
}

/** Score each probe word with the deterministic forward pass. */
export function probeEntries(
  params: ModelParams,
  forms: string[],
  encoded: number[][],
): ProbeEntry[] {
  return forms.map((form, i) => ({
    form,
    log2_prob: -wordLoss(params, encoded[i]) / LN2,
  }));
}

export function writeProbe(path: string, entries: ProbeEntry[]): void {
  const lines = entries.map((e) => JSON.stringify(e));
  writeFileSync(path, lines.join("\n") + (lines.length ? "\n" : ""));
}

export function writeMetrics(path: string, metrics: object): void {
  writeFileSync(path, JSON.stringify(metrics, null, 1) + "\n");
}
