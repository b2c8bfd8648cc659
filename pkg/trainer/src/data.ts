/** Split-manifest consumption.  The manifest is the hand-off format from the
 * lexicon pipeline: JSON with version, seed, ratios, unit, counts, and the
 * train/val/test wordforms as space-joined phone-symbol strings. */

import { readFileSync } from "node:fs";

export const MANIFEST_VERSION = 1;

export interface Manifest {
  version: number;
  seed: number;
  ratios: number[];
  unit: string;
  counts: { train: number; val: number; test: number };
  train: string[];
  val: string[];
  test: string[];
}

export class DataError extends Error {}

export function readManifest(path: string): Manifest {
  let obj: unknown;
  try {
    obj = JSON.parse(readFileSync(path, "utf-8"));
  } catch (exc) {
    throw new DataError(`${path}: ${(exc as Error).message}`);
  }
  if (typeof obj !== "object" || obj === null) {
    throw new DataError(`${path}: manifest must be a JSON object`);
  }
  const m = obj as Record<string, unknown>;
  if (m.version !== MANIFEST_VERSION) {
    throw new DataError(
      `${path}: unsupported manifest version ${JSON.stringify(m.version)}`,
    );
  }
  for (const part of ["train", "val", "test"] as const) {
    const words = m[part];
    if (!Array.isArray(words) || words.some((w) => typeof w !== "string")) {
      throw new DataError(`${path}: part "${part}" missing or not a string list`);
    }
    if (words.some((w) => w.trim() === "")) {
      throw new DataError(`${path}: part "${part}" contains an empty form`);
    }
  }
  return m as unknown as Manifest;
}

/** Sorted union of the phone symbols appearing anywhere in the manifest;
 * matches how the lexicon pipeline builds its alphabet. */
export function alphabetFromForms(forms: string[]): string[] {
  const seen = new Set<string>();
  for (const form of forms) {
    for (const sym of form.split(" ")) {
      if (sym !== "") seen.add(sym);
    }
  }
  if (seen.size === 0) throw new DataError("no phone symbols in any form");
  return [...seen].sort();
}

/** Space-joined form to phone indices. */
export function encodeForm(form: string, index: Map<string, number>): number[] {
  if (form === "") return [];
  return form.split(" ").map((sym) => {
    const i = index.get(sym);
    if (i === undefined) throw new DataError(`unknown phone symbol ${JSON.stringify(sym)}`);
    return i;
  });
}

export function indexOf(phones: string[]): Map<string, number> {
  return new Map(phones.map((p, i) => [p, i]));
}
