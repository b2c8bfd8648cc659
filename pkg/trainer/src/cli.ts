/** Command line: read a split manifest, train, and write the three
 * hand-off files (weights.json, probe.jsonl, metrics.json) to --out-dir.
 *
 * Exit codes: 0 success, 2 usage error, 3 data error.
 */

import { mkdirSync } from "node:fs";
import { join } from "node:path";
import { pathToFileURL } from "node:url";

import {
  DataError,
  alphabetFromForms,
  encodeForm,
  indexOf,
  readManifest,
} from "./data.js";
import { exportWeights, probeEntries, writeMetrics, writeProbe } from "./export.js";
import { meanBitsPerWord } from "./model.js";
import { DEFAULT_CONFIG, TrainConfig, trainModel } from "./train.js";

class UsageError extends Error {}

interface CliOptions {
  manifest: string;
  outDir: string;
  probeCount: number;
  phones: string[] | null;
  config: TrainConfig;
}

const FLAG_DOC = `usage: lstm-trainer --manifest PATH --out-dir DIR [options]

options:
  --probe-count N   held-out words to score into probe.jsonl (default 100)
  --phones a,b,c    fix the phone inventory instead of deriving it
  --embed-dim N     (default ${DEFAULT_CONFIG.embedDim})
  --hidden-dim N    (default ${DEFAULT_CONFIG.hiddenDim})
  --layers N        (default ${DEFAULT_CONFIG.layers})
  --dropout P       inter-layer, train-time only (default ${DEFAULT_CONFIG.dropout})
  --lr X            (default ${DEFAULT_CONFIG.lr})
  --batch-size N    (default ${DEFAULT_CONFIG.batchSize})
  --max-epochs N    (default ${DEFAULT_CONFIG.maxEpochs})
  --patience N      epochs without val improvement before stopping (default ${DEFAULT_CONFIG.patience})
  --seed N          (default ${DEFAULT_CONFIG.seed})
`;

function parseArgs(argv: string[]): CliOptions {
  const values = new Map<string, string>();
  for (let i = 0; i < argv.length; i++) {
    const flag = argv[i];
    if (flag === "--help" || flag === "-h") throw new UsageError(FLAG_DOC);
    if (!flag.startsWith("--")) throw new UsageError(`unexpected argument ${flag}`);
    const value = argv[i + 1];
    if (value === undefined) throw new UsageError(`${flag} needs a value`);
    values.set(flag.slice(2), value);
    i++;
  }
  const take = (name: string): string | undefined => {
    const v = values.get(name);
    values.delete(name);
    return v;
  };
  const num = (name: string, fallback: number, integer: boolean): number => {
    const raw = take(name);
    if (raw === undefined) return fallback;
    const v = Number(raw);
    if (!Number.isFinite(v) || (integer && !Number.isInteger(v))) {
      throw new UsageError(`bad --${name}: ${raw}`);
    }
    return v;
  };
  const manifest = take("manifest");
  const outDir = take("out-dir");
  if (!manifest || !outDir) {
    throw new UsageError("--manifest and --out-dir are required\n\n" + FLAG_DOC);
  }
  const phonesRaw = take("phones");
  const config: TrainConfig = {
    embedDim: num("embed-dim", DEFAULT_CONFIG.embedDim, true),
    hiddenDim: num("hidden-dim", DEFAULT_CONFIG.hiddenDim, true),
    layers: num("layers", DEFAULT_CONFIG.layers, true),
    dropout: num("dropout", DEFAULT_CONFIG.dropout, false),
    lr: num("lr", DEFAULT_CONFIG.lr, false),
    batchSize: num("batch-size", DEFAULT_CONFIG.batchSize, true),
    maxEpochs: num("max-epochs", DEFAULT_CONFIG.maxEpochs, true),
    patience: num("patience", DEFAULT_CONFIG.patience, true),
    seed: num("seed", DEFAULT_CONFIG.seed, true),
  };
  const probeCount = num("probe-count", 100, true);
  if (values.size > 0) {
    throw new UsageError(`unknown flag --${[...values.keys()][0]}`);
  }
  return {
    manifest,
    outDir,
    probeCount,
    phones: phonesRaw ? phonesRaw.split(",") : null,
    config,
  };
}

export function run(opts: CliOptions): void {
  const manifest = readManifest(opts.manifest);
  const phones =
    opts.phones ??
    alphabetFromForms([...manifest.train, ...manifest.val, ...manifest.test]);
  const index = indexOf(phones);
  const enc = (forms: string[]) => forms.map((f) => encodeForm(f, index));
  const train = enc(manifest.train);
  const val = enc(manifest.val);
  const test = enc(manifest.test);

  const result = trainModel(train, val, phones, opts.config);

  const probeForms = (manifest.test.length > 0 ? manifest.test : manifest.val)
    .slice(0, opts.probeCount);
  const probeWords = enc(probeForms);

  mkdirSync(opts.outDir, { recursive: true });
  exportWeights(join(opts.outDir, "weights.json"), result.params);
  writeProbe(
    join(opts.outDir, "probe.jsonl"),
    probeEntries(result.params, probeForms, probeWords),
  );
  const bits = (words: number[][]) =>
    words.length > 0 ? meanBitsPerWord(result.params, words) : null;
  writeMetrics(join(opts.outDir, "metrics.json"), {
    config: { ...opts.config, probeCount: opts.probeCount },
    alphabet: phones,
    counts: { train: train.length, val: val.length, test: test.length },
    bits_per_word: { train: bits(train), val: bits(val), test: bits(test) },
    epochs_run: result.epochsRun,
    best_epoch: result.bestEpoch,
    best_val_bits_per_word: result.bestValBits,
  });
  console.log(
    `trained ${opts.config.layers}x${opts.config.hiddenDim} model on ` +
      `${train.length} words (${result.epochsRun} epochs); wrote ${opts.outDir}`,
  );
}

export function main(argv: string[]): number {
  try {
    run(parseArgs(argv));
    return 0;
  } catch (exc) {
    if (exc instanceof UsageError) {
      console.error(exc.message);
      return 2;
    }
    if (exc instanceof DataError || (exc as NodeJS.ErrnoException).code === "ENOENT") {
      console.error(String(exc));
      return 3;
    }
    throw exc;
  }
}

if (import.meta.url === pathToFileURL(process.argv[1] ?? "").href) {
  process.exit(main(process.argv.slice(2)));
}
