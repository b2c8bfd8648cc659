/** Minibatch training with early stopping on validation cross-entropy.
 *
 * Each epoch shuffles the training words, accumulates exact gradients over
 * batches, and takes one Adam step per batch on the mean word loss.  After
 * every epoch the validation bits-per-word is measured with dropout off;
 * the best weights are kept and restored at the end, and training stops
 * once the metric has not improved for `patience` consecutive epochs.
 */

import { Adam } from "./adam.js";
import {
  ModelParams,
  arraysOf,
  copyParams,
  initParams,
  meanBitsPerWord,
  wordLoss,
  zerosLike,
} from "./model.js";
import { Rng } from "./rng.js";

export interface TrainConfig {
  embedDim: number;
  hiddenDim: number;
  layers: number;
  dropout: number;
  lr: number;
  batchSize: number;
  maxEpochs: number;
  patience: number;
  seed: number;
}

/** Paper-sized architecture; training-schedule fields are ordinary knobs. */
export const DEFAULT_CONFIG: TrainConfig = {
  embedDim: 64,
  hiddenDim: 256,
  layers: 2,
  dropout: 0.33,
  lr: 1e-3,
  batchSize: 64,
  maxEpochs: 100,
  patience: 5,
  seed: 0,
};

export interface EpochStats {
  epoch: number;
  trainBitsPerWord: number;
  valBitsPerWord: number | null;
}

export interface TrainResult {
  params: ModelParams;
  history: EpochStats[];
  epochsRun: number;
  bestEpoch: number;
  bestValBits: number | null;
}

function restoreInto(dst: ModelParams, src: ModelParams): void {
  const d = arraysOf(dst);
  const s = arraysOf(src);
  for (let k = 0; k < d.length; k++) d[k].set(s[k]);
}

export function trainModel(
  trainWords: number[][],
  valWords: number[][],
  phones: string[],
  config: TrainConfig,
): TrainResult {
  if (trainWords.length === 0) throw new Error("no training words");
  if (config.batchSize < 1) throw new Error("batch size must be >= 1");
  if (config.maxEpochs < 0) throw new Error("max epochs must be >= 0");
  const rng = new Rng(config.seed);
  const params = initParams(
    phones,
    config.embedDim,
    config.hiddenDim,
    config.layers,
    rng,
  );
  const adam = new Adam(params, { lr: config.lr });
  const grads = zerosLike(params);
  const gradArrays = arraysOf(grads);
  const order = trainWords.map((_, i) => i);
  const history: EpochStats[] = [];
  let best: ModelParams | null = null;
  let bestEpoch = 0;
  let bestValBits = Infinity;
  let sinceBest = 0;

  for (let epoch = 1; epoch <= config.maxEpochs; epoch++) {
    rng.shuffle(order);
    let epochNats = 0;
    for (let start = 0; start < order.length; start += config.batchSize) {
      const batch = order.slice(start, start + config.batchSize);
      for (const arr of gradArrays) arr.fill(0);
      let batchNats = 0;
      for (const idx of batch) {
        batchNats += wordLoss(params, trainWords[idx], {
          dropout: config.dropout,
          rng,
          grads,
        });
      }
      if (!Number.isFinite(batchNats)) {
        throw new Error(
          `non-finite loss in epoch ${epoch}; lower the learning rate`,
        );
      }
      for (const arr of gradArrays) {
        for (let i = 0; i < arr.length; i++) arr[i] /= batch.length;
      }
      adam.step(grads);
      epochNats += batchNats;
    }
    const trainBits = epochNats / Math.LN2 / trainWords.length;
    const valBits =
      valWords.length > 0 ? meanBitsPerWord(params, valWords) : null;
    history.push({
      epoch,
      trainBitsPerWord: trainBits,
      valBitsPerWord: valBits,
    });
    if (valBits === null) continue;
    if (!Number.isFinite(valBits)) {
      throw new Error(`non-finite validation loss in epoch ${epoch}`);
    }
    if (valBits < bestValBits - 1e-12) {
      bestValBits = valBits;
      bestEpoch = epoch;
      best = copyParams(params);
      sinceBest = 0;
    } else {
      sinceBest += 1;
      if (sinceBest >= config.patience) break;
    }
  }

  if (best !== null) restoreInto(params, best);
  return {
    params,
    history,
    epochsRun: history.length,
    bestEpoch,
    bestValBits: Number.isFinite(bestValBits) ? bestValBits : null,
  };
}
