#!/usr/bin/env python3
"""Rejection-rate calibration study for the homophony null test.

Repeatedly draws a synthetic lexicon from a model and runs the null test
against the same model, so every rejection is a false positive.  With the
two-sided level at 0.01 and add-one smoothed tails the observed rate should
stay at or below roughly 1 percent.  Writes a JSON summary and prints a
one-line verdict.

The default model is the two-phone bigram trained on the corpus {"a", "a b"}
with Laplace 0.01; pass --corpus to study a different training set (comma
separated forms, phones separated by spaces, alphabet inferred).
"""

import argparse
import json
import math
import sys
import time

import numpy as np

from lexent.core import Alphabet, Wordform
from lexent.lm.ngram import train_ngram
from lexent.nulltest import null_test, sample_lexicon


def build_model(corpus: str, order: int, smoothing: float):
    forms = [f.strip() for f in corpus.split(",") if f.strip()]
    if not forms:
        raise SystemExit("empty --corpus")
    phones = sorted({p for f in forms for p in f.split()})
    alphabet = Alphabet(tuple(phones))
    words = [Wordform.from_str(f, alphabet) for f in forms]
    return train_ngram(words, order=order, smoothing=smoothing,
                       alphabet=alphabet)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--M", type=int, default=500,
                    help="words per synthetic lexicon")
    ap.add_argument("--S", type=int, default=1000,
                    help="null samples per trial")
    ap.add_argument("--seed", type=int, default=777)
    ap.add_argument("--corpus", default="a,a b")
    ap.add_argument("--order", type=int, default=2)
    ap.add_argument("--smoothing", type=float, default=0.01)
    ap.add_argument("--output", help="JSON summary path")
    args = ap.parse_args(argv)

    model = build_model(args.corpus, args.order, args.smoothing)
    rejections = 0
    min_tails = []
    t0 = time.monotonic()
    for trial in range(args.trials):
        rng = np.random.default_rng(np.random.SeedSequence([args.seed, trial]))
        lexicon, _ = sample_lexicon(model, args.M, rng)
        result = null_test(model, lexicon, S=args.S, seed=trial)
        rejections += bool(result.reject)
        min_tails.append(min(result.p_left, result.p_right))
        if (trial + 1) % 50 == 0:
            rate = (time.monotonic() - t0) / (trial + 1)
            print(f"{trial + 1}/{args.trials} trials, "
                  f"{rejections} rejections, {rate:.2f}s/trial",
                  file=sys.stderr)

    rate = rejections / args.trials
    stderr_hat = math.sqrt(max(rate * (1 - rate), 1e-12) / args.trials)
    summary = {
        "trials": args.trials,
        "M": args.M,
        "S": args.S,
        "seed": args.seed,
        "corpus": args.corpus,
        "order": args.order,
        "smoothing": args.smoothing,
        "rejections": rejections,
        "rejection_rate": rate,
        "rate_stderr": stderr_hat,
        "min_tail_quantiles": {
            q: float(np.quantile(min_tails, float(q)))
            for q in ("0.01", "0.05", "0.5")
        },
        "seconds": time.monotonic() - t0,
    }
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=1)
            fh.write("\n")
    print(f"rejection rate {rate:.4f} ({rejections}/{args.trials}), "
          f"two-sided level 0.01")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
