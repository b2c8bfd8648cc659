"""Command-line surface wiring the pipeline end-to-end.

Subcommands: ingest, split, train-ngram, eval-lm, lexicon-entropy,
model-entropy, nulltest, enumerate, family-curves, report.  All randomness
derives from the single --seed; reports are JSON or CSV, carry the resolved
run configuration verbatim, and contain no timestamps, so identical config
plus identical inputs gives byte-identical outputs.

Exit codes: 0 success, 2 usage error, 3 data error, 4 node-budget exhaustion.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from .core import (
    Alphabet,
    DataError,
    Wordform,
    read_lexicon,
    write_lexicon,
)
from .data import (
    SplitSpec,
    ingest,
    read_split_manifest,
    split,
    write_split_manifest,
)
from .entropy import (
    DEFAULT_DELTA,
    DEFAULT_MAX_LEN,
    DEFAULT_NODE_BUDGET,
    NO_COLLISION,
    BudgetExceededError,
    enumerate_support,
    family_distribution,
    finite_renyi,
    mc_shannon,
    sample_renyi,
    truncated_h2,
)
from .lm import WeightFileError, load_model, train_ngram
from .nulltest import DEFAULT_S, null_test

_PATH_DESTS = (
    "input", "output", "lexicon", "alphabet", "alphabet_out", "model",
    "manifest", "report", "summary", "per_word", "words", "config",
)


@dataclass(frozen=True)
class RunConfig:
    """Resolved knobs for one invocation; serialized into every report."""

    seed: int = 0
    delta: float = DEFAULT_DELTA
    max_len: int = DEFAULT_MAX_LEN
    S: int = DEFAULT_S
    mc_shannon_samples: int = 100_000
    node_budget: int = DEFAULT_NODE_BUDGET
    mode: str = "mono"
    threads: int = 1
    paths: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie strictly between 0 and 1")
        if self.max_len < 1:
            raise ValueError("max_len must be >= 1")
        if self.S < 1:
            raise ValueError("S must be >= 1")
        if self.mc_shannon_samples < 1:
            raise ValueError("mc_shannon_samples must be >= 1")
        if self.node_budget < 1:
            raise ValueError("node_budget must be >= 1")
        if self.mode not in ("mono", "all"):
            raise ValueError("mode must be 'mono' or 'all'")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "delta": self.delta,
            "max_len": self.max_len,
            "S": self.S,
            "mc_shannon_samples": self.mc_shannon_samples,
            "node_budget": self.node_budget,
            "mode": self.mode,
            "threads": self.threads,
            "paths": dict(self.paths),
        }


def _run_config(args) -> RunConfig:
    paths = {}
    for dest in _PATH_DESTS:
        v = getattr(args, dest, None)
        if isinstance(v, str):
            paths[dest] = v
        elif isinstance(v, list):
            paths[dest] = list(v)
    return RunConfig(
        seed=getattr(args, "seed", 0),
        delta=getattr(args, "delta", DEFAULT_DELTA),
        max_len=getattr(args, "max_len", DEFAULT_MAX_LEN),
        S=getattr(args, "S", DEFAULT_S),
        mc_shannon_samples=getattr(args, "mc_samples", 100_000),
        node_budget=getattr(args, "node_budget", DEFAULT_NODE_BUDGET),
        mode=getattr(args, "mode", "mono"),
        threads=getattr(args, "threads", 1),
        paths=paths,
    )


def _apply_config_file(args) -> None:
    """Settings in --config override the command-line flags."""
    path = getattr(args, "config", None)
    if not path:
        return
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise DataError(f"{path}: config must be a JSON object")
    for key, value in obj.items():
        dest = key.replace("-", "_")
        if dest in ("config", "func", "command") or not hasattr(args, dest):
            raise UsageError(f"unknown config key {key!r} for this command")
        setattr(args, dest, value)


class UsageError(Exception):
    pass


def _write_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def _read_words_file(path, alphabet: Alphabet) -> list[Wordform]:
    words = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.split():
                continue
            try:
                words.append(Wordform.from_str(line, alphabet))
            except KeyError as exc:
                raise DataError(f"{path}:{lineno}: {exc.args[0]}") from exc
    return words


def _load_words(args, alphabet: Alphabet) -> list[Wordform]:
    if getattr(args, "manifest", None) and getattr(args, "words", None):
        raise UsageError("give either --manifest or --words, not both")
    if getattr(args, "manifest", None):
        parts = read_split_manifest(args.manifest, alphabet)
        return parts[args.part]
    if getattr(args, "words", None):
        return _read_words_file(args.words, alphabet)
    raise UsageError("one of --manifest or --words is required")


# --- subcommand handlers --------------------------------------------------------


def cmd_ingest(args, cfg: RunConfig) -> int:
    alphabet = Alphabet.load(args.alphabet) if args.alphabet else None
    lexicon, alphabet, report = ingest(args.input, alphabet, mode=args.mode)
    write_lexicon(lexicon, args.output, alphabet)
    if args.alphabet_out:
        alphabet.save(args.alphabet_out)
    if args.report:
        _write_json(args.report, {"config": cfg.to_dict(),
                                  **report.to_dict()})
    r = report
    print(f"read {r.rows_read} rows, kept {r.kept}")
    print(f"dropped: separator orthography {r.dropped_space_hyphen_apostrophe}, "
          f"zero derivation {r.dropped_zero_derivation}, "
          f"multimorphemic {r.dropped_multimorphemic}, "
          f"bad symbol {r.dropped_bad_symbol}")
    return 0


def cmd_split(args, cfg: RunConfig) -> int:
    alphabet = Alphabet.load(args.alphabet)
    lexicon = read_lexicon(args.lexicon, alphabet)
    try:
        ratios = tuple(float(x) for x in str(args.ratios).split(","))
    except ValueError as exc:
        raise UsageError(f"bad --ratios: {exc}") from exc
    spec = SplitSpec(seed=args.seed, ratios=ratios, unit=args.split_unit)
    train, val, test = split(lexicon, spec, alphabet)
    write_split_manifest(args.output, alphabet, spec, train, val, test)
    print(f"split {len(train) + len(val) + len(test)} {spec.unit} into "
          f"train {len(train)}, val {len(val)}, test {len(test)}")
    return 0


def cmd_train_ngram(args, cfg: RunConfig) -> int:
    alphabet = Alphabet.load(args.alphabet)
    words = _load_words(args, alphabet)
    model = train_ngram(words, order=args.order, smoothing=args.smoothing,
                        alphabet=alphabet)
    model.save(args.output)
    print(f"trained order-{args.order} model on {len(words)} words "
          f"(smoothing {args.smoothing}); wrote {args.output}")
    return 0


def cmd_eval_lm(args, cfg: RunConfig) -> int:
    model = load_model(args.model)
    alphabet = model.alphabet
    words = _load_words(args, alphabet)
    if not words:
        raise DataError("no words to evaluate")
    lps = model.score_words(words)
    ce_word = float(np.mean(-lps))
    n_steps = sum(len(w) + 1 for w in words)
    ce_phone = float(np.sum(-lps)) / n_steps
    if args.per_word:
        with open(args.per_word, "w", encoding="utf-8") as fh:
            for w, lp in zip(words, lps):
                fh.write(json.dumps({"form": w.to_str(alphabet),
                                     "log2_prob": float(lp)}) + "\n")
    payload = {
        "config": cfg.to_dict(),
        "n_words": len(words),
        "cross_entropy_bits_per_word": ce_word,
        "bits_per_phone": ce_phone,
    }
    if args.output:
        _write_json(args.output, payload)
    print(f"cross-entropy: {ce_word:.5f} bits/word "
          f"({ce_phone:.5f} bits/phone, {len(words)} words)")
    return 0


def cmd_lexicon_entropy(args, cfg: RunConfig) -> int:
    alphabet = Alphabet.load(args.alphabet)
    lexicon = read_lexicon(args.lexicon, alphabet)
    r = sample_renyi(lexicon)
    if r is NO_COLLISION:
        print(f"no homophone pairs among {lexicon.M} entries; "
              "sample Rényi entropy is unbounded above")
    else:
        print(f"R = {r:.5f} bits (M = {lexicon.M})")
    if args.output:
        _write_json(args.output, {
            "config": cfg.to_dict(),
            "M": lexicon.M,
            "R": None if r is NO_COLLISION else r,
            "no_collision": r is NO_COLLISION,
        })
    return 0


def cmd_model_entropy(args, cfg: RunConfig) -> int:
    model = load_model(args.model)
    est = truncated_h2(model, delta=cfg.delta, max_len=cfg.max_len,
                       node_budget=cfg.node_budget)
    acc = est.accumulators
    print(f"H2 (truncated, delta={cfg.delta:g}) = {est.value:.5f} bits; "
          f"true H2 within [{est.value - est.bound_width:.5f}, "
          f"{est.value:.5f}]")
    print(f"support: {acc.count} words, xi = {acc.xi:.9f}, "
          f"eta = {acc.eta:.6g}, length-capped branches: "
          f"{acc.truncated_by_length}")
    payload = {
        "config": cfg.to_dict(),
        "H2_truncated": {
            "value": est.value,
            "bound_width": est.bound_width,
            **acc.to_dict(),
        },
    }
    if not args.skip_h1:
        h1 = mc_shannon(model, cfg.mc_shannon_samples,
                        np.random.default_rng(cfg.seed), max_len=cfg.max_len)
        print(f"H1 (Monte Carlo, {h1.n_samples} samples) = "
              f"{h1.value:.5f} bits (stderr {h1.stderr:.5f}, "
              f"{h1.overflow_resamples} overflow redraws)")
        payload["H1_mc"] = {
            "value": h1.value,
            "stderr": h1.stderr,
            "n_samples": h1.n_samples,
            "overflow_resamples": h1.overflow_resamples,
        }
    if args.output:
        _write_json(args.output, payload)
    return 0


def cmd_nulltest(args, cfg: RunConfig) -> int:
    model = load_model(args.model)
    lexicon = read_lexicon(args.lexicon, model.alphabet)
    res = null_test(model, lexicon, S=cfg.S, seed=cfg.seed,
                    max_len=cfg.max_len, threads=cfg.threads,
                    sample_size=args.sample_size)
    obs = ("no collision" if res.observed_R is NO_COLLISION
           else f"{res.observed_R:.5f} bits")
    print(f"observed R = {obs} over M = {res.M} words")
    mean = "n/a" if res.mean_R is None else f"{res.mean_R:.5f}"
    print(f"null: S = {res.S} lexicons, mean R = {mean}, "
          f"no-collision draws = {res.no_collision_count}")
    print(f"tails: p_left = {res.p_left:.6f} ({res.n_left} <=), "
          f"p_right = {res.p_right:.6f} ({res.n_right} >=)")
    verdict = "REJECT" if res.reject else "no rejection"
    print(f"{verdict} at two-sided level 0.01; direction: {res.direction}")
    if args.output:
        _write_json(args.output, {"config": cfg.to_dict(), **res.to_dict()})
    return 0


def cmd_enumerate(args, cfg: RunConfig) -> int:
    model = load_model(args.model)
    result = enumerate_support(model, cfg.delta, max_len=cfg.max_len,
                               node_budget=cfg.node_budget)
    acc = result.accumulators
    ordered = result.sorted_words()
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            for w, lp in ordered:
                fh.write(json.dumps({"form": w.to_str(model.alphabet),
                                     "log2_prob": lp}) + "\n")
    if args.summary:
        _write_json(args.summary, {"config": cfg.to_dict(), **acc.to_dict()})
    print(f"{acc.count} words with p >= {cfg.delta:g}; xi = {acc.xi:.9f}, "
          f"eta = {acc.eta:.6g}, length-capped branches: "
          f"{acc.truncated_by_length}")
    for w, lp in ordered[: args.top]:
        form = w.to_str(model.alphabet) if len(w) else "(empty word)"
        print(f"  {lp:12.6f}  {form}")
    return 0


def cmd_family_curves(args, cfg: RunConfig) -> int:
    try:
        ns = [int(x) for x in str(args.n).split(",")]
    except ValueError as exc:
        raise UsageError(f"bad --n: {exc}") from exc
    if args.step <= 0 or args.step > 1:
        raise UsageError("--step must lie in (0, 1]")
    n_steps = round(1.0 / args.step)
    rows = []
    for n in ns:
        for i in range(n_steps + 1):
            k = min(i * args.step, 1.0)
            dist = family_distribution(k, n)
            rows.append((k, n, finite_renyi(dist, 1.0),
                         finite_renyi(dist, 2.0)))
    out = open(args.output, "w", encoding="utf-8", newline="") \
        if args.output else sys.stdout
    try:
        writer = csv.writer(out)
        writer.writerow(["k", "n", "H1", "H2"])
        for k, n, h1, h2 in rows:
            writer.writerow([repr(float(k)), n, repr(h1), repr(h2)])
    finally:
        if args.output:
            out.close()
    if args.output:
        print(f"wrote {len(rows)} rows to {args.output}")
    return 0


def cmd_report(args, cfg: RunConfig) -> int:
    alphabet = Alphabet.load(args.alphabet)
    lexicon = read_lexicon(args.lexicon, alphabet)
    parts = read_split_manifest(args.manifest, alphabet)
    specs = []
    for item in args.model:
        name, sep, path = item.partition("=")
        if not sep or not name or not path:
            raise UsageError(f"--model expects NAME=PATH, got {item!r}")
        specs.append((name, path))

    r_obs = sample_renyi(lexicon)
    r_value = None if r_obs is NO_COLLISION else r_obs
    seeds = np.random.SeedSequence(cfg.seed).generate_state(2 * len(specs))

    rows = []
    for i, (name, path) in enumerate(specs):
        model = load_model(path)
        if model.alphabet.phones != alphabet.phones:
            raise DataError(f"model {name!r} uses a different alphabet")
        train_ce = float(np.mean(-model.score_words(parts["train"])))
        test_ce = float(np.mean(-model.score_words(parts["test"])))
        h1 = mc_shannon(model, cfg.mc_shannon_samples,
                        np.random.default_rng(int(seeds[2 * i])),
                        max_len=cfg.max_len)
        h2 = truncated_h2(model, delta=cfg.delta, max_len=cfg.max_len,
                          node_budget=cfg.node_budget)
        nt = null_test(model, lexicon, S=cfg.S, seed=int(seeds[2 * i + 1]),
                       max_len=cfg.max_len, threads=cfg.threads)
        nt_dict = {k: v for k, v in nt.to_dict().items()
                   if k not in ("samples_R", "histogram",
                                "histogram_bin_width")}
        rows.append({
            "model": name,
            "train_cross_entropy": train_ce,
            "test_cross_entropy": test_ce,
            "H1_mc": {"value": h1.value, "stderr": h1.stderr,
                      "n_samples": h1.n_samples,
                      "overflow_resamples": h1.overflow_resamples},
            "H2_truncated": {"value": h2.value,
                             "bound_width": h2.bound_width,
                             **h2.accumulators.to_dict()},
            "nulltest": nt_dict,
        })

    payload = {
        "config": cfg.to_dict(),
        "lexicon": {"M": lexicon.M, "R": r_value,
                    "no_collision": r_obs is NO_COLLISION},
        "rows": rows,
    }
    if args.output:
        _write_json(args.output, payload)

    r_text = "inf" if r_value is None else f"{r_value:.3f}"
    print(f"{'model':<12} {'train CE':>9} {'test CE':>9} {'H1':>8} "
          f"{'H2':>8} {'R(W)':>9}")
    for row in rows:
        star = "*" if row["nulltest"]["reject"] else ""
        print(f"{row['model']:<12} {row['train_cross_entropy']:>9.3f} "
              f"{row['test_cross_entropy']:>9.3f} "
              f"{row['H1_mc']['value']:>8.3f} "
              f"{row['H2_truncated']['value']:>8.3f} "
              f"{r_text + star:>9}")
    print("* observed homophony incompatible with the model at two-sided "
          "level 0.01")
    return 0


# --- parser construction ---------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, threads: bool = False) -> None:
    p.add_argument("--config", metavar="FILE",
                   help="JSON object whose keys override this command's flags")
    p.add_argument("--seed", type=int, default=0)
    if threads:
        p.add_argument("--threads", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lexent",
        description="Homophony and phonotactic entropy toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="filter a normalized TSV into a "
                       "canonical lexicon")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--alphabet", help="alphabet JSON; built from the data "
                   "when omitted")
    p.add_argument("--alphabet-out", help="write the alphabet used")
    p.add_argument("--report", help="write the ingest report JSON")
    p.add_argument("--mode", choices=("mono", "all"), default="mono")
    _add_common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("split", help="deterministic train/val/test split")
    p.add_argument("--lexicon", required=True)
    p.add_argument("--alphabet", required=True)
    p.add_argument("--output", required=True, help="manifest JSON path")
    p.add_argument("--ratios", default="0.8,0.1,0.1")
    p.add_argument("--split-unit", choices=("types", "entries"),
                   default="types")
    _add_common(p)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("train-ngram", help="train a smoothed n-gram model")
    p.add_argument("--alphabet", required=True)
    p.add_argument("--manifest", help="split manifest JSON")
    p.add_argument("--part", default="train",
                   choices=("train", "val", "test"))
    p.add_argument("--words", help="plain text file, one form per line")
    p.add_argument("--output", required=True)
    p.add_argument("--order", type=int, default=5)
    p.add_argument("--smoothing", type=float, default=0.01)
    _add_common(p)
    p.set_defaults(func=cmd_train_ngram)

    p = sub.add_parser("eval-lm", help="cross-entropy of a model on words")
    p.add_argument("--model", required=True)
    p.add_argument("--manifest")
    p.add_argument("--part", default="test", choices=("train", "val", "test"))
    p.add_argument("--words")
    p.add_argument("--per-word", help="write per-word log2 probabilities "
                   "(JSON lines)")
    p.add_argument("--output", help="write metrics JSON")
    _add_common(p)
    p.set_defaults(func=cmd_eval_lm)

    p = sub.add_parser("lexicon-entropy",
                       help="sample Rényi entropy of a lexicon")
    p.add_argument("--lexicon", required=True)
    p.add_argument("--alphabet", required=True)
    p.add_argument("--output")
    _add_common(p)
    p.set_defaults(func=cmd_lexicon_entropy)

    p = sub.add_parser("model-entropy", help="truncated collision entropy "
                       "with certificate, plus Monte Carlo Shannon entropy")
    p.add_argument("--model", required=True)
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    p.add_argument("--max-len", type=int, default=DEFAULT_MAX_LEN)
    p.add_argument("--node-budget", type=int, default=DEFAULT_NODE_BUDGET)
    p.add_argument("--mc-samples", type=int, default=100_000)
    p.add_argument("--skip-h1", action="store_true")
    p.add_argument("--output")
    _add_common(p)
    p.set_defaults(func=cmd_model_entropy)

    p = sub.add_parser("nulltest", help="Monte Carlo homophony null test")
    p.add_argument("--model", required=True)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--S", type=int, default=DEFAULT_S)
    p.add_argument("--max-len", type=int, default=DEFAULT_MAX_LEN)
    p.add_argument("--sample-size", type=int, default=None,
                   help="words per null lexicon (default: observed M)")
    p.add_argument("--output")
    _add_common(p, threads=True)
    p.set_defaults(func=cmd_nulltest)

    p = sub.add_parser("enumerate", help="enumerate all words above a "
                       "probability threshold")
    p.add_argument("--model", required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--max-len", type=int, default=DEFAULT_MAX_LEN)
    p.add_argument("--node-budget", type=int, default=DEFAULT_NODE_BUDGET)
    p.add_argument("--output", help="JSON-lines words, descending "
                   "probability")
    p.add_argument("--summary", help="accumulator summary JSON")
    p.add_argument("--top", type=int, default=10,
                   help="print the TOP most probable words")
    _add_common(p)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("family-curves", help="entropy curves for the "
                       "one-heavy-outcome family")
    p.add_argument("--n", default="9,99,999",
                   help="comma-separated tail sizes")
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--output", help="CSV path (stdout when omitted)")
    _add_common(p)
    p.set_defaults(func=cmd_family_curves)

    p = sub.add_parser("report", help="Table-shaped summary across models")
    p.add_argument("--lexicon", required=True)
    p.add_argument("--alphabet", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--model", action="append", required=True,
                   metavar="NAME=PATH")
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    p.add_argument("--max-len", type=int, default=DEFAULT_MAX_LEN)
    p.add_argument("--node-budget", type=int, default=DEFAULT_NODE_BUDGET)
    p.add_argument("--mc-samples", type=int, default=100_000)
    p.add_argument("--S", type=int, default=DEFAULT_S)
    p.add_argument("--output")
    _add_common(p, threads=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config_file(args)
        cfg = _run_config(args)
        return args.func(args, cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (DataError, WeightFileError, json.JSONDecodeError,
            FileNotFoundError, IsADirectoryError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
