"""Ingestion of normalized lexicon tables and deterministic dataset splits.

The ingest input is a normalized TSV (UTF-8, no header) with columns:
orthography, phone transcription (space-separated symbols), morph status
(mono|multi), zero-derivation flag (0|1), lexeme id, part of speech.
Raw CELEX exports are mapped to this shape by scripts/celex_to_tsv.py so the
core pipeline never sees source-specific quirks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .core import (
    Alphabet,
    DataError,
    Lexicon,
    LexiconEntry,
    MorphStatus,
    Wordform,
)

SEPARATOR_CHARS = (" ", "-", "'")
MANIFEST_VERSION = 1


@dataclass(frozen=True)
class IngestReport:
    """Row accounting for one ingest run; every input row lands in exactly
    one bucket, so rows_read = kept + the sum of the dropped counts."""

    rows_read: int
    kept: int
    dropped_space_hyphen_apostrophe: int
    dropped_zero_derivation: int
    dropped_multimorphemic: int
    dropped_bad_symbol: int

    def __post_init__(self):
        total = (self.kept + self.dropped_space_hyphen_apostrophe
                 + self.dropped_zero_derivation + self.dropped_multimorphemic
                 + self.dropped_bad_symbol)
        if total != self.rows_read:
            raise ValueError(
                f"ingest accounting broken: {self.rows_read} read, "
                f"{total} accounted for"
            )

    def to_dict(self) -> dict:
        return {
            "rows_read": self.rows_read,
            "kept": self.kept,
            "dropped_space_hyphen_apostrophe":
                self.dropped_space_hyphen_apostrophe,
            "dropped_zero_derivation": self.dropped_zero_derivation,
            "dropped_multimorphemic": self.dropped_multimorphemic,
            "dropped_bad_symbol": self.dropped_bad_symbol,
        }


@dataclass(frozen=True)
class _Row:
    line_no: int
    orthography: str
    symbols: tuple[str, ...]
    morph: MorphStatus
    zero_derivation: bool
    lexeme_id: str
    pos: str


def _parse_rows(path) -> list[_Row]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) != 6:
                raise DataError(
                    f"{path}:{line_no}: expected 6 tab-separated columns, "
                    f"got {len(cols)}"
                )
            orth, transcription, morph, zero, lexeme_id, pos = cols
            if not orth:
                raise DataError(f"{path}:{line_no}: empty orthography")
            symbols = tuple(transcription.split())
            if not symbols:
                raise DataError(f"{path}:{line_no}: empty transcription")
            if morph == "mono":
                morph_status = MorphStatus.MONOMORPHEMIC
            elif morph == "multi":
                morph_status = MorphStatus.MULTIMORPHEMIC
            else:
                raise DataError(
                    f"{path}:{line_no}: morph status must be 'mono' or "
                    f"'multi', got {morph!r}"
                )
            if zero not in ("0", "1"):
                raise DataError(
                    f"{path}:{line_no}: zero-derivation flag must be '0' or "
                    f"'1', got {zero!r}"
                )
            if not lexeme_id:
                raise DataError(f"{path}:{line_no}: empty lexeme id")
            rows.append(_Row(line_no, orth, symbols, morph_status,
                             zero == "1", lexeme_id, pos))
    return rows


def build_alphabet(symbol_sequences) -> Alphabet:
    """Alphabet over the sorted union of the symbols that actually occur."""
    seen = set()
    for symbols in symbol_sequences:
        seen.update(symbols)
    if not seen:
        raise DataError("no phone symbols to build an alphabet from")
    return Alphabet(phones=tuple(sorted(seen)))


def ingest(
    raw_path,
    alphabet: Alphabet | None = None,
    mode: str = "mono",
) -> tuple[Lexicon, Alphabet, IngestReport]:
    """Filter a normalized TSV into a canonical lexicon.

    Filters, in counting order: orthography containing a space, hyphen, or
    apostrophe; zero-derivation forms; multimorphemic forms (mono mode only);
    transcriptions using a symbol outside the alphabet.  A row is counted
    against the first filter it trips, and the kept set is the same under
    any filter order.  Homophones (equal form, distinct lexeme ids) are all
    retained: they are the objects of study.

    With alphabet=None the alphabet is built from the rows surviving the
    first three filters, so no row can then trip the bad-symbol filter.
    Structurally broken rows are hard errors, never silent drops.
    """
    if mode not in ("mono", "all"):
        raise ValueError(f"mode must be 'mono' or 'all', got {mode!r}")
    rows = _parse_rows(raw_path)

    n_separator = 0
    n_zero = 0
    n_multi = 0
    survivors = []
    for row in rows:
        if any(ch in row.orthography for ch in SEPARATOR_CHARS):
            n_separator += 1
        elif row.zero_derivation:
            n_zero += 1
        elif mode == "mono" and row.morph is MorphStatus.MULTIMORPHEMIC:
            n_multi += 1
        else:
            survivors.append(row)

    if alphabet is None:
        alphabet = build_alphabet(row.symbols for row in survivors)

    n_bad_symbol = 0
    entries = []
    for row in survivors:
        try:
            phones = tuple(alphabet.index(s) for s in row.symbols)
        except KeyError:
            n_bad_symbol += 1
            continue
        entries.append(LexiconEntry(
            form=Wordform(phones),
            lexeme_id=row.lexeme_id,
            morph_status=row.morph,
            zero_derivation=row.zero_derivation,
            pos=row.pos,
        ))

    report = IngestReport(
        rows_read=len(rows),
        kept=len(entries),
        dropped_space_hyphen_apostrophe=n_separator,
        dropped_zero_derivation=n_zero,
        dropped_multimorphemic=n_multi,
        dropped_bad_symbol=n_bad_symbol,
    )
    return Lexicon(entries=tuple(entries)), alphabet, report


# --- deterministic splits ------------------------------------------------------


@dataclass(frozen=True)
class SplitSpec:
    seed: int = 0
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)
    unit: str = "types"  # "types" partitions unique forms; "entries" rows

    def __post_init__(self):
        if len(self.ratios) != 3 or any(r <= 0 for r in self.ratios):
            raise ValueError("ratios must be three positive numbers")
        if abs(sum(self.ratios) - 1.0) > 1e-9:
            raise ValueError("ratios must sum to 1")
        if self.unit not in ("types", "entries"):
            raise ValueError("unit must be 'types' or 'entries'")


def split(lexicon: Lexicon, spec: SplitSpec, alphabet: Alphabet):
    """Partition the lexicon into (train, val, test) lists of Wordform.

    The default unit is unique wordform types: every surface form lands in
    exactly one part, so an evaluation part never contains a form the model
    memorized verbatim from training, and homophone multiplicity cannot leak
    into the phonotactic model.  unit="entries" permutes rows instead, for
    sensitivity analysis; a form may then recur across parts.

    Items are sorted by transcription before the seeded permutation, so the
    split depends only on (content, seed), not on input order.
    """
    if lexicon.M == 0:
        raise ValueError("cannot split an empty lexicon")
    if spec.unit == "types":
        keyed = {w.to_str(alphabet): w for w in lexicon.forms()}
        items = [keyed[k] for k in sorted(keyed)]
    else:
        decorated = sorted(
            (e.form.to_str(alphabet), e.lexeme_id, n)
            for n, e in enumerate(lexicon.entries)
        )
        items = [lexicon.entries[n].form for _, _, n in decorated]
    n = len(items)
    perm = np.random.default_rng(spec.seed).permutation(n)
    n_train = int(spec.ratios[0] * n)
    n_val = int(spec.ratios[1] * n)
    train = [items[i] for i in perm[:n_train]]
    val = [items[i] for i in perm[n_train:n_train + n_val]]
    test = [items[i] for i in perm[n_train + n_val:]]
    return train, val, test


def write_split_manifest(path, alphabet: Alphabet, spec: SplitSpec,
                         train, val, test) -> None:
    """Manifest JSON: forms per part as space-joined symbol strings, plus
    the seed and ratios that produced them."""
    payload = {
        "version": MANIFEST_VERSION,
        "seed": spec.seed,
        "ratios": list(spec.ratios),
        "unit": spec.unit,
        "counts": {"train": len(train), "val": len(val), "test": len(test)},
        "train": [w.to_str(alphabet) for w in train],
        "val": [w.to_str(alphabet) for w in val],
        "test": [w.to_str(alphabet) for w in test],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def read_split_manifest(path, alphabet: Alphabet) -> dict:
    """Load a manifest back as {"train": [Wordform, ...], "val": ...,
    "test": ...} plus the stored metadata under "meta"."""
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(obj, dict) or obj.get("version") != MANIFEST_VERSION:
        raise DataError(f"{path}: not a version {MANIFEST_VERSION} manifest")
    out = {"meta": {k: obj.get(k) for k in
                    ("version", "seed", "ratios", "unit", "counts")}}
    for part in ("train", "val", "test"):
        forms = obj.get(part)
        if not isinstance(forms, list):
            raise DataError(f"{path}: missing part {part!r}")
        words = []
        for s in forms:
            if not s.split():
                raise DataError(f"{path}: empty form in part {part!r}")
            try:
                words.append(Wordform.from_str(s, alphabet))
            except KeyError as exc:
                raise DataError(
                    f"{path}: unknown symbol in part {part!r}: {exc}"
                ) from exc
        out[part] = words
    return out
