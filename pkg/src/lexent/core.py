"""Shared domain types and log-domain arithmetic.

Conventions fixed here and inherited by every other module:

* all entropies, surprisals and cross-entropies are in bits (log base 2);
* probabilities travel in log2 domain, linear values appear only in files;
* a wordform is a sequence of phone indices over a fixed alphabet, and two
  wordforms are homophones iff their index sequences are equal.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable

BOW_SYMBOL = "<bow>"
EOW_SYMBOL = "<eow>"


class DataError(ValueError):
    """Malformed or inconsistent input data (CLI maps this to exit code 3)."""


@dataclass(frozen=True)
class Alphabet:
    """Ordered phone inventory plus the two reserved boundary symbols.

    Phones occupy indices ``0 .. len(phones)-1``; the beginning-of-word
    marker sits at ``len(phones)`` and end-of-word at ``len(phones)+1``.
    Phone symbols are opaque tokens; no phonetic interpretation is applied.
    """

    phones: tuple[str, ...]

    def __post_init__(self):
        if not self.phones:
            raise DataError("alphabet needs at least one phone symbol")
        if len(set(self.phones)) != len(self.phones):
            raise DataError("duplicate phone symbols in alphabet")
        if BOW_SYMBOL in self.phones or EOW_SYMBOL in self.phones:
            raise DataError(f"{BOW_SYMBOL!r}/{EOW_SYMBOL!r} are reserved symbols")
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.phones)})

    @property
    def n_phones(self) -> int:
        return len(self.phones)

    @property
    def bow_index(self) -> int:
        return len(self.phones)

    @property
    def eow_index(self) -> int:
        return len(self.phones) + 1

    def index(self, symbol: str) -> int:
        if symbol == BOW_SYMBOL:
            return self.bow_index
        if symbol == EOW_SYMBOL:
            return self.eow_index
        try:
            return self._index[symbol]
        except KeyError:
            raise KeyError(f"unknown phone symbol {symbol!r}") from None

    def symbol(self, index: int) -> str:
        if 0 <= index < len(self.phones):
            return self.phones[index]
        if index == self.bow_index:
            return BOW_SYMBOL
        if index == self.eow_index:
            return EOW_SYMBOL
        raise IndexError(f"alphabet index {index} out of range")

    def save(self, path) -> None:
        Path(path).write_text(json.dumps({"phones": list(self.phones)}) + "\n")

    @classmethod
    def load(cls, path) -> "Alphabet":
        obj = json.loads(Path(path).read_text())
        if not isinstance(obj, dict) or "phones" not in obj:
            raise DataError(f"{path}: not an alphabet file (missing 'phones')")
        return cls(tuple(obj["phones"]))


@dataclass(frozen=True, order=True)
class Wordform:
    """A sequence of phone indices; equality of sequences defines homophony.

    The model support is the Kleene closure of the phone inventory, so the
    zero-length form is representable (it carries positive probability under
    any smoothed autoregressive model).  Ingested lexicons never contain it.
    """

    phones: tuple[int, ...]

    def __post_init__(self):
        if any((not isinstance(i, int)) or i < 0 for i in self.phones):
            raise ValueError("wordform indices must be non-negative integers")

    def __len__(self) -> int:
        return len(self.phones)

    def to_str(self, alphabet: Alphabet) -> str:
        return " ".join(alphabet.symbol(i) for i in self.phones)

    @classmethod
    def from_str(cls, text: str, alphabet: Alphabet) -> "Wordform":
        return cls(tuple(alphabet.index(s) for s in text.split()))


class MorphStatus(Enum):
    MONOMORPHEMIC = "mono"
    MULTIMORPHEMIC = "multi"


@dataclass(frozen=True)
class LexiconEntry:
    form: Wordform
    lexeme_id: str
    morph_status: MorphStatus = MorphStatus.MONOMORPHEMIC
    zero_derivation: bool = False
    pos: str | None = None

    def __post_init__(self):
        if not self.lexeme_id:
            raise DataError("lexeme_id must be non-empty")


@dataclass(frozen=True)
class Lexicon:
    """A multiset of lexeme-tagged wordforms; entries with equal forms but
    distinct lexeme ids are the homophones."""

    entries: tuple[LexiconEntry, ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))

    @property
    def M(self) -> int:
        return len(self.entries)

    def forms(self) -> list[Wordform]:
        return [e.form for e in self.entries]

    @classmethod
    def from_forms(cls, forms: Iterable[Wordform], id_prefix: str = "w") -> "Lexicon":
        """Wrap bare forms as entries with synthetic, distinct lexeme ids."""
        entries = tuple(
            LexiconEntry(form=f, lexeme_id=f"{id_prefix}{i:06d}")
            for i, f in enumerate(forms)
        )
        return cls(entries)


def multiplicity_table(lexicon: Lexicon) -> dict[Wordform, int]:
    """Count how many lexicon entries share each distinct form."""
    return dict(Counter(e.form for e in lexicon.entries))


def logsumexp2(values) -> float:
    """log2(sum(2**v)) without underflow; values may be a list or array."""
    vs = list(values)
    if not vs:
        raise ValueError("logsumexp2 of an empty list")
    m = max(vs)
    if m == -math.inf:
        return -math.inf
    return m + math.log2(math.fsum(2.0 ** (v - m) for v in vs))


# --- canonical lexicon file (JSON-lines, one entry per line) ---------------


def write_lexicon(lexicon: Lexicon, path, alphabet: Alphabet) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for e in lexicon.entries:
            rec = {
                "form": e.form.to_str(alphabet),
                "lexeme_id": e.lexeme_id,
                "morph": e.morph_status.value,
                "zero_deriv": e.zero_derivation,
                "pos": e.pos,
            }
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def read_lexicon(path, alphabet: Alphabet) -> Lexicon:
    entries = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                entries.append(
                    LexiconEntry(
                        form=Wordform.from_str(rec["form"], alphabet),
                        lexeme_id=rec["lexeme_id"],
                        morph_status=MorphStatus(rec.get("morph", "mono")),
                        zero_derivation=bool(rec.get("zero_deriv", False)),
                        pos=rec.get("pos"),
                    )
                )
            except (KeyError, ValueError) as exc:
                raise DataError(f"{path}:{lineno}: bad lexicon record: {exc}") from exc
    return Lexicon(tuple(entries))
