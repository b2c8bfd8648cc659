"""Laplace-smoothed n-gram phonotactic model.

Conditionals are ``p(x|c) = (count(c,x) + lam) / (total(c) + lam*|V|)`` over
the prediction vocabulary ``V = phones + EOW``.  Contexts are the last
``order-1`` consumed symbols, padded on the left with BOW; EOW terminates a
word and never appears inside a context.  A context with no observations
falls back to the exact uniform distribution, the natural limit of the
smoothing formula at ``total(c) = 0``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..core import Alphabet, DataError, Wordform
from .base import PhonotacticModel, categorical_rows

FILE_VERSION = 1


class NGramModel(PhonotacticModel):
    def __init__(self, alphabet: Alphabet, order: int, smoothing: float,
                 counts: dict[tuple[int, ...], np.ndarray]):
        if order < 1:
            raise ValueError("order must be >= 1")
        if smoothing <= 0:
            raise ValueError("smoothing strength must be > 0")
        self.alphabet = alphabet
        self.order = order
        self.smoothing = smoothing
        self.counts = counts
        self._vocab = alphabet.n_phones + 1  # phones + EOW
        self._uniform_logp = np.full(self._vocab, -np.log2(self._vocab))
        self._logp_cache: dict[tuple[int, ...], np.ndarray] = {}
        self._cdf_cache: dict[int, np.ndarray] = {}
        # context symbols are phones or BOW
        self._ctx_base = alphabet.n_phones + 1
        self._ctx_mod = self._ctx_base ** (order - 1)

    # --- PhonotacticModel interface -----------------------------------------

    def initial_state(self) -> tuple[int, ...]:
        return (self.alphabet.bow_index,) * (self.order - 1)

    def step(self, state: tuple[int, ...], phone_index: int) -> tuple[int, ...]:
        if self.order == 1:
            return ()
        return state[1:] + (phone_index,)

    def next_log_probs(self, state: tuple[int, ...]) -> np.ndarray:
        cached = self._logp_cache.get(state)
        if cached is None:
            cached = np.log2(self._cond_probs(state))
            self._logp_cache[state] = cached
        return cached

    # --- conditionals --------------------------------------------------------

    def _cond_probs(self, ctx: tuple[int, ...]) -> np.ndarray:
        c = self.counts.get(ctx)
        if c is None:
            return np.full(self._vocab, 1.0 / self._vocab)
        total = float(c.sum())
        return (c + self.smoothing) / (total + self.smoothing * self._vocab)

    # --- vectorized ancestral sampling ---------------------------------------

    def _encode_ctx(self, ctx: tuple[int, ...]) -> int:
        code = 0
        for s in ctx:
            code = code * self._ctx_base + min(s, self.alphabet.bow_index)
        return code

    def _decode_ctx(self, code: int) -> tuple[int, ...]:
        out = []
        for _ in range(self.order - 1):
            code, r = divmod(code, self._ctx_base)
            out.append(int(r))
        return tuple(reversed(out))

    def _cdf_for_code(self, code: int) -> np.ndarray:
        cdf = self._cdf_cache.get(code)
        if cdf is None:
            cdf = np.cumsum(self._cond_probs(self._decode_ctx(code)))
            self._cdf_cache[code] = cdf
        return cdf

    def sample_forms(self, rng, count, max_len=50):
        out: list[tuple[int, ...]] = []
        overflows = 0
        need = count
        rounds = 0
        while need > 0:
            rounds += 1
            if rounds > 200:
                raise RuntimeError(
                    f"sampling stalled after {overflows} overflow draws; "
                    "the model may never emit EOW within max_len"
                )
            words, ok = self._sample_batch(rng, need, max_len)
            out.extend(w for w, good in zip(words, ok) if good)
            overflows += int(len(words) - int(ok.sum()))
            need = count - len(out)
        return out, overflows

    def _sample_batch(self, rng, batch, max_len):
        """One vectorized round: draw ``batch`` words in lockstep by grouping
        active rows on their encoded context."""
        eow = self.alphabet.n_phones
        ctx0 = self._encode_ctx(self.initial_state())
        codes = np.full(batch, ctx0, dtype=np.int64)
        mat = np.full((batch, max_len), -1, dtype=np.int16)
        lens = np.full(batch, max_len, dtype=np.int64)  # overflow rows keep max_len
        active = np.arange(batch)
        finished = np.zeros(batch, dtype=bool)
        for t in range(max_len + 1):
            if active.size == 0:
                break
            draws = np.empty(active.size, dtype=np.int64)
            ctx_codes = codes[active]
            for code in np.unique(ctx_codes):
                sel = ctx_codes == code
                cdf = self._cdf_for_code(int(code))
                u = rng.random(int(sel.sum()))
                draws[sel] = np.minimum(
                    np.searchsorted(cdf, u, side="right"), self._vocab - 1
                )
            done = draws == eow
            finished[active[done]] = True
            lens[active[done]] = t
            cont = active[~done]
            if t == max_len:
                break  # still-active rows overflow
            mat[cont, t] = draws[~done]
            codes[cont] = (codes[cont] * self._ctx_base + draws[~done]) % self._ctx_mod
            active = cont
        used = int(lens.max(initial=0))
        rows = mat[:, :used].tolist()
        words = [tuple(r[:n]) for r, n in zip(rows, lens.tolist())]
        return words, finished

    # --- persistence ----------------------------------------------------------

    def save(self, path) -> None:
        obj = {
            "version": FILE_VERSION,
            "kind": "ngram",
            "order": self.order,
            "smoothing": self.smoothing,
            "alphabet": {"phones": list(self.alphabet.phones)},
            "counts": {
                ",".join(map(str, ctx)): arr.tolist()
                for ctx, arr in sorted(self.counts.items())
            },
        }
        Path(path).write_text(json.dumps(obj) + "\n")

    @classmethod
    def load(cls, path) -> "NGramModel":
        obj = json.loads(Path(path).read_text())
        if obj.get("kind") != "ngram":
            raise DataError(f"{path}: not an n-gram model file")
        if obj.get("version") != FILE_VERSION:
            raise DataError(f"{path}: unsupported n-gram file version {obj.get('version')!r}")
        alphabet = Alphabet(tuple(obj["alphabet"]["phones"]))
        counts = {
            tuple(int(x) for x in key.split(",")) if key else ():
                np.asarray(val, dtype=np.int64)
            for key, val in obj["counts"].items()
        }
        return cls(alphabet, int(obj["order"]), float(obj["smoothing"]), counts)


def train_ngram(words, order: int = 5, smoothing: float = 0.01,
                alphabet: Alphabet | None = None) -> NGramModel:
    """Count-and-smooth estimation from a list of Wordforms."""
    if not words:
        raise ValueError("cannot train on an empty word list")
    if alphabet is None:
        raise ValueError("alphabet is required")
    P = alphabet.n_phones
    vocab = P + 1
    eow = P
    counts: dict[tuple[int, ...], np.ndarray] = {}

    def bump(ctx: tuple[int, ...], sym: int) -> None:
        arr = counts.get(ctx)
        if arr is None:
            arr = np.zeros(vocab, dtype=np.int64)
            counts[ctx] = arr
        arr[sym] += 1

    init = (alphabet.bow_index,) * (order - 1)
    for w in words:
        if not isinstance(w, Wordform):
            raise TypeError("train_ngram expects Wordform instances")
        ctx = init
        for i in w.phones:
            if i >= P:
                raise ValueError(f"phone index {i} outside alphabet of size {P}")
            bump(ctx, i)
            ctx = ctx[1:] + (i,) if order > 1 else ()
        bump(ctx, eow)
    return NGramModel(alphabet, order, smoothing, counts)
