"""Phonotactic model contract: incremental next-phone distributions,
whole-word scoring, and ancestral sampling.

A model factors the probability of a wordform autoregressively: each step
conditions on the prefix consumed so far and emits a distribution over the
prediction space ``phones + EOW``.  The word probability is the product of
the per-step conditionals, including the final EOW step, which makes every
backend a proper distribution over the Kleene closure of the alphabet
(the zero-length word included).

Prediction arrays are indexed ``0 .. P-1`` for phones and ``P`` for EOW,
where ``P`` is the number of phones.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from ..core import EOW_SYMBOL, Alphabet, Wordform, logsumexp2

_NORMALIZATION_TOL = 1e-9


class Overflow:
    """Sampling ran past max_len without drawing EOW; a value, not an error."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Overflow"


OVERFLOW = Overflow()


@dataclass(frozen=True)
class FiniteDistribution:
    """A finite distribution carried as log2-probabilities per label."""

    labels: tuple[str, ...]
    log2_probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "log2_probs", np.asarray(self.log2_probs, dtype=np.float64)
        )
        if len(self.labels) != self.log2_probs.shape[0]:
            raise ValueError("labels and log2_probs lengths differ")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("duplicate labels in distribution")
        total = logsumexp2(self.log2_probs.tolist())
        if abs(total) > _NORMALIZATION_TOL:
            raise ValueError(f"distribution not normalized: logsumexp2 = {total}")

    @classmethod
    def from_probs(cls, labels, probs) -> "FiniteDistribution":
        p = np.asarray(probs, dtype=np.float64)
        if np.any(p < 0):
            raise ValueError("negative probability")
        with np.errstate(divide="ignore"):
            return cls(tuple(labels), np.log2(p))

    @property
    def probs(self) -> np.ndarray:
        return 2.0 ** self.log2_probs

    def __len__(self) -> int:
        return len(self.labels)


class PhonotacticModel(ABC):
    """Contract shared by the n-gram and LSTM backends.

    Models are immutable after training/loading; states are value-semantic,
    so holding onto one and stepping it twice forks the decoding branch.
    """

    alphabet: Alphabet

    @abstractmethod
    def initial_state(self):
        """State conditioned on the beginning-of-word context only."""

    @abstractmethod
    def step(self, state, phone_index: int):
        """Advance a state by one consumed phone; returns the new state."""

    @abstractmethod
    def next_log_probs(self, state) -> np.ndarray:
        """log2 conditionals over the prediction space (phones then EOW)."""

    # --- derived operations, shared by every backend ------------------------

    @property
    def eow_out(self) -> int:
        """Index of EOW in the prediction space."""
        return self.alphabet.n_phones

    def _check_word(self, w: Wordform) -> None:
        P = self.alphabet.n_phones
        for i in w.phones:
            if i >= P:
                raise ValueError(f"phone index {i} outside alphabet of size {P}")

    def next_distribution(self, state) -> FiniteDistribution:
        labels = self.alphabet.phones + (EOW_SYMBOL,)
        return FiniteDistribution(labels, self.next_log_probs(state))

    def log_prob(self, w: Wordform) -> float:
        """log2 p(w): the sum of stepwise conditionals plus the EOW step."""
        self._check_word(w)
        state = self.initial_state()
        total = 0.0
        for i in w.phones:
            total += float(self.next_log_probs(state)[i])
            state = self.step(state, i)
        total += float(self.next_log_probs(state)[self.eow_out])
        return total

    def score_words(self, words) -> np.ndarray:
        """log2 p(w) for each word; backends may override with batched math."""
        return np.array([self.log_prob(w) for w in words], dtype=np.float64)

    def sample_word(self, rng: np.random.Generator, max_len: int = 50):
        """One ancestral draw; returns a Wordform, or OVERFLOW if EOW was not
        reached within max_len phones."""
        if max_len < 1:
            raise ValueError("max_len must be >= 1")
        state = self.initial_state()
        phones: list[int] = []
        for _ in range(max_len + 1):
            probs = 2.0 ** self.next_log_probs(state)
            sym = int(np.searchsorted(np.cumsum(probs), rng.random(), side="right"))
            sym = min(sym, len(probs) - 1)
            if sym == self.eow_out:
                return Wordform(tuple(phones))
            if len(phones) == max_len:
                return OVERFLOW
            phones.append(sym)
            state = self.step(state, sym)
        return OVERFLOW

    def sample_forms(
        self, rng: np.random.Generator, count: int, max_len: int = 50
    ) -> tuple[list[tuple[int, ...]], int]:
        """Draw ``count`` terminating words as raw index tuples.

        Overflow draws are rejected and redrawn; the second return value is
        how many draws overflowed.  Backends override this with vectorized
        implementations; results remain exact ancestral samples either way.
        """
        out: list[tuple[int, ...]] = []
        overflows = 0
        attempts = 0
        limit = max(1000, 1000 * count)
        while len(out) < count:
            attempts += 1
            if attempts > limit:
                raise RuntimeError(
                    f"sampling stalled: {overflows} overflows in {attempts} draws; "
                    "the model may never emit EOW within max_len"
                )
            w = self.sample_word(rng, max_len=max_len)
            if w is OVERFLOW:
                overflows += 1
            else:
                out.append(w.phones)
        return out, overflows

    def cross_entropy(self, words) -> float:
        """Mean of -log2 p(w) over words, in bits per word."""
        if not words:
            raise ValueError("cross_entropy over an empty word list")
        return float(-np.mean(self.score_words(words)))

    def cross_entropy_per_phone(self, words) -> float:
        """Total bits over total prediction steps (EOW steps included)."""
        if not words:
            raise ValueError("cross_entropy over an empty word list")
        total_bits = -float(np.sum(self.score_words(words)))
        steps = sum(len(w) + 1 for w in words)
        return total_bits / steps


def categorical_rows(rng: np.random.Generator, probs: np.ndarray) -> np.ndarray:
    """Vectorized categorical draw: one sample per row of ``probs``."""
    cdf = np.cumsum(probs, axis=1)
    u = rng.random(probs.shape[0])
    idx = (cdf < u[:, None]).sum(axis=1)
    return np.minimum(idx, probs.shape[1] - 1)
