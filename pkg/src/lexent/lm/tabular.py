"""Explicit-table phonotactic model for toy analyses and tests.

Conditionals are looked up by the full consumed prefix, which makes it easy
to build tiny fully-enumerable distributions (e.g. forced termination at a
given length) that the search and entropy machinery can be checked against.
"""

from __future__ import annotations

import numpy as np

from ..core import Alphabet
from .base import PhonotacticModel


class TabularModel(PhonotacticModel):
    def __init__(self, alphabet: Alphabet, table: dict[tuple[int, ...], np.ndarray]):
        """``table`` maps a prefix (tuple of phone indices) to a probability
        row over the prediction space (phones then EOW), summing to 1."""
        self.alphabet = alphabet
        self.table = {
            ctx: np.asarray(row, dtype=np.float64) for ctx, row in table.items()
        }
        vocab = alphabet.n_phones + 1
        for ctx, row in self.table.items():
            if row.shape != (vocab,):
                raise ValueError(f"prefix {ctx}: row length {row.shape} != {vocab}")
            if abs(row.sum() - 1.0) > 1e-9:
                raise ValueError(f"prefix {ctx}: probabilities sum to {row.sum()}")
        self._logp = {}

    def initial_state(self) -> tuple[int, ...]:
        return ()

    def step(self, state, phone_index):
        return state + (phone_index,)

    def next_log_probs(self, state) -> np.ndarray:
        cached = self._logp.get(state)
        if cached is None:
            try:
                row = self.table[state]
            except KeyError:
                raise KeyError(f"no conditional row for prefix {state}") from None
            with np.errstate(divide="ignore"):
                cached = np.log2(row)
            self._logp[state] = cached
        return cached
