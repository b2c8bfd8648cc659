import math
from pathlib import Path

import numpy as np
import pytest

from lexent import Alphabet, TabularModel, Wordform, train_ngram

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def ab_alphabet() -> Alphabet:
    return Alphabet(("a", "b"))


def forced_termination_model(
    alphabet: Alphabet,
    step_probs: tuple[float, ...],
    cap: int,
) -> TabularModel:
    """Tabular toy whose conditionals depend only on prefix length and that
    must emit EOW at length ``cap``; its support is every string of length
    <= cap, so brute-force enumeration is exact."""
    P = alphabet.n_phones
    assert len(step_probs) == P + 1
    table = {}
    frontier = [()]
    for length in range(cap + 1):
        row = list(step_probs) if length < cap else [0.0] * P + [1.0]
        nxt = []
        for prefix in frontier:
            table[prefix] = row
            for i in range(P):
                nxt.append(prefix + (i,))
        frontier = nxt
    return TabularModel(alphabet, table)


@pytest.fixture(scope="session")
def uniform_cap4_model(ab_alphabet) -> TabularModel:
    """2 phones, p(a)=p(b)=p(EOW)=1/3 until forced EOW at length 4; exactly
    31 words, probabilities (1/3)**(len+1) below the cap and (1/3)**4 at it."""
    third = 1.0 / 3.0
    return forced_termination_model(ab_alphabet, (third, third, third), 4)


@pytest.fixture(scope="session")
def skewed_cap4_model(ab_alphabet) -> TabularModel:
    return forced_termination_model(ab_alphabet, (0.5, 0.3, 0.2), 4)


@pytest.fixture(scope="session")
def toy_bigram(ab_alphabet):
    """The hand-countable fixture: corpus {"a", "a b"}, order 2, Laplace
    0.01.  Every conditional is (c + 0.01) / (total + 0.03)."""
    words = [Wordform.from_str("a", ab_alphabet),
             Wordform.from_str("a b", ab_alphabet)]
    return train_ngram(words, order=2, smoothing=0.01, alphabet=ab_alphabet)


def brute_force_support(model, max_len: int):
    """All words up to max_len with their exact linear probabilities, by
    exhaustive recursion over prefixes; the oracle twin of the best-first
    enumerator (linear-domain products, no heap, no pruning)."""
    P = model.alphabet.n_phones
    eow = model.eow_out
    out = {}

    def rec(prefix, state, prob):
        probs = 2.0 ** np.asarray(model.next_log_probs(state), dtype=float)
        p_word = prob * float(probs[eow])
        if p_word > 0.0:
            out[prefix] = p_word
        if len(prefix) == max_len:
            return
        for i in range(P):
            p_ext = prob * float(probs[i])
            if p_ext > 0.0:
                rec(prefix + (i,), model.step(state, i), p_ext)

    rec((), model.initial_state(), 1.0)
    return out


def random_tabular_model(rng: np.random.Generator, n_phones: int = 2,
                         cap: int = 5) -> TabularModel:
    """Random fully-enumerable toy: tree-shaped conditionals, EOW forced at
    ``cap`` so the support is finite and brute-forceable."""
    phones = tuple(chr(ord("a") + i) for i in range(n_phones))
    alphabet = Alphabet(phones)
    table = {}
    frontier = [()]
    for length in range(cap + 1):
        nxt = []
        for prefix in frontier:
            if length < cap:
                # keep EOW mass bounded away from 0 so sampling terminates
                raw = rng.dirichlet(np.ones(n_phones + 1))
                row = (raw + 0.02) / (1.0 + 0.02 * (n_phones + 1))
            else:
                row = np.array([0.0] * n_phones + [1.0])
            table[prefix] = row
            for i in range(n_phones):
                nxt.append(prefix + (i,))
        frontier = nxt
    return TabularModel(alphabet, table)
