"""Entropy computations: sample Rényi entropy of a lexicon, Rényi entropy of
finite distributions, truncated-support collision entropy with a certified
error bound, and a Monte Carlo Shannon estimate.

The collision entropy H2 of a phonotactic model lives on an infinite support,
so it is estimated over the truncated support W_delta = {w : p(w) >= delta}.
The estimate -log2(eta) with eta = sum of p(w)^2 over W_delta is an upper
bound on the true H2, and the gap is at most log2(1 + (1-xi)*delta/eta) with
xi the probability mass inside W_delta; both accumulators are exact outputs
of the enumeration, so the certificate is computable, not asymptotic.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import Lexicon, Wordform, logsumexp2, multiplicity_table
from .lm.base import FiniteDistribution, PhonotacticModel

DEFAULT_DELTA = 1e-8
DEFAULT_MAX_LEN = 50
DEFAULT_NODE_BUDGET = 50_000_000

_LN2 = math.log(2.0)


class NoCollision:
    """Distinguished result of sample_renyi when no two entries share a form.

    Deliberately not +infinity-as-a-float: consumers must decide how to order
    or report it.  Compares greater than every finite entropy value.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NoCollision"

    def __gt__(self, other):
        return not isinstance(other, NoCollision)

    def __ge__(self, other):
        return True

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return isinstance(other, NoCollision)


NO_COLLISION = NoCollision()


class SupportThresholdError(ValueError):
    """W_delta came out empty: no word reaches the probability threshold."""


class BudgetExceededError(RuntimeError):
    """Enumeration ran past its node budget (CLI maps this to exit code 4)."""

    def __init__(self, message, accumulators=None):
        super().__init__(message)
        self.accumulators = accumulators


# --- sample Rényi entropy of an observed lexicon -----------------------------


def renyi_from_multiplicities(counts, M: int):
    """-log2 of (observed homophone pairs / possible ordered pairs).

    ``counts`` holds the multiplicity of each distinct form; the number of
    ordered colliding pairs is sum c*(c-1), equivalent to the double sum over
    distinct entry indices but O(number of types).
    """
    if M < 2:
        raise ValueError("sample Rényi entropy needs at least 2 entries")
    collisions = 0
    for c in counts:
        collisions += int(c) * (int(c) - 1)
    if collisions == 0:
        return NO_COLLISION
    return -math.log2(collisions / (M * (M - 1))) + 0.0


def sample_renyi(lexicon: Lexicon):
    """Sample Rényi entropy of a lexicon in bits, or NO_COLLISION."""
    return renyi_from_multiplicities(
        multiplicity_table(lexicon).values(), lexicon.M
    )


# --- Rényi entropy of explicit finite distributions ---------------------------


def finite_renyi(dist: FiniteDistribution, alpha: float) -> float:
    """Rényi entropy of order alpha in bits; alpha=1 is Shannon, alpha=inf
    the min-entropy (surprisal of the most probable outcome)."""
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    lps = dist.log2_probs
    finite = lps[np.isfinite(lps)]
    if math.isinf(alpha):
        return float(-finite.max()) + 0.0
    if alpha == 1.0:
        return float(-np.sum((2.0 ** finite) * finite)) + 0.0
    return float(logsumexp2((alpha * finite).tolist()) / (1.0 - alpha)) + 0.0


def family_distribution(k: float, n: int) -> FiniteDistribution:
    """One outcome with mass k; the remaining 1-k spread uniformly over n."""
    if not 0.0 <= k <= 1.0:
        raise ValueError("k must lie in [0, 1]")
    if n < 1:
        raise ValueError("n must be >= 1")
    labels = ("x0",) + tuple(f"u{i}" for i in range(1, n + 1))
    probs = np.concatenate(([k], np.full(n, (1.0 - k) / n)))
    return FiniteDistribution.from_probs(labels, probs)


# --- truncated-support enumeration and collision entropy ----------------------


@dataclass(frozen=True)
class SupportAccumulators:
    """Mass bookkeeping for a truncated support.

    xi is the total probability inside W_delta and eta the total squared
    probability; both are accumulated in log domain and exponentiated once.
    eta_linear re-derives eta by compensated linear summation as a cross
    check.  truncated_by_length counts branches that were still above the
    threshold when they hit the length cap, so a nonzero value means W_delta
    may be incomplete for reasons the bound does not cover.
    """

    xi: float
    eta: float
    count: int
    delta: float
    truncated_by_length: int
    eta_linear: float
    eta_log2: float  # exact log-domain value of log2(eta); -inf when empty

    def to_dict(self) -> dict:
        return {
            "xi": self.xi,
            "eta": self.eta,
            "count": self.count,
            "delta": self.delta,
            "truncated_by_length": self.truncated_by_length,
        }


@dataclass(frozen=True)
class EnumerationResult:
    words: list  # (Wordform, log2 prob) in best-first discovery order
    accumulators: SupportAccumulators

    def sorted_words(self):
        return sorted(self.words, key=lambda pair: -pair[1])


@dataclass(frozen=True)
class EntropyEstimate:
    """Truncated collision entropy plus its certified upper-bound width:
    the true H2 lies in [value - bound_width, value]."""

    value: float
    bound_width: float
    accumulators: SupportAccumulators


def _make_accumulators(word_lps, delta, truncated_by_length) -> SupportAccumulators:
    count = len(word_lps)
    if count == 0:
        return SupportAccumulators(0.0, 0.0, 0, delta, truncated_by_length, 0.0,
                                   -math.inf)
    xi_log2 = logsumexp2(word_lps)
    eta_log2 = logsumexp2([2.0 * lp for lp in word_lps])
    eta = 2.0 ** eta_log2
    eta_linear = math.fsum((2.0 ** lp) ** 2 for lp in word_lps)
    if eta_linear > 0 and abs(eta - eta_linear) > 1e-9 * eta_linear:
        raise ArithmeticError(
            f"log-domain and linear eta disagree: {eta} vs {eta_linear}"
        )
    return SupportAccumulators(
        xi=2.0 ** xi_log2,
        eta=eta,
        count=count,
        delta=delta,
        truncated_by_length=truncated_by_length,
        eta_linear=eta_linear,
        eta_log2=eta_log2,
    )


def enumerate_support(
    model: PhonotacticModel,
    delta: float,
    max_len: int = DEFAULT_MAX_LEN,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> EnumerationResult:
    """All complete words with p(w) >= delta and length <= max_len.

    Best-first search over prefixes keyed on prefix log-probability.  A
    prefix with probability below delta can be pruned soundly: every
    conditional is at most 1, so no completion can climb back above the
    threshold.  Budget exhaustion raises; it is never a silent truncation.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie strictly between 0 and 1")
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    log_delta = math.log2(delta)
    eow = model.eow_out
    n_phones = model.alphabet.n_phones
    tiebreak = itertools.count()
    heap = [(-0.0, next(tiebreak), (), model.initial_state())]
    words: list[tuple[Wordform, float]] = []
    word_lps: list[float] = []
    truncated_by_length = 0
    pops = 0
    while heap:
        neg_lp, _, prefix, state = heapq.heappop(heap)
        lp = -neg_lp
        pops += 1
        if pops > node_budget:
            raise BudgetExceededError(
                f"node budget of {node_budget} expansions exceeded "
                f"(delta={delta}, {len(words)} words so far)",
                accumulators=_make_accumulators(word_lps, delta,
                                                truncated_by_length),
            )
        step_lps = model.next_log_probs(state)
        word_lp = lp + float(step_lps[eow])
        if word_lp >= log_delta:
            words.append((Wordform(prefix), word_lp))
            word_lps.append(word_lp)
        for i in range(n_phones):
            ext_lp = lp + float(step_lps[i])
            if ext_lp >= log_delta:
                if len(prefix) >= max_len:
                    truncated_by_length += 1
                else:
                    heapq.heappush(
                        heap,
                        (-ext_lp, next(tiebreak), prefix + (i,),
                         model.step(state, i)),
                    )
    return EnumerationResult(
        words=words,
        accumulators=_make_accumulators(word_lps, delta, truncated_by_length),
    )


def certificate_width(xi: float, eta: float, delta: float) -> float:
    """Width of the certified gap: log2(1 + (1-xi)*delta/eta) bits."""
    if not 0.0 <= xi <= 1.0 + 1e-12:
        raise ValueError(f"xi must lie in [0, 1], got {xi}")
    if eta <= 0.0:
        raise ValueError("eta must be positive")
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    outside = max(0.0, 1.0 - xi)
    return math.log1p(outside * delta / eta) / _LN2


def truncated_h2(
    model: PhonotacticModel,
    delta: float = DEFAULT_DELTA,
    max_len: int = DEFAULT_MAX_LEN,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> EntropyEstimate:
    """Collision entropy over the truncated support, with the bound width.

    The value is an upper bound on the model's true collision entropy and
    exceeds it by at most bound_width bits.
    """
    result = enumerate_support(model, delta, max_len=max_len,
                               node_budget=node_budget)
    acc = result.accumulators
    if acc.count == 0:
        raise SupportThresholdError(
            f"support threshold too high: no word has probability >= {delta}"
        )
    return EntropyEstimate(
        value=-acc.eta_log2,
        bound_width=certificate_width(min(acc.xi, 1.0), acc.eta, delta),
        accumulators=acc,
    )


def square_mass_bound_check(xs, delta: float):
    """Check sum(x^2) <= sum(x)*delta for values confined to [0, delta].

    Returns (sum_sq, bound, holds).  Equality is achieved when every x equals
    delta, which is the maximal configuration.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    xs = list(xs)
    for x in xs:
        if not 0.0 <= x <= delta:
            raise ValueError(f"value {x} outside [0, {delta}]")
    sum_sq = math.fsum(x * x for x in xs)
    bound = math.fsum(xs) * delta
    holds = sum_sq <= bound + 1e-15
    return sum_sq, bound, holds


# --- Monte Carlo Shannon entropy ----------------------------------------------


@dataclass(frozen=True)
class McShannonEstimate:
    value: float
    stderr: float
    n_samples: int
    overflow_resamples: int


def mc_shannon(
    model: PhonotacticModel,
    n_samples: int,
    rng: np.random.Generator,
    max_len: int = DEFAULT_MAX_LEN,
) -> McShannonEstimate:
    """Mean surprisal of i.i.d. ancestral samples: unbiased for the Shannon
    entropy of the model restricted to words terminating within max_len.
    Overflow draws are rejected and redrawn, never truncated."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    forms, overflows = model.sample_forms(rng, n_samples, max_len=max_len)
    lps = model.score_words([Wordform(f) for f in forms])
    surprisals = -lps
    mean = float(surprisals.mean())
    stderr = (
        float(surprisals.std(ddof=1) / math.sqrt(n_samples))
        if n_samples > 1
        else 0.0
    )
    return McShannonEstimate(
        value=mean,
        stderr=stderr,
        n_samples=n_samples,
        overflow_resamples=overflows,
    )
