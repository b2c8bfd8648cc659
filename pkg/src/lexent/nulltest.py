"""Monte Carlo null test: is the homophony of an observed lexicon compatible
with i.i.d. draws from a phonotactic model?

S synthetic lexicons of the observed size are drawn from the model, the
sample Rényi entropy R is computed for each, and the observed R is placed in
that null distribution with add-one smoothed two-sided tail probabilities.
Ties count in both tails.  A no-collision outcome orders above every finite
entropy, since it reports strictly fewer homophone pairs than any colliding
lexicon of the same size.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import Lexicon, Wordform
from .entropy import NO_COLLISION, renyi_from_multiplicities, sample_renyi
from .lm.base import PhonotacticModel

DEFAULT_S = 1000
REJECT_LEVEL = 0.005  # per tail; two-sided level 0.01


def sample_lexicon(
    model: PhonotacticModel,
    M: int,
    rng: np.random.Generator,
    max_len: int = 50,
    id_prefix: str = "sample",
) -> tuple[Lexicon, int]:
    """Draw M words i.i.d. from the model as a synthetic lexicon.

    Each draw gets its own lexeme id: the draws are tokens, and any shared
    forms among them are exactly the collisions the null test measures.
    Returns the lexicon and the number of overflow draws that were rejected
    and redrawn."""
    if M < 1:
        raise ValueError("M must be >= 1")
    forms, overflows = model.sample_forms(rng, M, max_len=max_len)
    lexicon = Lexicon.from_forms([Wordform(f) for f in forms],
                                 id_prefix=id_prefix)
    return lexicon, overflows


def _chunk_stats(model, children, M, max_len):
    """R for each seed child; no-collision encoded as +inf for transport."""
    out = []
    overflows = 0
    for child in children:
        rng = np.random.default_rng(child)
        forms, n_over = model.sample_forms(rng, M, max_len=max_len)
        overflows += n_over
        r = renyi_from_multiplicities(Counter(forms).values(), M)
        out.append(math.inf if r is NO_COLLISION else r)
    return out, overflows


@dataclass(frozen=True)
class NullTestResult:
    """Observed statistic, null samples, and the two-sided decision.

    samples_R holds one value per synthetic lexicon, with +inf encoding a
    no-collision draw; no_collision_count says how many those are.  mean_R
    averages the finite samples only (None when there are none).  p_left is
    the add-one smoothed share of samples <= the observed value, p_right the
    share >=; ties land in both tails.  direction is "none" without a
    rejection; a rejected lexicon sits below the null mean (more homophony
    than phonotactics alone predicts, "favors_homophony") or above it
    ("against_homophony").
    """

    observed_R: object  # float or NO_COLLISION
    samples_R: tuple
    S: int
    M: int
    seed: int
    max_len: int
    p_left: float
    p_right: float
    n_left: int
    n_right: int
    reject: bool
    direction: str  # "favors_homophony" | "against_homophony" | "none"
    mean_R: float | None
    no_collision_count: int
    overflow_resamples: int

    def histogram(self, bin_width: float = 0.05):
        """Counts of finite null samples in [i*w, (i+1)*w) bins, as a list of
        (bin_left_edge, count) pairs for populated bins, ascending."""
        if bin_width <= 0:
            raise ValueError("bin_width must be positive")
        finite = [s for s in self.samples_R if math.isfinite(s)]
        if not finite:
            return []
        bins = Counter(math.floor(s / bin_width) for s in finite)
        return [(i * bin_width, bins[i]) for i in sorted(bins)]

    def to_dict(self) -> dict:
        return {
            "observed_R": None if self.observed_R is NO_COLLISION
            else self.observed_R,
            "observed_no_collision": self.observed_R is NO_COLLISION,
            "S": self.S,
            "M": self.M,
            "seed": self.seed,
            "max_len": self.max_len,
            "p_left": self.p_left,
            "p_right": self.p_right,
            "n_left": self.n_left,
            "n_right": self.n_right,
            "reject": self.reject,
            "direction": self.direction,
            "mean_R": self.mean_R,
            "no_collision_count": self.no_collision_count,
            "samples_R": [None if math.isinf(s) else s
                          for s in self.samples_R],
            "overflow_resamples": self.overflow_resamples,
            "histogram_bin_width": 0.05,
            "histogram": [[edge, count] for edge, count in self.histogram()],
        }


def null_test(
    model: PhonotacticModel,
    lexicon: Lexicon,
    S: int = DEFAULT_S,
    seed: int = 0,
    max_len: int = 50,
    threads: int = 1,
    sample_size: int | None = None,
) -> NullTestResult:
    """Two-sided Monte Carlo test of the observed sample Rényi entropy.

    Null lexicons have sample_size words (default: the observed M).  Seeding
    is schedule independent: lexicon i always gets the i-th spawned child of
    the root seed, so serial and parallel runs agree exactly.
    """
    if S < 1:
        raise ValueError("S must be >= 1")
    observed = sample_renyi(lexicon)
    M = lexicon.M if sample_size is None else sample_size
    if M < 2:
        raise ValueError("sample_size must be >= 2")
    children = np.random.SeedSequence(seed).spawn(S)
    if threads > 1 and S > 1:
        n_chunks = min(threads, S)
        bounds = np.linspace(0, S, n_chunks + 1).astype(int)
        with ProcessPoolExecutor(max_workers=n_chunks) as pool:
            futures = [
                pool.submit(_chunk_stats, model,
                            children[bounds[j]:bounds[j + 1]], M, max_len)
                for j in range(n_chunks)
            ]
            parts = [f.result() for f in futures]
        samples = [r for part, _ in parts for r in part]
        overflows = sum(n for _, n in parts)
    else:
        samples, overflows = _chunk_stats(model, children, M, max_len)

    obs_f = math.inf if observed is NO_COLLISION else observed
    n_left = sum(1 for s in samples if s <= obs_f)
    n_right = sum(1 for s in samples if s >= obs_f)
    p_left = (n_left + 1) / (S + 1)
    p_right = (n_right + 1) / (S + 1)
    reject = min(p_left, p_right) < REJECT_LEVEL

    finite = [s for s in samples if math.isfinite(s)]
    mean_R = float(np.mean(finite)) if finite else None
    mean_f = mean_R if mean_R is not None else math.inf
    if reject and obs_f < mean_f:
        direction = "favors_homophony"
    elif reject and obs_f > mean_f:
        direction = "against_homophony"
    else:
        direction = "none"

    return NullTestResult(
        observed_R=observed,
        samples_R=tuple(samples),
        S=S,
        M=M,
        seed=seed,
        max_len=max_len,
        p_left=p_left,
        p_right=p_right,
        n_left=n_left,
        n_right=n_right,
        reject=reject,
        direction=direction,
        mean_R=mean_R,
        no_collision_count=sum(1 for s in samples if math.isinf(s)),
        overflow_resamples=overflows,
    )
