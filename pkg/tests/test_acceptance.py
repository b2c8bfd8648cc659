"""Release gate: one test per core guarantee of the package.

Each test checks a single end-to-end claim at a fixed numeric tolerance,
times its own body against a runtime budget where one applies, and prints
exactly one machine-greppable verdict line of the form

    ACCEPTANCE PASS: <label> (<what was checked>)

even while pytest captures output.  A FAIL line is always followed by a
failing assert, so the suite cannot go green while a guarantee is broken.
"""

import csv
import json
import math
import time

import numpy as np

from lexent import (
    FiniteDistribution,
    Wordform,
    enumerate_support,
    finite_renyi,
    square_mass_bound_check,
    null_test,
    renyi_from_multiplicities,
    sample_lexicon,
    truncated_h2,
)
from lexent.cli import main
from lexent.lm.lstm import LstmModel

from conftest import brute_force_support, random_tabular_model
from test_lstm import ScalarOracle, zero_model


def _verdict(capsys, label, ok, detail):
    line = f"ACCEPTANCE {'PASS' if ok else 'FAIL'}: {label} ({detail})"
    with capsys.disabled():
        print(line, flush=True)
    assert ok, line


def _dist_of(support: dict) -> FiniteDistribution:
    return FiniteDistribution.from_probs(
        tuple(repr(w) for w in support), np.array(list(support.values()))
    )


def test_exhaustive_toy_enumeration_and_entropy(
    capsys, uniform_cap4_model, skewed_cap4_model
):
    """On fully enumerable toys the truncated collision entropy equals the
    exact one and the enumerator returns exactly the words above threshold."""
    budget = 1.0
    problems = []
    t0 = time.perf_counter()
    for name, model in (("uniform", uniform_cap4_model),
                        ("skewed", skewed_cap4_model)):
        exact = brute_force_support(model, max_len=10)
        if len(exact) != 31:
            problems.append(f"{name}: support has {len(exact)} words, not 31")
            continue
        # 1e-3 sits below every word probability, so nothing is truncated
        est = truncated_h2(model, delta=1e-3)
        h2 = finite_renyi(_dist_of(exact), 2.0)
        if abs(est.value - h2) > 1e-9:
            problems.append(f"{name}: |truncated - exact| = {abs(est.value - h2):.3g}")
        if est.accumulators.count != 31:
            problems.append(f"{name}: enumerated {est.accumulators.count} words")
        for delta in (0.3, 0.1, 0.01):
            got = {w.phones for w, _ in enumerate_support(model, delta).words}
            want = {w for w, p in exact.items() if p >= delta}
            if got != want:
                problems.append(
                    f"{name} delta={delta}: {len(got ^ want)} words differ"
                )
    elapsed = time.perf_counter() - t0
    if elapsed >= budget:
        problems.append(f"took {elapsed:.2f}s, budget {budget:.0f}s")
    _verdict(
        capsys,
        "exhaustive-toy enumeration",
        not problems,
        "; ".join(problems)
        or f"2 toys, 31 words each: H2 within 1e-9, supports exact at "
           f"delta 0.3/0.1/0.01, {elapsed:.2f}s < {budget:.0f}s",
    )


def test_truncation_certificate_contains_exact_entropy(capsys):
    """The certified interval [H2hat - width, H2hat] must contain the exact
    collision entropy on random fully enumerable models, for thresholds
    spanning tight to very loose truncation."""
    budget = 30.0
    n_models = 200
    rng = np.random.default_rng(20260818)
    violations = 0
    widths = []
    t0 = time.perf_counter()
    for _ in range(n_models):
        model = random_tabular_model(rng, n_phones=2, cap=5)
        exact = brute_force_support(model, max_len=5)
        h2_exact = -math.log2(math.fsum(p * p for p in exact.values()))
        p_max = max(exact.values())
        delta = p_max * 10.0 ** rng.uniform(-2.5, -0.05)
        est = truncated_h2(model, delta=delta)
        lo, hi = est.value - est.bound_width, est.value
        if not (lo - 1e-12 <= h2_exact <= hi + 1e-12):
            violations += 1
        widths.append(est.bound_width)
    elapsed = time.perf_counter() - t0
    ok = violations == 0 and elapsed < budget
    _verdict(
        capsys,
        "truncation certificate",
        ok,
        f"{n_models - violations}/{n_models} intervals contain the exact H2 "
        f"(median width {np.median(widths):.3g} bits), "
        f"{elapsed:.1f}s < {budget:.0f}s",
    )


def test_square_mass_bound_holds(capsys):
    """sum(x^2) <= sum(x)*delta for x in [0, delta], with equality when every
    x equals delta."""
    budget = 5.0
    n_instances = 10_000
    rng = np.random.default_rng(41)
    failures = 0
    t0 = time.perf_counter()
    for _ in range(n_instances):
        delta = 10.0 ** rng.uniform(-6.0, 0.0)
        xs = rng.uniform(0.0, delta, size=int(rng.integers(0, 40)))
        sum_sq, bound, holds = square_mass_bound_check(xs, delta)
        if not holds or sum_sq > bound * (1.0 + 1e-12) + 1e-300:
            failures += 1
    delta = 0.125
    sum_sq, bound, holds = square_mass_bound_check(np.full(23, delta), delta)
    equality_ok = holds and math.isclose(sum_sq, bound, rel_tol=1e-12)
    elapsed = time.perf_counter() - t0
    ok = failures == 0 and equality_ok and elapsed < budget
    _verdict(
        capsys,
        "square-mass bound",
        ok,
        f"{n_instances - failures}/{n_instances} random instances hold, "
        f"equality at the all-delta configuration: {equality_ok}, "
        f"{elapsed:.1f}s < {budget:.0f}s",
    )


def test_collision_estimator_consistency(capsys):
    """The pair-counting estimator converges to the distribution's collision
    entropy.  The 12-point target puts mass k on one outcome and (1-k)/11 on
    the rest, with k the positive root of 96k^2 - 16k - 3 = 0, which makes
    sum(p^2) = 1/8 and the collision entropy exactly 3 bits."""
    budget = 120.0
    k = (1.0 + math.sqrt(5.5)) / 12.0
    probs = np.array([k] + [(1.0 - k) / 11.0] * 11)
    dist = FiniteDistribution.from_probs(tuple(f"w{i}" for i in range(12)), probs)
    target = finite_renyi(dist, 2.0)
    problems = []
    if abs(target - 3.0) > 1e-12:
        problems.append(f"construction is off: H2 = {target!r}")
    t0 = time.perf_counter()
    mean_err = {}
    for m, tol in ((10_000, 0.15), (100_000, 0.05)):
        errs = []
        for seed in range(20):
            rng = np.random.default_rng(np.random.SeedSequence([9, m, seed]))
            counts = np.bincount(rng.choice(12, size=m, p=probs), minlength=12)
            r = renyi_from_multiplicities(counts, m)
            errs.append(abs(float(r) - 3.0))
        mean_err[m] = float(np.mean(errs))
        if mean_err[m] >= tol:
            problems.append(f"M={m}: mean |R - 3| = {mean_err[m]:.4f} >= {tol}")
    elapsed = time.perf_counter() - t0
    if elapsed >= budget:
        problems.append(f"took {elapsed:.1f}s, budget {budget:.0f}s")
    _verdict(
        capsys,
        "collision-estimator consistency",
        not problems,
        "; ".join(problems)
        or f"mean |R - 3| over 20 seeds: {mean_err[10_000]:.4f} < 0.15 at M=1e4, "
           f"{mean_err[100_000]:.4f} < 0.05 at M=1e5, {elapsed:.1f}s < {budget:.0f}s",
    )


def test_entropy_order_across_alphas(capsys):
    """Min-entropy <= collision entropy <= Shannon entropy on random
    distributions of every shape."""
    n_points = 10_000
    rng = np.random.default_rng(7)
    violations = 0
    t0 = time.perf_counter()
    for _ in range(n_points):
        d = int(rng.integers(2, 21))
        conc = float(rng.choice([0.3, 1.0, 5.0]))
        p = rng.dirichlet(np.full(d, conc))
        if (p <= 0.0).any():  # astronomically rare underflow guard
            p = (p + 1e-12) / (p.sum() + d * 1e-12)
        dist = FiniteDistribution.from_probs(tuple(range(d)), p)
        h_min = finite_renyi(dist, math.inf)
        h2 = finite_renyi(dist, 2.0)
        h1 = finite_renyi(dist, 1.0)
        if not (h_min <= h2 + 1e-12 and h2 <= h1 + 1e-12):
            violations += 1
    elapsed = time.perf_counter() - t0
    _verdict(
        capsys,
        "entropy ordering",
        violations == 0,
        f"{n_points - violations}/{n_points} simplex points satisfy "
        f"H_inf <= H2 <= H1 (dims 2..20), {elapsed:.1f}s",
    )


def test_null_test_calibration(capsys, toy_bigram):
    """Lexicons drawn from the model itself must almost never be rejected:
    at a nominal two-sided level of 0.01 the observed rejection rate over
    500 independent trials stays at or below 2 percent."""
    budget = 600.0
    trials, m_words, s_draws = 500, 500, 1000
    allowed = int(0.02 * trials)
    rejections = 0
    t0 = time.perf_counter()
    for trial in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence([777, trial]))
        lexicon, _ = sample_lexicon(toy_bigram, m_words, rng)
        result = null_test(toy_bigram, lexicon, S=s_draws, seed=trial)
        rejections += int(result.reject)
    elapsed = time.perf_counter() - t0
    ok = rejections <= allowed and elapsed < budget
    _verdict(
        capsys,
        "null-test calibration",
        ok,
        f"{rejections}/{trials} rejections (allowed {allowed}) at "
        f"M={m_words}, S={s_draws}, {elapsed:.0f}s < {budget:.0f}s",
    )


def test_bigram_hand_counted_conditionals(capsys, toy_bigram, ab_alphabet):
    """Every conditional of the two-word bigram fixture is a count-and-divide
    fraction small enough to verify by hand: (c + 0.01) / (total + 0.03)."""
    a_idx, b_idx, eow = 0, 1, 2
    p_bow = 2.0 ** np.asarray(toy_bigram.next_log_probs(toy_bigram.initial_state()))
    p_after_a = 2.0 ** np.asarray(toy_bigram.next_log_probs((a_idx,)))
    p_after_b = 2.0 ** np.asarray(toy_bigram.next_log_probs((b_idx,)))
    checks = [
        ("p(a|start)", p_bow[a_idx], 2.01 / 2.03),
        ("p(b|a)", p_after_a[b_idx], 1.01 / 2.03),
        ("p(end|a)", p_after_a[eow], 1.01 / 2.03),
        ("p(a|b)", p_after_b[a_idx], 0.01 / 1.03),
    ]
    lp = toy_bigram.log_prob(Wordform.from_str("a", ab_alphabet))
    lp_oracle = math.log2(2.01 / 2.03) + math.log2(1.01 / 2.03)
    checks.append(("log2 p('a')", lp, lp_oracle))
    problems = [
        f"{name}: {got!r} vs {want!r}"
        for name, got, want in checks
        if abs(got - want) > 1e-6
    ]
    # the hand fractions round to the familiar printed values
    assert round(2.01 / 2.03, 6) == 0.990148
    assert round(1.01 / 2.03, 6) == 0.497537
    assert round(0.01 / 1.03, 6) == 0.009709
    assert round(lp_oracle, 5) == -1.02141
    _verdict(
        capsys,
        "bigram hand counts",
        not problems,
        "; ".join(problems)
        or "4 conditionals and log2 p('a') match hand fractions to 1e-6",
    )


def test_lstm_forward_matches_hand_computation(capsys, data_dir):
    """The vectorized forward pass agrees with a scalar reimplementation read
    straight off the weight file, and zero weights give the uniform model."""
    obj = json.loads((data_dir / "tiny_lstm.json").read_text())
    model = LstmModel.load(data_dir / "tiny_lstm.json")
    oracle = ScalarOracle(obj)
    words = [(), (0,), (1,), (0, 1), (1, 0, 0), (0, 1, 0, 0, 1), (1,) * 7]
    worst = max(
        abs(model.log_prob(Wordform(w)) - oracle.log_prob(w)) for w in words
    )
    zm = zero_model(n_phones=2)
    lp0 = np.asarray(zm.next_log_probs(zm.initial_state()))
    lp1 = np.asarray(zm.next_log_probs(zm.step(zm.initial_state(), 0)))
    uniform_ok = (
        len(set(lp0.tolist())) == 1
        and len(set(lp1.tolist())) == 1
        and abs(lp0[0] + math.log2(3.0)) <= 1e-12
        and abs(lp1[0] + math.log2(3.0)) <= 1e-12
        and all(
            abs(zm.log_prob(Wordform(w)) - (len(w) + 1) * math.log2(1.0 / 3.0))
            <= 1e-12
            for w in [(), (0,), (1, 0, 1)]
        )
    )
    ok = worst <= 1e-6 and uniform_ok
    _verdict(
        capsys,
        "lstm forward pass",
        ok,
        f"max |model - scalar oracle| = {worst:.3g} <= 1e-6 over {len(words)} "
        f"words; zero weights uniform: {uniform_ok}",
    )


def test_family_curves_closed_forms(capsys, tmp_path):
    """The one-heavy-outcome family: H2 = -log2(k^2 + (1-k)^2/n) and
    H1 = -k*log2(k) - (1-k)*log2((1-k)/n), with H2 <= H1 everywhere."""
    out = tmp_path / "curves.csv"
    rc = main(["family-curves", "--output", str(out)])
    with out.open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    problems = []
    if rc != 0:
        problems.append(f"exit code {rc}")
    if len(rows) != 3 * 101:
        problems.append(f"{len(rows)} rows, expected 303")
    order_violations = sum(
        1 for r in rows if float(r["H2"]) > float(r["H1"]) + 1e-12
    )
    if order_violations:
        problems.append(f"H2 > H1 at {order_violations} grid points")
    target = [r for r in rows if float(r["k"]) == 0.5 and r["n"] == "99"]
    if len(target) != 1:
        problems.append("k=0.5, n=99 row missing")
    else:
        h1, h2 = float(target[0]["H1"]), float(target[0]["H2"])
        h2_oracle = -math.log2(0.25 + 0.25 / 99.0)
        h1_oracle = -0.5 * math.log2(0.5) - 0.5 * math.log2(0.5 / 99.0)
        if abs(h2 - h2_oracle) > 1e-9:
            problems.append(f"H2(0.5, 99) = {h2!r} vs {h2_oracle!r}")
        if abs(h1 - h1_oracle) > 1e-9:
            problems.append(f"H1(0.5, 99) = {h1!r} vs {h1_oracle!r}")
    _verdict(
        capsys,
        "family curves",
        not problems,
        "; ".join(problems)
        or f"303 grid rows, H2 <= H1 everywhere; at k=0.5, n=99: "
           f"H2 = {float(target[0]['H2']):.6f} and H1 = {float(target[0]['H1']):.6f} "
           f"match closed forms to 1e-9",
    )
