"""Monte Carlo null test: decision logic, tails, seeding, and transport.

The directional cases use degenerate models where the null distribution is
known exactly (a point mass, or a space so large that collisions are
practically impossible), so the expected p-values are arithmetic, not
simulation artifacts.
"""

import json
import math

import numpy as np
import pytest

from lexent import NO_COLLISION, Lexicon, Wordform, null_test
from lexent.nulltest import sample_lexicon

from conftest import forced_termination_model


def lex_of(*texts):
    forms = [Wordform(tuple({"a": 0, "b": 1}[c] for c in t)) for t in texts]
    return Lexicon.from_forms(forms)


@pytest.fixture(scope="module")
def point_mass_model(ab_alphabet):
    return forced_termination_model(ab_alphabet, (0.0, 0.0, 1.0), 3)


@pytest.fixture(scope="module")
def birthday_model(ab_alphabet):
    # Uniform over the 2**20 words of length exactly 20: collisions among a
    # handful of draws are practically impossible.
    return forced_termination_model(ab_alphabet, (0.5, 0.5, 0.0), 20)


class TestDecisionLogic:
    def test_distinct_lexicon_under_point_mass_rejects_right(
        self, point_mass_model
    ):
        lexicon = lex_of("a", "b", "ab", "ba", "aa")
        res = null_test(point_mass_model, lexicon, S=1000, seed=0)
        assert res.observed_R is NO_COLLISION
        # Every null lexicon is five copies of the same word: R == 0.
        assert all(s == 0.0 for s in res.samples_R)
        assert res.n_right == 0
        assert res.p_right == pytest.approx(1 / 1001)
        assert res.p_left == 1.0
        assert res.reject
        assert res.direction == "against_homophony"

    def test_collapsed_lexicon_under_rich_model_rejects_left(
        self, birthday_model
    ):
        # S must push the add-one floor 1/(S+1) below the 0.005 tail level.
        lexicon = lex_of("a", "a", "a", "a", "a")
        res = null_test(birthday_model, lexicon, S=250, seed=1)
        assert res.observed_R == 0.0
        assert math.copysign(1.0, res.observed_R) == 1.0
        assert res.no_collision_count == 250
        assert res.p_left == pytest.approx(1 / 251)
        assert res.reject
        assert res.direction == "favors_homophony"
        assert res.mean_R is None

    def test_matched_model_and_lexicon_do_not_reject(self, point_mass_model):
        lexicon = lex_of("", "", "", "", "")
        res = null_test(point_mass_model, lexicon, S=200, seed=2)
        assert res.observed_R == 0.0
        assert res.p_left == 1.0 and res.p_right == 1.0
        assert not res.reject
        assert res.direction == "none"

    def test_direction_is_none_without_rejection(self, toy_bigram):
        lexicon, _ = sample_lexicon(toy_bigram, 40, np.random.default_rng(3))
        res = null_test(toy_bigram, lexicon, S=150, seed=4)
        if not res.reject:
            assert res.direction == "none"
        else:
            assert res.direction in ("favors_homophony", "against_homophony")

    def test_tails_overlap_from_add_one_smoothing(self, toy_bigram):
        lexicon, _ = sample_lexicon(toy_bigram, 30, np.random.default_rng(5))
        res = null_test(toy_bigram, lexicon, S=99, seed=6)
        assert 0.0 < res.p_left <= 1.0
        assert 0.0 < res.p_right <= 1.0
        # Ties fall in both tails, so the tail shares overlap.
        assert res.p_left + res.p_right > 1.0
        assert res.n_left + res.n_right >= res.S


class TestSeedingAndParallelism:
    def test_bit_for_bit_reproducible(self, toy_bigram):
        lexicon, _ = sample_lexicon(toy_bigram, 25, np.random.default_rng(7))
        a = null_test(toy_bigram, lexicon, S=60, seed=11)
        b = null_test(toy_bigram, lexicon, S=60, seed=11)
        assert a == b

    def test_seed_changes_samples(self, toy_bigram):
        lexicon, _ = sample_lexicon(toy_bigram, 25, np.random.default_rng(7))
        a = null_test(toy_bigram, lexicon, S=60, seed=11)
        b = null_test(toy_bigram, lexicon, S=60, seed=12)
        assert a.samples_R != b.samples_R

    def test_parallel_equals_serial(self, toy_bigram):
        lexicon, _ = sample_lexicon(toy_bigram, 30, np.random.default_rng(8))
        serial = null_test(toy_bigram, lexicon, S=40, seed=13, threads=1)
        parallel = null_test(toy_bigram, lexicon, S=40, seed=13, threads=4)
        assert serial == parallel

    def test_thread_count_beyond_s_is_harmless(self, toy_bigram):
        lexicon, _ = sample_lexicon(toy_bigram, 10, np.random.default_rng(9))
        serial = null_test(toy_bigram, lexicon, S=3, seed=14, threads=1)
        wide = null_test(toy_bigram, lexicon, S=3, seed=14, threads=16)
        assert serial == wide


@pytest.fixture(scope="module")
def result(toy_bigram):
    lexicon, _ = sample_lexicon(toy_bigram, 50, np.random.default_rng(10))
    return null_test(toy_bigram, lexicon, S=120, seed=15)


class TestResultContents:
    def test_sample_bookkeeping(self, result):
        assert len(result.samples_R) == result.S == 120
        assert result.M == 50
        infs = sum(1 for s in result.samples_R if math.isinf(s))
        assert result.no_collision_count == infs
        finite = [s for s in result.samples_R if math.isfinite(s)]
        if finite:
            assert result.mean_R == pytest.approx(float(np.mean(finite)))
        else:
            assert result.mean_R is None

    def test_histogram_covers_finite_samples(self, result):
        hist = result.histogram()
        finite = [s for s in result.samples_R if math.isfinite(s)]
        assert sum(c for _, c in hist) == len(finite)
        edges = [e for e, _ in hist]
        assert edges == sorted(edges)
        for edge, count in hist:
            assert count > 0
            in_bin = [s for s in finite if edge <= s < edge + 0.05 + 1e-12]
            assert count == len(in_bin)

    def test_histogram_bin_width_validated(self, result):
        with pytest.raises(ValueError, match="bin_width"):
            result.histogram(bin_width=0.0)

    def test_to_dict_is_json_round_trippable(self, result):
        blob = json.dumps(result.to_dict())
        back = json.loads(blob)
        assert back["S"] == 120
        assert back["M"] == 50
        assert back["direction"] in (
            "favors_homophony", "against_homophony", "none"
        )
        assert len(back["samples_R"]) == 120
        for s, orig in zip(back["samples_R"], result.samples_R):
            if s is None:
                assert math.isinf(orig)
            else:
                assert s == orig
        assert back["histogram_bin_width"] == 0.05

    def test_no_collision_encoded_as_null(self, birthday_model):
        lexicon = lex_of("a", "b", "aa")
        res = null_test(birthday_model, lexicon, S=10, seed=16)
        d = res.to_dict()
        assert d["observed_R"] is None
        assert d["observed_no_collision"] is True
        assert all(s is None for s in d["samples_R"])


class TestParameters:
    def test_sample_size_override(self, toy_bigram):
        lexicon = lex_of("a", "b")
        res = null_test(toy_bigram, lexicon, S=20, seed=17, sample_size=40)
        assert res.M == 40

    def test_sample_size_must_allow_pairs(self, toy_bigram):
        lexicon = lex_of("a", "b")
        with pytest.raises(ValueError, match="sample_size"):
            null_test(toy_bigram, lexicon, S=20, seed=0, sample_size=1)

    def test_s_must_be_positive(self, toy_bigram):
        lexicon = lex_of("a", "b")
        with pytest.raises(ValueError, match="S"):
            null_test(toy_bigram, lexicon, S=0, seed=0)

    def test_overflow_resamples_recorded(self, uniform_cap4_model):
        lexicon = lex_of("a", "b", "aa", "bb", "ab")
        res = null_test(uniform_cap4_model, lexicon, S=80, seed=18, max_len=2)
        assert res.overflow_resamples > 0
        assert res.max_len == 2

    def test_mean_tracks_model_across_s(self, toy_bigram):
        # The finite-sample mean should be stable as S grows.
        lexicon, _ = sample_lexicon(toy_bigram, 60, np.random.default_rng(20))
        small = null_test(toy_bigram, lexicon, S=150, seed=21)
        large = null_test(toy_bigram, lexicon, S=600, seed=22)
        assert small.mean_R is not None and large.mean_R is not None
        spread = np.std(
            [s for s in large.samples_R if math.isfinite(s)], ddof=1
        )
        tol = 4 * spread * math.sqrt(1 / 150 + 1 / 600)
        assert abs(small.mean_R - large.mean_R) < tol
