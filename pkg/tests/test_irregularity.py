"""Tests for PP-interval irregularity features."""

import numpy as np
import pytest

from pulsebench.errors import InsufficientDataError, InvalidInputError
from pulsebench.irregularity import (
    IRREGULARITY_FEATURE_NAMES,
    IrregularityVector,
    irregularity_vector,
    poincare_dispersion,
    sample_entropy,
    shannon_entropy,
    turning_point_ratio,
    variability_features,
)
from pulsebench.pulses import PPSeries


def as_pp(intervals):
    iv = np.asarray(intervals, dtype=float)
    peaks = np.arange(len(iv) + 1, dtype=np.int64) * 64
    return PPSeries(peaks, iv, 32.0)


def sampen_loops(x, m=2, r=None):
    """Literal nested-loop template counting, kept as the reference."""
    x = np.asarray(x, float)
    n = len(x)
    sd = np.std(x)
    if sd == 0:
        return 0.0
    if r is None:
        r = 0.2 * sd
    k = n - m

    def count(length):
        c = 0
        for i in range(k):
            for j in range(k):
                if i == j:
                    continue
                if max(abs(x[i + q] - x[j + q]) for q in range(length)) <= r:
                    c += 1
        return c

    b = count(m)
    a = count(m + 1)
    if a == 0 or b == 0:
        return float(np.log((n - m) * (n - m - 1)))
    return float(-np.log(a / b))


class TestTPR:
    def test_monotone_series_has_none(self):
        assert turning_point_ratio(np.linspace(0.5, 1.5, 10)) == 0.0

    def test_alternating_series_is_all_turning(self):
        assert turning_point_ratio([0.8, 1.2, 0.8, 1.2, 0.8]) == 1.0

    def test_random_mean_is_two_thirds(self):
        rng = np.random.default_rng(42)
        vals = [turning_point_ratio(rng.random(100)) for _ in range(2000)]
        assert np.mean(vals) == pytest.approx(2.0 / 3.0, abs=0.01)

    def test_needs_three(self):
        with pytest.raises(InsufficientDataError):
            turning_point_ratio([0.8, 1.2])

    def test_accepts_ppseries(self):
        assert turning_point_ratio(as_pp([0.8, 1.2, 0.8, 1.2, 0.8])) == 1.0


class TestVariability:
    def test_constant_is_zero(self):
        v = variability_features(np.full(10, 0.8))
        assert v["CV"] == v["MSBID"] == v["RMSSD"] == 0.0

    def test_two_point_hand_values(self):
        v = variability_features([1.0, 1.2])
        assert v["RMSSD"] == pytest.approx(0.2, abs=1e-12)
        assert v["CV"] == pytest.approx(0.1 / 1.1, abs=1e-12)
        assert v["MSBID"] == pytest.approx(0.2 / 1.1, abs=1e-12)

    def test_scaling_homogeneity(self):
        rng = np.random.default_rng(3)
        x = 0.6 + rng.random(40)
        v1, v3 = variability_features(x), variability_features(3.0 * x)
        assert v3["CV"] == pytest.approx(v1["CV"], abs=1e-12)
        assert v3["MSBID"] == pytest.approx(v1["MSBID"], abs=1e-12)
        assert v3["RMSSD"] == pytest.approx(3.0 * v1["RMSSD"], rel=1e-12)

    def test_nonpositive_mean_rejected(self):
        with pytest.raises(InvalidInputError):
            variability_features([-1.0, 1.0])


class TestShE:
    def test_all_equal_is_zero(self):
        assert shannon_entropy(np.full(20, 0.8)) == 0.0

    def test_two_equal_bins_is_one_bit(self):
        assert shannon_entropy(np.array([0.8] * 8 + [1.2] * 8)) == pytest.approx(1.0, abs=1e-12)

    def test_uniform_occupancy_is_four_bits(self):
        x = 0.5 + (np.arange(16) + 0.5) / 16 * 0.9
        assert shannon_entropy(x) == pytest.approx(4.0, abs=1e-12)

    def test_scale_invariant(self):
        rng = np.random.default_rng(9)
        x = 0.5 + rng.random(64)
        assert shannon_entropy(5.0 * x) == pytest.approx(shannon_entropy(x), abs=1e-12)

    def test_permutation_invariant(self):
        rng = np.random.default_rng(10)
        x = 0.5 + rng.random(64)
        assert shannon_entropy(rng.permutation(x)) == pytest.approx(shannon_entropy(x), abs=1e-12)


class TestSampEn:
    def test_constant_is_zero(self):
        assert sample_entropy(np.full(20, 0.8)) == 0.0

    def test_periodic_alternation_is_low(self):
        assert sample_entropy(np.tile([0.8, 1.2], 25)) < 0.05

    def test_uniform_noise_is_high(self):
        hits = sum(
            sample_entropy(0.5 + np.random.default_rng(1000 + s).random(100)) > 1.0
            for s in range(20)
        )
        assert hits == 20

    def test_matches_loop_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            x = 0.6 + rng.random(60)
            assert sample_entropy(x) == pytest.approx(sampen_loops(x), abs=1e-12)

    def test_no_long_match_hits_cap(self):
        # monotone ramp: every m-template matches only its close neighbors;
        # choose r tiny so nothing matches and the cap applies
        x = np.linspace(0.5, 1.5, 30)
        val = sample_entropy(x, m=2, r=1e-6)
        assert val == pytest.approx(np.log(28 * 27), abs=1e-12)

    def test_scale_invariant(self):
        rng = np.random.default_rng(12)
        x = 0.5 + rng.random(80)
        assert sample_entropy(4.0 * x) == pytest.approx(sample_entropy(x), abs=1e-12)

    def test_needs_m_plus_two(self):
        with pytest.raises(InsufficientDataError):
            sample_entropy([0.8, 1.0, 1.2])


class TestPPD:
    def test_constant_is_zero(self):
        assert poincare_dispersion(np.full(10, 0.8)) == 0.0

    def test_hand_value(self):
        assert poincare_dispersion([1.0, 1.2, 1.0, 1.2]) == pytest.approx(
            0.2 / np.sqrt(2), abs=1e-12
        )

    def test_equals_rmssd_over_sqrt2(self):
        rng = np.random.default_rng(21)
        for _ in range(10):
            x = 0.5 + rng.random(50)
            v = variability_features(x)
            assert poincare_dispersion(x) == pytest.approx(
                v["RMSSD"] / np.sqrt(2), abs=1e-12
            )


class TestVector:
    def test_constant_series_is_all_zero(self):
        iv = irregularity_vector(np.full(10, 0.8))
        assert np.all(iv.values == 0.0)

    def test_length_and_order(self):
        iv = irregularity_vector(0.5 + np.random.default_rng(2).random(50))
        assert iv.values.shape == (7,)
        assert IRREGULARITY_FEATURE_NAMES == ("TPR", "CV", "MSBID", "RMSSD", "ShE", "SampEn", "PPD")

    def test_af_like_exceeds_sinus_like(self):
        rng = np.random.default_rng(33)
        sinus = 0.85 + 0.01 * rng.standard_normal(60)
        af = 0.85 + 0.25 * rng.random(60)
        a, s = irregularity_vector(af), irregularity_vector(sinus)
        for name in ("CV", "RMSSD", "PPD"):
            assert a[name] > s[name]

    def test_order_sensitivity_split(self):
        rng = np.random.default_rng(44)
        x = np.sort(0.5 + rng.random(60))  # sorted: low TPR/RMSSD
        shuffled = rng.permutation(x)
        vx, vs = irregularity_vector(x), irregularity_vector(shuffled)
        assert vs["TPR"] > vx["TPR"]
        assert vs["RMSSD"] > vx["RMSSD"]
        assert vs["CV"] == pytest.approx(vx["CV"], abs=1e-12)
        assert vs["ShE"] == pytest.approx(vx["ShE"], abs=1e-12)

    def test_type_invariants(self):
        with pytest.raises(InvalidInputError):
            IrregularityVector(np.zeros(6))
        bad = np.zeros(7)
        bad[0] = 1.5  # TPR out of range
        with pytest.raises(InvalidInputError):
            IrregularityVector(bad)
        bad2 = np.zeros(7)
        bad2[3] = -0.1  # negative RMSSD
        with pytest.raises(InvalidInputError):
            IrregularityVector(bad2)
