"""Tests for per-beat morphology features and their aggregation."""

import numpy as np
import pytest

from pulsebench.errors import DegenerateBeatError, InsufficientBeatsError, InvalidInputError
from pulsebench.morphology import (
    MORPH_FEATURE_NAMES,
    MorphFeatureVector,
    aggregate_beats,
    beat_features,
    segment_features,
)
from pulsebench.preprocessing import Segment
from pulsebench.pulses import PPSeries, Point, PulseFiducials, detect_pulses, locate_fiducials

FS = 125.0


def make_train(amps_dia, first=0.52, period=1.0, dur=None, amps_sys=None, delay=0.25):
    """Gaussian pulse train; per-beat systolic/diastolic amplitudes."""
    n = len(amps_dia)
    dur = dur if dur is not None else first + period * n + 0.5
    t = np.arange(int(dur * FS)) / FS
    x = np.zeros_like(t)
    for k, da in enumerate(amps_dia):
        sa = 1.0 if amps_sys is None else amps_sys[k]
        c = first + k * period
        x += sa * np.exp(-((t - c) ** 2) / (2 * 0.04**2))
        x += da * np.exp(-((t - (c + delay)) ** 2) / (2 * 0.05**2))
    peaks = np.array([int(first * FS) + int(k * period * FS) for k in range(n)])
    return Segment(x, FS), PPSeries(peaks, np.diff(peaks) / FS, FS)


def interior_beat(seg, pp, beat=4):
    return beat_features(locate_fiducials(seg, pp, beat), seg)


class TestBeatFeatures:
    def test_ri_and_ai_from_known_amplitudes(self):
        seg, pp = make_train([0.3] * 10)
        v = interior_beat(seg, pp)
        assert v["P1"] == pytest.approx(1.0, rel=0.02)
        assert v["RI"] == pytest.approx(0.3, rel=0.02)
        assert v["AI"] == pytest.approx(0.7, rel=0.02)

    def test_duration_identity(self):
        seg, pp = make_train([0.3] * 10)
        v = interior_beat(seg, pp)
        assert abs(v["Tp"] - (v["T1"] + v["Td"])) < 1e-9

    def test_area_identity_and_sign(self):
        seg, pp = make_train([0.3] * 10)
        v = interior_beat(seg, pp)
        assert v["A1"] > 0 and v["A2"] > 0
        assert abs(v["IPA"] - v["A2"] / v["A1"]) < 1e-9

    def test_dt_matches_construction(self):
        seg, pp = make_train([0.3] * 10)
        v = interior_beat(seg, pp)
        assert abs(v["dT"] - 0.25) <= 2 / FS

    def test_aging_indices_from_direct_formula(self):
        # amplitudes chosen by hand; indices just need the right ordering
        t = np.arange(1250) / FS
        seg = Segment(np.sin(2 * np.pi * t) + 2.0, FS)
        fid = PulseFiducials(
            onset_idx=10, p1=Point(40, 3.0), end_idx=130,
            a=Point(15, 1.0), b=Point(25, -0.8), c=Point(50, 0.1),
            d=Point(60, -0.2), e=Point(70, 0.05),
        )
        v = beat_features(fid, seg)
        assert v["AGI"] == pytest.approx(-0.75, abs=1e-12)
        assert v["AGI_int"] == pytest.approx(-0.85, abs=1e-12)
        assert v["AGI_mod"] == pytest.approx(-0.70, abs=1e-12)
        assert v["b_a"] == pytest.approx(-0.8, abs=1e-12)
        assert v["t_b_a"] == pytest.approx(10 / FS, abs=1e-12)
        assert v["t_b_c"] == pytest.approx(25 / FS, abs=1e-12)
        assert v["slope_b_c"] == pytest.approx(0.9 / (25 / FS), rel=1e-9)

    def test_symmetric_beat_has_zero_skewness(self):
        seg, pp = make_train([0.0] * 10)
        v = interior_beat(seg, pp)
        assert abs(v["skewness"]) < 1e-6

    def test_gaussian_beat_has_normal_kurtosis(self):
        # a Gaussian-shaped beat is literally a normal density over time
        seg, pp = make_train([0.0] * 10)
        v = interior_beat(seg, pp)
        assert v["kurtosis"] == pytest.approx(3.0, abs=1e-2)

    def test_missing_p3_flags_nan(self):
        seg, pp = make_train([0.0] * 10)
        v = interior_beat(seg, pp)
        assert np.isnan(v["P3"]) and np.isnan(v["RI"]) and np.isnan(v["dT"])

    def test_all_landmarks_absent_is_degenerate(self):
        t = np.arange(1250) / FS
        seg = Segment(np.sin(2 * np.pi * t) + 2.0, FS)
        fid = PulseFiducials(onset_idx=10, p1=Point(40, 3.0), end_idx=130)
        with pytest.raises(DegenerateBeatError):
            beat_features(fid, seg)

    def test_amplitude_scale_behavior(self):
        seg, pp = make_train([0.3] * 10)
        v1 = interior_beat(seg, pp).values
        seg2 = seg.with_samples(seg.samples * 3.0)
        v2 = interior_beat(seg2, pp).values
        names = list(MORPH_FEATURE_NAMES)
        scale_free = [
            "P2_over_P1", "RI", "AI", "IPA", "b_a", "c_a", "d_a", "e_a",
            "AGI", "AGI_int", "AGI_mod", "skewness", "kurtosis",
            "Tp", "Td", "T1", "dT", "t_b_a", "t_b_c", "t_b_d",
        ]
        for name in scale_free:
            i = names.index(name)
            assert v2[i] == pytest.approx(v1[i], abs=1e-9), name
        for name in ("P1", "P2", "P3", "A1", "A2"):
            i = names.index(name)
            assert v2[i] == pytest.approx(3.0 * v1[i], rel=1e-9), name


class TestAggregation:
    def test_identical_beats_equal_single_beat(self):
        seg, pp = make_train([0.3] * 10)
        single = interior_beat(seg, pp).values
        agg = segment_features(seg, pp).values
        both = np.isfinite(single) & np.isfinite(agg)
        assert np.allclose(agg[both], single[both], atol=1e-6)
        assert np.array_equal(np.isnan(agg), np.isnan(single))

    def test_median_of_known_p1_amplitudes(self):
        # interior beats carry systolic amplitudes {1,1,1,2,3}
        seg, pp = make_train(
            [0.3] * 7, amps_sys=[1.0, 1.0, 1.0, 1.0, 2.0, 3.0, 1.0]
        )
        agg = segment_features(seg, pp)
        assert agg["P1"] == pytest.approx(1.0, rel=0.02)

    def test_nan_rows_are_ignored_per_feature(self):
        rng = np.random.default_rng(5)
        m = rng.standard_normal((5, len(MORPH_FEATURE_NAMES)))
        m[2, :] = np.nan
        agg = aggregate_beats(m)
        expect = np.median(np.delete(m, 2, axis=0), axis=0)
        assert np.allclose(agg.values, expect, atol=1e-12)

    def test_all_nan_column_stays_nan(self):
        m = np.ones((4, len(MORPH_FEATURE_NAMES)))
        m[:, 3] = np.nan
        agg = aggregate_beats(m)
        assert np.isnan(agg.values[3])
        assert np.all(agg.values[[0, 1, 2]] == 1.0)

    def test_empty_matrix_rejected(self):
        with pytest.raises(InvalidInputError):
            aggregate_beats(np.empty((0, len(MORPH_FEATURE_NAMES))))

    def test_segment_features_runs_end_to_end(self):
        # diastolic delay inside the refractory window, so detection sees
        # one beat per pulse complex
        seg, _ = make_train([0.3] * 10, delay=0.2)
        v = segment_features(seg)  # detection included
        assert v["RI"] == pytest.approx(0.3, rel=0.05)


class TestVectorType:
    def test_rejects_wrong_length(self):
        with pytest.raises(InvalidInputError):
            MorphFeatureVector(np.zeros(27))

    def test_name_order_is_stable(self):
        assert len(MORPH_FEATURE_NAMES) == 28
        assert MORPH_FEATURE_NAMES[0] == "P1"
        assert MORPH_FEATURE_NAMES[-1] == "kurtosis"

    def test_getitem_by_name(self):
        v = MorphFeatureVector(np.arange(28, dtype=float))
        assert v["P1"] == 0.0
        assert v["kurtosis"] == 27.0
