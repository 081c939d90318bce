"""Tests for pulse detection and fiducial landmark location."""

import numpy as np
import pytest

from pulsebench.errors import (
    DegenerateBeatError,
    InsufficientBeatsError,
    InvalidInputError,
)
from pulsebench.preprocessing import Segment
from pulsebench.pulses import PPSeries, Point, PulseFiducials, detect_pulses, locate_fiducials


def gauss_train(fs, dur, period, bumps, first=0.5):
    """Pulse train built from Gaussian bumps; bumps = [(offset, amp, sigma)]."""
    t = np.arange(int(dur * fs)) / fs
    x = np.zeros_like(t)
    c = first
    while c < dur:
        for off, amp, sg in bumps:
            x += amp * np.exp(-((t - (c + off)) ** 2) / (2 * sg**2))
        c += period
    return Segment(x, fs)


class TestDetect:
    def test_one_hz_train_gives_24_unit_intervals(self):
        seg = gauss_train(32.0, 25.0, 1.0, [(0.0, 1.0, 0.05)])
        pp = detect_pulses(seg)
        assert len(pp.intervals) == 24
        assert np.all(np.abs(pp.intervals - 1.0) <= 1 / 32.0 + 1e-12)

    def test_constant_signal_has_no_beats(self):
        with pytest.raises(InsufficientBeatsError):
            detect_pulses(Segment(np.full(800, 1.0), 32.0))

    def test_missing_beat_yields_double_interval(self):
        fs = 32.0
        t = np.arange(int(25 * fs)) / fs
        x = np.zeros_like(t)
        c, k = 0.5, 0
        while c < 24.5:
            if k != 12:
                x += np.exp(-((t - c) ** 2) / (2 * 0.05**2))
            c, k = c + 0.8, k + 1
        iv = detect_pulses(Segment(x, fs)).intervals
        assert np.sum(np.abs(iv - 1.6) < 0.05) == 1
        rest = iv[np.abs(iv - 1.6) >= 0.05]
        assert np.all(np.abs(rest - 0.8) <= 1 / fs + 1e-12)

    def test_amplitude_scale_invariance(self):
        seg = gauss_train(32.0, 25.0, 0.9, [(0.0, 1.0, 0.05)])
        base = detect_pulses(seg)
        for c in (1e-3, 0.5, 250.0):
            scaled = detect_pulses(seg.with_samples(c * seg.samples))
            assert np.array_equal(scaled.peak_indices, base.peak_indices)

    def test_time_shift_equivariance(self):
        fs = 32.0
        t = np.arange(int(30 * fs)) / fs
        x = np.zeros_like(t)
        c = 0.5
        while c < 30:
            x += np.exp(-((t - c) ** 2) / (2 * 0.05**2))
            c += 0.9
        k = 16
        a = detect_pulses(Segment(x[: int(25 * fs)], fs))
        b = detect_pulses(Segment(x[k : k + int(25 * fs)], fs))
        # compare interior peaks present in both windows
        shifted = a.peak_indices - k
        common_a = shifted[(shifted >= 0) & np.isin(shifted, b.peak_indices)]
        assert len(common_a) >= len(b.peak_indices) - 2

    def test_periodic_interval_jitter_below_bound(self):
        fs = 32.0
        seg = gauss_train(fs, 25.0, 0.83, [(0.0, 1.0, 0.05)])
        pp = detect_pulses(seg)
        assert np.std(pp.intervals) < 1.5 / fs

    def test_refractory_merges_close_double_peak(self):
        # secondary bump 0.2 s after the main one falls inside the 0.24 s
        # refractory window and must not create extra beats
        seg = gauss_train(125.0, 10.0, 1.0, [(0.0, 1.0, 0.04), (0.2, 0.6, 0.04)], first=0.52)
        pp = detect_pulses(seg)
        assert np.all(np.abs(pp.intervals - 1.0) < 0.02)


class TestPPSeries:
    def test_interval_count_matches_peaks_when_nothing_dropped(self):
        seg = gauss_train(32.0, 25.0, 1.0, [(0.0, 1.0, 0.05)])
        pp = detect_pulses(seg)
        assert len(pp.intervals) == len(pp.peak_indices) - 1

    def test_rejects_unsorted_peaks(self):
        with pytest.raises(InvalidInputError):
            PPSeries(np.array([10, 5, 20]), np.array([0.5]), 32.0)

    def test_rejects_out_of_bound_interval(self):
        with pytest.raises(InvalidInputError):
            PPSeries(np.array([0, 4]), np.array([0.125]), 32.0)


class TestFiducials:
    FS = 125.0

    def two_gauss(self):
        # systolic amp 1.0, diastolic amp 0.3 delayed 0.25 s, centers on the
        # sample grid (0.52 + k); ground-truth peak list supplied by hand
        seg = gauss_train(self.FS, 10.0, 1.0, [(0.0, 1.0, 0.04), (0.25, 0.3, 0.05)], first=0.52)
        peaks = np.array([int(0.52 * self.FS) + int(k * self.FS) for k in range(10)])
        pp = PPSeries(peaks, np.diff(peaks) / self.FS, self.FS)
        return seg, pp

    def test_two_gauss_landmarks(self):
        seg, pp = self.two_gauss()
        f = locate_fiducials(seg, pp, 4)
        assert f.p1.amp == pytest.approx(1.0, rel=0.02)
        assert f.p3 is not None
        assert f.p3.amp == pytest.approx(0.3, rel=0.02)
        assert abs((f.p3.idx - f.p1.idx) / self.FS - 0.25) <= 2 / self.FS

    def test_window_brackets_beat(self):
        seg, pp = self.two_gauss()
        f = locate_fiducials(seg, pp, 4)
        assert f.onset_idx < f.p1.idx < f.end_idx
        assert seg.samples[f.onset_idx] < 0.05
        assert seg.samples[f.end_idx] < 0.05

    def test_a_to_e_alternate_in_time(self):
        seg, pp = self.two_gauss()
        f = locate_fiducials(seg, pp, 4)
        idxs = [w.idx for w in (f.a, f.b, f.c, f.d, f.e) if w is not None]
        assert len(idxs) >= 2
        assert idxs == sorted(idxs)
        assert f.a.idx < f.p1.idx  # a wave rides the systolic upstroke
        assert f.b.amp < 0  # b is the deceleration trough

    def test_single_gauss_has_no_p3(self):
        seg = gauss_train(self.FS, 10.0, 1.0, [(0.0, 1.0, 0.04)], first=0.52)
        pp = detect_pulses(seg)
        f = locate_fiducials(seg, pp, 4)
        assert f.p3 is None

    def test_p2_is_falling_edge_inflection_on_smooth_pulse(self):
        # for a Gaussian the first inflection after the peak sits one sigma
        # out, at amplitude exp(-1/2)
        seg = gauss_train(self.FS, 10.0, 1.0, [(0.0, 1.0, 0.04)], first=0.52)
        pp = detect_pulses(seg)
        f = locate_fiducials(seg, pp, 4)
        assert f.p2 is not None
        assert abs((f.p2.idx - f.p1.idx) / self.FS - 0.04) <= 2 / self.FS
        from pulsebench.preprocessing import derivative

        d2 = derivative(seg, 2).samples
        assert d2[f.p2.idx - 1] < 0 <= d2[f.p2.idx]
        # amplitude near the inflection value exp(-1/2), quantized by the grid
        assert 0.45 < f.p2.amp < 0.65

    def test_boundary_beats_rejected(self):
        seg, pp = self.two_gauss()
        with pytest.raises(DegenerateBeatError):
            locate_fiducials(seg, pp, 0)
        with pytest.raises(DegenerateBeatError):
            locate_fiducials(seg, pp, len(pp.peak_indices) - 1)

    def test_too_short_window_rejected(self):
        fs = self.FS
        t = np.arange(int(10 * fs)) / fs
        x = np.zeros_like(t)
        # cluster of narrow bumps 0.26 s apart: plausible PP but windows
        # under the 0.3 s floor
        for c in (2.0, 2.26, 2.52, 2.78, 3.04):
            x += np.exp(-((t - c) ** 2) / (2 * 0.02**2))
        peaks = np.array([int(c * fs) for c in (2.0, 2.26, 2.52, 2.78, 3.04)])
        pp = PPSeries(peaks, np.diff(peaks) / fs, fs)
        with pytest.raises(DegenerateBeatError):
            locate_fiducials(Segment(x, fs), pp, 2)

    def test_fiducials_type_invariants(self):
        with pytest.raises(InvalidInputError):
            PulseFiducials(onset_idx=10, p1=Point(5, 1.0), end_idx=20)
        with pytest.raises(InvalidInputError):
            PulseFiducials(
                onset_idx=0, p1=Point(5, 1.0), end_idx=20,
                a=Point(8, 1.0), b=Point(6, -1.0),
            )
        with pytest.raises(InvalidInputError):
            PulseFiducials(onset_idx=0, p1=Point(5, np.nan), end_idx=20)
