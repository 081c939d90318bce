"""Heartbeat detection and per-beat fiducial landmarks.

Peaks come from an adaptive-threshold local-maximum search; fiducials are
the systolic/diastolic landmarks plus the a-e waves of the second
derivative, which downstream morphology features are built from.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import DegenerateBeatError, InsufficientBeatsError, InvalidInputError
from .preprocessing import Segment, derivative

__all__ = ["Point", "PulseFiducials", "PPSeries", "detect_pulses", "locate_fiducials"]

# physiologic pulse-rate window, 20 to 250 bpm
PP_MIN_S = 0.24
PP_MAX_S = 3.0
REFRACTORY_S = 0.24
THRESHOLD_WINDOW_S = 2.0
THRESHOLD_FRACTION = 0.5
THRESHOLD_PERCENTILE = 90.0
MIN_BEAT_WINDOW_S = 0.3


class Point(NamedTuple):
    idx: int
    amp: float


@dataclass(frozen=True)
class PulseFiducials:
    """Landmarks of one beat, indices absolute into the parent segment.

    ``p1`` is the systolic peak, ``p2`` the late-systolic peak or shoulder
    inflection, ``p3`` the diastolic peak.  ``a``-``e`` are the alternating
    extrema of the second derivative after the onset.  Landmarks that do not
    exist on a given waveform are None.
    """

    onset_idx: int
    p1: Point
    end_idx: int
    p2: Optional[Point] = None
    p3: Optional[Point] = None
    a: Optional[Point] = None
    b: Optional[Point] = None
    c: Optional[Point] = None
    d: Optional[Point] = None
    e: Optional[Point] = None

    def __post_init__(self):
        if not self.onset_idx < self.p1.idx < self.end_idx:
            raise InvalidInputError(
                f"need onset < p1 < end, got {self.onset_idx}, {self.p1.idx}, {self.end_idx}"
            )
        if self.p2 is not None and not self.p1.idx <= self.p2.idx:
            raise InvalidInputError("p2 must not precede p1")
        if self.p2 is not None and self.p3 is not None and not self.p2.idx <= self.p3.idx:
            raise InvalidInputError("p3 must not precede p2")
        if self.a is not None and self.b is not None and not self.a.idx < self.b.idx:
            raise InvalidInputError("b must follow a")
        for name in ("p1", "p2", "p3", "a", "b", "c", "d", "e"):
            pt = getattr(self, name)
            if pt is not None and not np.isfinite(pt.amp):
                raise InvalidInputError(f"{name} amplitude not finite")


@dataclass(frozen=True)
class PPSeries:
    """Detected peaks and the cleaned peak-to-peak interval series."""

    peak_indices: np.ndarray  # int sample indices, ascending
    intervals: np.ndarray  # seconds, within the plausibility bound
    fs: float

    def __post_init__(self):
        peaks = np.asarray(self.peak_indices, dtype=np.int64)
        ivals = np.asarray(self.intervals, dtype=np.float64)
        object.__setattr__(self, "peak_indices", peaks)
        object.__setattr__(self, "intervals", ivals)
        if np.any(np.diff(peaks) <= 0):
            raise InvalidInputError("peak indices must be strictly ascending")
        # cleaning can only remove intervals, never add them
        if len(ivals) > max(len(peaks) - 1, 0):
            raise InvalidInputError("more intervals than peak gaps")
        if len(ivals) and (ivals.min() < PP_MIN_S or ivals.max() > PP_MAX_S):
            raise InvalidInputError("interval outside plausibility bound")

    @property
    def n_beats(self) -> int:
        return len(self.peak_indices)


def _rolling_percentile(x: np.ndarray, win: int, q: float) -> np.ndarray:
    """Centered rolling percentile with edge replication, same length as x."""
    win = min(win, len(x))
    left = win // 2
    pad = np.concatenate([np.full(left, x[0]), x, np.full(win - 1 - left, x[-1])])
    view = np.lib.stride_tricks.sliding_window_view(pad, win)
    return np.percentile(view, q, axis=1)


def detect_pulses(seg: Segment) -> PPSeries:
    """Find systolic peaks and the cleaned PP-interval series.

    A sample is a candidate if it is a local maximum above half the rolling
    90th-percentile amplitude (2 s window).  Candidates closer than the
    0.24 s refractory period collapse to the tallest.  Intervals outside
    [0.24, 3.0] s are dropped from the interval series.
    """
    x = seg.samples
    n = len(x)
    thr = THRESHOLD_FRACTION * _rolling_percentile(x, int(round(THRESHOLD_WINDOW_S * seg.fs)), THRESHOLD_PERCENTILE)

    is_peak = np.zeros(n, dtype=bool)
    is_peak[1:-1] = (x[1:-1] > x[:-2]) & (x[1:-1] >= x[2:])
    candidates = np.flatnonzero(is_peak & (x > thr))

    refractory = int(round(REFRACTORY_S * seg.fs))
    kept: list = []
    for idx in candidates:
        if kept and idx - kept[-1] < refractory:
            if x[idx] > x[kept[-1]]:
                kept[-1] = int(idx)
        else:
            kept.append(int(idx))
    if len(kept) < 3:
        raise InsufficientBeatsError(f"found {len(kept)} peaks, need at least 3")

    peaks = np.asarray(kept, dtype=np.int64)
    raw = np.diff(peaks) / seg.fs
    ivals = raw[(raw >= PP_MIN_S) & (raw <= PP_MAX_S)]
    return PPSeries(peak_indices=peaks, intervals=ivals, fs=seg.fs)


def _local_extrema(y: np.ndarray, lo: int, hi: int):
    """Indices of strict local maxima and minima of y inside (lo, hi)."""
    seg = y[lo : hi + 1]
    up = np.zeros(len(seg), dtype=bool)
    dn = np.zeros(len(seg), dtype=bool)
    up[1:-1] = (seg[1:-1] > seg[:-2]) & (seg[1:-1] >= seg[2:])
    dn[1:-1] = (seg[1:-1] < seg[:-2]) & (seg[1:-1] <= seg[2:])
    return np.flatnonzero(up) + lo, np.flatnonzero(dn) + lo


def _first_after(indices: np.ndarray, after: int) -> Optional[int]:
    later = indices[indices > after]
    return int(later[0]) if len(later) else None


def locate_fiducials(seg: Segment, pp: PPSeries, beat: int) -> PulseFiducials:
    """Landmarks for one interior beat.

    ``beat`` indexes ``pp.peak_indices``; the first and last beats have no
    complete [previous onset, next onset] window and are rejected.
    """
    peaks = pp.peak_indices
    if not 1 <= beat <= len(peaks) - 2:
        raise DegenerateBeatError(
            f"beat {beat} has no complete window (valid: 1..{len(peaks) - 2})"
        )
    x = seg.samples
    p_prev, p_this, p_next = peaks[beat - 1], peaks[beat], peaks[beat + 1]

    onset = int(p_prev + np.argmin(x[p_prev : p_this + 1]))
    end = int(p_this + np.argmin(x[p_this : p_next + 1]))
    if (end - onset) / seg.fs < MIN_BEAT_WINDOW_S:
        raise DegenerateBeatError(
            f"beat window {(end - onset) / seg.fs:.3f} s shorter than {MIN_BEAT_WINDOW_S} s"
        )
    p1 = Point(int(p_this), float(x[p_this]))

    d2 = derivative(seg, n=2).samples
    maxima, minima = _local_extrema(d2, onset, end)
    a = _first_after(maxima, onset - 1)
    b = _first_after(minima, a) if a is not None else None
    c = _first_after(maxima, b) if b is not None else None
    d = _first_after(minima, c) if c is not None else None
    e = _first_after(maxima, d) if d is not None else None

    def pt(idx: Optional[int], values: np.ndarray) -> Optional[Point]:
        return None if idx is None else Point(idx, float(values[idx]))

    # P2: first signal local max or inflection (zero crossing of the second
    # derivative) after the systolic peak
    sig_max, sig_min = _local_extrema(x, onset, end)
    sig_max_set = set(int(i) for i in sig_max)
    p2_idx = None
    for i in range(p1.idx + 1, end):
        if d2[i - 1] < 0.0 <= d2[i] or d2[i - 1] > 0.0 >= d2[i]:
            p2_idx = i
            break
        if i in sig_max_set:
            p2_idx = i
            break
    p2 = pt(p2_idx, x)

    # P3: diastolic max after the dicrotic notch (first signal local min
    # after P1)
    p3 = None
    notch = _first_after(sig_min, p1.idx)
    if notch is not None:
        p3 = pt(_first_after(sig_max, notch), x)

    return PulseFiducials(
        onset_idx=onset, p1=p1, end_idx=end, p2=p2, p3=p3,
        a=pt(a, d2), b=pt(b, d2), c=pt(c, d2), d=pt(d, d2), e=pt(e, d2),
    )
