"""Per-beat pulse-wave morphology features and per-segment aggregation.

28 features per beat: amplitudes and amplitude ratios of the systolic,
late-systolic and diastolic peaks, durations, systolic/diastolic areas,
second-derivative wave ratios and aging indices, inter-wave timings and
slopes, and the shape moments of the beat.  Features whose landmarks are
missing on a given beat are NaN and get median-imputed when aggregating.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateBeatError, InsufficientBeatsError, InvalidInputError
from .preprocessing import Segment, derivative
from .pulses import PPSeries, PulseFiducials, detect_pulses, locate_fiducials

MORPH_FEATURE_NAMES = (
    "P1", "P2", "P3", "P2_over_P1", "RI", "AI",
    "Tp", "Td", "T1", "dT",
    "A1", "A2", "IPA", "IPAD",
    "b_a", "c_a", "d_a", "e_a",
    "AGI", "AGI_int", "AGI_mod",
    "t_b_a", "t_b_c", "t_b_d",
    "slope_b_c", "slope_b_d",
    "skewness", "kurtosis",
)

__all__ = [
    "MORPH_FEATURE_NAMES",
    "MorphFeatureVector",
    "beat_features",
    "segment_features",
    "aggregate_beats",
]


@dataclass(frozen=True)
class MorphFeatureVector:
    """Ordered values for the 28 morphology features."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", v)
        if v.shape != (len(MORPH_FEATURE_NAMES),):
            raise InvalidInputError(
                f"expected {len(MORPH_FEATURE_NAMES)} features, got shape {v.shape}"
            )
        # Tp = T1 + Td and IPA = A2/A1 hold per beat by construction (see
        # beat_features); medians over heterogeneous beats need not satisfy
        # them, so they are not enforced here.

    def __getitem__(self, name: str) -> float:
        return float(self.values[MORPH_FEATURE_NAMES.index(name)])

    def as_dict(self) -> dict:
        return {n: float(v) for n, v in zip(MORPH_FEATURE_NAMES, self.values)}


def _ratio(num: float, den: float) -> float:
    if not np.isfinite(num) or not np.isfinite(den) or den == 0.0:
        return np.nan
    return num / den


def _shape_moments(window: np.ndarray, fs: float):
    """Skewness and non-excess kurtosis of the beat treated as a density
    over time; negative (below-onset) samples carry no mass."""
    w = np.clip(window, 0.0, None)
    mass = w.sum()
    if mass <= 0.0:
        return np.nan, np.nan
    t = np.arange(len(w)) / fs
    mean = np.dot(w, t) / mass
    dt = t - mean
    var = np.dot(w, dt**2) / mass
    if var <= 0.0:
        return np.nan, np.nan
    skew = np.dot(w, dt**3) / mass / var**1.5
    kurt = np.dot(w, dt**4) / mass / var**2
    return float(skew), float(kurt)


def beat_features(fid: PulseFiducials, seg: Segment) -> MorphFeatureVector:
    """28 morphology features of one beat, amplitudes relative to the onset."""
    secondary = (fid.p2, fid.p3, fid.a, fid.b, fid.c, fid.d, fid.e)
    if all(pt is None for pt in secondary):
        raise DegenerateBeatError("no landmarks beyond the systolic peak")

    x = seg.samples
    fs = seg.fs
    base = x[fid.onset_idx]

    def amp(pt) -> float:
        return np.nan if pt is None else pt.amp - base

    def t_of(pt) -> float:
        return np.nan if pt is None else pt.idx / fs

    p1 = fid.p1.amp - base
    p2 = amp(fid.p2)
    p3 = amp(fid.p3)

    tp = (fid.end_idx - fid.onset_idx) / fs
    t1 = (fid.p1.idx - fid.onset_idx) / fs
    td = tp - t1
    dt_p1p3 = np.nan if fid.p3 is None else (fid.p3.idx - fid.p1.idx) / fs

    # systolic/diastolic split: first upward zero crossing of the first
    # derivative after P1 (dicrotic notch), else P2, else the midpoint
    d1 = derivative(seg, n=1).samples
    split = None
    for i in range(fid.p1.idx + 1, fid.end_idx):
        if d1[i - 1] < 0.0 <= d1[i]:
            split = i
            break
    if split is None:
        split = fid.p2.idx if fid.p2 is not None else (fid.onset_idx + fid.end_idx) // 2
    corrected = x[fid.onset_idx : fid.end_idx + 1] - base
    s_rel = split - fid.onset_idx
    a1 = float(np.trapezoid(corrected[: s_rel + 1], dx=1.0 / fs))
    a2 = float(np.trapezoid(corrected[s_rel:], dx=1.0 / fs))
    ipa = _ratio(a2, a1)

    # second-derivative wave amplitudes are used as-is (not onset-relative;
    # the derivative removes the baseline already)
    wa, wb, wc, wd, we = (
        np.nan if p is None else p.amp for p in (fid.a, fid.b, fid.c, fid.d, fid.e)
    )
    ipad = ipa + wd

    def tdiff(pa, pb) -> float:
        if pa is None or pb is None:
            return np.nan
        return abs(pa.idx - pb.idx) / fs

    def slope(pa, pb) -> float:
        if pa is None or pb is None or pa.idx == pb.idx:
            return np.nan
        return (pb.amp - pa.amp) / ((pb.idx - pa.idx) / fs)

    skew, kurt = _shape_moments(corrected, fs)

    values = np.array([
        p1, p2, p3, _ratio(p2, p1), _ratio(p3, p1), _ratio(p1 - p3, p1),
        tp, td, t1, dt_p1p3,
        a1, a2, ipa, ipad,
        _ratio(wb, wa), _ratio(wc, wa), _ratio(wd, wa), _ratio(we, wa),
        _ratio(wb - wc - wd - we, wa), _ratio(wb - we, wa), _ratio(wb - wc - wd, wa),
        tdiff(fid.b, fid.a), tdiff(fid.b, fid.c), tdiff(fid.b, fid.d),
        slope(fid.b, fid.c), slope(fid.b, fid.d),
        skew, kurt,
    ])
    return MorphFeatureVector(values)


def aggregate_beats(matrix: np.ndarray) -> MorphFeatureVector:
    """Per-feature median across beats, ignoring NaN entries per column."""
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2 or m.shape[1] != len(MORPH_FEATURE_NAMES) or m.shape[0] == 0:
        raise InvalidInputError(f"expected (n_beats, 28) matrix, got {m.shape}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)  # all-NaN columns stay NaN
        med = np.nanmedian(m, axis=0)
    return MorphFeatureVector(med)


def segment_features(seg: Segment, pp: Optional[PPSeries] = None) -> MorphFeatureVector:
    """Median morphology vector across all complete, non-degenerate beats."""
    if pp is None:
        pp = detect_pulses(seg)
    rows = []
    for beat in range(1, len(pp.peak_indices) - 1):
        try:
            fid = locate_fiducials(seg, pp, beat)
            rows.append(beat_features(fid, seg).values)
        except DegenerateBeatError:
            continue
    if not rows:
        raise InsufficientBeatsError("no beat yielded a usable feature row")
    return aggregate_beats(np.vstack(rows))
