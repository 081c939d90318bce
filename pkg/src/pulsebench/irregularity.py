"""Rhythm-irregularity features of a PP-interval series.

Seven features used for AF detection: turning-point ratio, coefficient of
variation, mean successive-beat interval difference, RMSSD, Shannon entropy
of the interval histogram, sample entropy, and Poincare dispersion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, InvalidInputError
from .pulses import PPSeries

IRREGULARITY_FEATURE_NAMES = ("TPR", "CV", "MSBID", "RMSSD", "ShE", "SampEn", "PPD")

__all__ = [
    "IRREGULARITY_FEATURE_NAMES",
    "IrregularityVector",
    "turning_point_ratio",
    "variability_features",
    "shannon_entropy",
    "sample_entropy",
    "poincare_dispersion",
    "irregularity_vector",
]


@dataclass(frozen=True)
class IrregularityVector:
    """Ordered values for the 7 irregularity features."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", v)
        if v.shape != (7,):
            raise InvalidInputError(f"expected 7 features, got shape {v.shape}")
        tpr, cv, msbid, rmssd, she, _, ppd = v
        if not 0.0 <= tpr <= 1.0:
            raise InvalidInputError(f"TPR out of [0,1]: {tpr}")
        for name, val in (("CV", cv), ("MSBID", msbid), ("RMSSD", rmssd), ("ShE", she), ("PPD", ppd)):
            if val < 0.0:
                raise InvalidInputError(f"{name} negative: {val}")

    def __getitem__(self, name: str) -> float:
        return float(self.values[IRREGULARITY_FEATURE_NAMES.index(name)])

    def as_dict(self) -> dict:
        return {n: float(v) for n, v in zip(IRREGULARITY_FEATURE_NAMES, self.values)}


def _intervals(pp) -> np.ndarray:
    iv = pp.intervals if isinstance(pp, PPSeries) else np.asarray(pp, dtype=np.float64)
    return np.asarray(iv, dtype=np.float64)


def turning_point_ratio(pp) -> float:
    """Fraction of interior intervals that are strict local extrema."""
    x = _intervals(pp)
    n = len(x)
    if n < 3:
        raise InsufficientDataError(f"need >= 3 intervals, got {n}")
    mid, left, right = x[1:-1], x[:-2], x[2:]
    turning = ((mid > left) & (mid > right)) | ((mid < left) & (mid < right))
    return float(np.count_nonzero(turning) / (n - 2))


def variability_features(pp) -> dict:
    """CV, MSBID and RMSSD of the interval series (population statistics)."""
    x = _intervals(pp)
    if len(x) < 2:
        raise InsufficientDataError(f"need >= 2 intervals, got {len(x)}")
    mean = float(np.mean(x))
    if mean <= 0.0:
        raise InvalidInputError(f"mean interval must be positive, got {mean}")
    d = np.diff(x)
    # an all-equal series must score exactly zero; np.std picks up rounding
    # from the mean when the constant is not dyadic
    cv = 0.0 if x.min() == x.max() else float(np.std(x) / mean)
    return {
        "CV": cv,
        "MSBID": float(np.mean(np.abs(d)) / mean),
        "RMSSD": float(np.sqrt(np.mean(d**2))),
    }


def shannon_entropy(pp, bins: int = 16) -> float:
    """Entropy (bits) of the interval histogram, equal-width bins over the
    observed range; an all-equal series has zero entropy."""
    x = _intervals(pp)
    if len(x) < 2:
        raise InsufficientDataError(f"need >= 2 intervals, got {len(x)}")
    lo, hi = float(x.min()), float(x.max())
    if lo == hi:
        return 0.0
    counts, _ = np.histogram(x, bins=bins, range=(lo, hi))
    p = counts[counts > 0] / len(x)
    return float(-np.sum(p * np.log2(p)))


def sample_entropy(pp, m: int = 2, r: float = None) -> float:
    """SampEn = -ln(A/B) over template pairs, self-matches excluded.

    ``r`` defaults to 0.2 times the population standard deviation.  A
    perfectly regular (zero-std) series scores 0.  When no length-(m+1)
    pair matches, the value is capped at the log of the maximum possible
    ordered-pair count instead of +inf.
    """
    x = _intervals(pp)
    n = len(x)
    if n < m + 2:
        raise InsufficientDataError(f"need >= {m + 2} intervals, got {n}")
    sd = float(np.std(x))
    if sd == 0.0:
        return 0.0
    if r is None:
        r = 0.2 * sd

    def ordered_pairs(length: int) -> int:
        k = n - m  # same template count for both lengths
        t = np.lib.stride_tricks.sliding_window_view(x, length)[:k]
        dist = np.abs(t[:, None, :] - t[None, :, :]).max(axis=2)
        within = dist <= r
        np.fill_diagonal(within, False)
        return int(np.count_nonzero(within))

    b = ordered_pairs(m)
    a = ordered_pairs(m + 1)
    cap = float(np.log((n - m) * (n - m - 1)))
    if a == 0 or b == 0:
        return cap
    return float(min(-np.log(a / b), cap)) + 0.0


def poincare_dispersion(pp) -> float:
    """SD1 width of the Poincare plot, sqrt(mean(diff^2))/sqrt(2).

    Dispersion is measured about the identity line itself (second moment of
    the successive differences about zero), which makes PPD = RMSSD/sqrt(2)
    an exact identity.
    """
    x = _intervals(pp)
    if len(x) < 3:
        raise InsufficientDataError(f"need >= 3 intervals, got {len(x)}")
    d = np.diff(x)
    return float(np.sqrt(np.mean(d**2)) / np.sqrt(2.0))


def irregularity_vector(pp) -> IrregularityVector:
    """All seven features in canonical order."""
    var = variability_features(pp)
    values = np.array([
        turning_point_ratio(pp),
        var["CV"],
        var["MSBID"],
        var["RMSSD"],
        shannon_entropy(pp),
        sample_entropy(pp),
        poincare_dispersion(pp),
    ])
    return IrregularityVector(values)
