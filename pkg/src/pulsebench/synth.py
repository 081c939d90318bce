"""Synthetic cohorts for desk-scale benchmarks.

Blood-pressure segments are pulse trains whose morphology (rate,
diastolic-to-systolic amplitude ratio, systolic-to-diastolic delay,
pulse width) varies per subject and per segment; the SBP/DBP targets
are linear functions of those morphology parameters plus noise, so a
pipeline that recovers the morphology can beat the median baseline by a
wide margin.

Atrial-fibrillation segments are pulse trains with either quasi-regular
peak-to-peak intervals (sinus) or independently drawn irregular ones
(AF); subjects are pure-class, which lets the stratified split keep the
AF ratio while staying subject-disjoint.
"""

from __future__ import annotations

from typing import List, Optional

import numpy as np

from .data_io import SegmentRecord
from .errors import InvalidSpecError
from .preprocessing import Segment

__all__ = [
    "BP_FS",
    "BP_DURATION_S",
    "AF_FS",
    "AF_DURATION_S",
    "synth_bp_records",
    "synth_af_records",
]

BP_FS = 125.0
BP_DURATION_S = 10.0
AF_FS = 32.0
AF_DURATION_S = 25.0

# population parameter ranges; z-scores below use the matching uniform moments
_HR_RANGE = (0.9, 1.8)        # beats per second
_RATIO_RANGE = (0.25, 0.65)   # diastolic / systolic amplitude
_DELAY_RANGE = (0.15, 0.23)   # systolic-to-diastolic peak delay, seconds
_WIDTH_RANGE = (0.035, 0.060)  # systolic Gaussian sigma, seconds

# target = intercept + coefficients . z(params) + noise
_SBP_COEF = (120.0, (12.0, 9.0, -8.0, 5.0), 2.5)
_DBP_COEF = (75.0, (7.0, 5.0, -4.0, 3.0), 2.0)


def _uniform_z(value, lo, hi):
    """Z-score against the moments of U(lo, hi)."""
    mid = 0.5 * (lo + hi)
    sd = (hi - lo) / np.sqrt(12.0)
    return (value - mid) / sd


def _pulse_train(rng, fs: float, duration: float, hr: float, ratio: float,
                 delay: float, width: float, amp: float) -> np.ndarray:
    n = int(round(fs * duration))
    t = np.arange(n) / fs
    signal = np.zeros(n)
    beat = rng.uniform(0.0, 1.0 / hr)
    while beat < duration:
        signal += amp * np.exp(-0.5 * ((t - beat) / width) ** 2)
        dia_center = beat + delay
        signal += amp * ratio * np.exp(-0.5 * ((t - dia_center) / (1.3 * width)) ** 2)
        beat += (1.0 + rng.normal(0.0, 0.01)) / hr
    return signal + rng.normal(0.0, 0.01 * amp, n)


def synth_bp_records(n_segments: int = 2000, seed: int = 0,
                     n_subjects: Optional[int] = None) -> List[SegmentRecord]:
    """Pulse-train segments with SBP/DBP labels tied to morphology."""
    if n_segments < 1:
        raise InvalidSpecError(f"n_segments must be >= 1, got {n_segments}")
    if n_subjects is None:
        n_subjects = max(2, n_segments // 20)
    rng = np.random.default_rng(seed)

    subjects = []
    for _ in range(n_subjects):
        subjects.append({
            "hr": rng.uniform(*_HR_RANGE),
            "ratio": rng.uniform(*_RATIO_RANGE),
            "delay": rng.uniform(*_DELAY_RANGE),
            "width": rng.uniform(*_WIDTH_RANGE),
            "amp": rng.uniform(0.9, 1.1),
        })

    records = []
    for idx in range(n_segments):
        base = subjects[idx % n_subjects]
        # per-segment wobble around the subject's operating point
        hr = float(np.clip(base["hr"] * (1.0 + rng.normal(0, 0.03)), *_HR_RANGE))
        ratio = float(np.clip(base["ratio"] * (1.0 + rng.normal(0, 0.04)), *_RATIO_RANGE))
        delay = float(np.clip(base["delay"] * (1.0 + rng.normal(0, 0.03)), *_DELAY_RANGE))
        width = float(np.clip(base["width"] * (1.0 + rng.normal(0, 0.04)), *_WIDTH_RANGE))

        z = np.array([
            _uniform_z(hr, *_HR_RANGE),
            _uniform_z(ratio, *_RATIO_RANGE),
            _uniform_z(delay, *_DELAY_RANGE),
            _uniform_z(width, *_WIDTH_RANGE),
        ])
        sbp = _SBP_COEF[0] + float(np.dot(_SBP_COEF[1], z)) + rng.normal(0, _SBP_COEF[2])
        dbp = _DBP_COEF[0] + float(np.dot(_DBP_COEF[1], z)) + rng.normal(0, _DBP_COEF[2])

        samples = _pulse_train(rng, BP_FS, BP_DURATION_S, hr, ratio, delay,
                               width, base["amp"])
        records.append(SegmentRecord(
            segment_id=f"bp{idx:05d}",
            subject_id=f"subj{idx % n_subjects:04d}",
            segment=Segment(samples, BP_FS),
            labels={"sbp": round(sbp, 4), "dbp": round(dbp, 4)},
        ))
    return records


def _pp_intervals(rng, af: bool, total_s: float) -> np.ndarray:
    """One segment's worth of peak-to-peak intervals in seconds."""
    if af:
        draws = rng.uniform(0.45, 1.30, size=int(total_s / 0.45) + 2)
    else:
        base = rng.uniform(0.70, 1.00)
        k = np.arange(int(total_s / base) + 3)
        draws = base * (1.0 + 0.03 * np.sin(2 * np.pi * k / 12.0)
                        + rng.normal(0, 0.01, k.shape[0]))
    return draws


def synth_af_records(n_segments: int = 2000, seed: int = 0,
                     n_subjects: int = 60,
                     af_ratio: float = 0.38) -> List[SegmentRecord]:
    """Pulse trains with regular (sinus) or irregular (AF) rhythm.

    Subjects are pure-class; the number of AF subjects is chosen so the
    segment-level AF ratio matches ``af_ratio`` as closely as whole
    subjects allow.
    """
    if n_segments < 1:
        raise InvalidSpecError(f"n_segments must be >= 1, got {n_segments}")
    if not 0.0 < af_ratio < 1.0:
        raise InvalidSpecError(f"af_ratio must be in (0, 1), got {af_ratio}")
    if n_subjects < 2:
        raise InvalidSpecError("need at least 2 subjects")
    rng = np.random.default_rng(seed)
    n_af_subjects = max(1, int(round(af_ratio * n_subjects)))

    n = int(round(AF_FS * AF_DURATION_S))
    t = np.arange(n) / AF_FS
    records = []
    for idx in range(n_segments):
        subject = idx % n_subjects
        af = 1 if subject < n_af_subjects else 0
        intervals = _pp_intervals(rng, bool(af), AF_DURATION_S)
        peaks = rng.uniform(0.1, 0.5) + np.concatenate(([0.0], np.cumsum(intervals)))
        peaks = peaks[peaks < AF_DURATION_S - 0.1]
        signal = np.zeros(n)
        for peak in peaks:
            signal += np.exp(-0.5 * ((t - peak) / 0.09) ** 2)
        signal += rng.normal(0, 0.01, n)
        records.append(SegmentRecord(
            segment_id=f"af{idx:05d}",
            subject_id=f"pt{subject:04d}",
            segment=Segment(signal, AF_FS),
            labels={"af": af},
        ))
    return records
