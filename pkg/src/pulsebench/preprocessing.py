"""Raw-signal representation and the preprocessing filters.

A :class:`Segment` is one fixed-length PPG recording.  All filters are pure
functions returning new segments; nothing here mutates its input, so the
functions are safe to call from concurrent workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy import signal as sps

from .errors import InvalidInputError, InvalidSpecError

__all__ = [
    "Segment",
    "FilterSpec",
    "butterworth_filter",
    "nlms_adaptive_filter",
    "derivative",
    "preprocess_for_task",
]


@dataclass(frozen=True)
class Segment:
    """One PPG recording with sampling rate, subject id, and optional labels.

    Parameters
    ----------
    samples : ndarray
        Signal values in arbitrary amplitude units; must be finite.
    fs : float
        Sampling frequency in Hz; must be positive.
    subject_id : str
        Opaque subject identifier.
    labels : dict, optional
        Either ``{"sbp": mmHg, "dbp": mmHg}`` or ``{"af": bool}``.
    """

    samples: np.ndarray
    fs: float
    subject_id: str = ""
    labels: Optional[dict] = None
    segment_id: str = ""

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", samples)
        if self.fs <= 0:
            raise InvalidSpecError(f"fs must be > 0, got {self.fs}")
        if samples.ndim != 1:
            raise InvalidInputError(f"samples must be 1-d, got shape {samples.shape}")
        if len(samples) < 2 * self.fs:
            raise InvalidInputError(
                f"segment must span at least 2 s: {len(samples)} samples @ {self.fs} Hz"
            )
        if not np.all(np.isfinite(samples)):
            raise InvalidInputError("segment contains non-finite samples")

    @property
    def duration(self) -> float:
        return len(self.samples) / self.fs

    def with_samples(self, samples: np.ndarray) -> "Segment":
        """Copy of this segment with new sample values (same fs/ids/labels)."""
        return replace(self, samples=np.asarray(samples, dtype=np.float64))


@dataclass(frozen=True)
class FilterSpec:
    """Butterworth filter description.

    ``cutoffs_hz`` holds one frequency for lowpass/highpass and two
    (low < high) for bandpass.  ``order`` is the design order per band edge
    (scipy convention).  ``zero_phase`` selects forward-backward filtering,
    which squares the magnitude response and cancels phase.
    """

    kind: str  # bandpass | lowpass | highpass
    order: int
    cutoffs_hz: tuple = field(default=())
    zero_phase: bool = True

    def __post_init__(self):
        if self.kind not in ("bandpass", "lowpass", "highpass"):
            raise InvalidSpecError(f"unknown filter kind {self.kind!r}")
        cutoffs = tuple(float(c) for c in np.atleast_1d(self.cutoffs_hz))
        object.__setattr__(self, "cutoffs_hz", cutoffs)
        n_expected = 2 if self.kind == "bandpass" else 1
        if len(cutoffs) != n_expected:
            raise InvalidSpecError(
                f"{self.kind} needs {n_expected} cutoff(s), got {len(cutoffs)}"
            )
        if not 1 <= self.order <= 8:
            raise InvalidSpecError(f"order must be in [1, 8], got {self.order}")
        if self.kind == "bandpass" and not cutoffs[0] < cutoffs[1]:
            raise InvalidSpecError(f"bandpass requires low < high, got {cutoffs}")
        if any(c <= 0 for c in cutoffs):
            raise InvalidSpecError(f"cutoffs must be positive, got {cutoffs}")

    def validate_for_fs(self, fs: float) -> None:
        nyquist = fs / 2.0
        if any(c >= nyquist for c in self.cutoffs_hz):
            raise InvalidSpecError(
                f"cutoffs {self.cutoffs_hz} must lie strictly below Nyquist ({nyquist} Hz)"
            )

    def design_sos(self, fs: float) -> np.ndarray:
        """Second-order-section coefficients for this spec at sampling rate fs."""
        self.validate_for_fs(fs)
        wn = np.asarray(self.cutoffs_hz) / (fs / 2.0)
        btype = {"bandpass": "bandpass", "lowpass": "lowpass", "highpass": "highpass"}[self.kind]
        # SOS form keeps high-order designs stable at low cutoff ratios
        # (0.4 Hz on a 125 Hz signal is a 0.0064 normalized edge).
        return sps.butter(self.order, wn if self.kind == "bandpass" else wn[0], btype=btype, output="sos")


def butterworth_filter(seg: Segment, spec: FilterSpec) -> Segment:
    """Apply a Butterworth IIR filter to a segment.

    Zero-phase specs run the cascade forward and backward (squared magnitude
    response, no phase distortion) with odd-reflection padding of
    ``3 * (order + 1)`` samples to keep edge transients out of the window.
    """
    sos = spec.design_sos(seg.fs)
    x = seg.samples
    if spec.zero_phase:
        padlen = min(3 * (spec.order + 1), len(x) - 1)
        y = sps.sosfiltfilt(sos, x, padtype="odd", padlen=padlen)
    else:
        y = sps.sosfilt(sos, x)
    return seg.with_samples(y)


def nlms_adaptive_filter(
    seg: Segment, order: int = 5, mu: float = 0.5, eps: float = 1e-8
) -> Segment:
    """Normalized least-mean-squares filter with a constant-unity reference.

    The reference tap vector is all ones, so the filter tracks and removes
    the slowly varying baseline; the returned segment is the error signal
    ``e(n) = x(n) - w . u`` with the update
    ``w <- w + mu * e(n) * u / (eps + ||u||^2)``.
    """
    if order < 1:
        raise InvalidSpecError(f"order must be >= 1, got {order}")
    if not 0 < mu < 2:
        raise InvalidSpecError(f"mu must be in (0, 2), got {mu}")
    x = seg.samples
    if order >= len(x):
        raise InvalidSpecError(f"order {order} >= segment length {len(x)}")
    # With u = ones(order) only the weight sum matters; the scalar recursion
    # below is algebraically identical to the vector update.
    gain = mu * order / (eps + float(order))
    e = np.empty_like(x)
    w_sum = 0.0
    for n in range(len(x)):
        e[n] = x[n] - w_sum
        w_sum += gain * e[n]
    return seg.with_samples(e)


def derivative(seg: Segment, n: int = 1) -> Segment:
    """First or second time derivative by central differences.

    Interior points use the 3-point central stencil scaled by ``fs`` (first)
    or ``fs**2`` (second); endpoints fall back to one-sided differences so
    the output keeps the input length.
    """
    if n not in (1, 2):
        raise InvalidSpecError(f"derivative order must be 1 or 2, got {n}")
    x = seg.samples
    if len(x) < 5:
        raise InvalidInputError("derivative needs at least 5 samples")
    if n == 1:
        d = np.empty_like(x)
        d[1:-1] = (x[2:] - x[:-2]) * (seg.fs / 2.0)
        d[0] = (x[1] - x[0]) * seg.fs
        d[-1] = (x[-1] - x[-2]) * seg.fs
    else:
        d = np.empty_like(x)
        d[1:-1] = (x[2:] - 2.0 * x[1:-1] + x[:-2]) * seg.fs**2
        d[0] = (x[2] - 2.0 * x[1] + x[0]) * seg.fs**2
        d[-1] = (x[-1] - 2.0 * x[-2] + x[-3]) * seg.fs**2
    return seg.with_samples(d)


# Task presets: blood pressure uses one band-pass; atrial fibrillation uses
# low-pass then high-pass then baseline-tracking NLMS.
BP_BANDPASS = FilterSpec("bandpass", order=4, cutoffs_hz=(0.4, 7.0), zero_phase=True)
AF_LOWPASS = FilterSpec("lowpass", order=4, cutoffs_hz=(6.0,), zero_phase=True)
AF_HIGHPASS = FilterSpec("highpass", order=4, cutoffs_hz=(0.5,), zero_phase=True)


def preprocess_for_task(seg: Segment, task: str) -> Segment:
    """Run the task-specific preprocessing chain on one segment.

    ``bp``  -> 4th-order zero-phase band-pass 0.4-7 Hz.
    ``af``  -> low-pass 6 Hz, high-pass 0.5 Hz, then 5th-order NLMS with a
    unity reference.
    """
    if task == "bp":
        return butterworth_filter(seg, BP_BANDPASS)
    if task == "af":
        out = butterworth_filter(seg, AF_LOWPASS)
        out = butterworth_filter(out, AF_HIGHPASS)
        return nlms_adaptive_filter(out, order=5, mu=0.5)
    raise InvalidSpecError(f"unknown task {task!r} (expected 'bp' or 'af')")
