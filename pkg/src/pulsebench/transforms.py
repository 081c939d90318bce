"""Time-frequency representations: wavelet packets, CWT scalograms, and the
dilated causal convolution primitive.

The Daubechies filter bank is derived here by spectral factorization rather
than imported, so the decomposition has no dependency beyond numpy/scipy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, Optional

import numpy as np
from scipy.signal import fftconvolve

from .errors import InvalidInputError, InvalidSpecError
from .preprocessing import Segment

__all__ = [
    "daubechies_filter",
    "WaveletPacketCoeffs",
    "wpd",
    "wpd_inverse",
    "Scalogram",
    "cwt_scalogram",
    "scalogram_to_image",
    "bilinear_resize",
    "causal_conv",
]


@lru_cache(maxsize=None)
def daubechies_filter(p: int = 6) -> np.ndarray:
    """Orthonormal Daubechies scaling filter with p vanishing moments.

    Spectral factorization: roots of the binomial polynomial
    P(y) = sum_k C(p-1+k, k) y^k are mapped to z-plane pairs (z, 1/z); the
    in-circle root of each pair joins the (1+z)^p factor, and the result is
    normalized to sum sqrt(2).  Filter length is 2p.
    """
    if p < 1:
        raise InvalidSpecError(f"need p >= 1 vanishing moments, got {p}")
    binom = np.array([math.comb(p - 1 + k, k) for k in range(p)], dtype=np.float64)
    yroots = np.roots(binom[::-1]) if p > 1 else np.array([])
    poly = np.array([1.0 + 0.0j])
    for _ in range(p):
        poly = np.convolve(poly, [1.0, 1.0])
    for y in yroots:
        # y = (2 - z - 1/z)/4  =>  z^2 - (2 - 4y) z + 1 = 0
        zpair = np.roots([1.0, -(2.0 - 4.0 * y), 1.0])
        poly = np.convolve(poly, [1.0, -zpair[np.argmin(np.abs(zpair))]])
    h = np.real(poly)
    return h * (np.sqrt(2.0) / h.sum())


def _qmf(h: np.ndarray) -> np.ndarray:
    g = h[::-1].copy()
    g[1::2] *= -1.0
    return g


def _analysis_step(x: np.ndarray, filt: np.ndarray) -> np.ndarray:
    n = len(x)
    idx = (np.arange(0, n, 2)[:, None] + np.arange(len(filt))[None, :]) % n
    return x[idx] @ filt


def _synthesis_step(a: np.ndarray, d: np.ndarray, h: np.ndarray, g: np.ndarray) -> np.ndarray:
    n = 2 * len(a)
    idx = (np.arange(0, n, 2)[:, None] + np.arange(len(h))[None, :]) % n
    x = np.zeros(n)
    np.add.at(x, idx, a[:, None] * h[None, :] + d[:, None] * g[None, :])
    return x


@dataclass(frozen=True)
class WaveletPacketCoeffs:
    """Full packet tree at one level; packets in breadth-first node order
    (node 2i = low-pass child, 2i+1 = high-pass child)."""

    level: int
    packets: List[np.ndarray]
    orig_len: int
    fs: float
    wavelet_p: int = 6

    def __post_init__(self):
        if len(self.packets) != 2**self.level:
            raise InvalidInputError(
                f"expected {2**self.level} packets, got {len(self.packets)}"
            )

    @property
    def flattened(self) -> np.ndarray:
        return np.concatenate(self.packets)

    @property
    def energy(self) -> float:
        return float(sum(np.sum(p**2) for p in self.packets))


def wpd(seg: Segment, wavelet: str = "db6", level: int = 3) -> WaveletPacketCoeffs:
    """Full wavelet packet decomposition with periodic boundary handling.

    The input is zero-padded to a multiple of 2**level, which keeps the
    periodized filter bank orthonormal (energy-preserving) for any input
    length.
    """
    if wavelet != "db6":
        raise InvalidSpecError(f"only db6 supported, got {wavelet!r}")
    if level < 1:
        raise InvalidSpecError(f"level must be >= 1, got {level}")
    h = daubechies_filter(6)
    x = seg.samples
    if len(x) < len(h) * 2**level:
        raise InvalidInputError(
            f"need at least {len(h) * 2**level} samples for level {level}, got {len(x)}"
        )
    g = _qmf(h)
    block = 2**level
    padded_len = ((len(x) + block - 1) // block) * block
    x = np.concatenate([x, np.zeros(padded_len - len(x))])

    nodes = [x]
    for _ in range(level):
        nxt = []
        for node in nodes:
            nxt.append(_analysis_step(node, h))
            nxt.append(_analysis_step(node, g))
        nodes = nxt
    return WaveletPacketCoeffs(level=level, packets=nodes, orig_len=seg.samples.size, fs=seg.fs)


def wpd_inverse(coeffs: WaveletPacketCoeffs) -> np.ndarray:
    """Invert the packet tree back to samples, truncated to the original
    length."""
    h = daubechies_filter(coeffs.wavelet_p)
    g = _qmf(h)
    nodes = list(coeffs.packets)
    for _ in range(coeffs.level):
        nodes = [
            _synthesis_step(nodes[i], nodes[i + 1], h, g)
            for i in range(0, len(nodes), 2)
        ]
    return nodes[0][: coeffs.orig_len]


# generalized Morse wavelet, beta = gamma = 3; peak angular frequency is
# (beta/gamma)**(1/gamma) = 1 and the spectrum is normalized to 2 at peak
MORSE_BETA = 3.0
MORSE_GAMMA = 3.0
WAVELET_SUPPORT = 1024
N_SCALES = 128
FREQ_MIN_HZ = 0.1
FREQ_MAX_FRACTION = 0.8  # of Nyquist


def _morse_spectrum(omega: np.ndarray) -> np.ndarray:
    amp = 2.0 * (np.e * MORSE_GAMMA / MORSE_BETA) ** (MORSE_BETA / MORSE_GAMMA)
    out = np.zeros_like(omega)
    pos = omega > 0
    out[pos] = amp * omega[pos] ** MORSE_BETA * np.exp(-(omega[pos] ** MORSE_GAMMA))
    return out


def _morse_time_wavelet(scale: float) -> np.ndarray:
    """Complex analytic wavelet sampled on a centered 1024-point support."""
    m = WAVELET_SUPPORT
    omega = 2.0 * np.pi * np.fft.fftfreq(m)
    spec = _morse_spectrum(scale * omega)
    return np.fft.fftshift(np.fft.ifft(spec))


@dataclass(frozen=True)
class Scalogram:
    """CWT magnitudes, scales on rows (ascending pseudo-frequency)."""

    matrix: np.ndarray
    scales_hz: np.ndarray
    image: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        f = np.asarray(self.scales_hz, dtype=np.float64)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "scales_hz", f)
        if m.ndim != 2 or m.shape[0] != len(f):
            raise InvalidInputError(f"matrix {m.shape} does not match {len(f)} scales")
        if len(f) != N_SCALES:
            raise InvalidInputError(f"expected {N_SCALES} scales, got {len(f)}")
        if m.size and m.min() < 0:
            raise InvalidInputError("magnitudes must be nonnegative")


def cwt_scalogram(seg: Segment, n_scales: int = N_SCALES) -> Scalogram:
    """Morse-wavelet scalogram over log-spaced pseudo-frequencies.

    Frequencies span [0.1 Hz, 0.8 * Nyquist]; each row is the magnitude of
    the convolution of the signal with the scaled analytic wavelet.
    """
    if n_scales != N_SCALES:
        raise InvalidSpecError(f"scale count is fixed at {N_SCALES}")
    x = seg.samples
    if len(x) < 64:
        raise InvalidInputError(f"need at least 64 samples, got {len(x)}")
    freqs = np.geomspace(FREQ_MIN_HZ, FREQ_MAX_FRACTION * seg.fs / 2.0, n_scales)
    rows = np.empty((n_scales, len(x)))
    for i, f_hz in enumerate(freqs):
        # peak of psi(s*omega) falls at omega = 1/s rad/sample
        scale = seg.fs / (2.0 * np.pi * f_hz)
        w = _morse_time_wavelet(scale)
        kernel = np.conj(w[::-1])  # correlation with the wavelet
        rows[i] = np.abs(fftconvolve(x, kernel, mode="same"))
    return Scalogram(matrix=rows, scales_hz=freqs)


def bilinear_resize(m: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resample with corner alignment (endpoints map to endpoints)."""
    m = np.asarray(m, dtype=np.float64)
    h, w = m.shape
    ys = np.linspace(0.0, h - 1.0, out_h) if out_h > 1 else np.zeros(1)
    xs = np.linspace(0.0, w - 1.0, out_w) if out_w > 1 else np.zeros(1)
    y0 = np.clip(np.floor(ys).astype(int), 0, h - 1)
    x0 = np.clip(np.floor(xs).astype(int), 0, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    top = m[np.ix_(y0, x0)] * (1 - fx) + m[np.ix_(y0, x1)] * fx
    bot = m[np.ix_(y1, x0)] * (1 - fx) + m[np.ix_(y1, x1)] * fx
    return top * (1 - fy) + bot * fy


def scalogram_to_image(s: Scalogram, size: int = 224) -> np.ndarray:
    """uint8 RGB raster: min-max to [0, 255], bilinear resize, 3 channels.

    A constant scalogram maps to the all-zero image.
    """
    m = s.matrix
    lo, hi = float(m.min()), float(m.max())
    norm = np.zeros_like(m) if hi == lo else (m - lo) * (255.0 / (hi - lo))
    resized = bilinear_resize(norm, size, size)
    plane = np.clip(np.rint(resized), 0, 255).astype(np.uint8)
    return np.repeat(plane[:, :, None], 3, axis=2)


def save_scalogram_png(s: Scalogram, path) -> None:
    from PIL import Image

    Image.fromarray(scalogram_to_image(s), mode="RGB").save(path, format="PNG")


def causal_conv(x: np.ndarray, w: np.ndarray, d: int = 1) -> np.ndarray:
    """Dilated causal convolution, y(t) = sum_i w[i] * x(t - d*i).

    Missing history is zero, so the output has the input's length and y(t)
    never depends on samples after t.
    """
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 1 or len(w) < 1:
        raise InvalidSpecError("kernel must be a nonempty 1-d array")
    if d < 1:
        raise InvalidSpecError(f"dilation must be >= 1, got {d}")
    y = np.zeros_like(x)
    for i, wi in enumerate(w):
        shift = d * i
        if shift == 0:
            y += wi * x
        elif shift < len(x):
            y[shift:] += wi * x[:-shift]
    return y
