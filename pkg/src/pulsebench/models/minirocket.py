"""MiniRocket-style random-convolution features.

84 fixed kernels of length 9 (every choice of three weight-2 taps among
nine, the rest -1, so each kernel sums to zero) are applied at a ladder of
dilations; each convolution is summarized by the proportion of positive
values (PPV) above per-kernel biases drawn from training-data quantiles.
Kernels are evaluated only where they fully overlap the series, which
makes the features exactly invariant to constant offsets of the data.

The dilation/bias budget is 119 combinations per kernel, for exactly
84 * 119 = 9,996 features.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from ..errors import InvalidInputError, InvalidSpecError

__all__ = [
    "KERNEL_LENGTH",
    "N_KERNELS",
    "N_SLOTS",
    "N_FEATURES",
    "MiniRocketConfig",
    "MiniRocketFitted",
    "enumerate_kernels",
    "minirocket_fit",
    "minirocket_transform",
]

KERNEL_LENGTH = 9
N_WEIGHT2 = 3
N_KERNELS = 84  # C(9, 3)
N_SLOTS = 119  # (dilation, bias) combinations per kernel
N_FEATURES = N_KERNELS * N_SLOTS
MAX_DILATION_CANDIDATES = 32


@dataclass(frozen=True)
class MiniRocketConfig:
    seed: int = 0


def enumerate_kernels() -> np.ndarray:
    """(84, 9) weight matrix; rows are the kernels in combination order."""
    kernels = np.full((N_KERNELS, KERNEL_LENGTH), -1.0)
    for row, combo in enumerate(itertools.combinations(range(KERNEL_LENGTH), N_WEIGHT2)):
        kernels[row, list(combo)] = 2.0
    return kernels


def _dilations(length: int) -> List[int]:
    """Exponential dilation ladder capped so the receptive field fits."""
    max_exp = np.log2((length - 1) / (KERNEL_LENGTH - 1))
    raw = [
        int(2 ** (j * max_exp / (MAX_DILATION_CANDIDATES - 1)))
        for j in range(MAX_DILATION_CANDIDATES)
    ]
    out: List[int] = []
    for d in raw:
        if d not in out:
            out.append(d)
    return out


def _slot_counts(n_dilations: int) -> List[int]:
    base, rem = divmod(N_SLOTS, n_dilations)
    return [base + (1 if i < rem else 0) for i in range(n_dilations)]


def _conv_valid(x: np.ndarray, d: int, combo: Tuple[int, int, int],
                tap_sum: np.ndarray) -> np.ndarray:
    """Zero-sum kernel response on the full-overlap region.

    With weights 2 at ``combo`` and -1 elsewhere the response equals
    3 * (sum of the three selected taps) - (sum of all nine taps).
    Taps enter as differences against the first tap, which cancels
    exactly, so a constant series yields a response of exactly 0.0.
    """
    n_valid = tap_sum.shape[-1]
    anchor = x[..., :n_valid]
    picked = np.zeros_like(tap_sum)
    for i in combo:
        if i:
            picked += x[..., i * d : i * d + n_valid] - anchor
    return 3.0 * picked - tap_sum


def _tap_sum(x: np.ndarray, d: int, length: int) -> np.ndarray:
    """Sum over all nine taps of (tap - first tap) on the valid region."""
    n_valid = length - (KERNEL_LENGTH - 1) * d
    anchor = x[..., :n_valid]
    out = np.zeros(x.shape[:-1] + (n_valid,))
    for i in range(1, KERNEL_LENGTH):
        out += x[..., i * d : i * d + n_valid] - anchor
    return out


@dataclass(frozen=True)
class MiniRocketFitted:
    length: int
    dilations: tuple
    slot_counts: tuple
    # biases[k][j]: quantile biases for kernel k at dilation j
    biases: tuple
    seed: int


def minirocket_fit(train_rows: np.ndarray, seed: int = 0) -> MiniRocketFitted:
    """Choose dilations for this length and draw biases from quantiles of
    per-kernel convolutions of seeded random training instances."""
    x = np.asarray(train_rows, dtype=np.float64)
    if x.ndim != 2:
        raise InvalidInputError(f"expected (n, length) batch, got shape {x.shape}")
    n, length = x.shape
    if length < KERNEL_LENGTH:
        raise InvalidInputError(f"series length {length} shorter than kernel ({KERNEL_LENGTH})")
    if n < 1:
        raise InvalidInputError("empty training batch")

    dils = _dilations(length)
    counts = _slot_counts(len(dils))
    combos = list(itertools.combinations(range(KERNEL_LENGTH), N_WEIGHT2))
    rng = np.random.default_rng(seed)
    instance_idx = rng.integers(0, n, size=(N_KERNELS, len(dils)))

    per_kernel: List[list] = [[None] * len(dils) for _ in range(N_KERNELS)]
    for j, d in enumerate(dils):
        qs = (np.arange(counts[j]) + 1.0) / (counts[j] + 1.0)
        for k, combo in enumerate(combos):
            inst = int(instance_idx[k, j])
            tap_sum = _tap_sum(x[inst], d, length)
            conv = _conv_valid(x[inst], d, combo, tap_sum)
            per_kernel[k][j] = np.quantile(conv, qs)
    return MiniRocketFitted(
        length=length, dilations=tuple(dils), slot_counts=tuple(counts),
        biases=tuple(tuple(row) for row in per_kernel), seed=seed,
    )


def minirocket_transform(batch: np.ndarray, fitted: MiniRocketFitted) -> np.ndarray:
    """(n, 9996) PPV feature matrix, kernel-major then dilation then bias."""
    x = np.asarray(batch, dtype=np.float64)
    if x.ndim != 2:
        raise InvalidInputError(f"expected (n, length) batch, got shape {x.shape}")
    n, length = x.shape
    if length != fitted.length:
        raise InvalidSpecError(
            f"batch length {length} differs from fitted length {fitted.length}"
        )
    combos = list(itertools.combinations(range(KERNEL_LENGTH), N_WEIGHT2))
    features = np.empty((n, N_FEATURES))
    # columns run kernel-major, then dilation, then bias quantile
    slot_start = np.concatenate([[0], np.cumsum(fitted.slot_counts)])
    for j, d in enumerate(fitted.dilations):
        tap_sum = _tap_sum(x, d, length)
        for k, combo in enumerate(combos):
            conv = _conv_valid(x, d, combo, tap_sum)
            base = k * N_SLOTS + slot_start[j]
            for i, b in enumerate(fitted.biases[k][j]):
                features[:, base + i] = np.count_nonzero(conv > b, axis=1) / length
    return features
