"""Exact Gaussian process regression with a squared-exponential kernel.

A linear (OLS) mean is subtracted first and the GP models the residuals.
Hyperparameters come either from an explicit config or from a small
validation-MAE grid search anchored at the residual scale and the median
pairwise distance.  Exact inference only; the row count is capped.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import InvalidInputError, InvalidSpecError, NumericalFailureError
from .dataset import Dataset

__all__ = ["GprConfig", "GprModel", "gpr_fit", "gpr_predict"]

MAX_EXACT_N = 5000
SIGNAL_FACTORS = (0.5, 1.0, 2.0)
LENGTH_FACTORS = (0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 10.0)
NOISE_FACTORS = (0.001, 0.01, 0.05, 0.1, 0.3)
JITTERS = (0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6)


@dataclass(frozen=True)
class GprConfig:
    signal_var: float
    lengthscale: float
    noise_var: float

    def __post_init__(self):
        if self.signal_var <= 0 or self.lengthscale <= 0 or self.noise_var <= 0:
            raise InvalidSpecError(
                f"signal_var, lengthscale, noise_var must be > 0, got "
                f"{self.signal_var}, {self.lengthscale}, {self.noise_var}"
            )


@dataclass
class GprModel:
    cfg: GprConfig
    x_train: np.ndarray
    alpha: np.ndarray  # K^-1 (y - m(X))
    chol: np.ndarray
    mean_coef: np.ndarray  # linear mean [intercept, slopes...]


def _sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = (a**2).sum(axis=1)[:, None] + (b**2).sum(axis=1)[None, :] - 2.0 * a @ b.T
    return np.maximum(d, 0.0)


def _kernel(a: np.ndarray, b: np.ndarray, cfg: GprConfig) -> np.ndarray:
    return cfg.signal_var * np.exp(-_sq_dists(a, b) / (2.0 * cfg.lengthscale**2))


def _linear_mean_fit(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    design = np.column_stack([np.ones(len(x)), x])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    return coef


def _linear_mean(x: np.ndarray, coef: np.ndarray) -> np.ndarray:
    return coef[0] + x @ coef[1:]


def _chol_with_jitter(k: np.ndarray) -> np.ndarray:
    for jitter in JITTERS:
        try:
            return np.linalg.cholesky(k + jitter * np.eye(len(k)))
        except np.linalg.LinAlgError:
            continue
    raise NumericalFailureError("kernel matrix not positive definite at max jitter")


def _fit_fixed(x: np.ndarray, resid: np.ndarray, cfg: GprConfig, mean_coef: np.ndarray) -> GprModel:
    k = _kernel(x, x, cfg) + cfg.noise_var * np.eye(len(x))
    chol = _chol_with_jitter(k)
    alpha = np.linalg.solve(chol.T, np.linalg.solve(chol, resid))
    return GprModel(cfg=cfg, x_train=x, alpha=alpha, chol=chol, mean_coef=mean_coef)


def gpr_fit(train: Dataset, cfg: Optional[GprConfig] = None,
            validation: Optional[Dataset] = None) -> GprModel:
    x, y = train.rows, train.targets
    if y.ndim != 1:
        raise InvalidInputError("gpr_fit trains one target at a time; use target_column()")
    if np.isnan(x).any():
        raise InvalidInputError("training rows contain NaN; impute first")
    if len(x) > MAX_EXACT_N:
        raise InvalidInputError(f"exact inference capped at {MAX_EXACT_N} rows, got {len(x)}")
    if cfg is None and validation is None:
        raise InvalidSpecError("provide either a config or a validation set for the grid search")

    mean_coef = _linear_mean_fit(x, y)
    resid = y - _linear_mean(x, mean_coef)
    if cfg is not None:
        return _fit_fixed(x, resid, cfg, mean_coef)

    sigma_y = float(np.std(resid)) or 1.0
    # median pairwise distance of (a subsample of) the training rows
    sub = x if len(x) <= 500 else x[np.random.default_rng(0).choice(len(x), 500, replace=False)]
    d = np.sqrt(_sq_dists(sub, sub))
    med = float(np.median(d[np.triu_indices(len(sub), k=1)])) or 1.0

    best = (np.inf, None)
    for sf in SIGNAL_FACTORS:
        for lf in LENGTH_FACTORS:
            for nf in NOISE_FACTORS:
                candidate = GprConfig(
                    signal_var=(sf * sigma_y) ** 2,
                    lengthscale=lf * med,
                    noise_var=(nf * sigma_y) ** 2,
                )
                try:
                    model = _fit_fixed(x, resid, candidate, mean_coef)
                except NumericalFailureError:
                    continue
                pred, _ = gpr_predict(model, validation.rows)
                mae = float(np.mean(np.abs(pred - validation.targets)))
                if mae < best[0]:
                    best = (mae, model)
    if best[1] is None:
        raise NumericalFailureError("no grid point produced a usable fit")
    return best[1]


def gpr_predict(model: GprModel, rows: np.ndarray):
    """Posterior mean and latent variance (noise-free) per row."""
    xq = np.asarray(rows, dtype=np.float64)
    ks = _kernel(xq, model.x_train, model.cfg)
    mean = _linear_mean(xq, model.mean_coef) + ks @ model.alpha
    v = np.linalg.solve(model.chol, ks.T)
    var = np.maximum(model.cfg.signal_var - (v**2).sum(axis=0), 0.0)
    return mean, var
