"""Linear heads: ridge regression and logistic classification.

Ridge centers the data so the intercept is unpenalized, and switches to
the dual (Gram) form when features outnumber rows, which is the usual
situation after a MiniRocket transform.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from ..errors import InvalidInputError, InvalidSpecError

__all__ = ["RidgeModel", "ridge_fit", "LogisticModel", "logistic_fit"]

LAMBDA_FLOOR = 1e-8
LAMBDA_GRID = (1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1000.0)


@dataclass
class RidgeModel:
    weights: np.ndarray
    intercept: float
    lam: float

    def predict(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=np.float64) @ self.weights + self.intercept


def _solve_ridge(xc: np.ndarray, yc: np.ndarray, lam: float) -> np.ndarray:
    n, p = xc.shape
    if p <= n:
        return np.linalg.solve(xc.T @ xc + lam * np.eye(p), xc.T @ yc)
    # dual form: w = X^T (X X^T + lam I)^-1 y, identical to the primal
    # solution but sized by rows instead of features
    return xc.T @ np.linalg.solve(xc @ xc.T + lam * np.eye(n), yc)


def ridge_fit(x: np.ndarray, y: np.ndarray, lam: Optional[float] = None,
              validation: Optional[tuple] = None) -> RidgeModel:
    """Fit ridge; ``lam=None`` with a (rows, targets) validation pair grid
    searches the penalty by validation MAE, otherwise lam defaults to 1.0.

    Penalties below the floor are clipped up so the system stays solvable
    even for rank-deficient inputs.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 1 or len(x) != len(y):
        raise InvalidInputError(f"bad shapes: x {x.shape}, y {y.shape}")
    if np.isnan(x).any() or np.isnan(y).any():
        raise InvalidInputError("NaN in ridge inputs")
    x_mean = x.mean(axis=0)
    y_mean = float(y.mean())
    xc, yc = x - x_mean, y - y_mean

    def fit_at(lam_value: float) -> RidgeModel:
        lam_value = max(float(lam_value), LAMBDA_FLOOR)
        w = _solve_ridge(xc, yc, lam_value)
        return RidgeModel(weights=w, intercept=y_mean - float(x_mean @ w), lam=lam_value)

    if lam is not None:
        return fit_at(lam)
    if validation is None:
        return fit_at(1.0)
    xv, yv = validation
    best, best_mae = None, np.inf
    for cand in LAMBDA_GRID:
        model = fit_at(cand)
        mae = float(np.mean(np.abs(model.predict(xv) - yv)))
        if mae < best_mae:
            best, best_mae = model, mae
    return best


@dataclass
class LogisticModel:
    weights: np.ndarray
    intercept: float
    n_iter: int
    converged: bool

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        z = np.asarray(x, dtype=np.float64) @ self.weights + self.intercept
        return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))

    def predict(self, x: np.ndarray, threshold: float = 0.5) -> np.ndarray:
        return (self.predict_proba(x) >= threshold).astype(int)


def logistic_fit(x: np.ndarray, y: np.ndarray, l2: float = 1e-4,
                 tol: float = 1e-6, max_iter: int = 2000) -> LogisticModel:
    """Binary logistic regression, L-BFGS on the regularized mean log loss.

    The l2 penalty applies to the weights only; the intercept is free.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if not np.all(np.isin(y, (0.0, 1.0))):
        raise InvalidInputError("logistic targets must be 0/1")
    n, p = x.shape
    design = np.column_stack([x, np.ones(n)])
    reg_mask = np.ones(p + 1)
    reg_mask[-1] = 0.0  # intercept unpenalized

    def objective(theta):
        z = np.clip(design @ theta, -500, 500)
        # mean log loss via the stable log(1 + exp(.)) form
        loss = float(np.mean(np.logaddexp(0.0, z) - y * z))
        loss += 0.5 * l2 * float(np.sum((reg_mask * theta) ** 2))
        prob = 1.0 / (1.0 + np.exp(-z))
        grad = design.T @ (prob - y) / n + l2 * reg_mask * theta
        return loss, grad

    res = minimize(objective, np.zeros(p + 1), jac=True, method="L-BFGS-B",
                   options={"maxiter": max_iter, "gtol": tol, "ftol": 1e-12})
    theta = res.x
    return LogisticModel(weights=theta[:-1], intercept=float(theta[-1]),
                         n_iter=int(res.nit), converged=bool(res.success))
