"""Single-hidden-layer MLP trained with Adam, implemented on numpy.

Heads: 1 output (regression on MAE/MSE), 2 softmax outputs
(classification), or mean + log-variance (Gaussian negative log
likelihood).  Dropout is inverted (scaling at train time), which makes
plain inference mask-free and Monte-Carlo dropout a matter of re-enabling
the masks.  Everything is driven by explicit seeds; identical seed and
data give bit-identical weight trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import InvalidInputError, InvalidSpecError
from .dataset import Dataset

__all__ = [
    "MlpConfig",
    "MlpModel",
    "gnll_loss",
    "mlp_fit",
    "mlp_predict",
    "mlp_predict_mc_dropout",
    "mlp_loss_and_grads",
]

LOSSES = ("mae", "mse", "gnll", "crossentropy")
HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)


@dataclass(frozen=True)
class MlpConfig:
    hidden: int = 128
    dropout: float = 0.5
    lr: float = 0.01
    batch: int = 32
    loss: str = "mae"
    epochs: int = 200
    patience: int = 10
    seed: int = 0
    # optional per-class loss weights for imbalanced classification,
    # e.g. (1.0, 1.63) to upweight the minority class
    class_weights: Optional[tuple] = None

    def __post_init__(self):
        if not 0.0 <= self.dropout < 1.0:
            raise InvalidSpecError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.lr <= 0:
            raise InvalidSpecError(f"lr must be > 0, got {self.lr}")
        if self.loss not in LOSSES:
            raise InvalidSpecError(f"loss must be one of {LOSSES}, got {self.loss!r}")
        if self.hidden < 1 or self.batch < 1 or self.epochs < 1:
            raise InvalidSpecError("hidden, batch and epochs must be >= 1")

    @property
    def n_outputs(self) -> int:
        return 1 if self.loss in ("mae", "mse") else 2


def gnll_loss(mean, log_var, target) -> float:
    """Batch-mean Gaussian negative log likelihood in the log-variance
    parameterization (variance strictly positive by construction)."""
    mean = np.asarray(mean, dtype=np.float64)
    log_var = np.asarray(log_var, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if not (np.isfinite(mean).all() and np.isfinite(log_var).all() and np.isfinite(target).all()):
        raise InvalidInputError("gnll inputs must be finite")
    per = 0.5 * (log_var + (target - mean) ** 2 / np.exp(log_var)) + HALF_LOG_2PI
    return float(np.mean(per))


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def mlp_loss_and_grads(params: dict, x: np.ndarray, y: np.ndarray, loss: str,
                       dropout_mask: Optional[np.ndarray] = None,
                       class_weights: Optional[np.ndarray] = None):
    """Loss and exact gradients for one batch.

    ``dropout_mask`` is the pre-scaled inverted-dropout mask for the hidden
    layer (or None); passing it explicitly keeps the function deterministic
    so finite differences can probe it.
    """
    w1, b1, w2, b2 = params["w1"], params["b1"], params["w2"], params["b2"]
    n = x.shape[0]
    z1 = x @ w1 + b1
    h = np.maximum(z1, 0.0)
    hd = h if dropout_mask is None else h * dropout_mask
    out = hd @ w2 + b2

    if loss == "mse":
        r = out[:, 0] - y
        value = float(np.mean(r**2))
        d_out = (2.0 * r / n)[:, None]
    elif loss == "mae":
        r = out[:, 0] - y
        value = float(np.mean(np.abs(r)))
        d_out = (np.sign(r) / n)[:, None]
    elif loss == "gnll":
        mu, s = out[:, 0], out[:, 1]
        inv_var = np.exp(-s)
        r = mu - y
        value = float(np.mean(0.5 * (s + r**2 * inv_var) + HALF_LOG_2PI))
        d_out = np.stack([r * inv_var, 0.5 * (1.0 - r**2 * inv_var)], axis=1) / n
    elif loss == "crossentropy":
        labels = y.astype(int)
        p = _softmax(out)
        w = np.ones(n) if class_weights is None else class_weights[labels]
        value = float(np.mean(-w * np.log(np.maximum(p[np.arange(n), labels], 1e-300))))
        d_out = p.copy()
        d_out[np.arange(n), labels] -= 1.0
        d_out *= (w / n)[:, None]
    else:
        raise InvalidSpecError(f"unknown loss {loss!r}")

    d_hd = d_out @ w2.T
    d_h = d_hd if dropout_mask is None else d_hd * dropout_mask
    d_z1 = d_h * (z1 > 0.0)
    grads = {
        "w1": x.T @ d_z1,
        "b1": d_z1.sum(axis=0),
        "w2": hd.T @ d_out,
        "b2": d_out.sum(axis=0),
    }
    return value, grads


@dataclass
class MlpModel:
    cfg: MlpConfig
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    y_mean: float = 0.0
    y_std: float = 1.0
    train_loss_history: list = field(default_factory=list)
    val_loss_history: list = field(default_factory=list)

    @property
    def params(self) -> dict:
        return {"w1": self.w1, "b1": self.b1, "w2": self.w2, "b2": self.b2}

    def _forward(self, x: np.ndarray, mask: Optional[np.ndarray] = None) -> np.ndarray:
        h = np.maximum(x @ self.w1 + self.b1, 0.0)
        if mask is not None:
            h = h * mask
        return h @ self.w2 + self.b2

    def _standardize_targets(self, y: np.ndarray) -> np.ndarray:
        if self.cfg.loss == "crossentropy":
            return y
        return (y - self.y_mean) / self.y_std

    def _outputs_to_predictions(self, out: np.ndarray):
        if self.cfg.loss in ("mae", "mse"):
            return out[:, 0] * self.y_std + self.y_mean
        if self.cfg.loss == "gnll":
            mean = out[:, 0] * self.y_std + self.y_mean
            sigma = np.exp(0.5 * out[:, 1]) * self.y_std
            return mean, sigma
        return _softmax(out)[:, 1]  # probability of class 1


def _init_params(cfg: MlpConfig, n_features: int, rng: np.random.Generator) -> dict:
    lim1 = np.sqrt(6.0 / n_features)
    lim2 = np.sqrt(6.0 / cfg.hidden)
    return {
        "w1": rng.uniform(-lim1, lim1, size=(n_features, cfg.hidden)),
        "b1": np.zeros(cfg.hidden),
        "w2": rng.uniform(-lim2, lim2, size=(cfg.hidden, cfg.n_outputs)),
        "b2": np.zeros(cfg.n_outputs),
    }


def _eval_loss(model: MlpModel, x: np.ndarray, y: np.ndarray) -> float:
    value, _ = mlp_loss_and_grads(
        model.params, x, model._standardize_targets(y), model.cfg.loss,
        class_weights=None if model.cfg.class_weights is None
        else np.asarray(model.cfg.class_weights, dtype=np.float64),
    )
    return value


def mlp_fit(train: Dataset, cfg: MlpConfig, validation: Optional[Dataset] = None) -> MlpModel:
    """Train with Adam; with a validation set, stop after ``cfg.patience``
    epochs without improvement and restore the best weights."""
    x, y = train.rows, train.targets
    if y.ndim != 1:
        raise InvalidInputError("mlp_fit trains one target at a time; use target_column()")
    if np.isnan(x).any():
        raise InvalidInputError("training rows contain NaN; impute first")
    if cfg.loss == "crossentropy" and not np.all(np.isin(y, (0.0, 1.0))):
        raise InvalidInputError("classification targets must be 0/1")

    rng = np.random.default_rng(cfg.seed)
    params = _init_params(cfg, x.shape[1], rng)
    model = MlpModel(cfg=cfg, **params)
    if cfg.loss != "crossentropy":
        model.y_mean = float(np.mean(y))
        model.y_std = float(np.std(y)) or 1.0
    y_std = model._standardize_targets(y)
    cw = None if cfg.class_weights is None else np.asarray(cfg.class_weights, dtype=np.float64)

    adam_m = {k: np.zeros_like(v) for k, v in params.items()}
    adam_v = {k: np.zeros_like(v) for k, v in params.items()}
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    step = 0

    best_val = np.inf
    best_params = None
    stale = 0
    n = x.shape[0]
    for _epoch in range(cfg.epochs):
        order = rng.permutation(n)
        for lo in range(0, n, cfg.batch):
            idx = order[lo : lo + cfg.batch]
            xb, yb = x[idx], y_std[idx]
            mask = None
            if cfg.dropout > 0.0:
                keep = rng.random((len(idx), cfg.hidden)) >= cfg.dropout
                mask = keep / (1.0 - cfg.dropout)
            _, grads = mlp_loss_and_grads(model.params, xb, yb, cfg.loss, mask, cw)
            step += 1
            for k, g in grads.items():
                adam_m[k] = beta1 * adam_m[k] + (1 - beta1) * g
                adam_v[k] = beta2 * adam_v[k] + (1 - beta2) * g**2
                m_hat = adam_m[k] / (1 - beta1**step)
                v_hat = adam_v[k] / (1 - beta2**step)
                getattr(model, k)[...] -= cfg.lr * m_hat / (np.sqrt(v_hat) + eps)

        model.train_loss_history.append(_eval_loss(model, x, y))
        if validation is not None:
            val = _eval_loss(model, validation.rows, validation.targets)
            model.val_loss_history.append(val)
            if val < best_val - 1e-12:
                best_val = val
                best_params = {k: v.copy() for k, v in model.params.items()}
                stale = 0
            else:
                stale += 1
                if stale >= cfg.patience:
                    break
    if best_params is not None:
        for k, v in best_params.items():
            setattr(model, k, v)
    return model


def mlp_predict(model: MlpModel, rows: np.ndarray) -> np.ndarray:
    """Point predictions: de-standardized value for regression heads,
    class-1 probability for classification."""
    out = model._forward(np.asarray(rows, dtype=np.float64))
    pred = model._outputs_to_predictions(out)
    return pred[0] if model.cfg.loss == "gnll" else pred


def mlp_predict_components(model: MlpModel, rows: np.ndarray):
    """For GNLL heads: (mean, predicted sigma) per row."""
    if model.cfg.loss != "gnll":
        raise InvalidSpecError("components only defined for the gnll head")
    out = model._forward(np.asarray(rows, dtype=np.float64))
    return model._outputs_to_predictions(out)


def mlp_predict_mc_dropout(model: MlpModel, rows: np.ndarray, passes: int = 100, seed: int = 0):
    """Monte-Carlo dropout: run ``passes`` stochastic forward passes and
    report their mean and standard deviation per row."""
    if passes < 1:
        raise InvalidSpecError(f"passes must be >= 1, got {passes}")
    x = np.asarray(rows, dtype=np.float64)
    rng = np.random.default_rng(seed)
    q = model.cfg.dropout
    outs = np.empty((passes, x.shape[0]))
    for p in range(passes):
        mask = None
        if q > 0.0:
            mask = (rng.random((x.shape[0], model.cfg.hidden)) >= q) / (1.0 - q)
        out = model._forward(x, mask)
        pred = model._outputs_to_predictions(out)
        outs[p] = pred[0] if model.cfg.loss == "gnll" else pred
    return {"mean": outs.mean(axis=0), "std": outs.std(axis=0)}
