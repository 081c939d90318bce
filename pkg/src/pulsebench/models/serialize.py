"""Model persistence as versioned JSON.

Bulk weights are base64-encoded little-endian float64 so files stay
byte-stable across platforms.  Loading restores an object whose
predictions are bit-identical to the saved model's.
"""

from __future__ import annotations

import base64
import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from ..errors import DataFormatError
from .gpr import GprConfig, GprModel
from .linear import LogisticModel, RidgeModel
from .minirocket import N_SLOTS, MiniRocketFitted
from .mlp import MlpConfig, MlpModel

__all__ = ["save_model", "load_model", "FORMAT_VERSION"]

FORMAT_VERSION = 1


def _encode(arr: np.ndarray) -> dict:
    arr = np.ascontiguousarray(arr, dtype=np.dtype(arr.dtype).newbyteorder("<"))
    return {
        "dtype": arr.dtype.str,
        "shape": list(arr.shape),
        "data": base64.b64encode(arr.tobytes()).decode("ascii"),
    }


def _decode(obj: dict) -> np.ndarray:
    raw = base64.b64decode(obj["data"])
    arr = np.frombuffer(raw, dtype=np.dtype(obj["dtype"]))
    return arr.reshape(obj["shape"]).astype(np.dtype(obj["dtype"]).newbyteorder("="))


def _state_of(model) -> dict:
    if isinstance(model, MlpModel):
        return {
            "kind": "mlp",
            "config": asdict(model.cfg),
            "scalars": {"y_mean": model.y_mean, "y_std": model.y_std},
            "arrays": {k: _encode(v) for k, v in model.params.items()},
            "history": {
                "train_loss": model.train_loss_history,
                "val_loss": model.val_loss_history,
            },
        }
    if isinstance(model, GprModel):
        return {
            "kind": "gpr",
            "config": asdict(model.cfg),
            "arrays": {
                "x_train": _encode(model.x_train),
                "alpha": _encode(model.alpha),
                "chol": _encode(model.chol),
                "mean_coef": _encode(model.mean_coef),
            },
        }
    if isinstance(model, RidgeModel):
        return {
            "kind": "ridge",
            "scalars": {"intercept": model.intercept, "lam": model.lam},
            "arrays": {"weights": _encode(model.weights)},
        }
    if isinstance(model, LogisticModel):
        return {
            "kind": "logistic",
            "scalars": {
                "intercept": model.intercept,
                "n_iter": model.n_iter,
                "converged": model.converged,
            },
            "arrays": {"weights": _encode(model.weights)},
        }
    if isinstance(model, MiniRocketFitted):
        flat = np.concatenate([b for row in model.biases for b in row])
        return {
            "kind": "minirocket",
            "scalars": {"length": model.length, "seed": model.seed},
            "lists": {
                "dilations": list(model.dilations),
                "slot_counts": list(model.slot_counts),
            },
            "arrays": {"biases_flat": _encode(flat)},
        }
    raise DataFormatError(f"cannot serialize {type(model).__name__}")


def save_model(model, path) -> None:
    state = {"format_version": FORMAT_VERSION, **_state_of(model)}
    Path(path).write_text(json.dumps(state, indent=1, sort_keys=True))


def load_model(path):
    state = json.loads(Path(path).read_text())
    version = state.get("format_version")
    if version != FORMAT_VERSION:
        raise DataFormatError(f"unsupported model format version {version!r}")
    kind = state.get("kind")
    arrays = {k: _decode(v) for k, v in state.get("arrays", {}).items()}
    scalars = state.get("scalars", {})

    if kind == "mlp":
        cfg_dict = dict(state["config"])
        if cfg_dict.get("class_weights") is not None:
            cfg_dict["class_weights"] = tuple(cfg_dict["class_weights"])
        model = MlpModel(cfg=MlpConfig(**cfg_dict), **arrays)
        model.y_mean = scalars["y_mean"]
        model.y_std = scalars["y_std"]
        model.train_loss_history = state["history"]["train_loss"]
        model.val_loss_history = state["history"]["val_loss"]
        return model
    if kind == "gpr":
        return GprModel(cfg=GprConfig(**state["config"]), **arrays)
    if kind == "ridge":
        return RidgeModel(weights=arrays["weights"], intercept=scalars["intercept"],
                          lam=scalars["lam"])
    if kind == "logistic":
        return LogisticModel(weights=arrays["weights"], intercept=scalars["intercept"],
                             n_iter=int(scalars["n_iter"]), converged=bool(scalars["converged"]))
    if kind == "minirocket":
        dils = tuple(int(d) for d in state["lists"]["dilations"])
        counts = tuple(int(c) for c in state["lists"]["slot_counts"])
        flat = arrays["biases_flat"]
        biases, pos = [], 0
        for _k in range(len(flat) // N_SLOTS):
            row = []
            for c in counts:
                row.append(flat[pos : pos + c].copy())
                pos += c
            biases.append(tuple(row))
        return MiniRocketFitted(length=int(scalars["length"]), dilations=dils,
                                slot_counts=counts, biases=tuple(biases),
                                seed=int(scalars["seed"]))
    raise DataFormatError(f"unknown model kind {kind!r}")
