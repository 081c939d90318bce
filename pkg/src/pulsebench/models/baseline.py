"""Median baselines for BP regression.

The global baseline predicts the training median for every row; the
per-subject baseline predicts each subject's own training median, which is
the calibration-style reference the scaled error metric divides by.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInputError, InvalidSpecError
from .dataset import Dataset

__all__ = ["BaselinePrediction", "baseline_fit_predict"]


@dataclass(frozen=True)
class BaselinePrediction:
    predictions: np.ndarray
    # True where a test subject was absent from training and the global
    # median was used instead
    fallback_mask: np.ndarray

    @property
    def used_fallback(self) -> bool:
        return bool(self.fallback_mask.any())


def baseline_fit_predict(train: Dataset, test: Dataset, mode: str = "global") -> BaselinePrediction:
    """Median predictor; ``mode`` is ``global`` or ``per_subject``."""
    if mode not in ("global", "per_subject"):
        raise InvalidSpecError(f"unknown baseline mode {mode!r}")
    if train.n == 0:
        raise InvalidInputError("empty training set")
    y = train.targets
    global_median = np.median(y, axis=0)
    fallback = np.zeros(test.n, dtype=bool)

    if mode == "global":
        preds = np.broadcast_to(global_median, (test.n,) + np.shape(global_median)).copy()
        return BaselinePrediction(preds, fallback)

    by_subject = {}
    for sid in np.unique(train.subject_ids):
        by_subject[sid] = np.median(y[train.subject_ids == sid], axis=0)
    preds = np.empty((test.n,) + np.shape(global_median))
    for i, sid in enumerate(test.subject_ids):
        if sid in by_subject:
            preds[i] = by_subject[sid]
        else:
            preds[i] = global_median
            fallback[i] = True
    return BaselinePrediction(preds, fallback)
