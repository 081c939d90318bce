"""Row-oriented dataset container shared by all models."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import InvalidInputError

__all__ = ["Dataset", "compute_feature_medians", "impute_with"]


@dataclass(frozen=True)
class Dataset:
    """Feature rows (or raw-series batch) with targets and subject ids.

    ``targets`` is (n,) for a single target or (n, k) for several (SBP and
    DBP are trained as separate columns).  NaN is allowed in ``rows`` so
    that imputation can happen after splitting; models reject NaN at fit
    time.
    """

    rows: np.ndarray
    targets: np.ndarray
    subject_ids: np.ndarray
    split_tag: str = ""
    feature_names: Optional[tuple] = field(default=None, compare=False)

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.float64)
        targets = np.asarray(self.targets, dtype=np.float64)
        subjects = np.asarray(self.subject_ids)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "subject_ids", subjects)
        if rows.ndim != 2:
            raise InvalidInputError(f"rows must be 2-d, got shape {rows.shape}")
        n = rows.shape[0]
        if targets.shape[0] != n or subjects.shape[0] != n:
            raise InvalidInputError(
                f"length mismatch: {n} rows, {targets.shape[0]} targets, "
                f"{subjects.shape[0]} subject ids"
            )
        if not np.all(np.isfinite(targets)):
            raise InvalidInputError("targets must be finite")

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def has_nan(self) -> bool:
        return bool(np.isnan(self.rows).any())

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices)
        return Dataset(
            self.rows[idx], self.targets[idx], self.subject_ids[idx],
            self.split_tag, self.feature_names,
        )

    def target_column(self, k: int) -> "Dataset":
        """Single-target view for models trained per output."""
        if self.targets.ndim == 1:
            if k != 0:
                raise InvalidInputError(f"dataset has one target, asked for column {k}")
            return self
        return Dataset(
            self.rows, self.targets[:, k], self.subject_ids,
            self.split_tag, self.feature_names,
        )


def compute_feature_medians(train: Dataset) -> np.ndarray:
    """Per-feature median over the training rows, NaN entries ignored."""
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        med = np.nanmedian(train.rows, axis=0)
    return np.where(np.isfinite(med), med, 0.0)


def impute_with(ds: Dataset, medians: np.ndarray) -> Dataset:
    """Replace NaN entries column-wise; medians come from the training set
    so test rows never leak their own statistics."""
    medians = np.asarray(medians, dtype=np.float64)
    if medians.shape != (ds.rows.shape[1],):
        raise InvalidInputError(
            f"medians shape {medians.shape} does not match {ds.rows.shape[1]} features"
        )
    rows = np.where(np.isnan(ds.rows), medians[None, :], ds.rows)
    return Dataset(rows, ds.targets, ds.subject_ids, ds.split_tag, ds.feature_names)
