"""Plug-in path for predictions produced outside this package.

Lets externally trained models (deep CNNs and the like) enter the
evaluation pipeline as a CSV of per-segment predictions joined by id.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from ..errors import DataFormatError

__all__ = ["load_external_predictions", "predict_external"]


def load_external_predictions(path) -> dict:
    """Read (segment_id, prediction[, second value]) rows.

    The first row may be a header (detected by a non-numeric second
    column).  Duplicate ids are rejected.
    """
    path = Path(path)
    out: dict = {}
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 2:
                raise DataFormatError(f"{path}:{lineno}: need at least id and prediction")
            sid = row[0].strip()
            try:
                values = tuple(float(c) for c in row[1:] if c.strip() != "")
            except ValueError:
                if lineno == 1:
                    continue  # header row
                raise DataFormatError(f"{path}:{lineno}: non-numeric prediction {row[1:]!r}")
            if sid in out:
                raise DataFormatError(f"{path}: duplicate segment id {sid!r}")
            out[sid] = values
    if not out:
        raise DataFormatError(f"{path}: no prediction rows")
    return out


def predict_external(path, expected_ids) -> np.ndarray:
    """Predictions aligned to ``expected_ids``; (n,) when the file has one
    value per row, (n, k) otherwise."""
    table = load_external_predictions(path)
    missing = [sid for sid in expected_ids if sid not in table]
    if missing:
        shown = ", ".join(missing[:10])
        more = "" if len(missing) <= 10 else f" (+{len(missing) - 10} more)"
        raise DataFormatError(f"{path}: missing predictions for ids: {shown}{more}")
    widths = {len(table[sid]) for sid in expected_ids}
    if len(widths) != 1:
        raise DataFormatError(f"{path}: inconsistent column counts {sorted(widths)}")
    width = widths.pop()
    rows = np.array([table[sid] for sid in expected_ids], dtype=np.float64)
    return rows[:, 0] if width == 1 else rows
