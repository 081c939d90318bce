"""Regression and classification metrics plus the grading protocols.

The regression side reports MAE, MASE against a median baseline and
error-grade fractions (A: within 5 mmHg, B: within 6, C: within 7,
D: worse).  The classification side reports tie-aware AUC, F1 at the
naive 0.5 threshold and sensitivity/specificity/MCC pairs at thresholds
selected to clear 0.8 on the complementary metric.

AUC uses average ranks built from integer start/count arithmetic, which
makes it exactly equal to the pairwise statistic
P(score+ > score-) + 0.5 P(tie).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .errors import InvalidInputError, UndefinedMetricError

__all__ = [
    "ConfusionMetrics",
    "ThresholdSelection",
    "RegressionReport",
    "ClassificationReport",
    "EvalReport",
    "mae",
    "mase",
    "ieee_grade",
    "confusion_metrics",
    "roc_auc",
    "select_threshold",
    "evaluate_regression",
    "evaluate_classification",
    "report_to_json",
    "report_to_table",
]

GRADE_NAMES = ("A", "B", "C", "D")
# grade upper bounds in mmHg; closed on the right, D catches the rest
GRADE_BOUNDS = (5.0, 6.0, 7.0)


def _pair(y, y_hat):
    y = np.asarray(y, dtype=np.float64)
    y_hat = np.asarray(y_hat, dtype=np.float64)
    if y.ndim != 1 or y_hat.ndim != 1:
        raise InvalidInputError("expected 1-d arrays")
    if y.shape != y_hat.shape:
        raise InvalidInputError(f"length mismatch: {y.shape[0]} vs {y_hat.shape[0]}")
    if y.shape[0] < 1:
        raise InvalidInputError("need at least one observation")
    if not (np.isfinite(y).all() and np.isfinite(y_hat).all()):
        raise InvalidInputError("values must be finite")
    return y, y_hat


def _binary(labels) -> np.ndarray:
    arr = np.asarray(labels)
    if arr.ndim != 1 or arr.shape[0] < 1:
        raise InvalidInputError("labels must be a non-empty 1-d array")
    out = arr.astype(np.float64)
    if not np.all(np.isin(out, (0.0, 1.0))):
        raise InvalidInputError("labels must be 0/1")
    return out.astype(np.int64)


def mae(y, y_hat) -> float:
    """Mean absolute error."""
    y, y_hat = _pair(y, y_hat)
    return float(np.mean(np.abs(y - y_hat)))


def mase(y, y_hat, baseline_y_hat) -> float:
    """Mean absolute scaled error: model MAE over baseline MAE on the
    same rows.  The baseline is typically a training-median predictor,
    global or per subject depending on the calibration protocol."""
    denom = mae(y, baseline_y_hat)
    if denom == 0.0:
        raise UndefinedMetricError("baseline MAE is 0; MASE undefined")
    return mae(y, y_hat) / denom


def ieee_grade(errors) -> dict:
    """Fractions of absolute errors falling in grades A-D.

    A: e <= 5, B: 5 < e <= 6, C: 6 < e <= 7, D: e > 7 (boundaries are
    closed on the upper side).
    """
    e = np.asarray(errors, dtype=np.float64)
    if e.ndim != 1 or e.shape[0] < 1:
        raise InvalidInputError("errors must be a non-empty 1-d array")
    if not np.isfinite(e).all() or np.any(e < 0):
        raise InvalidInputError("errors must be finite and nonnegative")
    n = e.shape[0]
    a = np.count_nonzero(e <= GRADE_BOUNDS[0])
    b = np.count_nonzero(e <= GRADE_BOUNDS[1]) - a
    c = np.count_nonzero(e <= GRADE_BOUNDS[2]) - a - b
    d = n - a - b - c
    return {"A": a / n, "B": b / n, "C": c / n, "D": d / n}


@dataclass(frozen=True)
class ConfusionMetrics:
    tp: int
    tn: int
    fp: int
    fn: int
    se: float
    sp: float
    f1: float
    mcc: float
    flags: tuple = ()


def confusion_metrics(labels, predictions) -> ConfusionMetrics:
    """Sensitivity, specificity, F1 and Matthews correlation from binary
    labels and binary predictions.

    Undefined ratios (single-class labels, no predicted positives) come
    back as NaN with a flag; a zero MCC denominator yields MCC = 0 with
    the ``mcc_denominator_zero`` flag.
    """
    lab = _binary(labels)
    pred = _binary(predictions)
    if lab.shape != pred.shape:
        raise InvalidInputError("labels and predictions differ in length")

    tp = int(np.count_nonzero((lab == 1) & (pred == 1)))
    tn = int(np.count_nonzero((lab == 0) & (pred == 0)))
    fp = int(np.count_nonzero((lab == 0) & (pred == 1)))
    fn = int(np.count_nonzero((lab == 1) & (pred == 0)))

    flags = []
    se = tp / (tp + fn) if tp + fn else float("nan")
    if tp + fn == 0:
        flags.append("se_undefined")
    sp = tn / (tn + fp) if tn + fp else float("nan")
    if tn + fp == 0:
        flags.append("sp_undefined")
    f1 = 2 * tp / (2 * tp + fp + fn) if 2 * tp + fp + fn else float("nan")
    if 2 * tp + fp + fn == 0:
        flags.append("f1_undefined")

    # integer products keep the numerator exact before the final division
    denom_sq = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if denom_sq == 0:
        mcc = 0.0
        flags.append("mcc_denominator_zero")
    else:
        mcc = (tp * tn - fp * fn) / math.sqrt(denom_sq)
    return ConfusionMetrics(tp=tp, tn=tn, fp=fp, fn=fn, se=se, sp=sp,
                            f1=f1, mcc=mcc, flags=tuple(flags))


def roc_auc(labels, scores) -> float:
    """Area under the ROC curve with half credit for score ties.

    Computed as the average-rank statistic; the rank sums stay exact in
    floating point (they are multiples of 0.5 far below 2**53), so the
    result matches the brute-force pairwise definition bit for bit.
    """
    lab = _binary(labels)
    s = np.asarray(scores, dtype=np.float64)
    if s.shape != lab.shape:
        raise InvalidInputError("labels and scores differ in length")
    if not np.isfinite(s).all():
        raise InvalidInputError("scores must be finite")
    n_pos = int(np.count_nonzero(lab == 1))
    n_neg = lab.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("AUC needs at least one positive and one negative")

    _, inverse, counts = np.unique(s, return_inverse=True, return_counts=True)
    starts = np.concatenate(([0], np.cumsum(counts[:-1])))
    avg_rank = starts + (counts + 1) / 2.0  # 1-based average rank per tie group
    rank_sum = float(np.sum(avg_rank[inverse[lab == 1]]))
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


@dataclass(frozen=True)
class ThresholdSelection:
    threshold: float
    target: str
    level: float
    achieved: float
    confusion: ConfusionMetrics


def select_threshold(labels, scores, target: str = "se",
                     level: float = 0.8) -> ThresholdSelection:
    """Pick the score threshold whose sensitivity (or specificity) is
    closest to ``level`` while strictly exceeding it.

    Candidates are the distinct score values with the rule
    score >= threshold -> positive.  Ties on the metric go to the lower
    threshold.  If no candidate clears the level the best achievable
    value is reported in the raised error.
    """
    if target not in ("se", "sp"):
        raise InvalidInputError(f"target must be 'se' or 'sp', got {target!r}")
    lab = _binary(labels)
    s = np.asarray(scores, dtype=np.float64)
    if s.shape != lab.shape:
        raise InvalidInputError("labels and scores differ in length")
    if not np.isfinite(s).all():
        raise InvalidInputError("scores must be finite")

    best: Optional[ThresholdSelection] = None
    best_any = -np.inf
    for thr in np.unique(s):
        cm = confusion_metrics(lab, (s >= thr).astype(np.int64))
        metric = cm.se if target == "se" else cm.sp
        if np.isnan(metric):
            continue
        best_any = max(best_any, metric)
        if metric > level:
            better = best is None or metric < best.achieved or (
                metric == best.achieved and thr < best.threshold)
            if better:
                best = ThresholdSelection(threshold=float(thr), target=target,
                                          level=level, achieved=metric,
                                          confusion=cm)
    if best is None:
        raise UndefinedMetricError(
            f"no threshold reaches {target} > {level}; best achievable {best_any:.4f}")
    return best


@dataclass(frozen=True)
class RegressionReport:
    mae: float
    mase: float
    grade_a: float
    grade_b: float
    grade_c: float
    grade_d: float

    def __post_init__(self):
        total = self.grade_a + self.grade_b + self.grade_c + self.grade_d
        if abs(total - 1.0) > 1e-9:
            raise InvalidInputError(f"grade fractions sum to {total}, not 1")
        if min(self.grade_a, self.grade_b, self.grade_c, self.grade_d) < 0:
            raise InvalidInputError("grade fractions must be nonnegative")

    @property
    def grades(self) -> dict:
        return {"A": self.grade_a, "B": self.grade_b,
                "C": self.grade_c, "D": self.grade_d}


@dataclass(frozen=True)
class ClassificationReport:
    auc: float
    f1_at_half: float
    se_at_sp80: float
    sp_at_se80: float
    mcc_at_se80: float
    mcc_at_sp80: float
    threshold_se80: float
    threshold_sp80: float

    def __post_init__(self):
        for name in ("auc", "f1_at_half"):
            v = getattr(self, name)
            if not np.isnan(v) and not 0.0 <= v <= 1.0:
                raise InvalidInputError(f"{name} must lie in [0, 1], got {v}")
        for name in ("mcc_at_se80", "mcc_at_sp80"):
            v = getattr(self, name)
            if not -1.0 <= v <= 1.0:
                raise InvalidInputError(f"{name} must lie in [-1, 1], got {v}")


@dataclass(frozen=True)
class EvalReport:
    regression: Optional[RegressionReport] = None
    classification: Optional[ClassificationReport] = None

    def __post_init__(self):
        if self.regression is None and self.classification is None:
            raise InvalidInputError("report needs at least one section")


def evaluate_regression(y, y_hat, baseline_y_hat) -> EvalReport:
    """MAE, MASE against the supplied baseline predictions, and IEEE
    grade fractions of the model's absolute errors."""
    y, y_hat = _pair(y, y_hat)
    grades = ieee_grade(np.abs(y - y_hat))
    reg = RegressionReport(
        mae=mae(y, y_hat),
        mase=mase(y, y_hat, baseline_y_hat),
        grade_a=grades["A"], grade_b=grades["B"],
        grade_c=grades["C"], grade_d=grades["D"],
    )
    return EvalReport(regression=reg)


def evaluate_classification(labels, scores) -> EvalReport:
    """AUC, F1 at the naive 0.5 threshold, and Se/Sp/MCC at thresholds
    selected for specificity > 0.8 and sensitivity > 0.8."""
    lab = _binary(labels)
    s = np.asarray(scores, dtype=np.float64)
    sel_se = select_threshold(lab, s, target="se")
    sel_sp = select_threshold(lab, s, target="sp")
    cls = ClassificationReport(
        auc=roc_auc(lab, s),
        f1_at_half=confusion_metrics(lab, (s >= 0.5).astype(np.int64)).f1,
        se_at_sp80=sel_sp.confusion.se,
        sp_at_se80=sel_se.confusion.sp,
        mcc_at_se80=sel_se.confusion.mcc,
        mcc_at_sp80=sel_sp.confusion.mcc,
        threshold_se80=sel_se.threshold,
        threshold_sp80=sel_sp.threshold,
    )
    return EvalReport(classification=cls)


def report_to_json(report: EvalReport) -> str:
    payload = {}
    if report.regression is not None:
        payload["regression"] = asdict(report.regression)
    if report.classification is not None:
        payload["classification"] = asdict(report.classification)
    return json.dumps(payload, indent=1, sort_keys=True)


def _aligned(headers, values) -> str:
    cells = [f"{v:.4f}" if isinstance(v, float) else str(v) for v in values]
    widths = [max(len(h), len(c)) for h, c in zip(headers, cells)]
    head = "  ".join(h.rjust(w) for h, w in zip(headers, widths))
    row = "  ".join(c.rjust(w) for c, w in zip(cells, widths))
    return head + "\n" + row


def report_to_table(report: EvalReport) -> str:
    """Aligned-text rendering, one block per populated section."""
    blocks = []
    if report.regression is not None:
        r = report.regression
        blocks.append(_aligned(
            ("MAE", "MASE", "GradeA", "GradeB", "GradeC", "GradeD"),
            (r.mae, r.mase, r.grade_a, r.grade_b, r.grade_c, r.grade_d)))
    if report.classification is not None:
        c = report.classification
        blocks.append(_aligned(
            ("AUC", "F1@0.5", "Se(Sp>0.8)", "Sp(Se>0.8)",
             "MCC(Se>0.8)", "MCC(Sp>0.8)"),
            (c.auc, c.f1_at_half, c.se_at_sp80, c.sp_at_se80,
             c.mcc_at_se80, c.mcc_at_sp80)))
    return "\n\n".join(blocks)
