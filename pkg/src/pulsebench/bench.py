"""Config-driven benchmark runs.

A run wires one task, one input representation and one model into the
fixed pipeline preprocess -> represent -> split -> fit -> predict ->
evaluate, then writes four artifacts: the evaluation report (JSON), the
result table (text), test-set predictions (CSV) and a reproducibility
record.  Everything downstream of the config is deterministic, so the
same config and data produce byte-identical artifacts.  ``compare``
merges reports from independent runs into one ranked table.
"""

from __future__ import annotations

import hashlib
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from . import __version__
from .errors import (
    DataFormatError,
    InvalidInputError,
    InvalidSpecError,
    PulsebenchError,
    StageError,
)
from .preprocessing import Segment, preprocess_for_task
from .pulses import detect_pulses
from .morphology import MORPH_FEATURE_NAMES, segment_features
from .irregularity import IRREGULARITY_FEATURE_NAMES, irregularity_vector
from .transforms import cwt_scalogram, wpd
from .data_io import SPLIT_TAGS, SplitSpec, generate_split, load_manifest, load_segments
from .models.dataset import Dataset, compute_feature_medians, impute_with
from .models.baseline import baseline_fit_predict
from .models.mlp import MlpConfig, mlp_fit, mlp_predict, mlp_predict_mc_dropout
from .models.gpr import gpr_fit, gpr_predict
from .models.linear import logistic_fit, ridge_fit
from .models.minirocket import minirocket_fit, minirocket_transform
from .models.external import predict_external
from .evaluation import (
    EvalReport,
    evaluate_classification,
    evaluate_regression,
    report_to_json,
)

__all__ = [
    "TASKS",
    "REPRESENTATIONS",
    "MODELS",
    "RunConfig",
    "RunResult",
    "config_from_dict",
    "run",
    "compare",
]

REPORT_VERSION = 1

TASKS = ("bp_calib", "bp_calibfree", "af")
REPRESENTATIONS = ("raw", "cif", "wavelet", "irregularity", "cwt_features")
MODELS = ("baseline", "mlp", "mlp_gnll_mcdropout", "gpr", "minirocket_linear", "external")

FEATURE_REPRESENTATIONS = ("cif", "wavelet", "irregularity", "cwt_features")
# models that only ever produce point regressions
REGRESSION_ONLY_MODELS = ("baseline", "mlp_gnll_mcdropout", "gpr")

_SPLIT_MODE = {
    "bp_calib": "subject_overlap",
    "bp_calibfree": "subject_disjoint",
    "af": "stratified_disjoint",
}
_BASELINE_MODE = {"bp_calib": "per_subject", "bp_calibfree": "global"}

_HYPERPARAMETER_KEYS = (
    "hidden", "dropout", "lr", "batch", "epochs", "patience",
    "class_weights", "mc_passes", "ridge_lam", "logistic_l2", "workers",
)

REGRESSION_TABLE_HEADER = (
    "Model", "SBP MAE", "(MASE)", "A", "B", "C", "D",
    "DBP MAE", "(MASE)", "A", "B", "C", "D",
)
CLASSIFICATION_TABLE_HEADER = (
    "Model", "AUC", "F1 (0.5)",
    "Specificity (sensitivity > 0.8)", "Sensitivity (specificity > 0.8)",
    "MCC (sensitivity > 0.8)", "MCC (specificity > 0.8)",
)


@dataclass(frozen=True)
class RunConfig:
    """One benchmark run: task x representation x model, plus paths.

    ``data`` points at a dataset manifest; the sample store is expected
    next to it under the manifest's dataset name.  ``hyperparameters``
    accepts only documented keys and is passed through to the model
    layer.
    """

    task: str
    representation: str
    model: str
    data: str
    seed: int = 0
    out: str = "."
    external_predictions: Optional[str] = None
    hyperparameters: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.task not in TASKS:
            raise InvalidSpecError(f"task must be one of {TASKS}, got {self.task!r}")
        if self.representation not in REPRESENTATIONS:
            raise InvalidSpecError(
                f"representation must be one of {REPRESENTATIONS}, got {self.representation!r}")
        if self.model not in MODELS:
            raise InvalidSpecError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.model == "minirocket_linear" and self.representation != "raw":
            raise InvalidSpecError(
                f"minirocket_linear requires the raw representation, got {self.representation!r}")
        if self.model in ("mlp", "mlp_gnll_mcdropout", "gpr") \
                and self.representation not in FEATURE_REPRESENTATIONS:
            raise InvalidSpecError(
                f"{self.model} requires a feature representation "
                f"{FEATURE_REPRESENTATIONS}, got {self.representation!r}")
        if self.task == "af" and self.model in REGRESSION_ONLY_MODELS:
            raise InvalidSpecError(
                f"{self.model} only supports the regression tasks, not 'af'")
        if self.model == "external" and not self.external_predictions:
            raise InvalidSpecError("model 'external' needs an external_predictions path")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise InvalidSpecError(f"seed must be an integer, got {self.seed!r}")
        for key in self.hyperparameters:
            if key not in _HYPERPARAMETER_KEYS:
                raise InvalidSpecError(
                    f"unknown hyperparameter {key!r}; known keys: {_HYPERPARAMETER_KEYS}")

    @property
    def task_kind(self) -> str:
        return "af" if self.task == "af" else "bp"

    @property
    def targets(self) -> Tuple[str, ...]:
        return ("af",) if self.task == "af" else ("sbp", "dbp")

    @property
    def label(self) -> str:
        if self.model in ("baseline", "external"):
            return self.model
        return f"{self.representation}+{self.model}"


def config_from_dict(raw: Mapping, base_dir: Optional[str] = None) -> RunConfig:
    """Build a RunConfig from parsed JSON, rejecting unknown keys.

    Relative ``data``/``external_predictions`` paths resolve against
    ``base_dir`` when given (the CLI passes the dataset root).
    """
    if not isinstance(raw, Mapping):
        raise InvalidSpecError(f"config must be a JSON object, got {type(raw).__name__}")
    known = ("task", "representation", "model", "data", "seed", "out",
             "external_predictions", "hyperparameters")
    for key in raw:
        if key not in known:
            raise InvalidSpecError(f"unknown config key {key!r}; known keys: {known}")
    for key in ("task", "representation", "model", "data"):
        if key not in raw:
            raise InvalidSpecError(f"config is missing required key {key!r}")
    values = dict(raw)
    if base_dir:
        for key in ("data", "external_predictions"):
            if values.get(key) and not Path(values[key]).is_absolute():
                values[key] = str(Path(base_dir) / values[key])
    return RunConfig(**values)


@dataclass(frozen=True)
class RunResult:
    report: dict
    table: str
    paths: Dict[str, str]


def _config_digest(config: RunConfig, data_sha256: str) -> str:
    """Content hash of the run: config core + data checksum, no paths."""
    core = {
        "task": config.task,
        "representation": config.representation,
        "model": config.model,
        "seed": config.seed,
        "hyperparameters": {k: config.hyperparameters[k]
                            for k in sorted(config.hyperparameters)},
        "data_sha256": data_sha256,
    }
    blob = json.dumps(core, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------- represent

_REPRESENTATION_WIDTH = {"cif": 28, "wavelet": 9, "irregularity": 7, "cwt_features": 256}


def _representation_row(samples: np.ndarray, fs: float, task_kind: str,
                        representation: str) -> np.ndarray:
    """Preprocess one segment and reduce it to a feature (or raw) row."""
    seg = preprocess_for_task(Segment(samples=samples, fs=fs), task_kind)
    if representation == "raw":
        # per-segment z-score so raw-series models see shape, not offset
        x = seg.samples
        sd = x.std()
        if sd < 1e-12:
            return np.zeros_like(x)
        return (x - x.mean()) / sd
    if representation == "cif":
        values = segment_features(seg)
        return np.array([values[n] for n in MORPH_FEATURE_NAMES])
    if representation == "wavelet":
        packets = wpd(seg).packets
        energies = np.array([float(np.sum(p * p)) for p in packets])
        total = energies.sum()
        rel = energies / total if total > 1e-30 else np.zeros_like(energies)
        return np.concatenate([rel, [np.log1p(total)]])
    if representation == "irregularity":
        return irregularity_vector(detect_pulses(seg).intervals).values
    # cwt_features: per-scale mean and spread of the scalogram magnitude
    matrix = cwt_scalogram(seg).matrix
    return np.concatenate([matrix.mean(axis=1), matrix.std(axis=1)])


def _represent_worker(args) -> Tuple[int, Optional[np.ndarray]]:
    index, samples, fs, task_kind, representation = args
    try:
        return index, _representation_row(samples, fs, task_kind, representation)
    except PulsebenchError:
        return index, None


def _represent_all(records, task_kind: str, representation: str,
                   workers: int) -> Tuple[np.ndarray, int]:
    """Row per record, NaN rows for segments the pipeline rejects.

    Rows come back ordered by record position regardless of worker
    count, so the matrix is byte-stable.
    """
    width = _REPRESENTATION_WIDTH.get(representation, len(records[0].segment.samples))
    jobs = [(i, r.segment.samples, r.segment.fs, task_kind, representation)
            for i, r in enumerate(records)]
    matrix = np.full((len(records), width), np.nan)
    n_failed = 0
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunk = max(1, len(jobs) // (workers * 4))
            results = list(pool.map(_represent_worker, jobs, chunksize=chunk))
    else:
        results = [_represent_worker(j) for j in jobs]
    for index, row in results:
        if row is None:
            n_failed += 1
        else:
            matrix[index] = row
    if n_failed == len(records):
        raise InvalidInputError("every segment failed preprocessing or representation")
    return matrix, n_failed


# ---------------------------------------------------------------- datasets


def _split_for(manifest, config: RunConfig) -> Dict[str, str]:
    if manifest.splits:
        return dict(manifest.splits)
    spec = SplitSpec(
        mode=_SPLIT_MODE[config.task],
        stratify_key="af" if config.task == "af" else None,
        seed=config.seed,
    )
    return generate_split(manifest, spec)


def _build_datasets(manifest, matrix: np.ndarray, split: Dict[str, str],
                    config: RunConfig) -> Tuple[Dict[str, Dataset], Dict[str, list], Dict[str, int]]:
    """Per-tag datasets in manifest order, NaN rows median-imputed."""
    index_of = {e.segment_id: i for i, e in enumerate(manifest.entries)}
    ids = {tag: [e.segment_id for e in manifest.entries if split.get(e.segment_id) == tag]
           for tag in SPLIT_TAGS}
    for tag in SPLIT_TAGS:
        if not ids[tag]:
            raise InvalidInputError(f"split leaves the {tag} set empty")
    datasets = {}
    for tag in SPLIT_TAGS:
        rows = matrix[[index_of[i] for i in ids[tag]]]
        entries = [manifest.entries[index_of[i]] for i in ids[tag]]
        targets = np.array([[float(e.labels[t]) for t in config.targets] for e in entries])
        if targets.shape[1] == 1:
            targets = targets[:, 0]
        subjects = np.array([e.subject_id for e in entries])
        datasets[tag] = Dataset(rows=rows, targets=targets, subject_ids=subjects,
                                split_tag=tag)
    imputed = {tag: int(np.isnan(datasets[tag].rows).any(axis=1).sum())
               for tag in SPLIT_TAGS}
    medians = compute_feature_medians(datasets["train"])
    datasets = {tag: impute_with(ds, medians) for tag, ds in datasets.items()}
    return datasets, ids, imputed


def _standardized(datasets: Dict[str, Dataset]) -> Dict[str, Dataset]:
    """Z-score rows with training statistics (constant columns untouched)."""
    mu = datasets["train"].rows.mean(axis=0)
    sd = datasets["train"].rows.std(axis=0)
    sd = np.where(sd < 1e-12, 1.0, sd)
    return {tag: Dataset(rows=(ds.rows - mu) / sd, targets=ds.targets,
                         subject_ids=ds.subject_ids, split_tag=ds.split_tag)
            for tag, ds in datasets.items()}


# ---------------------------------------------------------------- fitting


def _mlp_config(config: RunConfig, loss: str) -> MlpConfig:
    hp = config.hyperparameters
    kwargs = {k: hp[k] for k in ("hidden", "dropout", "lr", "batch", "epochs", "patience")
              if k in hp}
    if "class_weights" in hp:
        kwargs["class_weights"] = tuple(hp["class_weights"])
    return MlpConfig(loss=loss, seed=config.seed, **kwargs)


def _predict_regression(config: RunConfig, datasets: Dict[str, Dataset],
                        test_ids: List[str]) -> np.ndarray:
    """(n_test, n_targets) predictions for the configured bp model."""
    n_targets = len(config.targets)
    out = np.empty((datasets["test"].n, n_targets))
    if config.model == "baseline":
        for k in range(n_targets):
            pred = baseline_fit_predict(datasets["train"].target_column(k),
                                        datasets["test"].target_column(k),
                                        mode=_BASELINE_MODE[config.task])
            out[:, k] = pred.predictions
        return out
    if config.model == "external":
        return _external_matrix(config, test_ids, n_targets)
    if config.model == "minirocket_linear":
        fitted = minirocket_fit(datasets["train"].rows, seed=config.seed)
        features = {tag: minirocket_transform(ds.rows, fitted)
                    for tag, ds in datasets.items()}
        mu = features["train"].mean(axis=0)
        sd = features["train"].std(axis=0)
        sd = np.where(sd < 1e-12, 1.0, sd)
        features = {tag: (f - mu) / sd for tag, f in features.items()}
        lam = config.hyperparameters.get("ridge_lam")
        for k in range(n_targets):
            model = ridge_fit(
                features["train"], datasets["train"].target_column(k).targets, lam=lam,
                validation=(features["validation"], datasets["validation"].target_column(k).targets))
            out[:, k] = model.predict(features["test"])
        return out
    std = _standardized(datasets)
    if config.model == "gpr":
        for k in range(n_targets):
            model = gpr_fit(std["train"].target_column(k),
                            validation=std["validation"].target_column(k))
            out[:, k], _ = gpr_predict(model, std["test"].rows)
        return out
    loss = "gnll" if config.model == "mlp_gnll_mcdropout" else "mae"
    for k in range(n_targets):
        model = mlp_fit(std["train"].target_column(k), _mlp_config(config, loss),
                        validation=std["validation"].target_column(k))
        if config.model == "mlp_gnll_mcdropout":
            passes = int(config.hyperparameters.get("mc_passes", 100))
            mc = mlp_predict_mc_dropout(model, std["test"].rows, passes=passes,
                                        seed=config.seed)
            out[:, k] = mc["mean"]
        else:
            out[:, k] = mlp_predict(model, std["test"].rows)
    return out


def _predict_classification(config: RunConfig, datasets: Dict[str, Dataset],
                            test_ids: List[str]) -> np.ndarray:
    """Class-1 scores on the test split for the configured af model."""
    if config.model == "external":
        return _external_matrix(config, test_ids, 1)[:, 0]
    if config.model == "minirocket_linear":
        fitted = minirocket_fit(datasets["train"].rows, seed=config.seed)
        features = {tag: minirocket_transform(ds.rows, fitted)
                    for tag, ds in datasets.items()}
        mu = features["train"].mean(axis=0)
        sd = features["train"].std(axis=0)
        sd = np.where(sd < 1e-12, 1.0, sd)
        l2 = float(config.hyperparameters.get("logistic_l2", 1e-4))
        model = logistic_fit((features["train"] - mu) / sd, datasets["train"].targets, l2=l2)
        return model.predict_proba((features["test"] - mu) / sd)
    std = _standardized(datasets)
    model = mlp_fit(std["train"], _mlp_config(config, "crossentropy"),
                    validation=std["validation"])
    return mlp_predict(model, std["test"].rows)


def _external_matrix(config: RunConfig, test_ids: List[str], n_targets: int) -> np.ndarray:
    values = predict_external(config.external_predictions, test_ids)
    matrix = values.reshape(-1, 1) if values.ndim == 1 else values
    if matrix.shape[1] != n_targets:
        raise InvalidInputError(
            f"task {config.task} needs {n_targets} prediction value(s) per segment, "
            f"file has {matrix.shape[1]}")
    return matrix


# ---------------------------------------------------------------- tables


def _format_table(header, rows) -> str:
    widths = [max(len(str(header[i])), *(len(r[i]) for r in rows)) if rows
              else len(str(header[i])) for i in range(len(header))]
    lines = ["  ".join(str(h).ljust(w) for h, w in zip(header, widths)).rstrip()]
    for r in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
    return "\n".join(lines) + "\n"


def _regression_cells(metrics: dict) -> List[str]:
    cells = []
    for target in ("sbp", "dbp"):
        r = metrics[target]["regression"]
        cells += [f"{r['mae']:.2f}", f"{r['mase']:.2f}",
                  f"{r['grade_a']:.3f}", f"{r['grade_b']:.3f}",
                  f"{r['grade_c']:.3f}", f"{r['grade_d']:.3f}"]
    return cells


def _classification_cells(metrics: dict) -> List[str]:
    c = metrics["af"]["classification"]
    return [f"{c['auc']:.3f}", f"{c['f1_at_half']:.3f}",
            f"{c['sp_at_se80']:.3f}", f"{c['se_at_sp80']:.3f}",
            f"{c['mcc_at_se80']:.3f}", f"{c['mcc_at_sp80']:.3f}"]


def _table_for(task: str, labelled_metrics: List[Tuple[str, dict]]) -> str:
    if task == "af":
        rows = [[label] + _classification_cells(m) for label, m in labelled_metrics]
        return _format_table(CLASSIFICATION_TABLE_HEADER, rows)
    rows = [[label] + _regression_cells(m) for label, m in labelled_metrics]
    return _format_table(REGRESSION_TABLE_HEADER, rows)


# ---------------------------------------------------------------- run


def run(config: RunConfig) -> RunResult:
    """Execute one benchmark run and write its artifacts.

    Any pipeline failure is re-raised as StageError tagged with the
    stage (load, split, represent, fit, evaluate, write) so the CLI can
    report where the run died.
    """
    try:
        manifest = load_manifest(config.data)
        store = Path(config.data).parent / f"{manifest.name}.f32"
        records = load_segments(store, config.data)
        for entry in manifest.entries:
            for target in config.targets:
                if target not in entry.labels:
                    raise InvalidInputError(
                        f"{entry.segment_id}: missing label {target!r} for task {config.task}")
    except PulsebenchError as exc:
        raise StageError("load", exc) from exc
    except OSError as exc:
        raise StageError("load", exc) from exc

    try:
        split = _split_for(manifest, config)
    except PulsebenchError as exc:
        raise StageError("split", exc) from exc

    try:
        workers = int(config.hyperparameters.get("workers", 1))
        matrix, n_failed = _represent_all(records, config.task_kind,
                                          config.representation, workers)
        datasets, ids, imputed = _build_datasets(manifest, matrix, split, config)
    except PulsebenchError as exc:
        raise StageError("represent", exc) from exc

    try:
        if config.task == "af":
            scores = _predict_classification(config, datasets, ids["test"])
        else:
            predictions = _predict_regression(config, datasets, ids["test"])
    except PulsebenchError as exc:
        raise StageError("fit", exc) from exc

    try:
        metrics: Dict[str, dict] = {}
        if config.task == "af":
            labels = datasets["test"].targets.astype(int)
            metrics["af"] = json.loads(report_to_json(
                evaluate_classification(labels, scores)))
        else:
            for k, target in enumerate(config.targets):
                base = baseline_fit_predict(datasets["train"].target_column(k),
                                            datasets["test"].target_column(k),
                                            mode=_BASELINE_MODE[config.task])
                metrics[target] = json.loads(report_to_json(evaluate_regression(
                    datasets["test"].target_column(k).targets,
                    predictions[:, k], base.predictions)))
    except PulsebenchError as exc:
        raise StageError("evaluate", exc) from exc

    digest = _config_digest(config, manifest.sha256)
    report = {
        "format_version": REPORT_VERSION,
        "task": config.task,
        "representation": config.representation,
        "model": config.model,
        "label": config.label,
        "seed": config.seed,
        "config_hash": digest,
        "dataset": {"name": manifest.name, "sha256": manifest.sha256,
                    "n_segments": len(manifest.entries)},
        "split_sizes": {tag: len(ids[tag]) for tag in SPLIT_TAGS},
        "rows_imputed": imputed,
        "segments_failed": n_failed,
        "metrics": metrics,
    }
    table = _table_for(config.task, [(config.label, metrics)])

    try:
        paths = _write_artifacts(config, report, table, ids["test"],
                                 scores if config.task == "af" else predictions)
    except (PulsebenchError, OSError) as exc:
        raise StageError("write", exc) from exc
    return RunResult(report=report, table=table, paths=paths)


def _write_artifacts(config: RunConfig, report: dict, table: str,
                     test_ids: List[str], predictions: np.ndarray) -> Dict[str, str]:
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{config.task}_{config.representation}_{config.model}_s{config.seed}"

    report_path = out / f"{stem}.report.json"
    report_path.write_text(json.dumps(report, indent=1, sort_keys=True) + "\n",
                           encoding="utf-8")
    table_path = out / f"{stem}.table.txt"
    table_path.write_text(table, encoding="utf-8")

    pred_path = out / f"{stem}.predictions.csv"
    header = ["segment_id"] + [f"{t}_pred" for t in config.targets]
    lines = [",".join(header)]
    matrix = np.atleast_2d(np.asarray(predictions, dtype=np.float64))
    if matrix.shape[0] == 1 and len(test_ids) > 1:
        matrix = matrix.T
    for sid, row in zip(test_ids, matrix):
        lines.append(",".join([sid] + [repr(float(v)) for v in row]))
    pred_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    record = {
        "config_hash": report["config_hash"],
        "config": {
            "task": config.task, "representation": config.representation,
            "model": config.model, "seed": config.seed, "data": str(config.data),
            "out": str(config.out),
            "external_predictions": config.external_predictions,
            "hyperparameters": {k: config.hyperparameters[k]
                                for k in sorted(config.hyperparameters)},
        },
        "versions": {
            "pulsebench": __version__,
            "python": sys.version.split()[0],
            "numpy": np.__version__,
        },
    }
    record_path = out / f"{stem}.run.json"
    record_path.write_text(json.dumps(record, indent=1, sort_keys=True) + "\n",
                           encoding="utf-8")
    return {"report": str(report_path), "table": str(table_path),
            "predictions": str(pred_path), "record": str(record_path)}


# ---------------------------------------------------------------- compare


def compare(report_paths: List[str]) -> Tuple[str, dict]:
    """Merge >= 2 same-task run reports into one ranked table.

    Regression runs sort by SBP MASE ascending, classification runs by
    AUC descending; the winner's row is marked.  Returns (table text,
    summary dict).
    """
    if len(report_paths) < 2:
        raise InvalidSpecError(
            f"compare needs at least two reports, got {len(report_paths)}")
    reports = []
    for path in report_paths:
        try:
            payload = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise InvalidInputError(f"cannot read report {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{path}: not valid JSON ({exc})") from exc
        for key in ("format_version", "task", "label", "metrics"):
            if key not in payload:
                raise DataFormatError(f"{path}: missing report key {key!r}")
        if payload["format_version"] != REPORT_VERSION:
            raise DataFormatError(
                f"{path}: unsupported report version {payload['format_version']}")
        reports.append((str(path), payload))

    tasks = sorted({p["task"] for _, p in reports})
    if len(tasks) > 1:
        raise InvalidInputError(f"cannot compare runs of different tasks: {tasks}")
    task = tasks[0]

    if task == "af":
        metric_name = "auc"
        def sort_key(item):
            return (-item[1]["metrics"]["af"]["classification"]["auc"], item[1]["label"])
    else:
        metric_name = "sbp_mase"
        def sort_key(item):
            return (item[1]["metrics"]["sbp"]["regression"]["mase"], item[1]["label"])
    ordered = sorted(reports, key=sort_key)

    labelled = []
    ranking = []
    for rank, (path, payload) in enumerate(ordered):
        label = payload["label"] + ("  <- best" if rank == 0 else "")
        labelled.append((label, payload["metrics"]))
        entry = {"label": payload["label"], "source": path,
                 "config_hash": payload.get("config_hash"),
                 "metrics": payload["metrics"]}
        ranking.append(entry)
    table = _table_for(task, labelled)
    summary = {
        "format_version": REPORT_VERSION,
        "task": task,
        "sorted_by": metric_name,
        "best": ordered[0][1]["label"],
        "ranking": ranking,
    }
    return table, summary
