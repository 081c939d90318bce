"""Segment storage, manifests, feature CSV export and split generation.

Storage is deliberately plain: a ``.f32`` file of little-endian float32
samples plus a JSON manifest carrying ids, subjects, byte offsets,
labels and an optional sha256 of the store.  Anyone holding a VitalDB or
DeepBeat export can convert it with a few lines of numpy and get
byte-exact, language-neutral files.

Splits implement three protocols: within-subject sampling (calibration),
subject-disjoint packing (calibration-free), and subject-disjoint
packing that additionally keeps a binary label ratio within 0.03 of the
global ratio in every split.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from .errors import DataFormatError, InfeasibleSplitError, InvalidInputError, InvalidSpecError
from .preprocessing import Segment

__all__ = [
    "SPLIT_TAGS",
    "ManifestEntry",
    "Manifest",
    "SegmentRecord",
    "SplitSpec",
    "save_segments",
    "load_manifest",
    "load_segments",
    "generate_split",
    "save_split",
    "load_split",
    "export_features",
    "import_features",
]

SPLIT_TAGS = ("train", "validation", "test")
SPLIT_MODES = ("subject_overlap", "subject_disjoint", "stratified_disjoint")
BYTES_PER_SAMPLE = 4  # float32 store
MANIFEST_VERSION = 1
STRATIFY_TOLERANCE = 0.03
# stratified repair may resize splits by this much (sample fraction) to
# reach a feasible class ratio
STRATIFY_SIZE_SLACK = 0.05


@dataclass(frozen=True)
class ManifestEntry:
    segment_id: str
    subject_id: str
    offset: int  # byte offset into the store
    labels: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.segment_id or not self.subject_id:
            raise DataFormatError("segment_id and subject_id must be non-empty")
        if self.offset < 0 or self.offset % BYTES_PER_SAMPLE:
            raise DataFormatError(
                f"{self.segment_id}: offset {self.offset} not a valid float32 boundary")


@dataclass(frozen=True)
class Manifest:
    name: str
    fs: float
    n_samples: int
    entries: tuple
    splits: Optional[dict] = None
    sha256: Optional[str] = None

    def __post_init__(self):
        if self.fs <= 0:
            raise DataFormatError(f"fs must be > 0, got {self.fs}")
        if self.n_samples < 1:
            raise DataFormatError(f"n_samples must be >= 1, got {self.n_samples}")
        ids = [e.segment_id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise DataFormatError("duplicate segment ids in manifest")
        if self.splits is not None:
            known = set(ids)
            for sid, tag in self.splits.items():
                if sid not in known:
                    raise DataFormatError(f"split references unknown segment id {sid!r}")
                if tag not in SPLIT_TAGS:
                    raise DataFormatError(f"unknown split tag {tag!r} for {sid!r}")

    @property
    def segment_ids(self) -> List[str]:
        return [e.segment_id for e in self.entries]


@dataclass(frozen=True)
class SegmentRecord:
    segment_id: str
    subject_id: str
    segment: Segment
    labels: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SplitSpec:
    mode: str
    train: float = 0.8
    validation: float = 0.1
    test: float = 0.1
    stratify_key: Optional[str] = None
    seed: int = 0

    def __post_init__(self):
        if self.mode not in SPLIT_MODES:
            raise InvalidSpecError(f"mode must be one of {SPLIT_MODES}, got {self.mode!r}")
        fracs = (self.train, self.validation, self.test)
        if min(fracs) <= 0:
            raise InvalidSpecError(f"fractions must be positive, got {fracs}")
        if sum(fracs) > 1.0 + 1e-9:
            raise InvalidSpecError(f"fractions sum to {sum(fracs)}, must be <= 1")
        if self.mode == "stratified_disjoint" and not self.stratify_key:
            raise InvalidSpecError("stratified_disjoint needs a stratify_key")

    @property
    def fractions(self) -> Dict[str, float]:
        return {"train": self.train, "validation": self.validation, "test": self.test}


def save_segments(records, name: str, store_path, manifest_path,
                  splits: Optional[dict] = None) -> Manifest:
    """Write records to a float32 store and a JSON manifest; returns the
    manifest.  float64 samples are narrowed to float32 on disk."""
    records = list(records)
    if not records:
        raise InvalidInputError("no records to save")
    fs = records[0].segment.fs
    n_samples = records[0].segment.samples.shape[0]
    entries = []
    blob = bytearray()
    for rec in records:
        if rec.segment.fs != fs:
            raise InvalidInputError(f"{rec.segment_id}: fs {rec.segment.fs} != {fs}")
        if rec.segment.samples.shape[0] != n_samples:
            raise InvalidInputError(
                f"{rec.segment_id}: length {rec.segment.samples.shape[0]} != {n_samples}")
        entries.append(ManifestEntry(segment_id=rec.segment_id,
                                     subject_id=rec.subject_id,
                                     offset=len(blob), labels=dict(rec.labels)))
        blob.extend(rec.segment.samples.astype("<f4").tobytes())
    digest = hashlib.sha256(bytes(blob)).hexdigest()
    manifest = Manifest(name=name, fs=float(fs), n_samples=int(n_samples),
                        entries=tuple(entries), splits=splits, sha256=digest)
    Path(store_path).write_bytes(bytes(blob))
    Path(manifest_path).write_text(_manifest_json(manifest))
    return manifest


def _manifest_json(m: Manifest) -> str:
    payload = {
        "format_version": MANIFEST_VERSION,
        "name": m.name,
        "fs": m.fs,
        "n_samples": m.n_samples,
        "sha256": m.sha256,
        "entries": [
            {"segment_id": e.segment_id, "subject_id": e.subject_id,
             "offset": e.offset, "labels": e.labels}
            for e in m.entries
        ],
    }
    if m.splits is not None:
        payload["splits"] = dict(sorted(m.splits.items()))
    return json.dumps(payload, indent=1, sort_keys=True)


def load_manifest(path) -> Manifest:
    try:
        payload = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DataFormatError(f"{path}: cannot read manifest ({exc})") from exc
    version = payload.get("format_version")
    if version != MANIFEST_VERSION:
        raise DataFormatError(f"{path}: unsupported manifest version {version!r}")
    try:
        entries = tuple(
            ManifestEntry(segment_id=str(e["segment_id"]),
                          subject_id=str(e["subject_id"]),
                          offset=int(e["offset"]),
                          labels=dict(e.get("labels", {})))
            for e in payload["entries"]
        )
        return Manifest(name=str(payload["name"]), fs=float(payload["fs"]),
                        n_samples=int(payload["n_samples"]), entries=entries,
                        splits=payload.get("splits"), sha256=payload.get("sha256"))
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"{path}: malformed manifest ({exc})") from exc


def load_segments(store_path, manifest_path,
                  expected_fs: Optional[float] = None) -> List[SegmentRecord]:
    """Read all segments addressed by the manifest; validates checksum,
    offsets, sample finiteness and (optionally) the sampling rate."""
    manifest = load_manifest(manifest_path)
    if expected_fs is not None and manifest.fs != expected_fs:
        raise DataFormatError(
            f"manifest fs {manifest.fs} does not match expected {expected_fs}")
    blob = Path(store_path).read_bytes()
    if manifest.sha256 is not None:
        digest = hashlib.sha256(blob).hexdigest()
        if digest != manifest.sha256:
            raise DataFormatError(
                f"{store_path}: sha256 mismatch (manifest {manifest.sha256[:12]}..., "
                f"store {digest[:12]}...)")
    nbytes = manifest.n_samples * BYTES_PER_SAMPLE
    records = []
    for entry in manifest.entries:
        end = entry.offset + nbytes
        if end > len(blob):
            raise DataFormatError(
                f"{entry.segment_id}: offset {entry.offset} + {nbytes} "
                f"exceeds store size {len(blob)}")
        samples = np.frombuffer(blob, dtype="<f4", count=manifest.n_samples,
                                offset=entry.offset).astype(np.float64)
        try:
            seg = Segment(samples=samples, fs=manifest.fs)
        except InvalidInputError as exc:
            raise DataFormatError(f"{entry.segment_id}: {exc}") from exc
        records.append(SegmentRecord(segment_id=entry.segment_id,
                                     subject_id=entry.subject_id,
                                     segment=seg, labels=dict(entry.labels)))
    return records


def _largest_remainder_counts(n: int, fractions: Dict[str, float]) -> Dict[str, int]:
    """Integer allocation of n items to tags, apportioned by fraction."""
    exact = {tag: n * frac for tag, frac in fractions.items()}
    counts = {tag: int(np.floor(v)) for tag, v in exact.items()}
    total_target = int(round(n * sum(fractions.values())))
    leftover = total_target - sum(counts.values())
    order = sorted(fractions, key=lambda t: (-(exact[t] - counts[t]), SPLIT_TAGS.index(t)))
    for tag in order[:leftover]:
        counts[tag] += 1
    return counts


def _groups_by_subject(manifest: Manifest) -> Dict[str, List[ManifestEntry]]:
    groups: Dict[str, List[ManifestEntry]] = {}
    for entry in manifest.entries:
        groups.setdefault(entry.subject_id, []).append(entry)
    return groups


def _split_subject_overlap(manifest: Manifest, spec: SplitSpec) -> Dict[str, str]:
    groups = _groups_by_subject(manifest)
    rng = np.random.default_rng(spec.seed)
    out: Dict[str, str] = {}
    for subject in sorted(groups):
        ids = sorted(e.segment_id for e in groups[subject])
        perm = rng.permutation(len(ids))
        shuffled = [ids[i] for i in perm]
        counts = _largest_remainder_counts(len(ids), spec.fractions)
        cursor = 0
        for tag in SPLIT_TAGS:
            for sid in shuffled[cursor : cursor + counts[tag]]:
                out[sid] = tag
            cursor += counts[tag]
    return out


def _shuffled_subjects_by_size(groups, rng) -> List[str]:
    subjects = sorted(groups)
    order = rng.permutation(len(subjects))
    shuffled = [subjects[i] for i in order]
    # stable sort keeps the shuffled order among equal-size subjects
    shuffled.sort(key=lambda s: -len(groups[s]))
    return shuffled


def _split_subject_disjoint(manifest: Manifest, spec: SplitSpec) -> Dict[str, str]:
    groups = _groups_by_subject(manifest)
    rng = np.random.default_rng(spec.seed)
    total = len(manifest.entries)
    targets = {tag: frac * total for tag, frac in spec.fractions.items()}
    assigned = {tag: 0 for tag in SPLIT_TAGS}
    out: Dict[str, str] = {}
    for subject in _shuffled_subjects_by_size(groups, rng):
        demand = {tag: targets[tag] - assigned[tag] for tag in SPLIT_TAGS}
        tag = max(SPLIT_TAGS, key=lambda t: (demand[t], -SPLIT_TAGS.index(t)))
        assigned[tag] += len(groups[subject])
        for entry in groups[subject]:
            out[entry.segment_id] = tag
    return out


def _subject_label_counts(groups, key) -> Dict[str, Tuple[int, int]]:
    """(n_segments, n_positive) per subject for a binary label key."""
    stats = {}
    for subject, entries in groups.items():
        pos = 0
        for entry in entries:
            if key not in entry.labels:
                raise InvalidInputError(
                    f"{entry.segment_id}: missing stratification label {key!r}")
            value = float(entry.labels[key])
            if value not in (0.0, 1.0):
                raise InvalidInputError(
                    f"{entry.segment_id}: stratification label must be 0/1, got {value}")
            pos += int(value)
        stats[subject] = (len(entries), pos)
    return stats


def _ratio_deviations(assignment: Dict[str, str], stats, global_ratio) -> Dict[str, float]:
    totals = {tag: 0 for tag in SPLIT_TAGS}
    positives = {tag: 0 for tag in SPLIT_TAGS}
    for subject, tag in assignment.items():
        n, p = stats[subject]
        totals[tag] += n
        positives[tag] += p
    out = {}
    for tag in SPLIT_TAGS:
        if totals[tag] == 0:
            out[tag] = np.inf
        else:
            out[tag] = abs(positives[tag] / totals[tag] - global_ratio)
    return out


def _split_stratified(manifest: Manifest, spec: SplitSpec) -> Dict[str, str]:
    groups = _groups_by_subject(manifest)
    stats = _subject_label_counts(groups, spec.stratify_key)
    total = sum(n for n, _ in stats.values())
    total_pos = sum(p for _, p in stats.values())
    global_ratio = total_pos / total
    rng = np.random.default_rng(spec.seed)

    # Build every split except the largest by ratio-greedy growth: add the
    # subject whose inclusion brings the split ratio closest to global,
    # then cut the growth trajectory at the prefix with the smallest
    # deviation whose size lands within the slack window around the
    # target.  With few single-class subjects the reachable ratios are
    # quantized, so the best size is often a subject short of (or past)
    # the nominal fraction; the window makes that choice available.  The
    # largest split takes the remainder.  Seed enters through the pool
    # order, which breaks ties between equally good candidates.
    slack = STRATIFY_SIZE_SLACK * total
    pool = _shuffled_subjects_by_size(groups, rng)
    remainder_tag = max(SPLIT_TAGS, key=lambda t: (spec.fractions[t], -SPLIT_TAGS.index(t)))
    build_tags = sorted((t for t in SPLIT_TAGS if t != remainder_tag),
                        key=lambda t: (spec.fractions[t], SPLIT_TAGS.index(t)))

    assignment: Dict[str, str] = {}
    used: set = set()
    for tag in build_tags:
        target = spec.fractions[tag] * total
        chosen: List[str] = []
        trace: List[Tuple[int, float]] = []  # (size, deviation) after each add
        size = pos = 0
        while True:
            best = best_dev = None
            for subject in pool:
                if subject in used or subject in chosen:
                    continue
                n, p = stats[subject]
                d = abs((pos + p) / (size + n) - global_ratio)
                if best is None or d < best_dev:
                    best, best_dev = subject, d
            if best is None or size + stats[best][0] > target + slack:
                break
            chosen.append(best)
            size += stats[best][0]
            pos += stats[best][1]
            trace.append((size, best_dev))
        in_window = [(dev, abs(s - target), i) for i, (s, dev) in enumerate(trace)
                     if target - slack <= s <= target + slack]
        if in_window:
            cut = min(in_window)[2] + 1
        elif trace:
            cut = min(range(len(trace)), key=lambda i: (abs(trace[i][0] - target), i)) + 1
        else:
            cut = 0
        for subject in chosen[:cut]:
            assignment[subject] = tag
            used.add(subject)
    for subject in pool:
        if subject not in used:
            assignment[subject] = remainder_tag

    # Local repair.  The ratio bound is the hard constraint; split sizes
    # only have to stay near the requested fractions.  Swaps preserve
    # sizes; moves trade up to STRATIFY_SIZE_SLACK of size error for
    # ratio feasibility (with few equal-sized single-class subjects the
    # reachable ratios are quantized, so a split sometimes has to shrink
    # or grow by one subject).  Progress is judged on the whole deviation
    # vector, worst split first, so fixing one split at a time counts.
    def dev_key():
        dev = _ratio_deviations(assignment, stats, global_ratio)
        return tuple(sorted(dev.values(), reverse=True))

    def sizes_ok():
        totals = {tag: 0 for tag in SPLIT_TAGS}
        for subject, tag in assignment.items():
            totals[tag] += stats[subject][0]
        return all(abs(totals[t] / total - spec.fractions[t]) <= STRATIFY_SIZE_SLACK
                   for t in SPLIT_TAGS)

    subjects = sorted(assignment)
    for _ in range(500):
        key = dev_key()
        if key[0] <= STRATIFY_TOLERANCE:
            break
        improved = False
        for a in subjects:
            for b in subjects:
                if assignment[a] == assignment[b]:
                    continue
                assignment[a], assignment[b] = assignment[b], assignment[a]
                if dev_key() < key:
                    improved = True
                    break
                assignment[a], assignment[b] = assignment[b], assignment[a]
            if improved:
                break
        if not improved:
            for a in subjects:
                origin = assignment[a]
                for tag in SPLIT_TAGS:
                    if tag == origin:
                        continue
                    assignment[a] = tag
                    if dev_key() < key and sizes_ok():
                        improved = True
                        break
                    assignment[a] = origin
                if improved:
                    break
        if not improved:
            break

    dev = _ratio_deviations(assignment, stats, global_ratio)
    if max(dev.values()) > STRATIFY_TOLERANCE:
        detail = ", ".join(f"{t}: {v:.3f}" for t, v in dev.items())
        raise InfeasibleSplitError(
            f"cannot keep {spec.stratify_key!r} ratio within "
            f"{STRATIFY_TOLERANCE} of {global_ratio:.3f} (deviations {detail})")

    out: Dict[str, str] = {}
    for subject, tag in assignment.items():
        for entry in groups[subject]:
            out[entry.segment_id] = tag
    return out


def generate_split(manifest: Manifest, spec: SplitSpec) -> Dict[str, str]:
    """Segment-id to split-tag assignment under the requested protocol.

    subject_overlap samples within each subject; subject_disjoint packs
    whole subjects into splits; stratified_disjoint additionally keeps
    each split's positive-label ratio within 0.03 of the global ratio.
    Deterministic for a given manifest and seed.
    """
    if not manifest.entries:
        raise InvalidInputError("manifest has no entries")
    if spec.mode == "subject_overlap":
        return _split_subject_overlap(manifest, spec)
    if spec.mode == "subject_disjoint":
        return _split_subject_disjoint(manifest, spec)
    return _split_stratified(manifest, spec)


def save_split(split: Dict[str, str], path) -> None:
    for sid, tag in split.items():
        if tag not in SPLIT_TAGS:
            raise InvalidInputError(f"unknown split tag {tag!r} for {sid!r}")
    Path(path).write_text(json.dumps(dict(sorted(split.items())), indent=1))


def load_split(path) -> Dict[str, str]:
    try:
        payload = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DataFormatError(f"{path}: cannot read split file ({exc})") from exc
    if not isinstance(payload, dict):
        raise DataFormatError(f"{path}: split file must be a JSON object")
    for sid, tag in payload.items():
        if tag not in SPLIT_TAGS:
            raise DataFormatError(f"{path}: unknown split tag {tag!r} for {sid!r}")
    return payload


def export_features(segment_ids, feature_names, matrix, path) -> None:
    """CSV with a segment_id column plus one named column per feature.

    Values are written with full round-trip precision; NaN or infinite
    cells are rejected (imputation belongs upstream).
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    segment_ids = list(segment_ids)
    feature_names = list(feature_names)
    if matrix.ndim != 2:
        raise InvalidInputError(f"expected a 2-d matrix, got shape {matrix.shape}")
    if matrix.shape != (len(segment_ids), len(feature_names)):
        raise InvalidInputError(
            f"matrix shape {matrix.shape} does not match {len(segment_ids)} ids "
            f"x {len(feature_names)} features")
    if not np.isfinite(matrix).all():
        bad = int(np.count_nonzero(~np.isfinite(matrix)))
        raise InvalidInputError(f"matrix contains {bad} non-finite cells")
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["segment_id"] + feature_names)
        for sid, row in zip(segment_ids, matrix):
            writer.writerow([sid] + [repr(float(v)) for v in row])


def import_features(path) -> Tuple[List[str], Tuple[str, ...], np.ndarray]:
    """Inverse of export_features: (segment_ids, feature_names, matrix)."""
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        rows = [row for row in reader if row]
    if not rows:
        raise DataFormatError(f"{path}: empty feature file")
    header = rows[0]
    if not header or header[0] != "segment_id":
        raise DataFormatError(f"{path}: first column must be segment_id")
    names = tuple(header[1:])
    ids: List[str] = []
    data = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise DataFormatError(
                f"{path}:{lineno}: expected {len(header)} cells, got {len(row)}")
        ids.append(row[0])
        try:
            data.append([float(v) for v in row[1:]])
        except ValueError as exc:
            raise DataFormatError(f"{path}:{lineno}: non-numeric cell ({exc})") from exc
    return ids, names, np.asarray(data, dtype=np.float64)
