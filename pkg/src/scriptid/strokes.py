"""Canonical data model: stroke samples, point encoding, stroke file I/O, splitting.

A stroke is an (n, 2) float array of (x, y) points, y growing downward.
A sample is an ordered list of strokes with a class label.  The encoded
form is a (T, 3) array of (x, y, pen_start) feature vectors, where
pen_start is 1.0 exactly at the first point of each stroke.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError, InsufficientClass, InvalidSample, InvalidSplit

GRANULARITIES = ("char", "word")


@dataclass(frozen=True)
class StrokeSample:
    sample_id: str
    label: str
    strokes: tuple
    granularity: str = "char"

    def __post_init__(self):
        validate_sample(self)

    @property
    def n_points(self) -> int:
        return sum(len(s) for s in self.strokes)

    def all_points(self) -> np.ndarray:
        return np.concatenate([np.asarray(s, dtype=float) for s in self.strokes])


@dataclass(frozen=True)
class EncodedSequence:
    vectors: np.ndarray  # (T, 3) float64
    source_sample_id: str = ""


@dataclass(frozen=True)
class DatasetSplit:
    train: list
    validation: list
    test: list
    seed: int


def resample_polyline(points: np.ndarray, step: float) -> np.ndarray:
    """Resample a polyline at fixed arc-length steps, keeping both endpoints."""
    points = np.asarray(points, dtype=float)
    if len(points) < 2:
        return points.copy()
    seg = np.linalg.norm(np.diff(points, axis=0), axis=1)
    arc = np.concatenate([[0.0], np.cumsum(seg)])
    total = arc[-1]
    if total < step:
        return points[[0, -1]].copy()
    n = int(total / step)
    targets = np.arange(n + 1) * step
    if total - targets[-1] > 0.25 * step:
        targets = np.concatenate([targets, [total]])
    else:
        targets[-1] = total
    xs = np.interp(targets, arc, points[:, 0])
    ys = np.interp(targets, arc, points[:, 1])
    return np.column_stack([xs, ys])


def make_sample(sample_id, label, strokes, granularity="char") -> StrokeSample:
    """Build a StrokeSample from any nested point data, validating as we go."""
    arrays = tuple(np.asarray(s, dtype=float).reshape(-1, 2) for s in strokes)
    return StrokeSample(sample_id, str(label), arrays, granularity)


def validate_sample(sample: StrokeSample) -> None:
    if sample.granularity not in GRANULARITIES:
        raise InvalidSample(f"unknown granularity {sample.granularity!r}")
    if len(sample.strokes) == 0:
        raise InvalidSample("sample has no strokes")
    total = 0
    for s in sample.strokes:
        arr = np.asarray(s)
        if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 1:
            raise InvalidSample("each stroke must be a non-empty (n, 2) array")
        if not np.all(np.isfinite(arr)):
            raise InvalidSample("stroke contains non-finite coordinates")
        total += arr.shape[0]
    if total < 2:
        raise InvalidSample("sample must contain at least 2 points in total")


def has_duplicate_points(sample: StrokeSample) -> bool:
    """Cleanliness check: consecutive duplicate points within a stroke."""
    for s in sample.strokes:
        arr = np.asarray(s)
        if len(arr) > 1 and np.any(np.all(arr[1:] == arr[:-1], axis=1)):
            return True
    return False


def encode(sample: StrokeSample) -> EncodedSequence:
    """Flatten strokes into (x, y, pen_start) vectors; flag = 1 at stroke heads."""
    validate_sample(sample)
    parts = []
    for s in sample.strokes:
        arr = np.asarray(s, dtype=float)
        flags = np.zeros((len(arr), 1))
        flags[0, 0] = 1.0
        parts.append(np.hstack([arr, flags]))
    return EncodedSequence(np.concatenate(parts), sample.sample_id)


def decode(seq: EncodedSequence, label: str = "", granularity: str = "char") -> StrokeSample:
    """Inverse of encode: split at pen_start = 1 to reconstruct the strokes."""
    vec = np.asarray(seq.vectors, dtype=float)
    if vec.ndim != 2 or vec.shape[1] != 3 or len(vec) == 0:
        raise InvalidSample("encoded sequence must be a non-empty (T, 3) array")
    heads = np.flatnonzero(vec[:, 2] == 1.0)
    if len(heads) == 0 or heads[0] != 0:
        raise InvalidSample("first vector must carry pen_start = 1")
    bounds = list(heads) + [len(vec)]
    strokes = [vec[a:b, :2].copy() for a, b in zip(bounds[:-1], bounds[1:])]
    return make_sample(seq.source_sample_id, label, strokes, granularity)


# ---------------------------------------------------------------------------
# Stroke file format: line-delimited JSON, one sample per line.
# ---------------------------------------------------------------------------

def sample_to_json(sample: StrokeSample) -> str:
    obj = {
        "id": sample.sample_id,
        "label": sample.label,
        "granularity": sample.granularity,
        "strokes": [np.asarray(s, dtype=float).tolist() for s in sample.strokes],
    }
    return json.dumps(obj, separators=(",", ":"))


def sample_from_json(line: str) -> StrokeSample:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise DataError(f"malformed stroke file line: {exc}") from exc
    for key in ("id", "label", "granularity", "strokes"):
        if key not in obj:
            raise DataError(f"stroke file line missing key {key!r}")
    if any(len(s) == 0 for s in obj["strokes"]) or len(obj["strokes"]) == 0:
        raise DataError(f"sample {obj.get('id')!r} contains an empty stroke")
    try:
        return make_sample(obj["id"], obj["label"], obj["strokes"], obj["granularity"])
    except InvalidSample as exc:
        raise DataError(f"sample {obj.get('id')!r} invalid: {exc}") from exc


def write_stroke_file(path, samples: Iterable[StrokeSample]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for sample in samples:
            fh.write(sample_to_json(sample) + "\n")


def read_stroke_file(path) -> list:
    samples = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                samples.append(sample_from_json(line))
    return samples


# ---------------------------------------------------------------------------
# Stratified splitting
# ---------------------------------------------------------------------------

def split(dataset: Sequence[StrokeSample], fractions, seed: int) -> DatasetSplit:
    """Deterministic stratified train/validation/test split."""
    f_train, f_val, f_test = fractions
    if min(f_train, f_val, f_test) <= 0:
        raise InvalidSplit("split fractions must be positive")
    if abs(f_train + f_val + f_test - 1.0) > 1e-9:
        raise InvalidSplit("split fractions must sum to 1")

    by_label: dict = {}
    for s in dataset:
        by_label.setdefault(s.label, []).append(s)

    rng = np.random.default_rng(seed)
    parts: dict = {"train": [], "validation": [], "test": []}
    for label in sorted(by_label):
        group = by_label[label]
        if len(group) < 3:
            raise InsufficientClass(f"class {label!r} has {len(group)} samples; need >= 3")
        order = rng.permutation(len(group))
        n = len(group)
        n_train = max(1, int(round(f_train * n)))
        n_val = max(1, int(round(f_val * n)))
        if n_train + n_val >= n:
            n_train = n - 2
            n_val = 1
        chunks = (order[:n_train], order[n_train:n_train + n_val], order[n_train + n_val:])
        for name, idx in zip(("train", "validation", "test"), chunks):
            parts[name].extend(group[i] for i in idx)
    return DatasetSplit(parts["train"], parts["validation"], parts["test"], seed)
