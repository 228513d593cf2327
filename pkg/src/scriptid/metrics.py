"""Metrics reports and deterministic JSON output.

Reports are plain dicts dumped with sorted keys so reruns with the same
config and seed produce byte-identical files.  Wall-time fields are kept
out of the config digest (and can be stripped for comparisons).
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

WALL_TIME_KEYS = ("wall_time_s", "wall_time_ratio")


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


def config_digest(config: dict) -> str:
    return hashlib.sha256(canonical_json(config).encode("utf-8")).hexdigest()


def strip_wall_time(obj):
    """Recursively drop wall-time fields (for byte-comparison of reruns)."""
    if isinstance(obj, dict):
        return {k: strip_wall_time(v) for k, v in obj.items()
                if k not in WALL_TIME_KEYS}
    if isinstance(obj, list):
        return [strip_wall_time(v) for v in obj]
    return obj


def build_metrics(y_true, y_pred, classes, config: dict,
                  wall_time: float = 0.0) -> dict:
    classes = [str(c) for c in classes]
    index = {c: i for i, c in enumerate(classes)}
    k = len(classes)
    cm = np.zeros((k, k), dtype=int)
    for t, p in zip(y_true, y_pred):
        cm[index[str(t)], index[str(p)]] += 1
    total = int(cm.sum())
    accuracy = float(np.trace(cm) / total) if total else 0.0
    per_class = {}
    for i, c in enumerate(classes):
        tp = int(cm[i, i])
        fn = int(cm[i].sum() - tp)
        fp = int(cm[:, i].sum() - tp)
        per_class[c] = {
            "precision": tp / (tp + fp) if tp + fp else 0.0,
            "recall": tp / (tp + fn) if tp + fn else 0.0,
            "support": int(cm[i].sum()),
        }
    return {
        "accuracy": accuracy,
        "per_class": per_class,
        "confusion_matrix": cm.tolist(),
        "classes": classes,
        "sample_count": total,
        "wall_time_s": wall_time,
        "config_digest": config_digest(config),
    }


def write_report(path, report: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(canonical_json(report))
        fh.write("\n")
