import json

import numpy as np
import pytest

from scriptid import metrics


def test_canonical_json_is_order_independent():
    a = metrics.canonical_json({"b": 1, "a": [1, 2]})
    b = metrics.canonical_json({"a": [1, 2], "b": 1})
    assert a == b
    assert json.loads(a) == {"a": [1, 2], "b": 1}


def test_config_digest_changes_with_content():
    d1 = metrics.config_digest({"seed": 0})
    d2 = metrics.config_digest({"seed": 1})
    assert d1 != d2
    assert len(d1) == 64
    assert d1 == metrics.config_digest({"seed": 0})


def test_strip_wall_time_recurses():
    obj = {"accuracy": 1.0, "wall_time_s": 3.2,
           "nested": [{"wall_time_ratio": 0.5, "keep": True}]}
    out = metrics.strip_wall_time(obj)
    assert out == {"accuracy": 1.0, "nested": [{"keep": True}]}
    assert "wall_time_s" in obj  # input is not mutated


def test_build_metrics_confusion_and_per_class():
    y_true = ["a", "a", "a", "b", "b", "b"]
    y_pred = ["a", "a", "b", "b", "b", "a"]
    rep = metrics.build_metrics(y_true, y_pred, ["a", "b"], {"seed": 0},
                                wall_time=1.5)
    assert rep["confusion_matrix"] == [[2, 1], [1, 2]]
    assert rep["accuracy"] == pytest.approx(4 / 6)
    assert rep["per_class"]["a"]["precision"] == pytest.approx(2 / 3)
    assert rep["per_class"]["a"]["recall"] == pytest.approx(2 / 3)
    assert rep["per_class"]["a"]["support"] == 3
    assert rep["sample_count"] == 6
    assert rep["wall_time_s"] == 1.5


def test_build_metrics_handles_missing_predictions_class():
    rep = metrics.build_metrics(["a", "b"], ["a", "a"], ["a", "b"], {})
    assert rep["per_class"]["b"]["recall"] == 0.0
    assert rep["per_class"]["b"]["precision"] == 0.0


def test_write_report_roundtrip(tmp_path):
    rep = metrics.build_metrics(["a"], ["a"], ["a", "b"], {"k": 1})
    path = tmp_path / "metrics.json"
    metrics.write_report(path, rep)
    text = path.read_text()
    assert json.loads(text) == rep
    metrics.write_report(tmp_path / "again.json", rep)
    assert (tmp_path / "again.json").read_text() == text
