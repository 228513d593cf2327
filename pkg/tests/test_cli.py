import json
import os

import numpy as np
import pytest
from click.testing import CliRunner

from scriptid import metrics, raster, synth
from scriptid.cli import main


@pytest.fixture(scope="module")
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def tiny_dataset(tmp_path_factory, runner):
    out = tmp_path_factory.mktemp("data")
    cfg = out / "gen.json"
    cfg.write_text(json.dumps({
        "seed": 0, "chars_per_class": 20, "words_per_class": 6,
        "word_length_range": [2, 4],
    }))
    res = runner.invoke(main, ["gen", "--config", str(cfg), "--out", str(out)])
    assert res.exit_code == 0, res.output
    return out


@pytest.fixture(scope="module")
def tiny_model(tmp_path_factory, runner, tiny_dataset):
    out = tmp_path_factory.mktemp("model")
    cfg = out / "train.json"
    cfg.write_text(json.dumps({
        "data": str(tiny_dataset / "chars.jsonl"),
        "model": "blstm", "granularity": "char", "seed": 0,
        "split": [0.5, 0.25, 0.25],
        "blstm": {"hidden_sizes": [4], "learning_rate": 0.05,
                  "max_epochs": 8, "patience": 8, "batch_size": 8},
    }))
    res = runner.invoke(main, ["train", "--config", str(cfg), "--out", str(out)])
    assert res.exit_code == 0, res.output
    return out


def test_gen_outputs(tiny_dataset):
    assert (tiny_dataset / "chars.jsonl").exists()
    assert (tiny_dataset / "words.jsonl").exists()
    manifest = json.loads((tiny_dataset / "manifest.json").read_text())
    assert manifest["chars"] == 40
    assert manifest["words"] == 12
    assert manifest["classes"] == ["arcish", "barred"]


def test_gen_bad_config_exits_2(runner, tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"word_length_range": [1, 5]}))
    res = runner.invoke(main, ["gen", "--config", str(cfg),
                               "--out", str(tmp_path / "o")])
    assert res.exit_code == 2
    cfg.write_text("{not json")
    res = runner.invoke(main, ["gen", "--config", str(cfg),
                               "--out", str(tmp_path / "o")])
    assert res.exit_code == 2


def test_train_unknown_key_exits_2(runner, tmp_path, tiny_dataset):
    cfg = tmp_path / "t.json"
    cfg.write_text(json.dumps({"data": str(tiny_dataset / "chars.jsonl"),
                               "learning_rate": 0.1}))
    res = runner.invoke(main, ["train", "--config", str(cfg),
                               "--out", str(tmp_path / "o")])
    assert res.exit_code == 2
    assert "unknown config keys" in res.output


def test_train_missing_data_exits_3(runner, tmp_path):
    cfg = tmp_path / "t.json"
    cfg.write_text(json.dumps({"data": str(tmp_path / "nope.jsonl")}))
    res = runner.invoke(main, ["train", "--config", str(cfg),
                               "--out", str(tmp_path / "o")])
    assert res.exit_code == 3


def test_train_writes_model_and_report(tiny_model):
    doc = json.loads((tiny_model / "model.json").read_text())
    assert doc["kind"] == "blstm"
    assert doc["classes"] == ["arcish", "barred"]
    assert doc["extra"]["granularity"] == "char"
    report = json.loads((tiny_model / "train_report.json").read_text())
    assert report["epochs_run"] >= 1
    assert (tiny_model / "test.jsonl").exists()


def test_eval_reports_metrics(runner, tiny_model, tiny_dataset, tmp_path):
    res = runner.invoke(main, ["eval", "--model", str(tiny_model / "model.json"),
                               "--data", str(tiny_model / "test.jsonl"),
                               "--granularity", "char",
                               "--out", str(tmp_path)])
    assert res.exit_code == 0, res.output
    report = json.loads((tmp_path / "metrics.json").read_text())
    assert 0.0 <= report["accuracy"] <= 1.0
    assert report["sample_count"] == 10
    assert len(report["confusion_matrix"]) == 2


def test_train_rerun_is_deterministic(runner, tiny_dataset, tmp_path):
    cfg = tmp_path / "train.json"
    cfg.write_text(json.dumps({
        "data": str(tiny_dataset / "chars.jsonl"),
        "model": "hmm", "granularity": "char", "seed": 0,
        "split": [0.5, 0.25, 0.25],
        "hmm": {"n_states": 3, "n_restarts": 1, "max_iter": 10},
    }))
    outs = []
    for name in ("r1", "r2"):
        out = tmp_path / name
        res = runner.invoke(main, ["train", "--config", str(cfg),
                                   "--out", str(out)])
        assert res.exit_code == 0, res.output
        outs.append(out)
    a, b = (json.loads((o / "model.json").read_text()) for o in outs)
    assert a == b
    ra, rb = (json.loads((o / "train_report.json").read_text()) for o in outs)
    assert metrics.strip_wall_time(ra) == metrics.strip_wall_time(rb)


def test_recover_command(runner, tmp_path):
    paths = []
    for i in range(3):
        s = synth.gen_character(synth.ARCISH, np.random.default_rng([40, i]),
                                sample_id=f"g{i}")
        img = raster.rasterize(s, (48, 48), 2)
        p = tmp_path / f"g{i}.pgm"
        raster.write_pgm(p, img)
        paths.append(str(p))
    out = tmp_path / "rec"
    res = runner.invoke(main, ["recover", *paths, "--out", str(out), "--svg"])
    assert res.exit_code == 0, res.output
    lines = (out / "recovered.jsonl").read_text().splitlines()
    assert len(lines) == 3
    assert (out / "g0.svg").exists()


def test_combine_command(runner, tiny_model, tiny_dataset, tmp_path):
    res = runner.invoke(main, [
        "combine", "--model-a", str(tiny_model / "model.json"),
        "--model-b", str(tiny_model / "model.json"),
        "--data", str(tiny_model / "test.jsonl"),
        "--granularity", "char", "--out", str(tmp_path)])
    assert res.exit_code == 0, res.output
    report = json.loads((tmp_path / "combined_metrics.json").read_text())
    # combining a model with itself can never change its decisions
    assert report["combined"]["accuracy"] == report["model_a"]["accuracy"]


def test_stats_command(runner, tiny_dataset, tmp_path):
    out = tmp_path / "stats.json"
    res = runner.invoke(main, ["stats", str(tiny_dataset / "chars.jsonl"),
                               str(tiny_dataset / "words.jsonl"),
                               "--out", str(out)])
    assert res.exit_code == 0, res.output
    report = json.loads(out.read_text())
    assert json.loads(res.output) == report


def test_gradcheck_command(runner):
    res = runner.invoke(main, ["gradcheck", "--configs", "1"])
    assert res.exit_code == 0, res.output
    report = json.loads(res.output)
    assert report["pass"] is True
    assert report["max_relative_error"] < 1e-4
