"""Command-line surface: gen, train, eval, recover, combine, stats, gradcheck.

Exit codes: 0 success, 2 configuration error, 3 data error.  All outputs are
pretty-printed JSON with stable key order; reruns with the same config and
seed produce byte-identical files apart from wall-time fields.
"""

from __future__ import annotations

import functools
import json
import os
import sys
import time

import click
import numpy as np

from . import blstm, ensemble, hmm, metrics, model_io, pipelines, raster, strokerec
from .errors import ConfigError, DataError, ScriptIdError
from .strokes import read_stroke_file, split, write_stroke_file
from .synth import SynthConfig, gen_dataset

TRAIN_KEYS = {"data", "model", "granularity", "pipeline", "split", "seed",
              "blstm", "hmm", "raster"}


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _guard(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigError as exc:
            _fail(2, str(exc))
        except (DataError, OSError) as exc:
            _fail(3, str(exc))
        except ScriptIdError as exc:
            _fail(2, str(exc))
    return wrapper


def _load_json(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _write_json(path, obj) -> None:
    metrics.write_report(path, obj)


@click.group()
def main():
    """Script identification from pen trajectories and recovered strokes."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True),
              help="JSON synthesis config.")
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--rasterize", "do_rasterize", is_flag=True,
              help="Also write PGM images for every sample.")
@click.option("--pen-width", type=int, default=2, show_default=True)
@_guard
def gen(config_path, seed, out_dir, do_rasterize, pen_width):
    """Generate a labeled synthetic dataset of characters and words."""
    obj = _load_json(config_path) if config_path else {}
    if seed is not None:
        obj["seed"] = seed
    try:
        config = SynthConfig.from_dict(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad synthesis config: {exc}") from exc
    os.makedirs(out_dir, exist_ok=True)
    samples = gen_dataset(config)
    chars = [s for s in samples if s.granularity == "char"]
    words = [s for s in samples if s.granularity == "word"]
    write_stroke_file(os.path.join(out_dir, "chars.jsonl"), chars)
    write_stroke_file(os.path.join(out_dir, "words.jsonl"), words)
    if do_rasterize:
        img_dir = os.path.join(out_dir, "images")
        os.makedirs(img_dir, exist_ok=True)
        params = pipelines.RasterParams(pen_width=pen_width)
        for s in samples:
            img = raster.rasterize(s, pipelines.canvas_for(s, params), pen_width)
            raster.write_pgm(os.path.join(img_dir, f"{s.sample_id}.pgm"), img)
    manifest = {
        "chars": len(chars),
        "words": len(words),
        "classes": sorted({s.label for s in samples}),
        "config_digest": metrics.config_digest(obj),
        "seed": config.seed,
    }
    _write_json(os.path.join(out_dir, "manifest.json"), manifest)
    click.echo(f"wrote {len(chars)} chars and {len(words)} words to {out_dir}")


def _read_dataset(path, granularity=None):
    samples = read_stroke_file(path)
    if granularity:
        samples = [s for s in samples if s.granularity == granularity]
    if not samples:
        raise ConfigError(f"no samples with granularity {granularity!r} in {path}")
    return samples


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@click.option("--seed", type=int, default=None)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@_guard
def train(config_path, seed, out_dir):
    """Train a BLSTM or HMM model per an experiment config."""
    cfg = _load_json(config_path)
    unknown = set(cfg) - TRAIN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "data" not in cfg:
        raise ConfigError("config must name a 'data' stroke file")
    if seed is not None:
        cfg["seed"] = seed
    cfg.setdefault("seed", 0)
    cfg.setdefault("model", "blstm")
    cfg.setdefault("granularity", "char")
    cfg.setdefault("pipeline", "online")
    cfg.setdefault("split", [0.625, 0.125, 0.25])
    if cfg["model"] not in ("blstm", "hmm"):
        raise ConfigError(f"unknown model kind {cfg['model']!r}")

    t0 = time.perf_counter()
    samples = _read_dataset(cfg["data"], cfg["granularity"])
    parts = split(samples, tuple(cfg["split"]), cfg["seed"])
    params = pipelines.RasterParams.from_dict(cfg.get("raster", {}))
    xt, yt, stats = pipelines.prepare_sequences(parts.train, cfg["pipeline"], params)
    xv, yv, _ = pipelines.prepare_sequences(parts.validation, cfg["pipeline"],
                                            params, stats=stats)
    os.makedirs(out_dir, exist_ok=True)
    write_stroke_file(os.path.join(out_dir, "test.jsonl"), parts.test)

    extra = {"granularity": cfg["granularity"], "pipeline": cfg["pipeline"],
             "raster": cfg.get("raster", {})}
    if cfg["model"] == "blstm":
        opts = dict(cfg.get("blstm", {}))
        if "hidden_sizes" in opts:
            opts["hidden_sizes"] = tuple(opts["hidden_sizes"])
        clf = blstm.BlstmClassifier(seed=cfg["seed"], **opts)
        clf.fit(xt, yt, xv, yv)
        model_io.save_model(os.path.join(out_dir, "model.json"), kind="blstm",
                            classes=clf.classes_, model=clf.net_, stats=stats,
                            extra=extra)
        report = {
            "train_loss": clf.report_.train_loss,
            "val_accuracy": clf.report_.val_accuracy,
            "best_epoch": clf.report_.best_epoch,
            "epochs_run": clf.report_.epochs_run,
            "wall_time_s": clf.report_.wall_time,
            "config_digest": metrics.config_digest(cfg),
        }
    else:
        opts = dict(cfg.get("hmm", {}))
        clf = hmm.HmmClassifier(seed=cfg["seed"], **opts)
        clf.fit(xt, yt, xv, yv)
        model_io.save_model(os.path.join(out_dir, "model.json"), kind="hmm",
                            classes=clf.classes_, models=clf.models_, stats=stats,
                            extra=extra)
        report = {
            "restart_choice": {str(k): int(v) for k, v in clf.choice_.chosen.items()},
            "restart_mode": clf.choice_.mode,
            "validation_accuracy": clf.choice_.accuracy,
            "wall_time_s": time.perf_counter() - t0,
            "config_digest": metrics.config_digest(cfg),
        }
    _write_json(os.path.join(out_dir, "train_report.json"), report)
    click.echo(f"model written to {os.path.join(out_dir, 'model.json')}")


def _predict_dataset(doc, seqs):
    classes = doc["classes"]
    if doc["kind"] == "blstm":
        net = doc["network"]
        return [classes[blstm.forward(net, x).predicted] for x in seqs]
    models = doc["models"]
    return [hmm.classify(models, x)[0] for x in seqs]


@main.command("eval")
@click.option("--model", "model_path", type=click.Path(exists=True), required=True)
@click.option("--data", "data_path", type=click.Path(exists=True), required=True)
@click.option("--granularity", type=click.Choice(["char", "word"]), default=None)
@click.option("--pipeline", type=click.Choice(list(pipelines.PIPELINES)),
              default="online", show_default=True)
@click.option("--out", "out_dir", type=click.Path(), default=None)
@click.option("--seed", type=int, default=0)
@_guard
def eval_cmd(model_path, data_path, granularity, pipeline, out_dir, seed):
    """Evaluate a trained model on a stroke file under a chosen pipeline."""
    doc = model_io.load_model(model_path)
    if doc["kind"] == "blstm" and pipeline == "offline-rawpixel" \
            and doc["extra"].get("pipeline") not in (None, "offline-rawpixel"):
        raise ConfigError("offline-rawpixel eval needs a rawpixel-trained model")
    t0 = time.perf_counter()
    samples = _read_dataset(data_path, granularity)
    params = pipelines.RasterParams.from_dict(doc["extra"].get("raster", {}))
    seqs, labels, _ = pipelines.prepare_sequences(samples, pipeline, params)
    preds = _predict_dataset(doc, seqs)
    cfg = {"model": os.path.basename(model_path), "data": os.path.basename(data_path),
           "granularity": granularity, "pipeline": pipeline, "seed": seed}
    report = metrics.build_metrics(labels, preds, doc["classes"], cfg,
                                   wall_time=time.perf_counter() - t0)
    text = metrics.canonical_json(report)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        _write_json(os.path.join(out_dir, "metrics.json"), report)
    click.echo(text)


@main.command()
@click.argument("images", nargs=-1, type=click.Path(exists=True), required=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--svg", "do_svg", is_flag=True, help="Also render per-stroke SVGs.")
@click.option("--strategy", type=click.Choice(["junction_neighbor_first",
                                               "endpoint_first"]),
              default="junction_neighbor_first", show_default=True)
@_guard
def recover(images, out_dir, do_svg, strategy):
    """Recover ordered pen strokes from binary PGM glyph images."""
    os.makedirs(out_dir, exist_ok=True)
    recovered = []
    for path in images:
        img = raster.read_pgm(path)
        skel = raster.skeletonize(img)
        result = strokerec.recover(skel, strokerec.RecoveryConfig(strategy))
        name = os.path.splitext(os.path.basename(path))[0]
        recovered.append(strokerec.recovered_to_sample(result, name))
        if do_svg:
            with open(os.path.join(out_dir, f"{name}.svg"), "w", encoding="utf-8") as fh:
                fh.write(strokerec.render_svg(result, skel.shape))
    write_stroke_file(os.path.join(out_dir, "recovered.jsonl"), recovered)
    click.echo(f"recovered {len(recovered)} images into {out_dir}")


@main.command()
@click.option("--model-a", type=click.Path(exists=True), required=True)
@click.option("--model-b", type=click.Path(exists=True), required=True)
@click.option("--data", "data_path", type=click.Path(exists=True), required=True)
@click.option("--granularity", type=click.Choice(["char", "word"]), default=None)
@click.option("--pipeline", type=click.Choice(list(pipelines.PIPELINES)),
              default="online", show_default=True)
@click.option("--out", "out_dir", type=click.Path(), default=None)
@_guard
def combine(model_a, model_b, data_path, granularity, pipeline, out_dir):
    """Combine two binary BLSTM models by cross-entropy confidence."""
    docs = [model_io.load_model(p) for p in (model_a, model_b)]
    for doc in docs:
        if doc["kind"] != "blstm" or len(doc["classes"]) != 2:
            raise ConfigError("combine requires two binary BLSTM models")
    if docs[0]["classes"] != docs[1]["classes"]:
        raise ConfigError("models must share the same class set")
    classes = docs[0]["classes"]
    samples = _read_dataset(data_path, granularity)
    params = pipelines.RasterParams()
    seqs, labels, _ = pipelines.prepare_sequences(samples, pipeline, params)
    singles = [[], []]
    combined = []
    for x in seqs:
        decisions = []
        for mi, doc in enumerate(docs):
            post = blstm.forward(doc["network"], x)
            err = blstm.loss(post, post.predicted, 2)
            decisions.append(ensemble.BinaryDecision(post.predicted, err))
            singles[mi].append(classes[post.predicted])
        combined.append(classes[ensemble.combine(*decisions).predicted_class])
    cfg = {"model_a": os.path.basename(model_a), "model_b": os.path.basename(model_b),
           "data": os.path.basename(data_path), "pipeline": pipeline,
           "granularity": granularity}
    report = {
        "model_a": metrics.build_metrics(labels, singles[0], classes, cfg),
        "model_b": metrics.build_metrics(labels, singles[1], classes, cfg),
        "combined": metrics.build_metrics(labels, combined, classes, cfg),
    }
    text = metrics.canonical_json(report)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        _write_json(os.path.join(out_dir, "combined_metrics.json"), report)
    click.echo(text)


@main.command()
@click.argument("data_files", nargs=-1, type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), default=None)
@_guard
def stats(data_files, out_path):
    """Per-class and per-granularity stroke and point statistics."""
    samples = []
    for path in data_files:
        samples.extend(read_stroke_file(path))
    report = pipelines.dataset_stats(samples)
    report["config_digest"] = metrics.config_digest(
        {"files": [os.path.basename(p) for p in data_files]})
    text = metrics.canonical_json(report)
    if out_path:
        _write_json(out_path, report)
    click.echo(text)


@main.command()
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--configs", "n_configs", type=int, default=5, show_default=True)
@click.option("--tolerance", type=float, default=1e-4, show_default=True)
@_guard
def gradcheck(seed, n_configs, tolerance):
    """Analytic BPTT gradients vs central finite differences on small networks."""
    shapes = [(4,), (8,), (4, 4), (8, 4), (3, 8)]
    worst = 0.0
    for i in range(n_configs):
        hidden = shapes[i % len(shapes)]
        err = blstm.gradient_check(input_size=3, hidden_sizes=hidden, n_classes=3,
                                   seq_len=12, trials=1, seed=seed + i)
        worst = max(worst, err)
    report = {"max_relative_error": worst, "tolerance": tolerance,
              "pass": bool(worst < tolerance)}
    click.echo(metrics.canonical_json(report))
    if worst >= tolerance:
        sys.exit(1)


if __name__ == "__main__":
    main()
