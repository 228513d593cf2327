"""Shared data-preparation pipelines used by the CLI and the experiment harness.

Three routes turn stroke samples into model-ready sequences:
  online            encode pen trajectories directly
  offline-recovered rasterize, thin, recover strokes, then encode
  offline-rawpixel  rasterize, normalize size and stroke width, column features

Standardization stats are fitted per dataset: coordinates from different
sources (abstract units vs recovered pixels) land in one common frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import raster, strokerec
from .errors import ConfigError
from .standardize import fit_standardizer, standardize
from .strokes import EncodedSequence, encode, make_sample, resample_polyline

PIPELINES = ("online", "offline-recovered", "offline-rawpixel")


@dataclass(frozen=True)
class RasterParams:
    char_canvas: tuple = (48, 48)
    word_canvas: tuple = (192, 48)
    pen_width: int = 2
    bin_height: int = 24
    target_height: int = 48
    strategy: str = "junction_neighbor_first"
    resample_step: float = 1.5

    @classmethod
    def from_dict(cls, obj: dict) -> "RasterParams":
        kwargs = {}
        for key in ("char_canvas", "word_canvas"):
            if key in obj:
                kwargs[key] = tuple(obj[key])
        for key in ("pen_width", "bin_height", "target_height"):
            if key in obj:
                kwargs[key] = int(obj[key])
        if "strategy" in obj:
            kwargs["strategy"] = str(obj["strategy"])
        if "resample_step" in obj:
            kwargs["resample_step"] = float(obj["resample_step"])
        return cls(**kwargs)


def canvas_for(sample, params: RasterParams):
    return params.word_canvas if sample.granularity == "word" else params.char_canvas


def recover_sample(sample, params: RasterParams):
    """Offline counterpart of a sample: rasterize, thin, recover stroke order.

    Recovered pixel chains are mapped back through the inverse placement
    transform and resampled at the pen step, so the result is statistically
    comparable to a trajectory recorded at the original sampling density.
    """
    canvas = canvas_for(sample, params)
    tf = raster.placement(sample, canvas)
    img = raster.rasterize(sample, canvas, params.pen_width)
    skel = raster.skeletonize(img)
    result = strokerec.recover(skel, strokerec.RecoveryConfig(params.strategy))
    strokes = [resample_polyline(tf.invert(s.pixels), params.resample_step)
               for s in result.strokes]
    return make_sample(sample.sample_id, sample.label, strokes,
                       sample.granularity)


def prepare_sequences(samples, pipeline: str, params: RasterParams,
                      stats=None):
    """(sequences, labels, stats) for a dataset under the given pipeline.

    For trajectory pipelines the sequences are standardized; pass `stats` to
    reuse previously fitted stats, otherwise they are fitted on this dataset.
    """
    if pipeline not in PIPELINES:
        raise ConfigError(f"unknown pipeline {pipeline!r}; expected one of {PIPELINES}")
    labels = [s.label for s in samples]
    if pipeline == "offline-rawpixel":
        seqs = []
        for s in samples:
            img = raster.rasterize(s, canvas_for(s, params), params.pen_width)
            img = raster.normalize_size(img, params.target_height)
            img = raster.normalize_stroke_width(img, 2)
            seqs.append(raster.raw_pixel_sequence(img, params.bin_height))
        return seqs, labels, None

    if pipeline == "offline-recovered":
        samples = [recover_sample(s, params) for s in samples]
    encoded = [encode(s) for s in samples]
    if stats is None:
        stats = fit_standardizer(encoded)
    seqs = [standardize(e, stats).vectors for e in encoded]
    return seqs, labels, stats


def dataset_stats(samples) -> dict:
    """Per-class, per-granularity stroke-count and point-count statistics."""
    groups: dict = {}
    for s in samples:
        groups.setdefault((s.label, s.granularity), []).append(s)
    out = {}
    for (label, gran), group in sorted(groups.items()):
        strokes = np.array([len(s.strokes) for s in group], dtype=float)
        points = np.array([s.n_points for s in group], dtype=float)
        out[f"{label}/{gran}"] = {
            "samples": len(group),
            "strokes_mean": float(strokes.mean()),
            "strokes_std": float(strokes.std()),
            "points_mean": float(points.mean()),
            "points_std": float(points.std()),
        }
    return out
