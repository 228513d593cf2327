"""Dataset-level standardization of encoded sequences.

Each selected component c is replaced by (v_c - mu_c) / sigma_c, where mu and
sigma are the population mean and standard deviation over all vectors of all
sequences in the fitting dataset.  By default only x and y are standardized;
the pen_start flag is passed through so it keeps its 0/1 semantics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import DegenerateComponent, StatsMismatch
from .strokes import EncodedSequence

COMPONENT_INDEX = {"x": 0, "y": 1, "pen_start": 2}
DEFAULT_COMPONENTS = ("x", "y")


@dataclass(frozen=True)
class NormalizationStats:
    mean: np.ndarray  # (3,)
    std: np.ndarray   # (3,); 1.0 on non-standardized components
    components: tuple

    def to_dict(self) -> dict:
        return {
            "mean": self.mean.tolist(),
            "std": self.std.tolist(),
            "components": list(self.components),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "NormalizationStats":
        return cls(
            np.asarray(obj["mean"], dtype=float),
            np.asarray(obj["std"], dtype=float),
            tuple(obj["components"]),
        )


def _stack(dataset) -> np.ndarray:
    arrays = [np.asarray(getattr(s, "vectors", s), dtype=float) for s in dataset]
    if not arrays:
        raise DegenerateComponent("cannot fit a standardizer on an empty dataset")
    return np.concatenate(arrays)


def fit_standardizer(dataset, components=DEFAULT_COMPONENTS) -> NormalizationStats:
    """Population mean/std per selected component over all vectors."""
    allv = _stack(dataset)
    mean = np.zeros(3)
    std = np.ones(3)
    for name in components:
        idx = COMPONENT_INDEX[name]
        col = allv[:, idx]
        mu = float(col.mean())
        sigma = float(col.std())  # population (divide-by-N)
        if sigma == 0.0:
            raise DegenerateComponent(f"component {name!r} has zero variance")
        mean[idx] = mu
        std[idx] = sigma
    return NormalizationStats(mean, std, tuple(components))


def standardize(seq: EncodedSequence, stats: NormalizationStats) -> EncodedSequence:
    vec = np.asarray(seq.vectors, dtype=float)
    if vec.ndim != 2 or vec.shape[1] != len(stats.mean):
        raise StatsMismatch(
            f"sequence width {vec.shape} does not match stats width {len(stats.mean)}"
        )
    out = (vec - stats.mean) / stats.std
    return EncodedSequence(out, seq.source_sample_id)


def unstandardize(seq: EncodedSequence, stats: NormalizationStats) -> EncodedSequence:
    vec = np.asarray(seq.vectors, dtype=float)
    if vec.ndim != 2 or vec.shape[1] != len(stats.mean):
        raise StatsMismatch("sequence width does not match stats")
    return EncodedSequence(vec * stats.std + stats.mean, seq.source_sample_id)


class SequenceStandardizer(BaseEstimator, TransformerMixin):
    """Estimator wrapper so standardization composes with sklearn pipelines.

    fit accepts a list of (T, 3) arrays (or EncodedSequence); transform returns
    a list of arrays of the same shapes.
    """

    def __init__(self, components=DEFAULT_COMPONENTS):
        self.components = components

    def fit(self, X, y=None):
        self.stats_ = fit_standardizer(X, tuple(self.components))
        return self

    def transform(self, X):
        if not hasattr(self, "stats_"):
            raise StatsMismatch("standardizer is not fitted")
        out = []
        for s in X:
            seq = s if isinstance(s, EncodedSequence) else EncodedSequence(np.asarray(s, dtype=float))
            out.append(standardize(seq, self.stats_).vectors)
        return out

    def inverse_transform(self, X):
        if not hasattr(self, "stats_"):
            raise StatsMismatch("standardizer is not fitted")
        out = []
        for s in X:
            seq = s if isinstance(s, EncodedSequence) else EncodedSequence(np.asarray(s, dtype=float))
            out.append(unstandardize(seq, self.stats_).vectors)
        return out
