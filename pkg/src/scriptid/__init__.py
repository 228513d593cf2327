"""Script identification for handwritten samples from pen trajectories.

Character-trained sequence classifiers (BLSTM, per-class Gaussian HMMs)
applied to word-level data, plus stroke recovery so the same online-trained
models can classify offline glyph images.
"""

from .standardize import SequenceStandardizer, fit_standardizer, standardize
from .strokes import (EncodedSequence, StrokeSample, decode, encode,
                      make_sample, read_stroke_file, split, write_stroke_file)
from .synth import DEFAULT_PROFILES, ScriptProfile, SynthConfig, gen_dataset
from .blstm import BlstmClassifier, BlstmNetwork, TrainConfig, gradient_check
from .hmm import GaussianHmm, HmmClassifier
from .ensemble import BinaryDecision, combine, opposite_error
from .strokerec import RecoveryConfig, RecoveryResult, recover
from .raster import rasterize, skeletonize

__all__ = [
    "BinaryDecision", "BlstmClassifier", "BlstmNetwork", "DEFAULT_PROFILES",
    "EncodedSequence", "GaussianHmm", "HmmClassifier", "RecoveryConfig",
    "RecoveryResult", "ScriptProfile", "SequenceStandardizer", "StrokeSample",
    "SynthConfig", "TrainConfig", "combine", "decode", "encode",
    "fit_standardizer", "gen_dataset", "gradient_check", "make_sample",
    "opposite_error", "rasterize", "read_stroke_file", "recover",
    "skeletonize", "split", "standardize", "write_stroke_file",
]

__version__ = "0.1.0"
