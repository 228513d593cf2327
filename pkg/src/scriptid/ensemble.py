"""Combining two binary models' predictions by cross-entropy confidence.

When two models disagree, each prediction's cross-entropy error indicates its
confidence.  The error a model would have assigned to the *other* class is
E_other = -ln(1 - exp(-E)), a strictly decreasing involution on (0, inf);
the combiner keeps the prediction with the lower own-class error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidError

_CLAMP = 1e-12


@dataclass(frozen=True)
class BinaryDecision:
    predicted_class: int     # 0 or 1
    error: float             # cross-entropy of the predicted class, >= 0


def opposite_error(e: float) -> float:
    """Error of the opposite class given the error of one class."""
    if e < 0:
        raise InvalidError(f"error must be >= 0, got {e}")
    if not math.isfinite(e):
        return 0.0
    e = max(e, _CLAMP)
    inner = -math.expm1(-e)  # 1 - exp(-e), accurate for small e
    if inner <= 0.0:
        return math.inf
    return -math.log(inner)


def combine(a: BinaryDecision, b: BinaryDecision) -> BinaryDecision:
    """Keep the lower-error prediction; ties go to the first model."""
    if a.predicted_class == b.predicted_class:
        return BinaryDecision(a.predicted_class, min(a.error, b.error))
    if a.error <= b.error:
        return a
    return b
