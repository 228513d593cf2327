"""Synthetic pseudo-script generation.

Two families of glyphs ship by default: "arcish" (smooth single-curvature
strokes, no connecting bar) and "barred" (zigzag strokes hanging from a
near-horizontal top bar).  Characters and words come with exact ground-truth
stroke order, so they double as oracles for stroke recovery.

Every sample derives its own RNG stream from (seed, class, kind, index), so
generation is deterministic and order-independent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InvalidLength
from .strokes import StrokeSample, make_sample, resample_polyline

GLYPH_BOX = (22.0, 26.0)  # width, height in abstract units


@dataclass(frozen=True)
class ScriptProfile:
    name: str
    curvature_sign: int = 1       # +1, -1, or 0 for mixed
    stroke_count_range: tuple = (1, 3)
    has_headline: bool = False
    angularity: float = 0.0       # 0 = smooth arcs, 1 = zigzag polylines
    jitter_std: float = 0.5

    def __post_init__(self):
        lo, hi = self.stroke_count_range
        if not (1 <= lo <= hi <= 10):
            raise ConfigError("stroke_count_range must lie within [1, 10]")
        if not (0.0 <= self.angularity <= 1.0):
            raise ConfigError("angularity must be in [0, 1]")
        if self.jitter_std < 0:
            raise ConfigError("jitter_std must be >= 0")


ARCISH = ScriptProfile("arcish", curvature_sign=1, stroke_count_range=(1, 3),
                       has_headline=False, angularity=0.1)
BARRED = ScriptProfile("barred", curvature_sign=0, stroke_count_range=(2, 4),
                       has_headline=True, angularity=0.9)
DEFAULT_PROFILES = (ARCISH, BARRED)


@dataclass(frozen=True)
class SynthConfig:
    profiles: tuple = DEFAULT_PROFILES
    chars_per_class: int = 500
    words_per_class: int = 200
    word_length_range: tuple = (2, 5)
    canvas: tuple = (48, 48)
    seed: int = 0
    step: float = 1.5
    char_offset_span: tuple = (80.0, 4.0)
    word_offset_span: tuple = (10.0, 4.0)

    def __post_init__(self):
        if len(self.profiles) < 2:
            raise ConfigError("need at least 2 script profiles")
        lo, hi = self.word_length_range
        if not (2 <= lo <= hi <= 12):
            raise ConfigError("word_length_range must lie within [2, 12]")
        seen = set()
        for p in self.profiles:
            key = (p.curvature_sign, p.has_headline, round(p.angularity, 6))
            if key in seen:
                raise ConfigError("profiles in one experiment must be distinguishable")
            seen.add(key)

    @classmethod
    def from_dict(cls, obj: dict) -> "SynthConfig":
        profiles = obj.get("profiles")
        if profiles is None:
            prof_tuple = DEFAULT_PROFILES
        else:
            prof_tuple = tuple(
                ScriptProfile(
                    name=p["name"],
                    curvature_sign=int(p.get("curvature_sign", 1)),
                    stroke_count_range=tuple(p.get("stroke_count_range", (1, 3))),
                    has_headline=bool(p.get("has_headline", False)),
                    angularity=float(p.get("angularity", 0.0)),
                    jitter_std=float(p.get("jitter_std", 0.5)),
                )
                for p in profiles
            )
        kwargs = {}
        for key in ("chars_per_class", "words_per_class", "seed"):
            if key in obj:
                kwargs[key] = int(obj[key])
        for key in ("word_length_range", "canvas", "char_offset_span", "word_offset_span"):
            if key in obj:
                kwargs[key] = tuple(obj[key])
        if "step" in obj:
            kwargs["step"] = float(obj["step"])
        return cls(profiles=prof_tuple, **kwargs)


_resample = resample_polyline


def _stroke_path(start, end, curvature, angularity, rng, step, jitter_std) -> np.ndarray:
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    chord = end - start
    length = float(np.linalg.norm(chord))
    if length < 1e-6:
        end = start + np.array([step, step])
        chord = end - start
        length = float(np.linalg.norm(chord))
    # oriented so positive curvature bulges right of the travel direction;
    # strokes run top-left to bottom-right, keeping the pen-down point the
    # sample's extreme point toward the top-left corner
    perp = np.array([chord[1], -chord[0]]) / length
    t = np.linspace(0.0, 1.0, max(16, int(length * 4)))

    bulge = curvature * (1.0 - angularity) * rng.uniform(0.15, 0.35) * length
    smooth = bulge * 4.0 * t * (1.0 - t)

    n_waves = max(1, int(round(angularity * length / 5.0)))
    amp = angularity * rng.uniform(0.12, 0.25) * length
    zig = amp * (2.0 / np.pi) * np.arcsin(np.sin(2.0 * np.pi * n_waves * t))

    base = start + t[:, None] * chord + (smooth + zig)[:, None] * perp
    pts = _resample(base, step)
    if jitter_std > 0:
        pts = pts + rng.normal(0.0, jitter_std, size=pts.shape)
    return pts


def _curvature_for(profile: ScriptProfile, rng) -> float:
    if profile.curvature_sign == 0:
        return float(rng.choice([-1.0, 1.0]))
    return float(profile.curvature_sign)


def _headline_stroke(rng, x0, x1, step, jitter_std) -> np.ndarray:
    y0 = rng.uniform(0.8, 1.8)
    pts = _stroke_path((x0, y0), (x1, y0 + rng.uniform(-0.5, 0.5)),
                       0.0, 0.1, rng, step, jitter_std)
    # the bar is drawn first: pin its pen-down point at the top-left extreme
    # so the start-point heuristic has a well-defined ground truth
    pts[0, 0] = pts[:, 0].min() - rng.uniform(0.2, 0.8)
    pts[0, 1] = pts[:, 1].min() - rng.uniform(0.2, 0.8)
    return pts


def _body_stroke_endpoints(rng, first: bool, width: float, height: float):
    if first:
        sx, sy = rng.uniform(-0.8, 0.2), rng.uniform(-0.8, 0.2)
    else:
        sx = width * rng.uniform(0.25, 0.85)
        sy = height * rng.uniform(0.12, 0.30)
    ex = float(np.clip(sx + width * rng.uniform(-0.35, 0.35), 2.0, width))
    ey = height * rng.uniform(0.60, 0.97)
    return (sx, sy), (ex, ey)


def _character_strokes(profile: ScriptProfile, rng, include_headline: bool,
                       step: float) -> list:
    width, height = GLYPH_BOX
    n_total = int(rng.integers(profile.stroke_count_range[0],
                               profile.stroke_count_range[1] + 1))
    strokes = []
    headline = profile.has_headline and include_headline
    if headline:
        x0 = rng.uniform(-1.0, -0.2)
        x1 = width * rng.uniform(0.78, 0.95)
        strokes.append(_headline_stroke(rng, x0, x1, step, profile.jitter_std))
    n_body = max(1, n_total - 1) if headline else n_total
    for j in range(n_body):
        start, end = _body_stroke_endpoints(rng, first=(j == 0 and not headline),
                                            width=width, height=height)
        strokes.append(_stroke_path(start, end, _curvature_for(profile, rng),
                                    profile.angularity, rng, step,
                                    profile.jitter_std))
    return strokes


def gen_character(profile: ScriptProfile, rng, *, include_headline=True,
                  step=1.5, offset=(0.0, 0.0), sample_id="char") -> StrokeSample:
    strokes = _character_strokes(profile, rng, include_headline, step)
    off = np.asarray(offset, dtype=float)
    return make_sample(sample_id, profile.name, [s + off for s in strokes], "char")


def gen_word(profile: ScriptProfile, length: int, rng, *, length_range=(1, 12),
             step=1.5, offset=(0.0, 0.0), sample_id="word") -> StrokeSample:
    if not (length_range[0] <= length <= length_range[1]):
        raise InvalidLength(f"word length {length} outside range {length_range}")
    width, _ = GLYPH_BOX
    strokes = []
    xoff = 0.0
    for i in range(length):
        glyph = _character_strokes(profile, rng,
                                   include_headline=not profile.has_headline,
                                   step=step)
        dy = rng.uniform(-1.0, 1.0) if i > 0 else 0.0
        shift = np.array([xoff, dy])
        strokes.extend(s + shift for s in glyph)
        xoff += width + rng.uniform(2.5, 4.5)
    if profile.has_headline:
        total_width = xoff - 2.5
        bar = _headline_stroke(rng, rng.uniform(0.2, 0.9),
                               total_width * rng.uniform(0.92, 0.98),
                               step, profile.jitter_std)
        strokes.insert(0, bar)
    off = np.asarray(offset, dtype=float)
    return make_sample(sample_id, profile.name, [s + off for s in strokes], "word")


def gen_dataset(config: SynthConfig) -> list:
    """All characters then all words, grouped by profile, deterministic per seed."""
    samples = []
    for pidx, profile in enumerate(config.profiles):
        for i in range(config.chars_per_class):
            rng = np.random.default_rng([config.seed, pidx, 0, i])
            off = (rng.uniform(0.0, config.char_offset_span[0]),
                   rng.uniform(0.0, config.char_offset_span[1]))
            samples.append(gen_character(profile, rng, step=config.step, offset=off,
                                         sample_id=f"{profile.name}-c{i:05d}"))
        lo, hi = config.word_length_range
        for i in range(config.words_per_class):
            rng = np.random.default_rng([config.seed, pidx, 1, i])
            length = int(rng.integers(lo, hi + 1))
            off = (rng.uniform(0.0, config.word_offset_span[0]),
                   rng.uniform(0.0, config.word_offset_span[1]))
            samples.append(gen_word(profile, length, rng, length_range=(lo, hi),
                                    step=config.step, offset=off,
                                    sample_id=f"{profile.name}-w{i:05d}"))
    return samples


# ---------------------------------------------------------------------------
# Summary statistics used to check that generated classes are separable
# before any sequence model is trained.
# ---------------------------------------------------------------------------

def mean_abs_turning(sample: StrokeSample) -> float:
    """Mean absolute turning angle (radians) over all stroke interior points."""
    angles = []
    for s in sample.strokes:
        arr = np.asarray(s, dtype=float)
        if len(arr) < 3:
            continue
        d = np.diff(arr, axis=0)
        theta = np.arctan2(d[:, 1], d[:, 0])
        turn = np.diff(theta)
        turn = (turn + np.pi) % (2.0 * np.pi) - np.pi
        angles.extend(np.abs(turn))
    return float(np.mean(angles)) if angles else 0.0


def headline_present(sample: StrokeSample) -> bool:
    """Whether some stroke is a near-horizontal top bar spanning >= 60% width."""
    pts = sample.all_points()
    x_span = float(pts[:, 0].max() - pts[:, 0].min())
    y_min, y_max = float(pts[:, 1].min()), float(pts[:, 1].max())
    y_span = max(y_max - y_min, 1e-9)
    for s in sample.strokes:
        arr = np.asarray(s, dtype=float)
        sx = float(arr[:, 0].max() - arr[:, 0].min())
        sy = float(arr[:, 1].max() - arr[:, 1].min())
        top = float(arr[:, 1].mean())
        if sx >= 0.6 * x_span and sy <= 0.18 * max(sx, 1e-9) + 2.0 \
                and top <= y_min + 0.3 * y_span:
            return True
    return False
