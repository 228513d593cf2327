"""Stroke recovery from skeleton images.

Pixels are (x, y) integer tuples, y growing downward.  The pipeline is:
build the pixel graph, merge neighbouring junction pixels into junction
areas, pick the endpoint nearest the top-left corner, then walk the
skeleton keeping direction continuity across junction areas, restarting
until every ink pixel is covered.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import BlankImage, Exhausted, InvalidStart
from .strokes import StrokeSample
from . import raster

_NBRS = [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)]


@dataclass(frozen=True)
class SkeletonGraph:
    shape: tuple                  # (height, width)
    neighbors: dict               # (x, y) -> tuple of (x, y), row-major order
    endpoints: tuple              # degree-1 pixels, row-major
    junction_pixels: tuple        # degree >= 3 pixels, row-major

    @property
    def pixels(self):
        return self.neighbors.keys()


@dataclass(frozen=True)
class JunctionArea:
    members: frozenset
    outlets: tuple                # non-junction neighbours of members, ordered


@dataclass(frozen=True)
class RecoveredStroke:
    pixels: np.ndarray            # (n, 2) float, (x, y)
    origin: str                   # initial_start | endpoint_restart |
                                  # junction_neighbor_restart | loop_start


@dataclass(frozen=True)
class RecoveryResult:
    strokes: tuple
    coverage: float


@dataclass(frozen=True)
class RecoveryConfig:
    strategy: str = "junction_neighbor_first"   # or "endpoint_first"
    window: int = 5


def _row_major(p):
    return (p[1], p[0])


def build_graph(skel: np.ndarray) -> SkeletonGraph:
    skel = np.asarray(skel, dtype=bool)
    if not skel.any():
        raise BlankImage("cannot build a graph from a blank skeleton")
    h, w = skel.shape
    neighbors = {}
    ys, xs = np.nonzero(skel)
    for y, x in zip(ys, xs):  # row-major pixel ordering
        nbrs = []
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                if dx == 0 and dy == 0:
                    continue
                yy, xx = y + dy, x + dx
                if 0 <= yy < h and 0 <= xx < w and skel[yy, xx]:
                    nbrs.append((xx, yy))
        neighbors[(x, y)] = tuple(sorted(nbrs, key=_row_major))
    endpoints = tuple(p for p in neighbors if len(neighbors[p]) == 1)
    junctions = tuple(p for p in neighbors if len(neighbors[p]) >= 3)
    return SkeletonGraph((h, w), neighbors, endpoints, junctions)


def conjugate_junctions(graph: SkeletonGraph) -> list:
    """Merge 8-connected clusters of junction pixels into junction areas."""
    junctions = set(graph.junction_pixels)
    seen = set()
    areas = []
    for p in graph.junction_pixels:
        if p in seen:
            continue
        cluster = []
        queue = deque([p])
        seen.add(p)
        while queue:
            q = queue.popleft()
            cluster.append(q)
            for n in graph.neighbors[q]:
                if n in junctions and n not in seen:
                    seen.add(n)
                    queue.append(n)
        cluster.sort(key=_row_major)
        outlets = []
        for m in cluster:
            for n in graph.neighbors[m]:
                if n not in junctions and n not in outlets:
                    outlets.append(n)
        areas.append(JunctionArea(frozenset(cluster), tuple(outlets)))
    areas.sort(key=lambda a: _row_major(min(a.members, key=_row_major)))
    return areas


def _dist2(p):
    return p[0] * p[0] + p[1] * p[1]


def _start_key(p):
    return (_dist2(p), p[1], p[0])


def select_start(graph: SkeletonGraph, visited) -> tuple:
    """Unvisited endpoint nearest the image top-left corner."""
    cands = [p for p in graph.endpoints if p not in visited]
    if not cands:
        raise Exhausted("no unvisited endpoints remain")
    return min(cands, key=_start_key)


def _fit_direction(points) -> np.ndarray | None:
    """Least-squares direction of a short pixel run, oriented along travel."""
    pts = np.asarray(points, dtype=float)
    if len(pts) < 2:
        return None
    travel = pts[-1] - pts[0]
    centered = pts - pts.mean(axis=0)
    cov = centered.T @ centered
    _, vecs = np.linalg.eigh(cov)
    d = vecs[:, -1]
    if np.dot(d, travel) < 0:
        d = -d
    norm = np.linalg.norm(d)
    if norm < 1e-12:
        norm_t = np.linalg.norm(travel)
        return travel / norm_t if norm_t > 0 else None
    return d / norm


def _branch_run(area: JunctionArea, outlet, graph: SkeletonGraph, window: int):
    """Up to `window` pixels walking from an outlet away from the area."""
    run = [outlet]
    prev = None
    cur = outlet
    while len(run) < window:
        cands = [n for n in graph.neighbors[cur]
                 if n not in area.members and n != prev and n not in run]
        if len(cands) != 1:
            break
        prev, cur = cur, cands[0]
        run.append(cur)
    return run


def _outlet_direction(area, outlet, graph, window):
    run = _branch_run(area, outlet, graph, window)
    if len(run) < 2:
        ref = min(area.members, key=_row_major)
        v = np.array([outlet[0] - ref[0], outlet[1] - ref[1]], dtype=float)
        n = np.linalg.norm(v)
        return v / n if n > 0 else None
    return _fit_direction(run)


def _angle_between(a, b) -> float:
    if a is None or b is None:
        return 0.0
    return float(np.arccos(np.clip(np.dot(a, b), -1.0, 1.0)))


def _area_hop(area: JunctionArea, entry, exit_outlet, graph: SkeletonGraph):
    """Shortest 8-connected path through member pixels from entry to exit."""
    sources = [m for m in area.members if m in graph.neighbors[entry]]
    targets = set(m for m in area.members if m in graph.neighbors[exit_outlet])
    if not sources or not targets:
        return []
    prev = {s: None for s in sources}
    queue = deque(sorted(sources, key=_row_major))
    goal = None
    while queue:
        q = queue.popleft()
        if q in targets:
            goal = q
            break
        for n in graph.neighbors[q]:
            if n in area.members and n not in prev:
                prev[n] = q
                queue.append(n)
    if goal is None:
        return [min(sources, key=_row_major)]
    path = []
    while goal is not None:
        path.append(goal)
        goal = prev[goal]
    return path[::-1]


def traverse(graph: SkeletonGraph, areas, start, *, visited=None, window=5,
             encountered=None, origin="initial_start") -> RecoveredStroke:
    """Walk from `start`, preferring the straightest continuation at junctions."""
    if visited is None:
        visited = set()
    if encountered is None:
        encountered = []
    if start not in graph.neighbors:
        raise InvalidStart(f"start pixel {start} is not on the skeleton")
    if start in visited:
        raise InvalidStart(f"start pixel {start} already visited")
    area_of = {}
    for i, a in enumerate(areas):
        for m in a.members:
            area_of[m] = i

    path = [start]
    visited.add(start)
    prev_area = None
    while True:
        cur = path[-1]
        in_dir = _fit_direction(path[-window:]) if len(path) >= 2 else None

        plain = [n for n in graph.neighbors[cur]
                 if n not in area_of and n not in visited]
        entries = []
        for n in graph.neighbors[cur]:
            if n not in area_of:
                continue
            aidx = area_of[n]
            if aidx == prev_area:
                continue  # never bounce straight back into the area just exited
            a = areas[aidx]
            if any(o not in visited and o != cur for o in a.outlets) \
                    or not a.members <= visited:
                if all(area_of.get(e) != aidx for e in entries):
                    entries.append(n)
        cands = plain + entries
        if not cands:
            break

        if len(cands) == 1 or in_dir is None:
            nxt = min(cands, key=_row_major) if in_dir is None else cands[0]
        else:
            def move_angle(c):
                v = np.array([c[0] - cur[0], c[1] - cur[1]], dtype=float)
                return (_angle_between(in_dir, v / np.linalg.norm(v)),) + _row_major(c)
            nxt = min(cands, key=move_angle)

        if nxt in area_of:
            aidx = area_of[nxt]
            area = areas[aidx]
            if aidx not in encountered:
                encountered.append(aidx)
            exit_cands = [o for o in area.outlets if o not in visited and o != cur]
            if not exit_cands:
                # dead-end pass: cover the member pixels and stop
                visited.update(area.members)
                path.append(nxt)
                break
            scored = []
            for rank, o in enumerate(exit_cands):
                out_dir = _outlet_direction(area, o, graph, window)
                scored.append((_angle_between(in_dir, out_dir), rank, o))
            _, _, exit_outlet = min(scored, key=lambda t: (t[0], t[1]))
            hop = _area_hop(area, cur, exit_outlet, graph)
            path.extend(hop)
            visited.update(area.members)
            path.append(exit_outlet)
            visited.add(exit_outlet)
            prev_area = aidx
        else:
            path.append(nxt)
            visited.add(nxt)
            prev_area = None

    return RecoveredStroke(np.asarray(path, dtype=float), origin)


def select_restart(graph: SkeletonGraph, areas, visited, strategy: str,
                   encountered=None) -> tuple:
    """Next start pixel once traversal from the previous start is exhausted."""
    if encountered is None:
        encountered = []
    endpoint_cands = sorted((p for p in graph.endpoints if p not in visited),
                            key=_start_key)
    seen_outlets = []
    for aidx in encountered:
        for o in areas[aidx].outlets:
            if o not in visited and o not in seen_outlets:
                seen_outlets.append(o)
    other_outlets = []
    for a in areas:
        for o in a.outlets:
            if o not in visited and o not in seen_outlets and o not in other_outlets:
                other_outlets.append(o)
    if strategy == "endpoint_first":
        ordered = endpoint_cands + seen_outlets + other_outlets
    elif strategy == "junction_neighbor_first":
        ordered = seen_outlets + endpoint_cands + other_outlets
    else:
        raise ValueError(f"unknown restart strategy {strategy!r}")
    if not ordered:
        raise Exhausted("no unvisited endpoints or junction outlets remain")
    return ordered[0]


def recover(skel: np.ndarray, config: RecoveryConfig = RecoveryConfig()) -> RecoveryResult:
    """Loop start/traverse/restart until every skeleton pixel is covered."""
    graph = build_graph(skel)
    areas = conjugate_junctions(graph)
    visited: set = set()
    encountered: list = []
    strokes = []
    total = len(graph.neighbors)

    def fallback_start():
        remaining = [p for p in graph.neighbors if p not in visited]
        return min(remaining, key=_start_key)

    try:
        start = select_start(graph, visited)
        origin = "initial_start"
    except Exhausted:
        start = fallback_start()
        origin = "loop_start"

    while True:
        strokes.append(traverse(graph, areas, start, visited=visited,
                                window=config.window, encountered=encountered,
                                origin=origin))
        if len(visited) >= total:
            break
        endpoint_set = set(graph.endpoints)
        try:
            start = select_restart(graph, areas, visited, config.strategy, encountered)
            origin = ("endpoint_restart" if start in endpoint_set
                      else "junction_neighbor_restart")
        except Exhausted:
            start = fallback_start()
            origin = "loop_start"

    coverage = len(visited) / total
    return RecoveryResult(tuple(strokes), coverage)


def recovered_to_sample(result: RecoveryResult, sample_id="recovered",
                        label="", granularity="char") -> StrokeSample:
    from .strokes import make_sample
    return make_sample(sample_id, label, [s.pixels for s in result.strokes],
                       granularity)


def validate_start_heuristic(samples, canvas=(48, 48), pen_width=2,
                             tolerance=3.0) -> float:
    """Fraction of samples where the chosen start pixel is near the ground-truth
    first stroke's start and away from every stroke's end point."""
    correct = 0
    for sample in samples:
        tf = raster.placement(sample, canvas)
        gt_start = tf.apply(np.asarray(sample.strokes[0])[0])
        gt_ends = [tf.apply(np.asarray(s)[-1]) for s in sample.strokes]
        img = raster.rasterize(sample, canvas, pen_width)
        skel = raster.skeletonize(img)
        graph = build_graph(skel)
        try:
            chosen = np.asarray(select_start(graph, set()), dtype=float)
        except Exhausted:
            continue
        ok_start = np.linalg.norm(chosen - gt_start) <= tolerance
        ok_ends = all(np.linalg.norm(chosen - e) > tolerance for e in gt_ends)
        if ok_start and ok_ends:
            correct += 1
    return correct / len(samples) if samples else 0.0


_SVG_COLORS = ("#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e",
               "#8c564b", "#e377c2", "#17becf")


def render_svg(result: RecoveryResult, shape, scale: int = 4) -> str:
    """Per-stroke colored polylines with an arrowhead marking direction."""
    h, w = shape
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w * scale}" '
        f'height="{h * scale}" viewBox="0 0 {w} {h}">',
        '<defs><marker id="arrow" viewBox="0 0 10 10" refX="8" refY="5" '
        'markerWidth="4" markerHeight="4" orient="auto-start-reverse">'
        '<path d="M 0 0 L 10 5 L 0 10 z"/></marker></defs>',
        f'<rect width="{w}" height="{h}" fill="white"/>',
    ]
    for i, stroke in enumerate(result.strokes):
        color = _SVG_COLORS[i % len(_SVG_COLORS)]
        pts = " ".join(f"{x:g},{y:g}" for x, y in stroke.pixels)
        lines.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            f'stroke-width="0.8" marker-end="url(#arrow)"/>'
        )
    lines.append("</svg>")
    return "\n".join(lines)
