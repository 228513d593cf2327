"""Offline-image handling.

Images are boolean numpy arrays of shape (height, width), True = ink,
indexed [y, x] with y growing downward.  Thinning is Zhang-Suen
two-subiteration with a conservative cleanup pass that enforces the
unit-width criterion (no 2x2 all-ink block) without breaking connectivity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BlankImage, InvalidCanvas, ShapeError
from .strokes import StrokeSample


@dataclass(frozen=True)
class Placement:
    scale: float
    tx: float
    ty: float

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return pts * self.scale + np.array([self.tx, self.ty])

    def invert(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return (pts - np.array([self.tx, self.ty])) / self.scale


def placement(sample: StrokeSample, canvas, margin: int = 2) -> Placement:
    """Uniform scale-and-center transform of the sample onto the canvas."""
    width, height = canvas
    if width < 2 * margin + 2 or height < 2 * margin + 2:
        raise InvalidCanvas(f"canvas {canvas} too small for margin {margin}")
    pts = sample.all_points()
    xmin, ymin = pts.min(axis=0)
    xmax, ymax = pts.max(axis=0)
    span_x = max(xmax - xmin, 1e-9)
    span_y = max(ymax - ymin, 1e-9)
    scale = min((width - 1 - 2 * margin) / span_x, (height - 1 - 2 * margin) / span_y)
    tx = (width - 1 - scale * (xmax + xmin)) / 2.0
    ty = (height - 1 - scale * (ymax + ymin)) / 2.0
    return Placement(scale, tx, ty)


def _footprint_offsets(width: int) -> np.ndarray:
    """Pixel offsets of a disc-ish footprint whose across-stroke width is `width`."""
    if width <= 1:
        return np.array([[0, 0]])
    r = width / 2.0
    if width % 2 == 1:
        rng = range(-(width // 2), width // 2 + 1)
        offs = [(dx, dy) for dy in rng for dx in rng if dx * dx + dy * dy <= r * r]
    else:
        rng = range(1 - width // 2, width // 2 + 1)
        offs = [(dx, dy) for dy in rng for dx in rng
                if (dx - 0.5) ** 2 + (dy - 0.5) ** 2 <= r * r]
    return np.array(offs)


def _bresenham(x0, y0, x1, y1):
    """8-connected integer line from (x0, y0) to (x1, y1), inclusive."""
    pts = []
    dx = abs(x1 - x0)
    dy = abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx - dy
    x, y = x0, y0
    while True:
        pts.append((x, y))
        if x == x1 and y == y1:
            break
        e2 = 2 * err
        if e2 > -dy:
            err -= dy
            x += sx
        if e2 < dx:
            err += dx
            y += sy
    return pts


def rasterize(sample: StrokeSample, canvas=(48, 48), pen_width: int = 1,
              margin: int = 2) -> np.ndarray:
    """Render a sample as a binary image; strokes are 8-connected polylines."""
    width, height = canvas
    if width < 1 or height < 1:
        raise InvalidCanvas(f"empty canvas {canvas}")
    tf = placement(sample, canvas, margin)
    img = np.zeros((height, width), dtype=bool)
    offs = _footprint_offsets(pen_width)
    for stroke in sample.strokes:
        pix = np.rint(tf.apply(stroke)).astype(int)
        line = []
        for (x0, y0), (x1, y1) in zip(pix[:-1], pix[1:]):
            line.extend(_bresenham(x0, y0, x1, y1))
        if len(pix) == 1:
            line.append(tuple(pix[0]))
        for x, y in line:
            for dx, dy in offs:
                xx, yy = x + dx, y + dy
                if 0 <= xx < width and 0 <= yy < height:
                    img[yy, xx] = True
    return img


# ---------------------------------------------------------------------------
# Thinning
# ---------------------------------------------------------------------------

def _neighbour_stack(img: np.ndarray):
    """P2..P9 neighbour planes (N, NE, E, SE, S, SW, W, NW) for each pixel."""
    p = np.pad(img, 1, mode="constant").astype(np.uint8)
    c = np.s_[1:-1]
    return [
        p[:-2, c],   # P2 N
        p[:-2, 2:],  # P3 NE
        p[c, 2:],    # P4 E
        p[2:, 2:],   # P5 SE
        p[2:, c],    # P6 S
        p[2:, :-2],  # P7 SW
        p[c, :-2],   # P8 W
        p[:-2, :-2], # P9 NW
    ]


def _zhang_suen_pass(img: np.ndarray, first: bool) -> np.ndarray:
    n = _neighbour_stack(img)
    b = sum(n)
    a = sum(((n[i] == 0) & (n[(i + 1) % 8] == 1)) for i in range(8))
    p2, _, p4, _, p6, _, p8, _ = n
    if first:
        cond = (p2 * p4 * p6 == 0) & (p4 * p6 * p8 == 0)
    else:
        cond = (p2 * p4 * p8 == 0) & (p2 * p6 * p8 == 0)
    delete = img & (b >= 2) & (b <= 6) & (a == 1) & cond
    return img & ~delete


def _transitions_at(img: np.ndarray, y: int, x: int) -> tuple:
    """(neighbour count, 0->1 transition count) around (y, x)."""
    h, w = img.shape
    ring = [(-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1)]
    vals = []
    for dy, dx in ring:
        yy, xx = y + dy, x + dx
        vals.append(bool(img[yy, xx]) if 0 <= yy < h and 0 <= xx < w else False)
    b = sum(vals)
    a = sum((not vals[i]) and vals[(i + 1) % 8] for i in range(8))
    return b, a


def _in_full_block(img: np.ndarray, y: int, x: int) -> bool:
    """Whether (y, x) belongs to some all-ink 2x2 block."""
    h, w = img.shape
    for oy in (y - 1, y):
        for ox in (x - 1, x):
            if 0 <= oy and oy + 1 < h and 0 <= ox and ox + 1 < w:
                if img[oy:oy + 2, ox:ox + 2].all():
                    return True
    return False


def _neighbors_connected_without(img: np.ndarray, y: int, x: int) -> bool:
    """Whether the ink neighbours of (y, x) stay 8-connected among themselves."""
    h, w = img.shape
    nbrs = [(y + dy, x + dx)
            for dy in (-1, 0, 1) for dx in (-1, 0, 1)
            if (dy, dx) != (0, 0)
            and 0 <= y + dy < h and 0 <= x + dx < w and img[y + dy, x + dx]]
    if len(nbrs) <= 1:
        return False
    seen = {nbrs[0]}
    frontier = [nbrs[0]]
    while frontier:
        cy, cx = frontier.pop()
        for ny, nx in nbrs:
            if (ny, nx) not in seen and abs(ny - cy) <= 1 and abs(nx - cx) <= 1:
                seen.add((ny, nx))
                frontier.append((ny, nx))
    return len(seen) == len(nbrs)


def _is_redundant(img: np.ndarray, y: int, x: int) -> bool:
    """Non-endpoint pixel removable without changing local topology.

    Requires one 8-connected ink component among the neighbours and one
    4-connected background component touching (y, x) edge-on, so loops,
    clean corners, endpoints, and genuine junction centres all survive.
    """
    h, w = img.shape
    if not _neighbors_connected_without(img, y, x):
        return False
    bg4 = [(y + dy, x + dx) for dy, dx in ((-1, 0), (0, 1), (1, 0), (0, -1))
           if not (0 <= y + dy < h and 0 <= x + dx < w and img[y + dy, x + dx])]
    if not bg4:
        return False
    bg = {(yy, xx)
          for dy in (-1, 0, 1) for dx in (-1, 0, 1)
          if (dy, dx) != (0, 0)
          for yy, xx in [(y + dy, x + dx)]
          if not (0 <= yy < h and 0 <= xx < w and img[yy, xx])}
    seen = {bg4[0]}
    frontier = [bg4[0]]
    while frontier:
        cy, cx = frontier.pop()
        for ny, nx in bg:
            if (ny, nx) not in seen and abs(ny - cy) + abs(nx - cx) == 1:
                seen.add((ny, nx))
                frontier.append((ny, nx))
    return all(p in seen for p in bg4)


def _cleanup_unit_width(img: np.ndarray) -> np.ndarray:
    """Remove redundant pixels: 2x2 all-ink blocks and corner triangles.

    A corner triangle is a degree-2 pixel whose two neighbours touch each
    other directly; dropping it keeps the skeleton 8-connected and removes
    the spurious junctions such corners would otherwise create.
    """
    img = img.copy()
    changed = True
    while changed:
        changed = False
        blocks = img[:-1, :-1] & img[:-1, 1:] & img[1:, :-1] & img[1:, 1:]
        ys, xs = np.nonzero(blocks)
        for y0, x0 in zip(ys, xs):
            corners = ((y0, x0), (y0, x0 + 1), (y0 + 1, x0), (y0 + 1, x0 + 1))
            removed = False
            for y, x in corners:
                if not img[y, x] or not _in_full_block(img, y, x):
                    continue
                b, a = _transitions_at(img, y, x)
                if a == 1 and b >= 2:
                    img[y, x] = False
                    changed = removed = True
                    break
            if not removed:
                # block on a micro-loop: every corner has two transitions;
                # drop one whose neighbours stay connected without it
                for y, x in corners:
                    if img[y, x] and _in_full_block(img, y, x) \
                            and _neighbors_connected_without(img, y, x):
                        img[y, x] = False
                        changed = True
                        break
    # redundancy pass only after blocks are gone: removals cannot create
    # new blocks but could make a remaining block pixel non-removable
    changed = True
    while changed:
        changed = False
        for y, x in zip(*np.nonzero(img)):
            if _is_redundant(img, y, x):
                img[y, x] = False
                changed = True
    return img


def skeletonize(img: np.ndarray) -> np.ndarray:
    """Iterative thinning to a unit-width skeleton (fixed point)."""
    img = np.asarray(img, dtype=bool)
    if not img.any():
        raise BlankImage("cannot skeletonize a blank image")
    cur = img.copy()
    while True:
        nxt = _zhang_suen_pass(cur, first=True)
        nxt = _zhang_suen_pass(nxt, first=False)
        if np.array_equal(nxt, cur):
            break
        cur = nxt
    return _cleanup_unit_width(cur)


def is_unit_width(img: np.ndarray) -> bool:
    img = np.asarray(img, dtype=bool)
    return not (img[:-1, :-1] & img[:-1, 1:] & img[1:, :-1] & img[1:, 1:]).any()


def count_components(img: np.ndarray) -> int:
    """Number of 8-connected ink components."""
    img = np.asarray(img, dtype=bool)
    seen = np.zeros_like(img)
    h, w = img.shape
    count = 0
    for y, x in zip(*np.nonzero(img)):
        if seen[y, x]:
            continue
        count += 1
        stack = [(y, x)]
        seen[y, x] = True
        while stack:
            cy, cx = stack.pop()
            for dy in (-1, 0, 1):
                for dx in (-1, 0, 1):
                    yy, xx = cy + dy, cx + dx
                    if 0 <= yy < h and 0 <= xx < w and img[yy, xx] and not seen[yy, xx]:
                        seen[yy, xx] = True
                        stack.append((yy, xx))
    return count


# ---------------------------------------------------------------------------
# Size and stroke-width normalization
# ---------------------------------------------------------------------------

def normalize_size(img: np.ndarray, target_height: int) -> np.ndarray:
    """Resize to a fixed height, width scaled to preserve aspect ratio."""
    img = np.asarray(img, dtype=bool)
    h, w = img.shape
    if target_height < 8:
        raise InvalidCanvas("target_height must be >= 8")
    if h == target_height:
        return img.copy()
    new_w = max(1, int(round(w * target_height / h)))
    rows = np.minimum((np.arange(target_height) * h / target_height).astype(int), h - 1)
    cols = np.minimum((np.arange(new_w) * w / new_w).astype(int), w - 1)
    return img[np.ix_(rows, cols)]


def normalize_stroke_width(img: np.ndarray, target_width: int) -> np.ndarray:
    """Thin to a skeleton, then thicken back to a uniform stroke width."""
    skel = skeletonize(img)
    if target_width <= 1:
        return skel
    out = np.zeros_like(skel)
    h, w = skel.shape
    for dx, dy in _footprint_offsets(target_width):
        ys = slice(max(dy, 0), min(h + dy, h))
        xs = slice(max(dx, 0), min(w + dx, w))
        src_ys = slice(max(-dy, 0), min(h - dy, h))
        src_xs = slice(max(-dx, 0), min(w - dx, w))
        out[ys, xs] |= skel[src_ys, src_xs]
    return out


def raw_pixel_sequence(img: np.ndarray, bin_height: int = 32) -> np.ndarray:
    """One timestep per column; features are binned ink occupancy in [0, 1]."""
    img = np.asarray(img, dtype=bool)
    h, w = img.shape
    if h < bin_height:
        raise ShapeError(f"image height {h} smaller than bin_height {bin_height}")
    edges = np.linspace(0, h, bin_height + 1)
    out = np.empty((w, bin_height))
    col = img.astype(float)
    for b in range(bin_height):
        lo, hi = int(edges[b]), max(int(edges[b + 1]), int(edges[b]) + 1)
        out[:, b] = col[lo:hi, :].mean(axis=0)
    return out


# ---------------------------------------------------------------------------
# PGM (P5) image I/O; ink is written as 255 on black 0 background.
# ---------------------------------------------------------------------------

def write_pgm(path, img: np.ndarray) -> None:
    img = np.asarray(img, dtype=bool)
    h, w = img.shape
    data = (img.astype(np.uint8) * 255).tobytes()
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(data)


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        raw = fh.read()
    fields = []
    pos = 0
    while len(fields) < 4:
        # tokenizer that skips whitespace and '#' comments in the header
        while pos < len(raw) and raw[pos:pos + 1].isspace():
            pos += 1
        if raw[pos:pos + 1] == b"#":
            while pos < len(raw) and raw[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos:pos + 1].isspace():
            pos += 1
        fields.append(raw[start:pos])
    if fields[0] != b"P5":
        raise ShapeError("only binary PGM (P5) images are supported")
    w, h, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    pos += 1  # single whitespace after maxval
    if maxval != 255:
        raise ShapeError("only maxval 255 PGM images are supported")
    pixels = np.frombuffer(raw[pos:pos + w * h], dtype=np.uint8)
    if pixels.size != w * h:
        raise ShapeError("truncated PGM payload")
    return pixels.reshape(h, w) >= 128
