"""The 76-element feature vector for canonical 32x32 binary rasters.

Layout: 24 shadow features, then 16 octant centroid features, then 36
longest-run features, every value scaled into [0, 1].

The square is cut into eight triangular sectors ("octants") by its
horizontal and vertical center lines and its two main diagonals.
Octants are numbered 0..7 counter-clockwise starting at the triangle
between the east half of the horizontal center line and the NE
diagonal. Pixel (row, col) is classified by its center: with

    dx = (col + 0.5) - 16      (positive to the right)
    dy = 16 - (row + 0.5)      (positive upward)

the signs of dx and dy pick the quadrant and comparing |dx| with |dy|
picks the triangle within it. Pixel centers sit exactly on a diagonal
whenever |dx| == |dy| (the center lines are never hit, since dx and dy
are odd multiples of 0.5). Those boundary pixels are split between
the two adjacent sectors by distance from the center: the inner half
(|dx| < 8) joins the even-numbered sector, the outer half the odd one.
The split keeps all eight sector populations equal at 128 pixels.

Shadow features project ink onto the three sides of each octant
triangle: its half-edge of the square perimeter, its center-line
segment, and its diagonal segment. A side is divided into 16 equal
cells; a pixel marks the cell holding the foot of the perpendicular
from its center onto that side, and the feature is the marked-cell
count over 16. For projection only, a pixel centered exactly on a
diagonal casts onto both octants that share the diagonal, so blanket
ink shadows every side completely.

Centroid features are the mean (row, col) of each octant's ink under
the exclusive partition, each coordinate divided by 31; an octant
without ink contributes (0, 0).

Longest-run features cover nine half-size (16x16) regions whose
corners lie at rows and columns {0, 8, 16}. For each region and each
of four scan directions (rows, columns, NW-SE diagonals, NE-SW
diagonals) every scan line through the region contributes the length
of the longest run of consecutive ink that touches the region, where
runs are traced across the full image and keep any length they gain
outside the region. The per-line maxima are summed over the region's
lines and the sum is divided by 1024.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .imgproc import GRID

FEATURE_COUNT = 76
SHADOW_COUNT = 24
CENTROID_COUNT = 16
LONGEST_RUN_COUNT = 36

CSV_HEADER = ["label"] + [f"f{i}" for i in range(FEATURE_COUNT)]

DIRECTIONS = ("row", "column", "diag_main", "diag_anti")

_CENTER = 16.0
_CELLS = 16
_HALF = GRID // 2

# Unit direction of each boundary ray, indexed by angle/45.
_RAY = {0: (1, 0), 1: (1, 1), 2: (0, 1), 3: (-1, 1),
        4: (-1, 0), 5: (-1, -1), 6: (0, -1), 7: (1, -1)}


def octant_of(row: int, col: int) -> int:
    """Sector index 0..7 of a pixel in the exclusive partition."""
    if not (0 <= row < GRID and 0 <= col < GRID):
        raise ValueError(f"pixel ({row}, {col}) outside the {GRID}x{GRID} raster")
    dx = (col + 0.5) - _CENTER
    dy = _CENTER - (row + 0.5)
    adx, ady = abs(dx), abs(dy)
    if dx > 0 and dy > 0:
        pair = (0, 1)
        primary = 0 if adx > ady else 1
    elif dx < 0 and dy > 0:
        pair = (2, 3)
        primary = 3 if adx > ady else 2
    elif dx < 0 and dy < 0:
        pair = (4, 5)
        primary = 4 if adx > ady else 5
    else:
        pair = (6, 7)
        primary = 7 if adx > ady else 6
    if adx == ady:
        # On a diagonal: inner half to the even sector, outer to the odd.
        return pair[0] if adx < _HALF / 2 else pair[1]
    return primary


def _shadow_members(row: int, col: int) -> tuple[int, ...]:
    """Octants a pixel casts shadows into (two when on a diagonal)."""
    dx = (col + 0.5) - _CENTER
    dy = _CENTER - (row + 0.5)
    if abs(dx) == abs(dy):
        if dx > 0 and dy > 0:
            return (0, 1)
        if dx < 0 and dy > 0:
            return (2, 3)
        if dx < 0 and dy < 0:
            return (4, 5)
        return (6, 7)
    return (octant_of(row, col),)


def _octant_sides(k: int) -> list[tuple[tuple[float, float], tuple[float, float]]]:
    """Endpoints of octant k's sides in x-right/y-up coordinates.

    Order: perimeter half-edge (from the center-line end toward the
    corner), center-line segment (center outward), diagonal segment
    (center outward).
    """
    if k % 2 == 0:
        axis_ray, diag_ray = k, k + 1
    else:
        axis_ray, diag_ray = k + 1, k
    ax, ay = _RAY[axis_ray % 8]
    dxr, dyr = _RAY[diag_ray % 8]
    c = (_CENTER, _CENTER)
    m = (_CENTER + _HALF * ax, _CENTER + _HALF * ay)
    corner = (_CENTER + _HALF * dxr, _CENTER + _HALF * dyr)
    return [(m, corner), (c, m), (c, corner)]


def _foot_cell(px: float, py: float, a: tuple[float, float],
               b: tuple[float, float]) -> int:
    vx, vy = b[0] - a[0], b[1] - a[1]
    t = ((px - a[0]) * vx + (py - a[1]) * vy) / (vx * vx + vy * vy)
    return min(_CELLS - 1, max(0, math.floor(_CELLS * t)))


def _build_shadow_tables():
    """Precompute, per octant, its member mask and per-side cell map."""
    members = np.zeros((8, GRID, GRID), dtype=bool)
    cells = np.zeros((8, 3, GRID, GRID), dtype=np.int8)
    sides = [_octant_sides(k) for k in range(8)]
    for r in range(GRID):
        for c in range(GRID):
            px, py = c + 0.5, GRID - (r + 0.5)
            for k in _shadow_members(r, c):
                members[k, r, c] = True
                for s, (a, b) in enumerate(sides[k]):
                    cells[k, s, r, c] = _foot_cell(px, py, a, b)
    return members, cells


def _build_octant_map() -> np.ndarray:
    out = np.empty((GRID, GRID), dtype=np.int8)
    for r in range(GRID):
        for c in range(GRID):
            out[r, c] = octant_of(r, c)
    return out


_OCTANT_MAP = _build_octant_map()
_SHADOW_MEMBERS, _SHADOW_CELLS = _build_shadow_tables()


def _check_canonical(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    if img.shape != (GRID, GRID):
        raise ValueError(f"expected a {GRID}x{GRID} raster, got shape {img.shape}")
    if img.min(initial=0) < 0 or img.max(initial=0) > 1:
        raise ValueError("expected a 0/1 binary raster")
    return img.astype(bool)


def shadow_features(img: np.ndarray) -> np.ndarray:
    """24 projection-coverage values, octant-major, sides in the order
    (perimeter, center line, diagonal)."""
    ink = _check_canonical(img)
    out = np.zeros(SHADOW_COUNT)
    for k in range(8):
        sel = ink & _SHADOW_MEMBERS[k]
        for s in range(3):
            marked = np.unique(_SHADOW_CELLS[k, s][sel])
            out[3 * k + s] = marked.size / _CELLS
    return out


def centroid_features(img: np.ndarray) -> np.ndarray:
    """16 values: (mean row, mean col) / 31 per octant, 0s when empty."""
    ink = _check_canonical(img)
    out = np.zeros(CENTROID_COUNT)
    rows, cols = np.nonzero(ink)
    octs = _OCTANT_MAP[rows, cols]
    for k in range(8):
        sel = octs == k
        if sel.any():
            out[2 * k] = rows[sel].mean() / (GRID - 1)
            out[2 * k + 1] = cols[sel].mean() / (GRID - 1)
    return out


def _runs(line: np.ndarray) -> list[tuple[int, int]]:
    """Maximal runs of 1s in a 1-D 0/1 array as (start, length) pairs."""
    padded = np.concatenate(([0], np.asarray(line, dtype=np.int8), [0]))
    steps = np.diff(padded)
    starts = np.flatnonzero(steps == 1)
    ends = np.flatnonzero(steps == -1)
    return [(int(s), int(e - s)) for s, e in zip(starts, ends)]


def _longest_touching(runs: list[tuple[int, int]], lo: int, hi: int) -> int:
    """Longest run overlapping positions [lo, hi], 0 if none does."""
    best = 0
    for start, length in runs:
        if start <= hi and start + length - 1 >= lo and length > best:
            best = length
    return best


def longest_runs_by_line(img: np.ndarray, rows: tuple[int, int],
                         cols: tuple[int, int], direction: str) -> list[int]:
    """Per scan line, the longest full-image run touching the window.

    The window is rows[0]..rows[1] by cols[0]..cols[1], both ends
    inclusive. Runs extend across the whole image; only the touch test
    uses the window. Lines are ordered by row (or by column for the
    "column" direction); diagonal directions visit one line per offset
    that crosses the window.
    """
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError(f"expected a 2-D raster, got shape {img.shape}")
    h, w = img.shape
    r0, r1 = rows
    c0, c1 = cols
    if not (0 <= r0 <= r1 < h and 0 <= c0 <= c1 < w):
        raise ValueError(f"window {rows}x{cols} outside a {h}x{w} raster")
    out = []
    if direction == "row":
        for r in range(r0, r1 + 1):
            out.append(_longest_touching(_runs(img[r]), c0, c1))
    elif direction == "column":
        for c in range(c0, c1 + 1):
            out.append(_longest_touching(_runs(img[:, c]), r0, r1))
    elif direction == "diag_main":
        # Constant row - col. Positions along a line are row indices.
        for d in range(r0 - c1, r1 - c0 + 1):
            line = np.diagonal(img, offset=-d)
            base = max(0, d)  # row index of the line's first cell
            lo = max(r0, c0 + d) - base
            hi = min(r1, c1 + d) - base
            out.append(_longest_touching(_runs(line), lo, hi))
    elif direction == "diag_anti":
        # Constant row + col; flip columns to reuse the diagonal walk.
        flipped = np.fliplr(img)
        for s in range(r0 + c0, r1 + c1 + 1):
            k = w - 1 - s
            line = np.diagonal(flipped, offset=k)
            base = max(0, -k)
            lo = max(r0, s - c1) - base
            hi = min(r1, s - c0) - base
            out.append(_longest_touching(_runs(line), lo, hi))
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return out


_REGION_CORNERS = [(r, c) for r in (0, 8, 16) for c in (0, 8, 16)]


def longest_run_features(img: np.ndarray) -> np.ndarray:
    """36 normalized run sums: 9 regions x 4 directions.

    Regions are the half-size windows anchored at rows/cols {0, 8, 16}
    in row-major order; directions follow DIRECTIONS. Each sum is
    divided by 1024.
    """
    ink = _check_canonical(img).astype(np.uint8)
    out = np.zeros(LONGEST_RUN_COUNT)
    i = 0
    for r0, c0 in _REGION_CORNERS:
        window = ((r0, r0 + _HALF - 1), (c0, c0 + _HALF - 1))
        for direction in DIRECTIONS:
            values = longest_runs_by_line(ink, window[0], window[1], direction)
            out[i] = sum(values) / (GRID * GRID)
            i += 1
    return out


def extract_features(img: np.ndarray) -> np.ndarray:
    """Full 76-element vector: shadows, centroids, longest runs."""
    return np.concatenate([
        shadow_features(img),
        centroid_features(img),
        longest_run_features(img),
    ])


def write_features_csv(path: str | Path, labels, vectors) -> None:
    """Write labeled vectors as CSV with header label,f0..f75."""
    labels = list(labels)
    vectors = list(vectors)
    if len(labels) != len(vectors):
        raise ValueError("labels and vectors differ in length")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for label, vec in zip(labels, vectors):
            vec = np.asarray(vec, dtype=np.float64)
            if vec.shape != (FEATURE_COUNT,):
                raise ValueError(f"expected {FEATURE_COUNT} features, got {vec.shape}")
            writer.writerow([int(label)] + [repr(float(v)) for v in vec])


def read_features_csv(path: str | Path) -> tuple[list[int], list[np.ndarray]]:
    """Read a feature CSV back into (labels, vectors)."""
    labels: list[int] = []
    vectors: list[np.ndarray] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise ValueError(f"{path}: bad or missing feature CSV header")
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != FEATURE_COUNT + 1:
                raise ValueError(f"{path}:{lineno}: expected {FEATURE_COUNT + 1} columns")
            label = int(rec[0])
            if not 0 <= label <= 9:
                raise ValueError(f"{path}:{lineno}: label {label} outside 0..9")
            labels.append(label)
            vectors.append(np.array([float(v) for v in rec[1:]]))
    return labels, vectors
