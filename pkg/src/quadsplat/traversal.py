"""Tile coverage of bounding boxes: QPass scanline traversal and references.

Tile indices are inclusive and computed by floor division of continuous
pixel coordinates, so a box edge sitting exactly on a tile boundary also
covers the tile on the far side (tiles are closed rectangles).  Rects that
fall off the grid are represented by a sentinel that is neutral under the
min/max merges (``t_min`` past the grid, ``t_max = -1``), which keeps the
per-scanline merge free of special cases.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from .geometry import Conic2D, Cov2D
from .quadbox import BoundStrategy, QuadBox, SubBox, strategy_boxes

Tile = Tuple[int, int]


@dataclass(frozen=True)
class TileGrid:
    width: int
    height: int
    tile_size: int = 16

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0 or self.tile_size <= 0:
            raise ValueError(f"invalid grid {self.width}x{self.height} / {self.tile_size}")

    @property
    def tiles_x(self) -> int:
        return -(-self.width // self.tile_size)

    @property
    def tiles_y(self) -> int:
        return -(-self.height // self.tile_size)

    @property
    def num_tiles(self) -> int:
        return self.tiles_x * self.tiles_y

    def tile_id(self, tx: int, ty: int) -> int:
        return ty * self.tiles_x + tx

    def tile_xy(self, tile_id: int) -> Tile:
        return tile_id % self.tiles_x, tile_id // self.tiles_x

    def tile_pixel_rect(self, tx: int, ty: int) -> Tuple[float, float, float, float]:
        s = self.tile_size
        return tx * s, (tx + 1) * s, ty * s, (ty + 1) * s


@dataclass(frozen=True)
class TileRect:
    t_min_x: int
    t_max_x: int
    t_min_y: int
    t_max_y: int

    @property
    def empty(self) -> bool:
        return self.t_max_x < self.t_min_x or self.t_max_y < self.t_min_y

    @property
    def count(self) -> int:
        if self.empty:
            return 0
        return (self.t_max_x - self.t_min_x + 1) * (self.t_max_y - self.t_min_y + 1)

    def tiles(self) -> Iterable[Tile]:
        for ty in range(self.t_min_y, self.t_max_y + 1):
            for tx in range(self.t_min_x, self.t_max_x + 1):
                yield tx, ty


@dataclass(frozen=True)
class TileSpan:
    """Inclusive interval ``[lo, hi]`` on scanline ``line``.

    With ``by_column`` the line is a tile column and the interval runs over
    rows; otherwise the line is a row and the interval runs over columns.
    """

    line: int
    lo: int
    hi: int
    by_column: bool = True

    def __len__(self) -> int:
        return self.hi - self.lo + 1

    def tiles(self) -> Iterable[Tile]:
        for t in range(self.lo, self.hi + 1):
            yield (self.line, t) if self.by_column else (t, self.line)


BoxesLike = Union[QuadBox, Sequence[SubBox]]


def _boxes(qb: BoxesLike) -> Sequence[SubBox]:
    return qb.boxes if isinstance(qb, QuadBox) else qb


def _empty_rect(grid: TileGrid) -> TileRect:
    return TileRect(grid.tiles_x, -1, grid.tiles_y, -1)


def subbox_tile_rect(box: SubBox, center: Tuple[float, float], grid: TileGrid) -> TileRect:
    s = grid.tile_size
    x0, x1 = center[0] + box.x_lo, center[0] + box.x_hi
    y0, y1 = center[1] + box.y_lo, center[1] + box.y_hi
    if x1 < 0.0 or y1 < 0.0 or x0 > grid.tiles_x * s or y0 > grid.tiles_y * s:
        return _empty_rect(grid)
    return TileRect(
        max(0, math.floor(x0 / s)),
        min(grid.tiles_x - 1, math.floor(x1 / s)),
        max(0, math.floor(y0 / s)),
        min(grid.tiles_y - 1, math.floor(y1 / s)),
    )


def global_rect(rects: Sequence[TileRect]) -> TileRect:
    return TileRect(
        min(r.t_min_x for r in rects),
        max(r.t_max_x for r in rects),
        min(r.t_min_y for r in rects),
        max(r.t_max_y for r in rects),
    )


def qpass(
    qb: BoxesLike,
    center: Tuple[float, float],
    grid: TileGrid,
    by_column: Optional[bool] = None,
    trace: Optional[List[int]] = None,
) -> List[TileSpan]:
    """Single-pass scanline traversal of the union of the sub-box tile rects.

    The scan runs along the shorter side of the global tile range (columns
    on a tie) unless ``by_column`` forces an axis.  Each scanline merges the
    intervals of the rects overlapping it with min/max only.  When ``trace``
    is given, the number of rect comparisons made on each scanline is
    appended to it.
    """
    rects = [subbox_tile_rect(box, center, grid) for box in _boxes(qb)]
    g = global_rect(rects)
    if g.empty:
        return []
    if by_column is None:
        by_column = (g.t_max_x - g.t_min_x) <= (g.t_max_y - g.t_min_y)
    if by_column:
        line_lo, line_hi = g.t_min_x, g.t_max_x
        keys = [(r.t_min_x, r.t_max_x, r.t_min_y, r.t_max_y) for r in rects]
        none_lo = grid.tiles_y
    else:
        line_lo, line_hi = g.t_min_y, g.t_max_y
        keys = [(r.t_min_y, r.t_max_y, r.t_min_x, r.t_max_x) for r in rects]
        none_lo = grid.tiles_x

    spans = []
    for line in range(line_lo, line_hi + 1):
        lo, hi = none_lo, -1
        for k_lo, k_hi, i_lo, i_hi in keys:
            hit = k_lo <= line <= k_hi
            lo = min(lo, i_lo if hit else none_lo)
            hi = max(hi, i_hi if hit else -1)
        if trace is not None:
            trace.append(len(keys))
        if lo <= hi:
            spans.append(TileSpan(line, lo, hi, by_column))
    return spans


def span_tiles(spans: Iterable[TileSpan]) -> List[Tile]:
    return [tile for span in spans for tile in span.tiles()]


def naive_traverse(qb: BoxesLike, center: Tuple[float, float], grid: TileGrid) -> Set[Tile]:
    """Deduplicated union of the sub-box rects, one nested loop per box."""
    seen: Set[Tile] = set()
    for box in _boxes(qb):
        rect = subbox_tile_rect(box, center, grid)
        for ty in range(rect.t_min_y, rect.t_max_y + 1):
            for tx in range(rect.t_min_x, rect.t_max_x + 1):
                if (tx, ty) not in seen:
                    seen.add((tx, ty))
    return seen


def count_tiles(
    strategy: BoundStrategy,
    cov: Cov2D,
    conic: Conic2D,
    center: Tuple[float, float],
    grid: TileGrid,
) -> int:
    """Number of tiles the strategy's traversal emits, without building spans."""
    boxes = strategy_boxes(strategy, cov, conic)
    if len(boxes) == 1:
        return subbox_tile_rect(boxes[0], center, grid).count
    rects = [subbox_tile_rect(box, center, grid) for box in boxes]
    g = global_rect(rects)
    if g.empty:
        return 0
    total = 0
    for tx in range(g.t_min_x, g.t_max_x + 1):
        lo, hi = grid.tiles_y, -1
        for r in rects:
            if r.t_min_x <= tx <= r.t_max_x:
                lo = min(lo, r.t_min_y)
                hi = max(hi, r.t_max_y)
        total += max(0, hi - lo + 1)
    return total


def strategy_tiles(
    strategy: BoundStrategy,
    cov: Cov2D,
    conic: Conic2D,
    center: Tuple[float, float],
    grid: TileGrid,
) -> List[Tile]:
    """Tiles emitted for one Gaussian, in traversal order."""
    return span_tiles(qpass(strategy_boxes(strategy, cov, conic), center, grid))


# -- batched QPass used by the pipeline ------------------------------------


def tile_rects_batch(x0, x1, y0, y1, grid: TileGrid):
    """Vector :func:`subbox_tile_rect` on absolute pixel bounds (any shape)."""
    s = float(grid.tile_size)
    tx, ty = grid.tiles_x, grid.tiles_y
    off = (x1 < 0.0) | (y1 < 0.0) | (x0 > tx * s) | (y0 > ty * s) | np.isnan(x0) | np.isnan(y0)
    with np.errstate(invalid="ignore"):
        rx0 = np.clip(np.floor(x0 / s), 0, tx - 1)
        rx1 = np.clip(np.floor(x1 / s), 0, tx - 1)
        ry0 = np.clip(np.floor(y0 / s), 0, ty - 1)
        ry1 = np.clip(np.floor(y1 / s), 0, ty - 1)
    rx0 = np.where(off, tx, rx0).astype(np.int64)
    rx1 = np.where(off, -1, rx1).astype(np.int64)
    ry0 = np.where(off, ty, ry0).astype(np.int64)
    ry1 = np.where(off, -1, ry1).astype(np.int64)
    return rx0, rx1, ry0, ry1


def qpass_spans_batch(x0, x1, y0, y1, grid: TileGrid):
    """Scanline spans of QPass for many Gaussians at once.

    Inputs are ``(N, K)`` arrays of absolute sub-box pixel bounds.  Returns
    ``(gaussian_index, line, lo, length, by_column)``, one entry per emitted
    span, ordered by Gaussian then scanline.
    """
    rx0, rx1, ry0, ry1 = tile_rects_batch(x0, x1, y0, y1, grid)
    n = rx0.shape[0]
    gx0, gx1 = rx0.min(axis=1, initial=grid.tiles_x), rx1.max(axis=1, initial=-1)
    gy0, gy1 = ry0.min(axis=1, initial=grid.tiles_y), ry1.max(axis=1, initial=-1)
    nonempty = (gx1 >= gx0) & (gy1 >= gy0)
    by_col = (gx1 - gx0) <= (gy1 - gy0)

    # k: bounds along the scanline index, i: bounds of the interval axis
    col = by_col[:, None]
    k0, k1 = np.where(col, rx0, ry0), np.where(col, rx1, ry1)
    i0, i1 = np.where(col, ry0, rx0), np.where(col, ry1, rx1)
    line_start = np.where(by_col, gx0, gy0)
    n_lines = np.where(nonempty, np.where(by_col, gx1 - gx0, gy1 - gy0) + 1, 0)

    g_of_line = np.repeat(np.arange(n, dtype=np.int64), n_lines)
    first = np.cumsum(n_lines) - n_lines
    line = line_start[g_of_line] + (np.arange(g_of_line.size) - np.repeat(first, n_lines))

    hit = (k0[g_of_line] <= line[:, None]) & (line[:, None] <= k1[g_of_line])
    big = max(grid.tiles_x, grid.tiles_y)
    lo = np.where(hit, i0[g_of_line], big).min(axis=1, initial=big)
    hi = np.where(hit, i1[g_of_line], -1).max(axis=1, initial=-1)
    length = np.maximum(hi - lo + 1, 0)
    return g_of_line, line, lo, length, by_col[g_of_line]


def qpass_count_batch(x0, x1, y0, y1, grid: TileGrid) -> np.ndarray:
    """Per-Gaussian tile count of :func:`qpass_batch` without emitting tiles."""
    g, _, _, length, _ = qpass_spans_batch(x0, x1, y0, y1, grid)
    return np.bincount(g, weights=length, minlength=np.shape(x0)[0]).astype(np.int64)


def qpass_batch(x0, x1, y0, y1, grid: TileGrid):
    """QPass over many Gaussians; returns ``(gaussian_index, tile_id)``.

    Tiles come out ordered by Gaussian, then scanline, then position along
    the scanline, exactly as :func:`qpass` emits them one Gaussian at a time.
    """
    g_of_line, line, lo, length, by_col = qpass_spans_batch(x0, x1, y0, y1, grid)
    g_of_tile = np.repeat(g_of_line, length)
    line_of_tile = np.repeat(line, length)
    start = np.cumsum(length) - length
    along = np.repeat(lo, length) + (np.arange(g_of_tile.size) - np.repeat(start, length))
    col_tile = np.repeat(by_col, length)
    tx = np.where(col_tile, line_of_tile, along)
    ty = np.where(col_tile, along, line_of_tile)
    return g_of_tile, ty * grid.tiles_x + tx
