"""Exact (slow) ground truth for Gaussian-tile intersection.

A tile intersects the ellipse ``F <= 0`` iff the minimum of the convex
quadratic ``F`` over the tile's closed pixel rectangle is ``<= 0``.  That
minimum is either the unconstrained one (``-gamma`` at the center) or lies
on the rectangle boundary, where each edge reduces to a 1-D quadratic.
"""
from __future__ import annotations

import math
from typing import Set, Tuple

import numpy as np

from .geometry import Conic2D
from .traversal import Tile, TileGrid

Rect = Tuple[float, float, float, float]


def _edge_min_x_fixed(a, b, c, g, x, y0, y1):
    # F(x, y) along y in [y0, y1]; minimizer y* = -b x / c
    y = np.clip(-b * x / c, y0, y1)
    return a * x * x + 2.0 * b * x * y + c * y * y - g


def _edge_min_y_fixed(a, b, c, g, y, x0, x1):
    x = np.clip(-b * y / a, x0, x1)
    return a * x * x + 2.0 * b * x * y + c * y * y - g


def min_F_over_rect(conic: Conic2D, rect: Rect) -> float:
    """Minimum of F over ``[x0, x1] x [y0, y1]`` (center-relative pixels)."""
    x0, x1, y0, y1 = rect
    a, b, c, g = conic.a, conic.b, conic.c, conic._gamma()
    if x0 <= 0.0 <= x1 and y0 <= 0.0 <= y1:
        return -g
    candidates = [
        _edge_min_x_fixed(a, b, c, g, x0, y0, y1),
        _edge_min_x_fixed(a, b, c, g, x1, y0, y1),
        _edge_min_y_fixed(a, b, c, g, y0, x0, x1),
        _edge_min_y_fixed(a, b, c, g, y1, x0, x1),
    ]
    for x in (x0, x1):
        for y in (y0, y1):
            candidates.append(a * x * x + 2.0 * b * x * y + c * y * y - g)
    return float(min(candidates))


def min_F_over_rect_batch(a, b, c, g, x0, x1, y0, y1) -> np.ndarray:
    """Elementwise :func:`min_F_over_rect`; corners are covered by the clamped edges."""
    inside = (x0 <= 0.0) & (0.0 <= x1) & (y0 <= 0.0) & (0.0 <= y1)
    m = np.minimum(
        np.minimum(_edge_min_x_fixed(a, b, c, g, x0, y0, y1), _edge_min_x_fixed(a, b, c, g, x1, y0, y1)),
        np.minimum(_edge_min_y_fixed(a, b, c, g, y0, x0, x1), _edge_min_y_fixed(a, b, c, g, y1, x0, x1)),
    )
    return np.where(inside, -g, m)


def circumradius(conic: Conic2D) -> float:
    """Radius of the smallest centered circle containing the ellipse.

    Uses the eigenvalues of the conic matrix directly so the search region
    does not depend on the extents formulas under test.
    """
    lam_min = np.linalg.eigvalsh(np.array([[conic.a, conic.b], [conic.b, conic.c]]))[0]
    return math.sqrt(conic._gamma() / lam_min)


def exact_tile_set(conic: Conic2D, center: Tuple[float, float], grid: TileGrid) -> Set[Tile]:
    """All tiles whose closed pixel rectangle meets the ellipse."""
    r = circumradius(conic)
    s = grid.tile_size
    cx, cy = center
    tx0 = max(0, math.floor((cx - r) / s))
    tx1 = min(grid.tiles_x - 1, math.floor((cx + r) / s))
    ty0 = max(0, math.floor((cy - r) / s))
    ty1 = min(grid.tiles_y - 1, math.floor((cy + r) / s))
    out: Set[Tile] = set()
    for ty in range(ty0, ty1 + 1):
        for tx in range(tx0, tx1 + 1):
            px0, px1, py0, py1 = grid.tile_pixel_rect(tx, ty)
            if min_F_over_rect(conic, (px0 - cx, px1 - cx, py0 - cy, py1 - cy)) <= 0.0:
                out.add((tx, ty))
    return out


def exact_tiles_batch(a, b, c, g, cx, cy, grid: TileGrid):
    """Vectorized brute force: ``(gaussian_index, tile_id)`` of every exact hit."""
    a, b, c, g, cx, cy = (np.asarray(v, dtype=np.float64) for v in (a, b, c, g, cx, cy))
    n = a.shape[0]
    if n == 0:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty
    mats = np.stack([np.stack([a, b], -1), np.stack([b, c], -1)], -2)
    r = np.sqrt(g / np.linalg.eigvalsh(mats)[:, 0])
    s = float(grid.tile_size)
    tx0 = np.clip(np.floor((cx - r) / s), 0, grid.tiles_x - 1).astype(np.int64)
    tx1 = np.clip(np.floor((cx + r) / s), -1, grid.tiles_x - 1).astype(np.int64)
    ty0 = np.clip(np.floor((cy - r) / s), 0, grid.tiles_y - 1).astype(np.int64)
    ty1 = np.clip(np.floor((cy + r) / s), -1, grid.tiles_y - 1).astype(np.int64)
    offgrid = (cx + r < 0) | (cy + r < 0) | (cx - r > grid.tiles_x * s) | (cy - r > grid.tiles_y * s)
    nx = np.where(offgrid, 0, np.maximum(tx1 - tx0 + 1, 0))
    ny = np.where(offgrid, 0, np.maximum(ty1 - ty0 + 1, 0))
    per = nx * ny
    gi = np.repeat(np.arange(n), per)
    local = np.arange(gi.size) - np.repeat(np.cumsum(per) - per, per)
    tx = tx0[gi] + local % nx[gi]
    ty = ty0[gi] + local // nx[gi]
    hit = min_F_over_rect_batch(
        a[gi], b[gi], c[gi], g[gi],
        tx * s - cx[gi], (tx + 1) * s - cx[gi],
        ty * s - cy[gi], (ty + 1) * s - cy[gi],
    ) <= 0.0
    return gi[hit], (ty * grid.tiles_x + tx)[hit]


def exact_tile_count_batch(a, b, c, g, cx, cy, grid: TileGrid) -> np.ndarray:
    gi, _ = exact_tiles_batch(a, b, c, g, cx, cy, grid)
    return np.bincount(gi, minlength=len(np.atleast_1d(a)))
