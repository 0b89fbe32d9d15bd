"""Render stage: per-tile front-to-back alpha compositing.

Per pixel the splats of its tile are visited in depth order.  A splat whose
alpha falls below ``alpha_min`` is skipped without touching transmittance;
compositing stops before the first splat that would drive transmittance
below ``t_stop``.  The tile loop is vectorized over (splat, pixel), but every
accumulation is a sequential prefix scan along the splat axis, so a skipped
splat (alpha exactly 0) contributes exactly ``+0`` and ``*1``.  Tiles that
differ only by skipped splats therefore produce bit-identical pixels.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..traversal import TileGrid
from .config import RenderConfig, chunk_bounds, parallel_map
from .keys import SortedPairs
from .project import ProjectedSplats


@dataclass(eq=False)
class RenderOutput:
    image: np.ndarray  # (H, W, 3) linear RGB
    transmittance: np.ndarray  # (H, W) final T
    n_contrib: np.ndarray  # (H, W) splats composited per pixel


def _render_tile(rows: np.ndarray, splats: ProjectedSplats, px: np.ndarray, py: np.ndarray,
                 config: RenderConfig, bg: np.ndarray):
    npix = px.size
    if rows.size == 0:
        return np.broadcast_to(bg, (npix, 3)).copy(), np.ones(npix), np.zeros(npix, np.int64)
    mean = splats.mean[rows]
    a, b, c = splats.conic[rows].T
    dx = px[None, :] - mean[:, 0:1]
    dy = py[None, :] - mean[:, 1:2]
    power = -0.5 * (a[:, None] * dx * dx + c[:, None] * dy * dy) - b[:, None] * dx * dy
    alpha = np.minimum(config.alpha_max, splats.opacity[rows, None] * np.exp(power))
    alpha = np.where(alpha < config.alpha_min, 0.0, alpha)

    t_after = np.cumprod(1.0 - alpha, axis=0)
    stopped = np.cumsum(t_after < config.t_stop, axis=0) > 0
    t_before = np.vstack([np.ones((1, npix)), t_after[:-1]])
    weight = np.where(stopped, 0.0, alpha * t_before)
    color = np.cumsum(weight[:, :, None] * splats.color[rows, None, :], axis=0)[-1]
    # transmittance after the last composited splat
    first_stop = np.argmax(stopped, axis=0)
    t_final = np.where(stopped.any(axis=0), t_before[first_stop, np.arange(npix)], t_after[-1])
    n_contrib = np.count_nonzero((alpha > 0.0) & ~stopped, axis=0)
    return color + t_final[:, None] * bg, t_final, n_contrib


def render(sorted_pairs: SortedPairs, splats: ProjectedSplats, grid: TileGrid,
           config: RenderConfig = RenderConfig(), threads: int = 1) -> RenderOutput:
    w, h, s = grid.width, grid.height, grid.tile_size
    image = np.empty((h, w, 3))
    trans = np.empty((h, w))
    contrib = np.empty((h, w), dtype=np.int64)
    bg = np.asarray(config.background, dtype=np.float64)

    def run(bounds):
        for tile in range(*bounds):
            tx, ty = grid.tile_xy(tile)
            x0, x1 = tx * s, min((tx + 1) * s, w)
            y0, y1 = ty * s, min((ty + 1) * s, h)
            yy, xx = np.mgrid[y0:y1, x0:x1]
            start, end = sorted_pairs.ranges[tile]
            col, t, n = _render_tile(sorted_pairs.values[start:end], splats,
                                     xx.ravel() + 0.5, yy.ravel() + 0.5, config, bg)
            shape = (y1 - y0, x1 - x0)
            image[y0:y1, x0:x1] = col.reshape(shape + (3,))
            trans[y0:y1, x0:x1] = t.reshape(shape)
            contrib[y0:y1, x0:x1] = n.reshape(shape)

    parallel_map(run, chunk_bounds(grid.num_tiles, threads * 4 if threads > 1 else 1), threads)
    return RenderOutput(image, trans, contrib)
