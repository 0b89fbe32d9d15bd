from __future__ import annotations

import time
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from ..oracle import exact_tiles_batch
from ..quadbox import BoundStrategy
from ..scene_io.cameras import CameraModel
from ..scene_io.scene import Scene
from ..traversal import TileGrid, qpass_batch
from .config import RenderConfig, resolve_threads
from .keys import SortedPairs, duplicate_with_keys, sort_pairs
from .project import ProjectedSplats, project_scene
from .render import RenderOutput, render

ORACLE_SAMPLE = 10_000


@dataclass
class StageMetrics:
    strategy: str
    gaussians: int
    visible: int
    pairs: int
    mean_tiles: float
    project_ms: float
    duplicate_ms: float
    sort_ms: float
    render_ms: float
    total_ms: float
    false_positive_ratio: Optional[float] = None
    missed_ratio: Optional[float] = None

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(eq=False)
class FrameResult:
    image: np.ndarray
    metrics: StageMetrics
    splats: ProjectedSplats
    pairs: SortedPairs
    output: RenderOutput


def tile_accuracy(splats: ProjectedSplats, strategy: BoundStrategy, grid: TileGrid,
                  sample: int = ORACLE_SAMPLE, seed: int = 0):
    """Fraction of emitted tiles the exact oracle rejects, and of exact tiles missed.

    At most ``sample`` splats (uniform, seeded) are checked.
    """
    n = len(splats)
    if n > sample:
        rows = np.sort(np.random.default_rng(seed).choice(n, sample, replace=False))
        splats = splats.take(rows)
        n = sample
    g_emit, t_emit = qpass_batch(*splats.boxes(strategy), grid)
    a, b, c = splats.conic.T
    g_true, t_true = exact_tiles_batch(a, b, c, splats.gamma, splats.mean[:, 0], splats.mean[:, 1], grid)
    emitted = g_emit * grid.num_tiles + t_emit
    exact = g_true * grid.num_tiles + t_true
    fp = np.count_nonzero(~np.isin(emitted, exact))
    missed = np.count_nonzero(~np.isin(exact, emitted))
    return fp / max(1, emitted.size), missed / max(1, exact.size)


def render_frame(scene: Scene, camera: CameraModel, strategy: BoundStrategy,
                 config: RenderConfig = RenderConfig(), oracle: bool = False,
                 oracle_seed: int = 0) -> FrameResult:
    """Run project -> duplicate -> sort -> render and time each stage."""
    grid = TileGrid(camera.width, camera.height, config.tile_size)
    threads = resolve_threads(config.threads)
    clock = time.perf_counter

    t0 = clock()
    splats = project_scene(scene, camera, strategy, config, grid)
    t1 = clock()
    pairs = duplicate_with_keys(splats, strategy, grid, threads)
    t2 = clock()
    ordered = sort_pairs(pairs, grid.num_tiles)
    t3 = clock()
    out = render(ordered, splats, grid, config, threads)
    t4 = clock()

    metrics = StageMetrics(
        strategy=strategy.value,
        gaussians=len(scene),
        visible=len(splats),
        pairs=len(pairs),
        mean_tiles=len(pairs) / len(splats) if len(splats) else 0.0,
        project_ms=(t1 - t0) * 1e3,
        duplicate_ms=(t2 - t1) * 1e3,
        sort_ms=(t3 - t2) * 1e3,
        render_ms=(t4 - t3) * 1e3,
        total_ms=(t4 - t0) * 1e3,
    )
    if oracle:
        metrics.false_positive_ratio, metrics.missed_ratio = tile_accuracy(
            splats, strategy, grid, seed=oracle_seed
        )
    return FrameResult(out.image, metrics, splats, ordered, out)
