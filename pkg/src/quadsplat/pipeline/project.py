"""Preprocess stage: EWA projection, opacity filtering and tile counting."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..geometry import Conic2D, Cov2D, axis_extents_batch, gamma_batch, invert_cov_batch
from ..quadbox import BoundStrategy, strategy_boxes_batch
from ..scene_io.cameras import CameraModel
from ..scene_io.scene import Gaussian3D, Scene
from ..traversal import TileGrid, qpass_count_batch
from .config import RenderConfig, chunk_bounds, parallel_map, resolve_threads
from .sh import eval_sh

FRUSTUM_SLACK = 1.3


@dataclass(frozen=True)
class ProjectedSplat:
    mean2d: tuple
    cov: Cov2D
    conic: Conic2D
    depth: float
    color: np.ndarray
    opacity: float
    tile_count: int


@dataclass(eq=False)
class ProjectedSplats:
    """Surviving splats of one frame, struct-of-arrays, in scene order."""

    index: np.ndarray  # (M,) index into the scene
    mean: np.ndarray  # (M, 2) pixels
    cov: np.ndarray  # (M, 3) sxx, sxy, syy
    conic: np.ndarray  # (M, 3) a, b, c
    gamma: np.ndarray  # (M,)
    extents: np.ndarray  # (M, 3) x_max, y_max, f
    depth: np.ndarray  # (M,) float32 camera z
    color: np.ndarray  # (M, 3) linear RGB
    opacity: np.ndarray  # (M,)
    tile_count: np.ndarray  # (M,) int64

    def __len__(self) -> int:
        return self.index.shape[0]

    def boxes(self, strategy: BoundStrategy):
        """Absolute pixel bounds of each splat's sub-boxes, ``(M, K)`` arrays."""
        x_lo, x_hi, y_lo, y_hi = strategy_boxes_batch(
            strategy, self.cov.T, self.conic.T, self.extents.T
        )
        cx, cy = self.mean[:, 0:1], self.mean[:, 1:2]
        return cx + x_lo, cx + x_hi, cy + y_lo, cy + y_hi

    def take(self, rows: np.ndarray) -> "ProjectedSplats":
        return ProjectedSplats(**{k: v[rows] for k, v in vars(self).items()})

    @classmethod
    def concat(cls, parts) -> "ProjectedSplats":
        parts = list(parts)
        return cls(**{k: np.concatenate([vars(p)[k] for p in parts]) for k in vars(parts[0])})


def quat_to_rotmat(q: np.ndarray) -> np.ndarray:
    """Unit quaternions ``(N, 4)`` as (w, x, y, z) to rotation matrices."""
    w, x, y, z = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
    return np.stack([
        np.stack([1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)], -1),
        np.stack([2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)], -1),
        np.stack([2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)], -1),
    ], axis=-2)


def ewa_project(positions, scales, rotations, cam: CameraModel, low_pass: float = 0.3):
    """World-space Gaussians to screen means, camera depth and 2D covariance.

    Returns ``(mean2d (N, 2), depth (N,), cov2d (N, 3))``.  The perspective
    Jacobian is evaluated at the Gaussian center with the center clamped to
    1.3x the view frustum, as in the reference 3DGS rasterizer.
    """
    p = np.asarray(positions, dtype=np.float64)
    t = p @ cam.rotation.T + cam.translation
    tz = t[:, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        mean = np.stack([cam.fx * t[:, 0] / tz + cam.cx, cam.fy * t[:, 1] / tz + cam.cy], -1)
        lim_x = FRUSTUM_SLACK * (0.5 * cam.width / cam.fx)
        lim_y = FRUSTUM_SLACK * (0.5 * cam.height / cam.fy)
        tx = np.clip(t[:, 0] / tz, -lim_x, lim_x) * tz
        ty = np.clip(t[:, 1] / tz, -lim_y, lim_y) * tz
        zeros = np.zeros_like(tz)
        jac = np.stack([
            np.stack([cam.fx / tz, zeros, -cam.fx * tx / (tz * tz)], -1),
            np.stack([zeros, cam.fy / tz, -cam.fy * ty / (tz * tz)], -1),
        ], axis=-2)
    rs = quat_to_rotmat(np.asarray(rotations, dtype=np.float64)) * np.asarray(scales, dtype=np.float64)[:, None, :]
    m = jac @ cam.rotation @ rs  # (N, 2, 3)
    cov = m @ np.swapaxes(m, 1, 2)
    cov2d = np.stack([cov[:, 0, 0] + low_pass, cov[:, 0, 1], cov[:, 1, 1] + low_pass], -1)
    return mean, tz, cov2d


def _project_range(scene: Scene, cam: CameraModel, strategy: BoundStrategy,
                   config: RenderConfig, grid: TileGrid, lo: int, hi: int) -> ProjectedSplats:
    sl = slice(lo, hi)
    mean, depth, cov = ewa_project(scene.positions[sl], scene.scales[sl], scene.rotations[sl],
                                   cam, config.low_pass)
    opacity = scene.opacities[sl].astype(np.float64)
    # NaN-safe culls: keep only finite, in-front, invertible, opaque-enough splats
    depth32 = depth.astype(np.float32)
    keep = np.isfinite(depth) & (depth > config.near_clip) & (depth32 > 0)
    a, b, c, valid = invert_cov_batch(cov[:, 0], cov[:, 1], cov[:, 2])
    gamma = gamma_batch(opacity, config.alpha_min)
    keep &= valid & np.isfinite(gamma) & np.all(np.isfinite(mean), axis=1)
    x_max, y_max, _, _, f = axis_extents_batch(a, b, c, gamma)
    keep &= np.isfinite(x_max) & np.isfinite(y_max) & (f > 0)

    rows = np.nonzero(keep)[0]
    degree = scene.sh_degree if config.sh_degree is None else min(config.sh_degree, scene.sh_degree)
    pos = scene.positions[sl][rows].astype(np.float64)
    dirs = pos - cam.center
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    color = np.maximum(eval_sh(degree, scene.sh[sl][rows].astype(np.float64), dirs) + 0.5, 0.0)

    splats = ProjectedSplats(
        index=(rows + lo).astype(np.int64),
        mean=mean[rows],
        cov=cov[rows],
        conic=np.stack([a[rows], b[rows], c[rows]], -1),
        gamma=gamma[rows],
        extents=np.stack([x_max[rows], y_max[rows], f[rows]], -1),
        depth=depth32[rows],
        color=color,
        opacity=opacity[rows],
        tile_count=np.zeros(rows.size, dtype=np.int64),
    )
    splats.tile_count = qpass_count_batch(*splats.boxes(strategy), grid)
    return splats.take(np.nonzero(splats.tile_count > 0)[0])


def project_scene(scene: Scene, cam: CameraModel, strategy: BoundStrategy,
                  config: RenderConfig = RenderConfig(), grid: Optional[TileGrid] = None) -> ProjectedSplats:
    """Project every Gaussian; culled ones (behind the near plane, below
    ``alpha_min``, degenerate, or covering no tile) are dropped."""
    grid = grid or TileGrid(cam.width, cam.height, config.tile_size)
    threads = resolve_threads(config.threads)
    bounds = chunk_bounds(len(scene), threads)
    parts = parallel_map(
        lambda b: _project_range(scene, cam, strategy, config, grid, *b), bounds, threads
    )
    return ProjectedSplats.concat(parts)


def project(g: Gaussian3D, cam: CameraModel, strategy: BoundStrategy = BoundStrategy.QUADBOX,
            config: RenderConfig = RenderConfig()) -> Optional[ProjectedSplat]:
    """Single-Gaussian convenience wrapper around :func:`project_scene`."""
    sh = np.asarray(g.sh, dtype=np.float32)
    degree = int(round(np.sqrt(sh.shape[0]))) - 1
    scene = Scene(
        np.asarray(g.position, np.float32)[None], np.asarray(g.scale, np.float32)[None],
        np.asarray(g.rotation, np.float32)[None], np.asarray([g.opacity], np.float32),
        sh[None], degree,
    )
    s = project_scene(scene, cam, strategy, config)
    if len(s) == 0:
        return None
    a, b, c = s.conic[0]
    return ProjectedSplat(
        mean2d=(float(s.mean[0, 0]), float(s.mean[0, 1])),
        cov=Cov2D(*map(float, s.cov[0])),
        conic=Conic2D(float(a), float(b), float(c), float(s.gamma[0])),
        depth=float(s.depth[0]),
        color=s.color[0],
        opacity=float(s.opacity[0]),
        tile_count=int(s.tile_count[0]),
    )
