"""Seeded desk-scale test scenes.

Gaussians are flat ellipses facing a default camera at the origin looking
down +z, so their screen-space orientation follows the in-plane rotation
drawn here.  Presets:

* ``axis`` - major axis along x or y.
* ``uniform`` - orientation uniform in [0, pi).
* ``diag45`` - orientation within a few degrees of +-45 degrees.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

from .cameras import CameraModel
from .scene import Scene, sh_coeff_count

SH_C0 = 0.28209479177387814

ORIENTATIONS = ("axis", "uniform", "diag45")


@dataclass(frozen=True)
class SynthParams:
    count: int = 5000
    orientation: str = "uniform"
    eccentricity: Tuple[float, float] = (1.0, 4.0)
    # opacity <= ~0.35 keeps every splat's threshold within the 3-sigma radius
    opacity: Tuple[float, float] = (0.05, 0.35)
    # major-axis standard deviation in world units at unit depth
    sigma: Tuple[float, float] = (0.006, 0.02)
    depth: Tuple[float, float] = (4.0, 8.0)
    thickness: float = 1e-7
    sh_degree: int = 0
    width: int = 640
    height: int = 480
    focal: float = 525.0


PRESETS = {
    "axis": SynthParams(orientation="axis", eccentricity=(5.0, 15.0), sigma=(0.01, 0.03)),
    "uniform": SynthParams(orientation="uniform", eccentricity=(1.0, 8.0), sigma=(0.01, 0.03)),
    "diag45": SynthParams(orientation="diag45", eccentricity=(5.0, 15.0), sigma=(0.01, 0.03)),
}


def preset(name: str, **overrides) -> SynthParams:
    try:
        base = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r} (choose from {', '.join(PRESETS)})") from None
    return replace(base, **overrides)


def _angles(rng: np.random.Generator, n: int, orientation: str) -> np.ndarray:
    if orientation == "axis":
        return rng.integers(0, 2, n) * (np.pi / 2)
    if orientation == "uniform":
        return rng.uniform(0.0, np.pi, n)
    if orientation == "diag45":
        sign = np.where(rng.integers(0, 2, n) == 0, 1.0, -1.0)
        return sign * np.pi / 4 + rng.normal(0.0, np.deg2rad(3.0), n)
    raise ValueError(f"unknown orientation {orientation!r} (choose from {', '.join(ORIENTATIONS)})")


def synth_camera(params: SynthParams = SynthParams()) -> CameraModel:
    return CameraModel.look_from(params.width, params.height, params.focal, name="synth")


def synth_scene(params: SynthParams = SynthParams(), seed: int = 0) -> Scene:
    if params.count == 0:
        return Scene.empty(params.sh_degree)
    rng = np.random.default_rng(seed)
    n = params.count
    z = rng.uniform(*params.depth, n)
    half_w = params.width / (2.0 * params.focal)
    half_h = params.height / (2.0 * params.focal)
    x = rng.uniform(-half_w, half_w, n) * z
    y = rng.uniform(-half_h, half_h, n) * z

    major = np.exp(rng.uniform(*np.log(params.sigma), n)) * z
    ecc = rng.uniform(*params.eccentricity, n)
    scales = np.stack([major, major / ecc, np.full(n, params.thickness)], axis=1)

    theta = _angles(rng, n, params.orientation)
    rotations = np.stack(
        [np.cos(theta / 2), np.zeros(n), np.zeros(n), np.sin(theta / 2)], axis=1
    )
    opacities = rng.uniform(*params.opacity, n)
    colors = rng.uniform(0.05, 0.95, (n, 3))
    sh = np.zeros((n, sh_coeff_count(params.sh_degree), 3))
    sh[:, 0, :] = (colors - 0.5) / SH_C0
    if params.sh_degree > 0:
        sh[:, 1:, :] = rng.normal(0.0, 0.05, sh[:, 1:, :].shape)

    return Scene(
        positions=np.stack([x, y, z], axis=1).astype(np.float32),
        scales=scales.astype(np.float32),
        rotations=rotations.astype(np.float32),
        opacities=opacities.astype(np.float32),
        sh=sh.astype(np.float32),
        sh_degree=params.sh_degree,
        source=f"synth:{params.orientation}:{seed}",
    )
