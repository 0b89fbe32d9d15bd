from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np


def sh_coeff_count(degree: int) -> int:
    return (degree + 1) ** 2


@dataclass(frozen=True, eq=False)
class Gaussian3D:
    position: np.ndarray  # (3,)
    scale: np.ndarray  # (3,), activated
    rotation: np.ndarray  # (4,) w, x, y, z; unit
    opacity: float
    sh: np.ndarray  # (K, 3)


@dataclass(eq=False)
class Scene:
    """Activated Gaussians.  Synthetic scenes are float32; scenes loaded from
    PLY keep float64 activations of the float32 file values.

    ``sh`` has shape ``(N, K, 3)`` with ``K = (sh_degree + 1) ** 2``.
    """

    positions: np.ndarray
    scales: np.ndarray
    rotations: np.ndarray
    opacities: np.ndarray
    sh: np.ndarray
    sh_degree: int = 0
    source: Optional[str] = None

    def __post_init__(self) -> None:
        n = self.positions.shape[0]
        k = sh_coeff_count(self.sh_degree)
        shapes = {
            "positions": (self.positions, (n, 3)),
            "scales": (self.scales, (n, 3)),
            "rotations": (self.rotations, (n, 4)),
            "opacities": (self.opacities, (n,)),
            "sh": (self.sh, (n, k, 3)),
        }
        for name, (arr, shape) in shapes.items():
            if arr.shape != shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")

    def __len__(self) -> int:
        return self.positions.shape[0]

    def __getitem__(self, i: int) -> Gaussian3D:
        return Gaussian3D(
            self.positions[i], self.scales[i], self.rotations[i], float(self.opacities[i]), self.sh[i]
        )

    @classmethod
    def empty(cls, sh_degree: int = 0) -> "Scene":
        k = sh_coeff_count(sh_degree)
        z = np.zeros
        return cls(
            z((0, 3), np.float32), z((0, 3), np.float32), z((0, 4), np.float32),
            z(0, np.float32), z((0, k, 3), np.float32), sh_degree,
        )
