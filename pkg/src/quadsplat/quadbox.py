"""Bounding constructions for a projected Gaussian, in center-relative pixels.

Four strategies are supported:

* ``VANILLA`` - square of half side 3 sqrt(lambda_max), the classic 3-sigma box.
* ``ADR`` - opacity-aware AABB ``[-x_max, x_max] x [-y_max, y_max]``.
* ``DUALBOX`` - the two quadrants of the AABB on the major diagonal (lossy).
* ``QUADBOX`` - DualBox plus the two minor-diagonal quadrants shrunk by f.

In a minor-diagonal quadrant the cross term ``2bxy`` is non-negative, so any
point of the ellipse there satisfies ``a x^2 <= gamma`` and ``c y^2 <= gamma``;
the shrunken boxes therefore still cover the ellipse.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import DegenerateCovariance
from .geometry import B_EPS, Conic2D, Cov2D, Extents, axis_extents


class BoundStrategy(enum.Enum):
    VANILLA = "vanilla"
    ADR = "adr"
    DUALBOX = "dualbox"
    QUADBOX = "quadbox"

    @property
    def lossy(self) -> bool:
        return self is BoundStrategy.DUALBOX

    @classmethod
    def parse(cls, name: str) -> "BoundStrategy":
        try:
            return cls(name.lower())
        except ValueError:
            choices = ", ".join(s.value for s in cls)
            raise ValueError(f"unknown strategy {name!r} (choose from {choices})") from None


@dataclass(frozen=True)
class SubBox:
    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float

    @property
    def area(self) -> float:
        return (self.x_hi - self.x_lo) * (self.y_hi - self.y_lo)

    def contains(self, x: float, y: float) -> bool:
        return self.x_lo <= x <= self.x_hi and self.y_lo <= y <= self.y_hi


@dataclass(frozen=True)
class QuadBox:
    """Four quadrant boxes, ordered QI, QII, QIII, QIV.

    ``major_sign`` is the sign of ``-b``: +1 when the major axis runs
    through QI/QIII, -1 for QII/QIV, 0 for axis-aligned ellipses.
    """

    boxes: Tuple[SubBox, SubBox, SubBox, SubBox]
    center: Tuple[float, float] = (0.0, 0.0)
    major_sign: int = 0

    @property
    def area(self) -> float:
        # quadrant boxes only share edges
        return sum(box.area for box in self.boxes)

    def contains(self, x: float, y: float) -> bool:
        """Point test in center-relative coordinates."""
        return any(box.contains(x, y) for box in self.boxes)

    def at(self, center: Tuple[float, float]) -> "QuadBox":
        return QuadBox(self.boxes, (float(center[0]), float(center[1])), self.major_sign)


def b_sign(b: float) -> int:
    if abs(b) < B_EPS:
        return 0
    return 1 if b > 0.0 else -1


def build_vanilla_box(cov: Cov2D) -> SubBox:
    """3-sigma square from the largest eigenvalue of the covariance."""
    if not cov.det > 0.0:
        raise DegenerateCovariance(f"covariance {cov} is not positive definite")
    r = 3.0 * math.sqrt(cov.max_eigenvalue())
    return SubBox(-r, r, -r, r)


def build_adr_box(ext: Extents) -> SubBox:
    return SubBox(-ext.x_max, ext.x_max, -ext.y_max, ext.y_max)


def _quadrants(full_x: float, full_y: float, minor_x: float, minor_y: float, sign: int):
    full_i = SubBox(0.0, full_x, 0.0, full_y)
    full_iii = SubBox(-full_x, 0.0, -full_y, 0.0)
    full_ii = SubBox(-full_x, 0.0, 0.0, full_y)
    full_iv = SubBox(0.0, full_x, -full_y, 0.0)
    small_i = SubBox(0.0, minor_x, 0.0, minor_y)
    small_iii = SubBox(-minor_x, 0.0, -minor_y, 0.0)
    small_ii = SubBox(-minor_x, 0.0, 0.0, minor_y)
    small_iv = SubBox(0.0, minor_x, -minor_y, 0.0)
    if sign > 0:
        # b > 0: major axis through QII/QIV
        return (small_i, full_ii, small_iii, full_iv)
    return (full_i, small_ii, full_iii, small_iv)


def build_quadbox(ext: Extents, sign: int, center=(0.0, 0.0)) -> QuadBox:
    """QuadBox for an ellipse with extents ``ext`` and conic ``b`` of sign ``sign``."""
    if sign == 0:
        fx, fy = ext.x_max, ext.y_max
    else:
        fx, fy = ext.f * ext.x_max, ext.f * ext.y_max
    boxes = _quadrants(ext.x_max, ext.y_max, fx, fy, sign)
    return QuadBox(boxes, (float(center[0]), float(center[1])), -sign)


def build_dualbox(ext: Extents, sign: int, center=(0.0, 0.0)) -> QuadBox:
    """Major-diagonal quadrants only; the minor slots are zero-extent boxes.

    Axis-aligned ellipses (sign 0) keep QI/QIII.
    """
    boxes = _quadrants(ext.x_max, ext.y_max, 0.0, 0.0, sign)
    return QuadBox(boxes, (float(center[0]), float(center[1])), -sign)


def strategy_boxes(strategy: BoundStrategy, cov: Cov2D, conic: Conic2D) -> Tuple[SubBox, ...]:
    """Sub-boxes a strategy places around one Gaussian (center-relative)."""
    if strategy is BoundStrategy.VANILLA:
        return (build_vanilla_box(cov),)
    ext = axis_extents(conic)
    if strategy is BoundStrategy.ADR:
        return (build_adr_box(ext),)
    if strategy is BoundStrategy.DUALBOX:
        return build_dualbox(ext, b_sign(conic.b)).boxes
    return build_quadbox(ext, b_sign(conic.b)).boxes


def strategy_boxes_batch(strategy: BoundStrategy, cov, conic, extents):
    """Center-relative sub-box bounds for many Gaussians.

    ``cov`` is ``(sxx, sxy, syy)``, ``conic`` is ``(a, b, c)`` and ``extents``
    is ``(x_max, y_max, f)``.  Returns ``(x_lo, x_hi, y_lo, y_hi)``, each of
    shape ``(N, K)`` with K = 1 for the single-rect strategies and 4 otherwise,
    boxes ordered QI, QII, QIII, QIV like :func:`build_quadbox`.
    """
    if strategy is BoundStrategy.VANILLA:
        sxx, sxy, syy = (np.asarray(v, dtype=np.float64) for v in cov)
        lam = 0.5 * (sxx + syy) + np.hypot(0.5 * (sxx - syy), sxy)
        r = (3.0 * np.sqrt(lam))[:, None]
        return -r, r, -r.copy(), r.copy()
    x_max, y_max, f = (np.asarray(v, dtype=np.float64) for v in extents)
    if strategy is BoundStrategy.ADR:
        xm, ym = x_max[:, None], y_max[:, None]
        return -xm, xm, -ym, ym
    b = np.asarray(conic[1], dtype=np.float64)
    sign = np.where(np.abs(b) < B_EPS, 0, np.sign(b))
    if strategy is BoundStrategy.DUALBOX:
        mx = np.zeros_like(x_max)
        my = np.zeros_like(y_max)
    else:
        mx = np.where(sign == 0, x_max, f * x_max)
        my = np.where(sign == 0, y_max, f * y_max)
    pos = sign > 0  # major axis through QII/QIV
    wx = np.stack([np.where(pos, mx, x_max), np.where(pos, x_max, mx),
                   np.where(pos, mx, x_max), np.where(pos, x_max, mx)], axis=1)
    wy = np.stack([np.where(pos, my, y_max), np.where(pos, y_max, my),
                   np.where(pos, my, y_max), np.where(pos, y_max, my)], axis=1)
    zero = np.zeros_like(wx)
    # QI: [0, w]x[0, h]; QII: [-w, 0]x[0, h]; QIII: [-w, 0]x[-h, 0]; QIV: [0, w]x[-h, 0]
    x_lo = np.stack([zero[:, 0], -wx[:, 1], -wx[:, 2], zero[:, 3]], axis=1)
    x_hi = np.stack([wx[:, 0], zero[:, 1], zero[:, 2], wx[:, 3]], axis=1)
    y_lo = np.stack([zero[:, 0], zero[:, 1], -wy[:, 2], -wy[:, 3]], axis=1)
    y_hi = np.stack([wy[:, 0], wy[:, 1], zero[:, 2], zero[:, 3]], axis=1)
    return x_lo, x_hi, y_lo, y_hi
