"""Closed-form conic math for projected Gaussians.

A projected Gaussian with inverse covariance ``[[a, b], [b, c]]`` and
opacity threshold ``gamma`` contributes visibly only inside the ellipse

    F(x, y) = a x^2 + 2 b x y + c y^2 - gamma <= 0

(coordinates relative to the projected center).  Everything here works in
float64; the scalar functions take and return plain Python floats, the
``*_batch`` variants operate on numpy arrays with identical formulas.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

from .errors import DegenerateCovariance

ALPHA_MIN = 1.0 / 255.0
DET_EPS = 1e-12
B_EPS = 1e-12


@dataclass(frozen=True)
class Cov2D:
    """Screen-space covariance (pixels^2); symmetric, three entries stored."""

    sxx: float
    sxy: float
    syy: float

    @property
    def det(self) -> float:
        return self.sxx * self.syy - self.sxy * self.sxy

    def max_eigenvalue(self) -> float:
        mid = 0.5 * (self.sxx + self.syy)
        half_gap = math.hypot(0.5 * (self.sxx - self.syy), self.sxy)
        return mid + half_gap


@dataclass(frozen=True)
class Conic2D:
    """Inverse covariance entries plus the opacity threshold ``gamma``.

    ``gamma`` is ``None`` for a bare inverse that has not been paired with
    an opacity yet; :func:`axis_extents` and friends require it.
    """

    a: float
    b: float
    c: float
    gamma: Optional[float] = None
    det: float = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "det", self.a * self.c - self.b * self.b)

    def with_gamma(self, gamma: float) -> "Conic2D":
        return replace(self, gamma=gamma)

    def is_valid(self) -> bool:
        return self.a > 0.0 and self.c > 0.0 and self.det > 0.0

    def value(self, x, y):
        """F(x, y); works elementwise on arrays."""
        return self.a * x * x + 2.0 * self.b * x * y + self.c * y * y - self._gamma()

    def _gamma(self) -> float:
        if self.gamma is None:
            raise ValueError("conic has no opacity threshold attached")
        return self.gamma


@dataclass(frozen=True)
class Extents:
    """Opacity-aware half extents, axis intercepts and the stretching factor."""

    x_max: float
    y_max: float
    x_inter: float
    y_inter: float
    f: float


def opacity_gamma(opacity: float, alpha_min: float = ALPHA_MIN) -> Optional[float]:
    """Threshold on the Mahalanobis quadratic beyond which alpha < alpha_min.

    Returns ``None`` when the Gaussian can never reach ``alpha_min``.
    """
    if not 0.0 < alpha_min < 1.0:
        raise ValueError(f"alpha_min must lie in (0, 1), got {alpha_min}")
    if opacity <= alpha_min:
        return None
    return 2.0 * math.log(opacity / alpha_min)


def invert_cov(cov: Cov2D, det_eps: float = DET_EPS) -> Conic2D:
    det = cov.det
    if not det > det_eps or cov.sxx <= 0.0 or cov.syy <= 0.0:
        raise DegenerateCovariance(
            f"covariance ({cov.sxx}, {cov.sxy}, {cov.syy}) has det {det} <= {det_eps}"
        )
    inv = 1.0 / det
    return Conic2D(cov.syy * inv, -cov.sxy * inv, cov.sxx * inv)


def _shape_ratio(a: float, b: float, c: float) -> float:
    # 1 - b^2/(ac), clamped; equals det / (ac)
    if abs(b) < B_EPS:
        return 1.0
    return min(1.0, max(0.0, 1.0 - (b * b) / (a * c)))


def stretch_factor(conic: Conic2D) -> float:
    """f = sqrt(1 - b^2 / (ac)); reads no gamma."""
    return math.sqrt(_shape_ratio(conic.a, conic.b, conic.c))


def axis_extents(conic: Conic2D) -> Extents:
    """Half extents and axis intercepts of the ellipse F <= 0.

    The intercepts come from F(x, 0) = 0 and F(0, y) = 0.  The half extents
    sqrt(gamma c / (ac - b^2)) and sqrt(gamma a / (ac - b^2)) are computed
    as intercept / f, which is the same quantity (ac - b^2 = ac f^2) and keeps
    the intercept-to-extent ratio consistent with f to the last bits.
    """
    gamma = conic._gamma()
    f = stretch_factor(conic)
    if f <= 0.0:
        raise DegenerateCovariance(f"conic ({conic.a}, {conic.b}, {conic.c}) is singular")
    x_inter = math.sqrt(gamma / conic.a)
    y_inter = math.sqrt(gamma / conic.c)
    return Extents(x_inter / f, y_inter / f, x_inter, y_inter, f)


def support_point(conic: Conic2D, v: Tuple[float, float]) -> Tuple[float, Tuple[float, float]]:
    """Maximum of v.u over the ellipse boundary and the point attaining it."""
    gamma = conic._gamma()
    vx, vy = float(v[0]), float(v[1])
    if vx == 0.0 and vy == 0.0:
        raise ValueError("direction must be nonzero")
    det = conic.det
    # Lambda^{-1} v
    wx = (conic.c * vx - conic.b * vy) / det
    wy = (conic.a * vy - conic.b * vx) / det
    s = vx * wx + vy * wy
    scale = math.sqrt(gamma) / math.sqrt(s)
    return math.sqrt(gamma * s), (scale * wx, scale * wy)


# -- batched variants used by the pipeline ---------------------------------


def gamma_batch(opacity: np.ndarray, alpha_min: float = ALPHA_MIN) -> np.ndarray:
    """Vector :func:`opacity_gamma`; culled entries are NaN."""
    opacity = np.asarray(opacity, dtype=np.float64)
    out = np.full(opacity.shape, np.nan)
    keep = opacity > alpha_min
    out[keep] = 2.0 * np.log(opacity[keep] / alpha_min)
    return out


def invert_cov_batch(sxx, sxy, syy, det_eps: float = DET_EPS):
    """Return ``(a, b, c, valid)``; invalid rows hold NaN."""
    sxx = np.asarray(sxx, dtype=np.float64)
    sxy = np.asarray(sxy, dtype=np.float64)
    syy = np.asarray(syy, dtype=np.float64)
    det = sxx * syy - sxy * sxy
    valid = (det > det_eps) & (sxx > 0.0) & (syy > 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(valid, 1.0 / det, np.nan)
    return syy * inv, -sxy * inv, sxx * inv, valid


def stretch_factor_batch(a, b, c) -> np.ndarray:
    a, b, c = (np.asarray(v, dtype=np.float64) for v in (a, b, c))
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.clip(1.0 - (b * b) / (a * c), 0.0, 1.0)
    s = np.where(np.abs(b) < B_EPS, 1.0, s)
    return np.sqrt(s)


def axis_extents_batch(a, b, c, gamma):
    """Return ``(x_max, y_max, x_inter, y_inter, f)`` arrays."""
    f = stretch_factor_batch(a, b, c)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_inter = np.sqrt(gamma / a)
        y_inter = np.sqrt(gamma / c)
        return x_inter / f, y_inter / f, x_inter, y_inter, f
