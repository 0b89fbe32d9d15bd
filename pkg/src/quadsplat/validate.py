"""Seeded property suites over random conics, shared by the CLI and the tests.

Each check returns a :class:`CheckResult`; failures carry the first
counterexample (conic entries, center, grid) in ``detail``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from . import geometry
from .geometry import Conic2D, Cov2D
from .oracle import exact_tiles_batch
from .pipeline import RenderConfig, render_frame
from .quadbox import BoundStrategy, strategy_boxes, strategy_boxes_batch
from .scene_io import preset, synth_camera, synth_scene
from .traversal import TileGrid, naive_traverse, qpass, qpass_batch, span_tiles

GRIDS = (
    TileGrid(640, 480, 16),
    TileGrid(333, 217, 16),
    TileGrid(128, 96, 8),
    TileGrid(50, 70, 4),
)


@dataclass
class ConicCases:
    """Random screen-space Gaussians: covariance, conic, threshold, center, grid."""

    cov: np.ndarray  # (N, 3)
    conic: np.ndarray  # (N, 3)
    gamma: np.ndarray  # (N,)
    center: np.ndarray  # (N, 2)
    grid_index: np.ndarray  # (N,)
    grids: tuple = GRIDS

    def __len__(self) -> int:
        return self.gamma.shape[0]

    def describe(self, i: int) -> Dict:
        g = self.grids[self.grid_index[i]]
        a, b, c = self.conic[i]
        return {
            "a": float(a), "b": float(b), "c": float(c), "gamma": float(self.gamma[i]),
            "center": [float(v) for v in self.center[i]],
            "grid": [g.width, g.height, g.tile_size],
        }

    def conic2d(self, i: int) -> Conic2D:
        a, b, c = map(float, self.conic[i])
        return Conic2D(a, b, c, float(self.gamma[i]))

    def cov2d(self, i: int) -> Cov2D:
        return Cov2D(*map(float, self.cov[i]))

    def extents(self):
        x_max, y_max, _, _, f = geometry.axis_extents_batch(*self.conic.T, self.gamma)
        return np.stack([x_max, y_max, f], -1)


def random_cases(n: int, seed: int = 0, grids=GRIDS, max_ecc: float = 100.0) -> ConicCases:
    """Random conics: axis ratio up to ``max_ecc``, all orientations,
    gamma in [0.5, 11.1].  About 5% are axis-aligned and 5% exactly 45 degrees;
    about 5% are sub-pixel."""
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, np.pi, n)
    kind = rng.uniform(size=n)
    theta = np.where(kind < 0.05, rng.integers(0, 2, n) * (np.pi / 2), theta)
    theta = np.where((kind >= 0.05) & (kind < 0.10), np.pi / 4 + rng.integers(0, 2, n) * (np.pi / 2), theta)
    major = np.exp(rng.uniform(np.log(0.3), np.log(40.0), n))
    major = np.where((kind >= 0.10) & (kind < 0.15), rng.uniform(0.05, 0.5, n), major)
    ratio = np.exp(rng.uniform(0.0, np.log(max_ecc), n))
    minor = major / ratio
    cs, sn = np.cos(theta), np.sin(theta)
    l1, l2 = major ** 2, minor ** 2
    sxx = l1 * cs * cs + l2 * sn * sn
    syy = l1 * sn * sn + l2 * cs * cs
    sxy = (l1 - l2) * cs * sn
    axis = kind < 0.05
    sxy = np.where(axis, 0.0, sxy)
    a, b, c, valid = geometry.invert_cov_batch(sxx, sxy, syy, det_eps=0.0)
    assert valid.all()
    gamma = rng.uniform(0.5, 11.1, n)
    gi = rng.integers(0, len(grids), n)
    wh = np.array([[g.width, g.height] for g in grids], dtype=np.float64)[gi]
    # centers spread slightly beyond the image so partial and off-screen cases occur
    center = rng.uniform(-0.1, 1.1, (n, 2)) * wh
    return ConicCases(
        np.stack([sxx, sxy, syy], -1), np.stack([a, b, c], -1), gamma, center, gi, tuple(grids)
    )


@dataclass
class CheckResult:
    name: str
    cases: int
    violations: int = 0
    detail: Optional[Dict] = None
    notes: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"[{status}] {self.name}: {self.violations} violations / {self.cases} cases"
        if self.detail is not None:
            text += f"; first counterexample {self.detail}"
        return text


def _keys(g, t, grid):
    return g.astype(np.int64) * grid.num_tiles + t


def _emit(cases: ConicCases, rows, strategy: BoundStrategy, grid: TileGrid):
    x_lo, x_hi, y_lo, y_hi = strategy_boxes_batch(
        strategy, cases.cov[rows].T, cases.conic[rows].T, cases.extents()[rows].T
    )
    cx, cy = cases.center[rows, 0:1], cases.center[rows, 1:2]
    return qpass_batch(cx + x_lo, cx + x_hi, cy + y_lo, cy + y_hi, grid)


def check_sandwich(cases: ConicCases) -> CheckResult:
    """exact tiles <= QuadBox tiles <= AdR tiles, per Gaussian."""
    result = CheckResult("sandwich exact <= quadbox <= adr", len(cases))
    bad_rows: List[int] = []
    for k, grid in enumerate(cases.grids):
        rows = np.nonzero(cases.grid_index == k)[0]
        if rows.size == 0:
            continue
        a, b, c = cases.conic[rows].T
        g_ex, t_ex = exact_tiles_batch(a, b, c, cases.gamma[rows], cases.center[rows, 0],
                                       cases.center[rows, 1], grid)
        g_q, t_q = _emit(cases, rows, BoundStrategy.QUADBOX, grid)
        g_a, t_a = _emit(cases, rows, BoundStrategy.ADR, grid)
        ex, q, ad = _keys(g_ex, t_ex, grid), _keys(g_q, t_q, grid), _keys(g_a, t_a, grid)
        miss_q = ~np.isin(ex, q)
        miss_a = ~np.isin(q, ad)
        bad = np.union1d(g_ex[miss_q], g_q[miss_a])
        bad_rows.extend(rows[bad].tolist())
    result.violations = len(bad_rows)
    if bad_rows:
        result.detail = cases.describe(min(bad_rows))
    return result


def check_qpass_exact(cases: ConicCases, limit: Optional[int] = None) -> CheckResult:
    """Scalar QPass == naive per-box union, no duplicates, batch == scalar."""
    n = len(cases) if limit is None else min(limit, len(cases))
    result = CheckResult("qpass == naive union, each tile once", n)
    first = None
    for k, grid in enumerate(cases.grids):
        rows = np.nonzero(cases.grid_index[:n] == k)[0]
        if rows.size == 0:
            continue
        g_b, t_b = _emit(cases, rows, BoundStrategy.QUADBOX, grid)
        starts = np.searchsorted(g_b, np.arange(rows.size + 1))
        for j, i in enumerate(rows):
            boxes = strategy_boxes(BoundStrategy.QUADBOX, cases.cov2d(i), cases.conic2d(i))
            center = tuple(cases.center[i])
            emitted = span_tiles(qpass(boxes, center, grid))
            batch = [grid.tile_xy(int(t)) for t in t_b[starts[j]:starts[j + 1]]]
            ok = (
                len(emitted) == len(set(emitted))
                and set(emitted) == naive_traverse(boxes, center, grid)
                and batch == emitted
            )
            if not ok:
                result.violations += 1
                if first is None or i < first:
                    first = int(i)
    if first is not None:
        result.detail = cases.describe(first)
    return result


def ulp_distance(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.abs(x - y) / np.spacing(np.maximum(np.abs(x), np.abs(y)))


def check_stretch_identities(cases: ConicCases, max_ulp: float = 4.0) -> CheckResult:
    """f = x_inter/x_max = y_inter/y_max, gamma-invariant, f == 1 iff |b| < b_eps."""
    result = CheckResult(f"stretch factor identities ({max_ulp:g} ULP)", len(cases))
    a, b, c = cases.conic.T
    x_max, y_max, x_inter, y_inter, f = geometry.axis_extents_batch(a, b, c, cases.gamma)
    _, _, _, _, f2 = geometry.axis_extents_batch(a, b, c, cases.gamma * 1.7 + 0.1)
    f_scalar = np.array([geometry.stretch_factor(Conic2D(*map(float, row))) for row in cases.conic])
    bad = (
        (ulp_distance(f, x_inter / x_max) > max_ulp)
        | (ulp_distance(f, y_inter / y_max) > max_ulp)
        | (ulp_distance(x_inter, f * x_max) > max_ulp)
        | (ulp_distance(y_inter, f * y_max) > max_ulp)
        | (f != f2)
        | (f != f_scalar)
        | ((f == 1.0) != (np.abs(b) < geometry.B_EPS))
        | ~((f > 0.0) & (f <= 1.0))
    )
    result.violations = int(np.count_nonzero(bad))
    if result.violations:
        result.detail = cases.describe(int(np.argmax(bad)))
    return result


def check_image_invariance(seed: int = 0, count: int = 400) -> CheckResult:
    """Vanilla, AdR and QuadBox render byte-identical images."""
    params = preset("uniform", count=count, width=160, height=120, focal=130.0)
    scene, cam = synth_scene(params, seed), synth_camera(params)
    config = RenderConfig(threads=1)
    ref = render_frame(scene, cam, BoundStrategy.QUADBOX, config).image
    result = CheckResult("image invariance vanilla/adr/quadbox", 3)
    for strategy in (BoundStrategy.VANILLA, BoundStrategy.ADR):
        img = render_frame(scene, cam, strategy, config).image
        if not np.array_equal(img, ref):
            result.violations += 1
            result.detail = {"strategy": strategy.value, "max_abs_diff": float(np.abs(img - ref).max())}
    return result


def run_all(seed: int = 0, iterations: int = 10_000) -> List[CheckResult]:
    if iterations <= 0:
        results = [CheckResult(name, 0) for name in (
            "sandwich exact <= quadbox <= adr", "qpass == naive union, each tile once",
            "stretch factor identities (4 ULP)")]
        for r in results:
            r.notes.append("no iterations requested; vacuous pass")
        return results
    cases = random_cases(iterations, seed)
    return [
        check_sandwich(cases),
        check_qpass_exact(cases),
        check_stretch_identities(cases),
        check_image_invariance(seed),
    ]
