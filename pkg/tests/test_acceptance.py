"""Acceptance criteria 1-9.

Each test records one PASS/FAIL line (shown in the terminal summary) before
asserting.  Run alone with ``pytest tests/test_acceptance.py -v``.

A real checkpoint can be added to criterion 5 by setting
``QUADSPLAT_PLY`` and ``QUADSPLAT_CAMERAS``.
"""
import math
import os
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.optimize import minimize

from conftest import ACCEPTANCE_LINES
from quadsplat.bench import cmd_render, timed_frame
from quadsplat.errors import QuadSplatError
from quadsplat.geometry import Conic2D, support_point
from quadsplat.pipeline import RenderConfig, render_frame
from quadsplat.quadbox import BoundStrategy
from quadsplat.scene_io import load_cameras, load_ply, parse_ply, ply_bytes, preset, synth_camera, synth_scene
from quadsplat.validate import check_qpass_exact, check_sandwich, check_stretch_identities, random_cases

N_CASES = 100_000
N_SUPPORT = 10_000
N_BOUNDARY = 1_000
N_FUZZ = 1_000

LOSSLESS = (BoundStrategy.VANILLA, BoundStrategy.ADR, BoundStrategy.QUADBOX)

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def cases():
    return random_cases(N_CASES, seed=0)


@pytest.fixture(scope="module")
def diag_scene():
    params = preset("diag45", count=5000)
    return synth_scene(params, seed=0), synth_camera(params)


@pytest.fixture(scope="module")
def diag_frames(diag_scene):
    scene, cam = diag_scene
    config = RenderConfig()
    return {s: timed_frame(scene, cam, s, config, repeats=5) for s in BoundStrategy}


def test_c1_sandwich(cases, criterion):
    start = time.process_time()
    result = check_sandwich(cases)
    elapsed = time.process_time() - start
    ok = result.passed and elapsed < 60.0
    criterion(1, ok, f"exact <= quadbox <= adr, {result.violations} violations / {len(cases)} "
                     f"cases in {elapsed:.1f} s cpu (< 60 s)")
    assert result.passed, result.line()
    assert elapsed < 60.0


def test_c2_qpass_exact(cases, criterion):
    result = check_qpass_exact(cases)
    criterion(2, result.passed, f"qpass == naive union, each tile once, "
                                f"{result.violations} violations / {result.cases} cases")
    assert result.passed, result.line()


def test_c3_stretch_identities(cases, criterion):
    result = check_stretch_identities(cases, max_ulp=4)
    criterion(3, result.passed, f"f identities within 4 ULP, {result.violations} violations / "
                                f"{result.cases} cases")
    assert result.passed, result.line()


def _boundary(lam, q, gamma, t):
    """Boundary points sqrt(gamma) Q diag(lam^-1/2) (cos t, sin t); shapes (N, T)."""
    u = np.cos(t) / np.sqrt(lam[:, 0:1])
    w = np.sin(t) / np.sqrt(lam[:, 1:2])
    sg = np.sqrt(gamma)[:, None]
    return sg * (q[:, 0, 0:1] * u + q[:, 0, 1:2] * w), sg * (q[:, 1, 0:1] * u + q[:, 1, 1:2] * w)


def test_c4_support(criterion):
    cs = random_cases(N_SUPPORT, seed=1)
    rng = np.random.default_rng(1)
    v = rng.normal(size=(N_SUPPORT, 2))
    a, b, c = cs.conic.T
    closed = np.empty(N_SUPPORT)
    on_boundary = np.empty(N_SUPPORT)
    for i in range(N_SUPPORT):
        conic = Conic2D(a[i], b[i], c[i], cs.gamma[i])
        closed[i], (ux, uy) = support_point(conic, v[i])
        on_boundary[i] = abs(conic.value(ux, uy)) / conic.gamma

    # the boundary parameterization comes from an eigendecomposition, not the closed form
    lam, q = np.linalg.eigh(np.stack([np.stack([a, b], -1), np.stack([b, c], -1)], -2))
    t = np.linspace(0.0, 2 * np.pi, N_BOUNDARY, endpoint=False)[None, :]
    px, py = _boundary(lam, q, cs.gamma, t)
    dots = v[:, 0:1] * px + v[:, 1:2] * py
    dominated = np.all(dots <= closed[:, None] * (1 + 1e-12), axis=1)

    # golden-section refinement around the best sample
    best_t = t[0, np.argmax(dots, axis=1)]
    lo, hi = best_t - 2 * np.pi / N_BOUNDARY, best_t + 2 * np.pi / N_BOUNDARY
    phi = (math.sqrt(5) - 1) / 2

    def h(tt):
        x, y = _boundary(lam, q, cs.gamma, tt[:, None])
        return v[:, 0] * x[:, 0] + v[:, 1] * y[:, 0]

    for _ in range(80):
        m1, m2 = hi - phi * (hi - lo), lo + phi * (hi - lo)
        left = h(m1) > h(m2)
        hi = np.where(left, m2, hi)
        lo = np.where(left, lo, m1)
    numeric = h(0.5 * (lo + hi))
    rel = np.abs(numeric - closed) / np.abs(closed)

    # constrained maximization (SLSQP on F(u) = 0) for a subset
    slsqp_rel = []
    for i in range(200):
        conic = Conic2D(a[i], b[i], c[i], cs.gamma[i])
        scale = math.sqrt(conic.gamma / lam[i, 0])
        res = minimize(
            lambda u, i=i: -(v[i] @ u) / scale, x0=np.array([px[i, 0], py[i, 0]]),
            constraints=[{"type": "eq", "fun": lambda u, conic=conic: conic.value(u[0], u[1]) / conic.gamma}],
            method="SLSQP", options={"ftol": 1e-15, "maxiter": 500},
        )
        slsqp_rel.append(abs(-res.fun * scale - closed[i]) / abs(closed[i]))
    slsqp_rel = np.array(slsqp_rel)

    ok = dominated.all() and rel.max() <= 1e-6 and slsqp_rel.max() <= 1e-6 and on_boundary.max() < 1e-9
    criterion(4, ok, f"support dominates {N_BOUNDARY} samples on {np.count_nonzero(dominated)}/"
                     f"{N_SUPPORT} pairs; max rel err vs golden-section {rel.max():.2e}, "
                     f"vs SLSQP {slsqp_rel.max():.2e} (<= 1e-6)")
    assert dominated.all()
    assert rel.max() <= 1e-6
    assert slsqp_rel.max() <= 1e-6
    assert on_boundary.max() < 1e-9


def _invariance(scene, cam):
    config = RenderConfig()
    images = {s: render_frame(scene, cam, s, config).image for s in BoundStrategy}
    ref = images[BoundStrategy.VANILLA]
    same = {s: bool(np.array_equal(images[s], ref)) for s in BoundStrategy}
    return same


@pytest.mark.parametrize("name", ["diag45", "uniform"])
def test_c5_image_invariance_synthetic(name, criterion):
    params = preset(name, count=5000)
    scene, cam = synth_scene(params, seed=0), synth_camera(params)
    assert (cam.width, cam.height) == (640, 480)
    same = _invariance(scene, cam)
    ok = all(same[s] for s in LOSSLESS)
    dual = "identical (no lossy effect on this scene)" if same[BoundStrategy.DUALBOX] else "differs (lossy)"
    criterion(5, ok, f"{name} 5k @ 640x480: vanilla/adr/quadbox byte-identical = {ok}; dualbox {dual}")
    assert ok
    assert not same[BoundStrategy.DUALBOX]


def test_c5_image_invariance_real_ply(criterion):
    ply, cams = os.environ.get("QUADSPLAT_PLY"), os.environ.get("QUADSPLAT_CAMERAS")
    if not ply or not cams:
        ACCEPTANCE_LINES.append("[SKIP] criterion 5: no real PLY supplied (QUADSPLAT_PLY / QUADSPLAT_CAMERAS)")
        pytest.skip("set QUADSPLAT_PLY and QUADSPLAT_CAMERAS to check a real scene")
    scene, cam = load_ply(ply), load_cameras(cams)[0]
    same = _invariance(scene, cam)
    ok = all(same[s] for s in LOSSLESS)
    criterion(5, ok, f"real PLY {Path(ply).name}: " + ", ".join(f"{s.value}={same[s]}" for s in BoundStrategy))
    assert ok


def test_c6_pair_reduction(diag_frames, criterion):
    pairs = {s: f.metrics.pairs for s, f in diag_frames.items()}
    q, a, v = pairs[BoundStrategy.QUADBOX], pairs[BoundStrategy.ADR], pairs[BoundStrategy.VANILLA]
    vs_adr, vs_van = 1 - q / a, 1 - q / v
    ok = vs_adr >= 0.20 and vs_van >= 0.45 and q < a < v
    criterion(6, ok, f"pairs vanilla={v} adr={a} quadbox={q} dualbox={pairs[BoundStrategy.DUALBOX]}; "
                     f"quadbox {vs_adr:.1%} fewer than adr (>= 20%), {vs_van:.1%} fewer than vanilla (>= 45%)")
    assert q < a < v
    assert vs_adr >= 0.20
    assert vs_van >= 0.45


def test_c7_wall_clock_ordering(diag_frames, criterion):
    ms = {s: f.metrics.total_ms for s, f in diag_frames.items()}
    q, a, v = ms[BoundStrategy.QUADBOX], ms[BoundStrategy.ADR], ms[BoundStrategy.VANILLA]
    ok = q <= a <= v
    criterion(7, ok, f"median of 5 total ms: quadbox={q:.0f} <= adr={a:.0f} <= vanilla={v:.0f}")
    assert ok


def test_c8_thread_determinism(diag_scene, tmp_path, criterion):
    scene, cam = diag_scene
    rows = {}
    for threads in (1, 8):
        out = tmp_path / f"t{threads}"
        rows[threads] = cmd_render(scene, [cam], BoundStrategy.QUADBOX, out,
                                   RenderConfig(threads=threads), repeats=1)[0]
    same_hash = rows[1]["image_sha256"] == rows[8]["image_sha256"]
    same_pairs = rows[1]["pairs"] == rows[8]["pairs"]
    same_file = (tmp_path / "t1" / "synth_quadbox.ppm").read_bytes() == (tmp_path / "t8" / "synth_quadbox.ppm").read_bytes()
    ok = same_hash and same_pairs and same_file
    criterion(8, ok, f"threads 1 vs 8: hash equal={same_hash}, pairs {rows[1]['pairs']} vs {rows[8]['pairs']}")
    assert ok


def _mutate(base: bytes, header_end: int, rng: np.random.Generator, i: int) -> bytes:
    d = bytearray(base)
    kind = i % 6
    if kind == 0:  # flip header bytes
        for _ in range(rng.integers(1, 4)):
            d[rng.integers(0, header_end)] = rng.integers(0, 256)
    elif kind == 1:  # truncate anywhere
        d = d[: rng.integers(0, len(d))]
    elif kind == 2:  # scribble over the body
        for _ in range(rng.integers(1, 20)):
            d[rng.integers(header_end, len(d))] = rng.integers(0, 256)
    elif kind == 3:  # insert junk into the header
        p = rng.integers(0, header_end)
        d[p:p] = rng.integers(0, 256, rng.integers(1, 8)).astype(np.uint8).tobytes()
    elif kind == 4:  # replace one header line
        lines = bytes(d[:header_end]).split(b"\n")
        swaps = [b"element vertex -3", b"element vertex 99999999999999999999",
                 b"property list uchar int x", b"format binary_big_endian 1.0", b"format ascii 1.0",
                 b"property double x", b"element face 2", b"property float", b"end_header", b""]
        lines[rng.integers(0, len(lines))] = swaps[rng.integers(0, len(swaps))]
        d = bytearray(b"\n".join(lines) + bytes(d[header_end:]))
    else:  # delete header bytes
        p = rng.integers(0, header_end)
        del d[p:p + rng.integers(1, 6)]
    return bytes(d)


def test_c9_loader_robustness(criterion):
    base = ply_bytes(synth_scene(preset("uniform", count=20, sh_degree=1), 0))
    header_end = base.index(b"end_header\n") + len(b"end_header\n")
    rng = np.random.default_rng(9)
    loaded = typed = 0
    untyped = []
    for i in range(N_FUZZ):
        try:
            parse_ply(_mutate(base, header_end, rng, i))
            loaded += 1
        except QuadSplatError:
            typed += 1
        except Exception as exc:  # noqa: BLE001 - anything else is a crash
            untyped.append(f"{type(exc).__name__}: {exc}")

    first = parse_ply(ply_bytes(synth_scene(preset("uniform", count=5000, sh_degree=3), 2)))
    second = parse_ply(ply_bytes(first))
    worst = 0
    for name in ("positions", "scales", "rotations", "opacities", "sh"):
        x = np.asarray(getattr(first, name), np.float32).view(np.int32).astype(np.int64)
        y = np.asarray(getattr(second, name), np.float32).view(np.int32).astype(np.int64)
        worst = max(worst, int(np.abs(x - y).max()))

    ok = not untyped and worst <= 1
    criterion(9, ok, f"fuzz {N_FUZZ}: {typed} typed errors, {loaded} loaded, {len(untyped)} crashes; "
                     f"round-trip max {worst} ULP on activated values (<= 1)")
    assert not untyped, untyped[:5]
    assert worst <= 1
