"""``quadsplat`` command line.

Exit codes: 0 ok, 1 property failure (validate), 2 usage, 3 parse, 4 I/O.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Tuple

from . import bench, validate
from .errors import ParseError, SchemaError
from .geometry import ALPHA_MIN
from .pipeline import RenderConfig, resolve_threads
from .quadbox import BoundStrategy
from .scene_io import (
    CameraModel, PRESETS, Scene, load_cameras, load_ply, preset, save_cameras, save_ply,
    synth_camera, synth_scene,
)

EXIT_FAIL, EXIT_USAGE, EXIT_PARSE, EXIT_IO = 1, 2, 3, 4

log = logging.getLogger("quadsplat")


def _background(text: str) -> Tuple[float, float, float]:
    try:
        values = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected r,g,b floats, got {text!r}") from None
    if len(values) != 3:
        raise argparse.ArgumentTypeError(f"expected 3 components, got {len(values)}")
    return values


def _alpha(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError("alpha-min must lie in (0, 1)")
    return value


def _scene_args(p: argparse.ArgumentParser) -> None:
    src = p.add_argument_group("scene")
    src.add_argument("--scene", type=Path, help="3DGS checkpoint (binary little-endian PLY)")
    src.add_argument("--cameras", type=Path, help="3DGS cameras.json")
    src.add_argument("--synth", choices=sorted(PRESETS), help="use a synthetic scene preset")
    src.add_argument("--count", type=int, default=5000, help="Gaussians in a synthetic scene")
    src.add_argument("--seed", type=int, default=0)


def _render_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tile-size", type=int, default=16)
    p.add_argument("--alpha-min", type=_alpha, default=ALPHA_MIN)
    p.add_argument("--sh-degree", type=int, choices=range(4), default=None)
    p.add_argument("--background", type=_background, default=(0.0, 0.0, 0.0))
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: $QUADBOX_THREADS or CPU count)")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--out", type=Path, default=Path("out"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quadsplat", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("render", help="render cameras with one bounding strategy")
    _scene_args(p)
    _render_args(p)
    p.add_argument("--strategy", choices=[s.value for s in BoundStrategy], default="quadbox")
    p.add_argument("--format", choices=("ppm", "png"), default="ppm")
    p.add_argument("--oracle", action="store_true", help="measure false-positive tiles")

    p = sub.add_parser("compare", help="run every strategy and report ratios")
    _scene_args(p)
    _render_args(p)
    p.add_argument("--zoom-frames", type=int, default=0)
    p.add_argument("--zoom-max", type=float, default=4.0)

    p = sub.add_parser("validate", help="run the seeded property suites")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--iterations", type=int, default=10_000)

    p = sub.add_parser("synth", help="write a synthetic scene as scene.ply + cameras.json")
    p.add_argument("--preset", choices=sorted(PRESETS), default="diag45")
    p.add_argument("--count", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=Path("synth"))
    return parser


def _load(args, parser) -> Tuple[Scene, List[CameraModel]]:
    if args.scene is not None and args.synth is not None:
        parser.error("--scene and --synth are mutually exclusive")
    if args.scene is None and args.synth is None:
        parser.error("one of --scene or --synth is required")
    if args.synth is not None:
        params = preset(args.synth, count=args.count)
        scene = synth_scene(params, args.seed)
        cameras = load_cameras(args.cameras) if args.cameras else [synth_camera(params)]
        return scene, cameras
    if args.cameras is None:
        parser.error("--cameras is required with --scene")
    return load_ply(args.scene), load_cameras(args.cameras)


def _config(args) -> RenderConfig:
    return RenderConfig(
        tile_size=args.tile_size, alpha_min=args.alpha_min, sh_degree=args.sh_degree,
        background=args.background, threads=resolve_threads(args.threads),
    )


def _run(args, parser) -> int:
    if args.command == "validate":
        if args.iterations <= 0:
            log.warning("iterations=%d: nothing to check, vacuous pass", args.iterations)
        results = validate.run_all(args.seed, args.iterations)
        for r in results:
            print(r.line())
        return 0 if all(r.passed for r in results) else EXIT_FAIL

    if args.command == "synth":
        params = preset(args.preset, count=args.count)
        args.out.mkdir(parents=True, exist_ok=True)
        save_ply(synth_scene(params, args.seed), args.out / "scene.ply")
        save_cameras([synth_camera(params)], args.out / "cameras.json")
        print(f"wrote {args.out / 'scene.ply'} and {args.out / 'cameras.json'}")
        return 0

    if args.tile_size <= 0 or args.repeats <= 0:
        parser.error("--tile-size and --repeats must be positive")
    scene, cameras = _load(args, parser)
    config = _config(args)
    if args.command == "render":
        strategy = BoundStrategy.parse(args.strategy)
        rows = bench.cmd_render(scene, cameras, strategy, args.out, config, args.repeats,
                                args.format, args.oracle, args.seed)
        for row in rows:
            print(f"{row['camera_id']} {row['strategy']}: pairs={row['pairs']} "
                  f"total_ms={row['total_ms']:.1f} sha256={row['image_sha256'][:16]}")
        return 0

    summary = bench.cmd_compare(scene, cameras, args.out, config, args.repeats, args.seed,
                                args.zoom_frames, args.zoom_max)
    for row in summary["compare"]:
        print(f"{row['camera_id']} {row['strategy']:8s} pairs={row['pairs']:8d} "
              f"vs_vanilla={row['pairs_vs_vanilla']:.3f} fp={row['false_positive_ratio']:.3f} "
              f"speedup={row['speedup_vs_vanilla']:.2f} lossless={row['image_matches_vanilla']}")
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s")
    try:
        return _run(args, parser)
    except (ParseError, SchemaError) as exc:
        log.error("parse error: %s", exc)
        return EXIT_PARSE
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
