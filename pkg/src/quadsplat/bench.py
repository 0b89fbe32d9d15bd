"""Timed frame rendering and strategy comparison with CSV output."""
from __future__ import annotations

import csv
import hashlib
import json
import statistics
from pathlib import Path
from typing import Dict, Iterable, List, Sequence

import numpy as np

from .pipeline import FrameResult, RenderConfig, render_frame, tile_accuracy
from .quadbox import BoundStrategy
from .scene_io import CameraModel, Scene, write_image
from .traversal import TileGrid

SCHEMA_VERSION = 1
TIMING_FIELDS = ("project_ms", "duplicate_ms", "sort_ms", "render_ms", "total_ms")

METRICS_FIELDS = (
    "schema_version", "camera_id", "strategy", "lossy", "gaussians", "visible", "pairs",
    "mean_tiles", *TIMING_FIELDS, "false_positive_ratio", "missed_ratio", "image_sha256",
)

COMPARE_FIELDS = (
    "schema_version", "camera_id", "strategy", "lossy", "pairs", "pairs_vs_vanilla",
    "pairs_vs_adr", "false_positive_ratio", "missed_ratio", "total_ms", "speedup_vs_vanilla",
    "image_matches_vanilla",
)

ZOOM_FIELDS = ("schema_version", "frame", "zoom", "strategy", "pairs", "total_ms")


def image_hash(image: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(image, dtype=np.float64).tobytes()).hexdigest()


def timed_frame(scene: Scene, camera: CameraModel, strategy: BoundStrategy,
                config: RenderConfig, repeats: int = 5, oracle: bool = False,
                seed: int = 0) -> FrameResult:
    """One warm-up run, then ``repeats`` timed runs; stage times are medians."""
    render_frame(scene, camera, strategy, config)
    runs = [render_frame(scene, camera, strategy, config) for _ in range(max(1, repeats))]
    result = runs[-1]
    for name in TIMING_FIELDS:
        setattr(result.metrics, name, statistics.median(getattr(r.metrics, name) for r in runs))
    if oracle:
        grid = TileGrid(camera.width, camera.height, config.tile_size)
        result.metrics.false_positive_ratio, result.metrics.missed_ratio = tile_accuracy(
            result.splats, strategy, grid, seed=seed
        )
    return result


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def write_csv(path: Path, fields: Sequence[str], rows: Iterable[Dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(fields), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(row.get(k)) for k in fields})


def camera_label(cam: CameraModel) -> str:
    return cam.name or f"{cam.id:05d}"


def metrics_row(cam: CameraModel, strategy: BoundStrategy, frame: FrameResult) -> Dict:
    row = frame.metrics.as_dict()
    row.update(
        schema_version=SCHEMA_VERSION,
        camera_id=camera_label(cam),
        lossy=strategy.lossy,
        image_sha256=image_hash(frame.image),
    )
    return row


def cmd_render(scene: Scene, cameras: List[CameraModel], strategy: BoundStrategy, out: Path,
               config: RenderConfig, repeats: int = 5, fmt: str = "ppm",
               oracle: bool = False, seed: int = 0) -> List[Dict]:
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for cam in cameras:
        frame = timed_frame(scene, cam, strategy, config, repeats, oracle, seed)
        write_image(frame.image, out / f"{camera_label(cam)}_{strategy.value}.{fmt}", fmt)
        rows.append(metrics_row(cam, strategy, frame))
    write_csv(out / "metrics.csv", METRICS_FIELDS, rows)
    return rows


def zoom_factors(frames: int, max_zoom: float) -> List[float]:
    if frames <= 1:
        return [1.0] * max(frames, 0)
    return [max_zoom ** (i / (frames - 1)) for i in range(frames)]


def cmd_compare(scene: Scene, cameras: List[CameraModel], out: Path, config: RenderConfig,
                repeats: int = 5, seed: int = 0, zoom_frames: int = 0,
                max_zoom: float = 4.0) -> Dict:
    """Run every strategy per camera, plus an optional focal-length zoom sweep.

    Writes ``compare.csv`` (and ``zoom.csv`` when ``zoom_frames > 0``) to
    ``out`` and returns a summary dict (also written as ``compare.json``).
    """
    out.mkdir(parents=True, exist_ok=True)
    rows: List[Dict] = []
    for cam in cameras:
        frames = {s: timed_frame(scene, cam, s, config, repeats, oracle=True, seed=seed)
                  for s in BoundStrategy}
        van, adr = frames[BoundStrategy.VANILLA], frames[BoundStrategy.ADR]
        for s, fr in frames.items():
            m = fr.metrics
            rows.append({
                "schema_version": SCHEMA_VERSION,
                "camera_id": camera_label(cam),
                "strategy": s.value,
                "lossy": s.lossy,
                "pairs": m.pairs,
                "pairs_vs_vanilla": m.pairs / max(1, van.metrics.pairs),
                "pairs_vs_adr": m.pairs / max(1, adr.metrics.pairs),
                "false_positive_ratio": m.false_positive_ratio,
                "missed_ratio": m.missed_ratio,
                "total_ms": m.total_ms,
                "speedup_vs_vanilla": van.metrics.total_ms / m.total_ms if m.total_ms else None,
                "image_matches_vanilla": bool(np.array_equal(fr.image, van.image)),
            })
    write_csv(out / "compare.csv", COMPARE_FIELDS, rows)

    zoom_rows: List[Dict] = []
    if zoom_frames > 0 and cameras:
        for i, k in enumerate(zoom_factors(zoom_frames, max_zoom)):
            cam = cameras[0].zoomed(k)
            for s in BoundStrategy:
                fr = timed_frame(scene, cam, s, config, repeats)
                zoom_rows.append({"schema_version": SCHEMA_VERSION, "frame": i, "zoom": k,
                                  "strategy": s.value, "pairs": fr.metrics.pairs,
                                  "total_ms": fr.metrics.total_ms})
        write_csv(out / "zoom.csv", ZOOM_FIELDS, zoom_rows)

    summary = {"schema_version": SCHEMA_VERSION, "compare": rows, "zoom": zoom_rows,
               "zoom_note": "geometric focal-length sweep; qualitative only"}
    (out / "compare.json").write_text(json.dumps(summary, indent=1, default=_fmt))
    return summary

