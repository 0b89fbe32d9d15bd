"""Pinhole camera model and the 3DGS ``cameras.json`` format.

Each JSON entry stores the camera center (``position``) and the rows of the
camera-to-world rotation (``rotation``); both are converted to
world-to-camera form on load.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np

from ..errors import ParseError, SchemaError


@dataclass(frozen=True, eq=False)
class CameraModel:
    width: int
    height: int
    fx: float
    fy: float
    cx: float
    cy: float
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))  # world -> camera
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))
    name: Optional[str] = None
    id: int = 0

    def __post_init__(self) -> None:
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError(f"focal lengths must be positive, got {self.fx}, {self.fy}")
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"bad image size {self.width}x{self.height}")
        r = np.asarray(self.rotation, dtype=np.float64)
        if r.shape != (3, 3) or not np.allclose(r @ r.T, np.eye(3), atol=1e-6):
            raise ValueError("rotation must be orthonormal 3x3")
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", np.asarray(self.translation, dtype=np.float64).reshape(3))

    @classmethod
    def look_from(cls, width: int, height: int, focal: float, center=(0.0, 0.0, 0.0),
                  rotation_c2w=None, **kw) -> "CameraModel":
        r_c2w = np.eye(3) if rotation_c2w is None else np.asarray(rotation_c2w, dtype=np.float64)
        r = r_c2w.T
        return cls(width, height, focal, focal, width / 2.0, height / 2.0, r,
                   -r @ np.asarray(center, dtype=np.float64), **kw)

    @property
    def center(self) -> np.ndarray:
        return -self.rotation.T @ self.translation

    def zoomed(self, factor: float) -> "CameraModel":
        return replace(self, fx=self.fx * factor, fy=self.fy * factor)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "img_name": self.name or f"{self.id:05d}",
            "width": self.width,
            "height": self.height,
            "position": self.center.tolist(),
            "rotation": self.rotation.T.tolist(),
            "fx": self.fx,
            "fy": self.fy,
        }


def _camera_from_entry(i: int, entry) -> CameraModel:
    if not isinstance(entry, dict):
        raise SchemaError(f"camera {i} is not an object")
    for key in ("width", "height", "position", "rotation", "fx", "fy"):
        if key not in entry:
            raise SchemaError(f"camera {i} lacks {key!r}")
    try:
        pos = np.asarray(entry["position"], dtype=np.float64)
        rot_c2w = np.asarray(entry["rotation"], dtype=np.float64)
        width, height = int(entry["width"]), int(entry["height"])
        fx, fy = float(entry["fx"]), float(entry["fy"])
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"camera {i}: {exc}") from None
    if pos.shape != (3,) or rot_c2w.shape != (3, 3):
        raise SchemaError(f"camera {i}: position must be 3-vector and rotation 3x3")
    r = rot_c2w.T
    try:
        return CameraModel(
            width, height, fx, fy,
            float(entry.get("cx", width / 2.0)), float(entry.get("cy", height / 2.0)),
            r, -r @ pos, name=entry.get("img_name"), id=int(entry.get("id", i)),
        )
    except ValueError as exc:
        raise SchemaError(f"camera {i}: {exc}") from None


def parse_cameras(text: str) -> List[CameraModel]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid cameras JSON: {exc}") from None
    if not isinstance(data, list):
        raise SchemaError("cameras JSON must be an array")
    return [_camera_from_entry(i, entry) for i, entry in enumerate(data)]


def load_cameras(path) -> List[CameraModel]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_cameras(fh.read())


def save_cameras(cameras: List[CameraModel], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([cam.to_json() for cam in cameras], fh, indent=1)
