"""8-bit image output.  Linear-to-sRGB encoding happens here and nowhere else."""
from __future__ import annotations

import os
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image

from ..errors import ParseError


def linear_to_srgb(x: np.ndarray) -> np.ndarray:
    x = np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0)
    return np.where(x <= 0.0031308, 12.92 * x, 1.055 * np.power(x, 1.0 / 2.4) - 0.055)


def encode_rgb8(image: np.ndarray) -> np.ndarray:
    """Linear float RGB ``(H, W, 3)`` -> sRGB ``uint8``."""
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) image, got {image.shape}")
    return np.round(linear_to_srgb(image) * 255.0).astype(np.uint8)


def ppm_bytes(rgb8: np.ndarray) -> bytes:
    h, w, _ = rgb8.shape
    return f"P6\n{w} {h}\n255\n".encode("ascii") + np.ascontiguousarray(rgb8, dtype=np.uint8).tobytes()


def write_image(image: np.ndarray, path, fmt: Optional[str] = None) -> np.ndarray:
    """Encode a linear float image and write it as PPM (P6) or PNG.

    Returns the 8-bit pixels that were written.  I/O failures surface as
    ``OSError``.
    """
    path = Path(path)
    fmt = (fmt or path.suffix.lstrip(".") or "ppm").lower()
    rgb8 = encode_rgb8(image)
    if fmt == "ppm":
        path.write_bytes(ppm_bytes(rgb8))
    elif fmt == "png":
        Image.fromarray(rgb8, mode="RGB").save(os.fspath(path), format="PNG")
    else:
        raise ValueError(f"unsupported image format {fmt!r}")
    return rgb8


def read_ppm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    # header: magic, width, height, maxval separated by single whitespace runs
    fields, pos = [], 0
    while len(fields) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ParseError("truncated PPM header")
        fields.append(data[start:pos])
    pos += 1
    if fields[0] != b"P6" or fields[3] != b"255":
        raise ParseError("only 8-bit P6 PPM is supported")
    w, h = int(fields[1]), int(fields[2])
    body = data[pos:pos + w * h * 3]
    if len(body) != w * h * 3:
        raise ParseError("truncated PPM body")
    return np.frombuffer(body, dtype=np.uint8).reshape(h, w, 3)
