"""Binary little-endian PLY checkpoints in the usual 3DGS vertex layout.

Stored fields are pre-activation: ``scale_*`` is log-scale, ``opacity`` is a
logit and ``rot_*`` (w, x, y, z) is an unnormalized quaternion.  ``f_rest_*``
is channel-major: all R coefficients, then G, then B.
"""
from __future__ import annotations

import os
from typing import Dict, List, Tuple

import numpy as np

from ..errors import ParseError, SchemaError, UnsupportedFormat
from .scene import Scene, sh_coeff_count

_TYPES = {
    "char": "i1", "int8": "i1",
    "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2",
    "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4",
    "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4",
    "double": "f8", "float64": "f8",
}

_REQUIRED = (
    ["x", "y", "z", "opacity"]
    + [f"f_dc_{i}" for i in range(3)]
    + [f"scale_{i}" for i in range(3)]
    + [f"rot_{i}" for i in range(4)]
)

_MAX_HEADER = 1 << 20


def _parse_header(data: bytes) -> Tuple[List[Tuple[str, int, List[Tuple[str, str]]]], int]:
    if not data.startswith(b"ply\n") and not data.startswith(b"ply\r\n"):
        raise ParseError("missing 'ply' magic")
    end = data.find(b"end_header\n", 0, _MAX_HEADER)
    if end < 0:
        raise ParseError("no end_header line")
    body_start = end + len(b"end_header\n")
    try:
        text = data[:end].decode("ascii")
    except UnicodeDecodeError as exc:
        raise ParseError(f"non-ascii header: {exc}") from None

    fmt = None
    elements: List[Tuple[str, int, List[Tuple[str, str]]]] = []
    for raw in text.splitlines()[1:]:
        parts = raw.split()
        if not parts or parts[0] in ("comment", "obj_info"):
            continue
        kind = parts[0]
        if kind == "format":
            if len(parts) != 3:
                raise ParseError(f"bad format line {raw!r}")
            fmt = parts[1]
        elif kind == "element":
            if len(parts) != 3:
                raise ParseError(f"bad element line {raw!r}")
            try:
                count = int(parts[2])
            except ValueError:
                raise ParseError(f"bad element count {parts[2]!r}") from None
            if count < 0:
                raise ParseError(f"negative element count {count}")
            elements.append((parts[1], count, []))
        elif kind == "property":
            if not elements:
                raise ParseError("property before any element")
            if len(parts) >= 2 and parts[1] == "list":
                if len(parts) != 5:
                    raise ParseError(f"bad list property {raw!r}")
                elements[-1][2].append((parts[4], "list"))
                continue
            if len(parts) != 3:
                raise ParseError(f"bad property line {raw!r}")
            if parts[1] not in _TYPES:
                raise ParseError(f"unknown property type {parts[1]!r}")
            elements[-1][2].append((parts[2], _TYPES[parts[1]]))
        else:
            raise ParseError(f"unexpected header line {raw!r}")

    if fmt is None:
        raise ParseError("missing format line")
    if fmt in ("ascii", "binary_big_endian"):
        raise UnsupportedFormat(f"PLY format {fmt!r} is not supported; use binary_little_endian")
    if fmt != "binary_little_endian":
        raise ParseError(f"unknown PLY format {fmt!r}")
    return elements, body_start


def _read_vertices(data: bytes) -> np.ndarray:
    elements, offset = _parse_header(data)
    for name, count, props in elements:
        if any(t == "list" for _, t in props):
            raise UnsupportedFormat(f"list properties in element {name!r} are not supported")
        names = [p for p, _ in props]
        if len(set(names)) != len(names):
            raise ParseError(f"duplicate property names in element {name!r}")
        dtype = np.dtype([(p, "<" + t) for p, t in props])
        nbytes = count * dtype.itemsize
        if name == "vertex":
            if len(data) - offset < nbytes:
                raise ParseError(
                    f"truncated body: need {nbytes} vertex bytes, have {len(data) - offset}"
                )
            return np.frombuffer(data, dtype=dtype, count=count, offset=offset)
        offset += nbytes
    raise SchemaError("no vertex element")


def _sh_rest_count(names) -> int:
    rest = sorted(
        (n for n in names if n.startswith("f_rest_")),
        key=lambda n: int(n[7:]) if n[7:].isdigit() else -1,
    )
    expected = [f"f_rest_{i}" for i in range(len(rest))]
    if rest != expected:
        raise SchemaError("f_rest_* properties are not numbered 0..n-1")
    return len(rest)


def _degree_from_rest(n_rest: int) -> int:
    for degree in range(4):
        if 3 * (sh_coeff_count(degree) - 1) == n_rest:
            return degree
    raise SchemaError(f"{n_rest} f_rest properties do not match an SH degree 0..3")


def _sigmoid(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-x))


def parse_ply(data: bytes, source: str = None) -> Scene:
    verts = _read_vertices(data)
    names = verts.dtype.names or ()
    missing = [p for p in _REQUIRED if p not in names]
    if missing:
        raise SchemaError(f"missing vertex properties: {', '.join(missing)}")
    n_rest = _sh_rest_count(names)
    degree = _degree_from_rest(n_rest)
    n = verts.shape[0]
    if n == 0:
        raise SchemaError("PLY has no vertices")

    def cols(keys) -> np.ndarray:
        # garbage bytes may hold NaN/inf; rejected below rather than warned about here
        with np.errstate(invalid="ignore", over="ignore"):
            return np.stack([verts[k].astype(np.float64) for k in keys], axis=-1)

    pos = cols(["x", "y", "z"])
    log_scale = cols([f"scale_{i}" for i in range(3)])
    quat = cols([f"rot_{i}" for i in range(4)])
    with np.errstate(invalid="ignore", over="ignore"):
        logit = verts["opacity"].astype(np.float64)
    dc = cols([f"f_dc_{i}" for i in range(3)])
    k = sh_coeff_count(degree)
    if n_rest:
        rest = cols([f"f_rest_{i}" for i in range(n_rest)]).reshape(n, 3, k - 1)
        sh = np.concatenate([dc[:, None, :], rest.transpose(0, 2, 1)], axis=1)
    else:
        sh = dc[:, None, :]

    for label, arr in (("position", pos), ("scale", log_scale), ("rotation", quat),
                       ("opacity", logit), ("sh", sh)):
        if not np.all(np.isfinite(arr)):
            raise ParseError(f"non-finite {label} values")
    norm = np.linalg.norm(quat, axis=1, keepdims=True)
    if np.any(norm == 0.0):
        raise ParseError("zero-length rotation quaternion")
    with np.errstate(over="ignore"):
        scale = np.exp(log_scale)
    if not np.all(np.isfinite(scale)):
        raise ParseError("scale overflows after exp")

    # activations stay float64 so that save -> load reproduces the stored floats
    return Scene(
        positions=pos,
        scales=scale,
        rotations=quat / norm,
        opacities=_sigmoid(logit),
        sh=sh,
        sh_degree=degree,
        source=source,
    )


def load_ply(path) -> Scene:
    with open(path, "rb") as fh:
        data = fh.read()
    return parse_ply(data, source=os.fspath(path))


def ply_bytes(scene: Scene) -> bytes:
    """Serialize ``scene`` with inverse activations (log, logit) applied."""
    n = len(scene)
    k = sh_coeff_count(scene.sh_degree)
    fields: Dict[str, np.ndarray] = {}
    pos = scene.positions.astype(np.float64)
    for i, axis in enumerate("xyz"):
        fields[axis] = pos[:, i]
    for axis in ("nx", "ny", "nz"):
        fields[axis] = np.zeros(n)
    sh = scene.sh.astype(np.float64)
    for i in range(3):
        fields[f"f_dc_{i}"] = sh[:, 0, i]
    rest = sh[:, 1:, :].transpose(0, 2, 1).reshape(n, 3 * (k - 1))
    for i in range(rest.shape[1]):
        fields[f"f_rest_{i}"] = rest[:, i]
    tiny = np.finfo(np.float64).eps
    p = np.clip(scene.opacities.astype(np.float64), tiny, 1.0 - tiny)
    fields["opacity"] = np.log(p / (1.0 - p))
    log_scale = np.log(scene.scales.astype(np.float64))
    for i in range(3):
        fields[f"scale_{i}"] = log_scale[:, i]
    rot = scene.rotations.astype(np.float64)
    for i in range(4):
        fields[f"rot_{i}"] = rot[:, i]

    dtype = np.dtype([(name, "<f4") for name in fields])
    out = np.empty(n, dtype=dtype)
    for name, values in fields.items():
        out[name] = values
    header = ["ply", "format binary_little_endian 1.0", f"element vertex {n}"]
    header += [f"property float {name}" for name in fields]
    header.append("end_header")
    return ("\n".join(header) + "\n").encode("ascii") + out.tobytes()


def save_ply(scene: Scene, path) -> None:
    with open(path, "wb") as fh:
        fh.write(ply_bytes(scene))
