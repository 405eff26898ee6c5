"""Versioned binary weights format (.favw) for trained parameters.

Layout, all little-endian:

    magic  b"FAVW"
    u16    format version (currently 1)
    u16    tensor count
    per tensor: u8 name length, ascii name, u8 ndim, u32 per dimension
    payload: each tensor as IEEE-754 float32, C order, header order

Export quantizes to float32 (the deployment precision); importing and
re-exporting is lossless.
"""

from __future__ import annotations

import struct

import numpy as np

from favbot.vision.cnn import PARAM_SHAPES, CnnParams

MAGIC = b"FAVW"
VERSION = 1


def export_params(params: CnnParams) -> bytes:
    head = [MAGIC, struct.pack("<HH", VERSION, len(PARAM_SHAPES))]
    body = []
    for name, arr in params.tensors():
        encoded = name.encode("ascii")
        head.append(struct.pack("<B", len(encoded)))
        head.append(encoded)
        head.append(struct.pack("<B", arr.ndim))
        head.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        body.append(np.ascontiguousarray(arr, dtype="<f4").tobytes())
    return b"".join(head + body)


def _take(blob: bytes, offset: int, count: int) -> tuple[bytes, int]:
    if offset + count > len(blob):
        raise ValueError("truncated weights blob")
    return blob[offset : offset + count], offset + count


def import_params(blob: bytes) -> CnnParams:
    """Parse a .favw blob; raises on bad magic, version, shapes, or length."""
    chunk, off = _take(blob, 0, 8)
    if chunk[:4] != MAGIC:
        raise ValueError("not a weights blob (bad magic)")
    version, count = struct.unpack("<HH", chunk[4:])
    if version != VERSION:
        raise ValueError(f"unsupported weights format version {version}")
    if count != len(PARAM_SHAPES):
        raise ValueError(f"expected {len(PARAM_SHAPES)} tensors, header says {count}")
    shapes: list[tuple[str, tuple[int, ...]]] = []
    for _ in range(count):
        chunk, off = _take(blob, off, 1)
        chunk, off = _take(blob, off, chunk[0])
        name = chunk.decode("ascii")
        chunk, off = _take(blob, off, 1)
        ndim = chunk[0]
        chunk, off = _take(blob, off, 4 * ndim)
        shape = struct.unpack(f"<{ndim}I", chunk)
        if name not in PARAM_SHAPES or PARAM_SHAPES[name] != shape:
            raise ValueError(f"unexpected tensor {name} with shape {shape}")
        shapes.append((name, shape))
    tensors = {}
    for name, shape in shapes:
        n_bytes = 4 * int(np.prod(shape))
        chunk, off = _take(blob, off, n_bytes)
        tensors[name] = np.frombuffer(chunk, dtype="<f4").reshape(shape).copy()
    if off != len(blob):
        raise ValueError(f"{len(blob) - off} trailing bytes after weights payload")
    if set(tensors) != set(PARAM_SHAPES):
        raise ValueError("weights blob does not cover every tensor exactly once")
    return CnnParams(**tensors)


def write_params_file(path, params: CnnParams) -> None:
    with open(path, "wb") as fh:
        fh.write(export_params(params))


def read_params_file(path) -> CnnParams:
    with open(path, "rb") as fh:
        return import_params(fh.read())


def packaged_params() -> CnnParams:
    """Trained classifier weights shipped with the package."""
    from importlib import resources

    blob = resources.files("favbot").joinpath("params/vision.favw").read_bytes()
    return import_params(blob)
