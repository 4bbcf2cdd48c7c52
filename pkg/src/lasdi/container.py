"""Shared binary container for .lsnap / .lpod / .lae / .ldim artifacts.

Layout, all little-endian:

    magic     8 bytes (format tag, NUL padded)
    version   u32
    ndims     u32
    dims      ndims x u64            format-specific dimension header
    nparams   u64
    params    nparams x f64          flattened parameter values
    metalen   u64
    meta      metalen bytes          UTF-8 JSON; declares the payload arrays
    payload   f64 arrays, column-major, in meta["arrays"] order,
              then raw byte segments in meta["raw"] order

Self-describing: the metadata JSON carries array names and shapes, so a
reader needs nothing outside the file. Raw segments (bit-packed masks)
declare their byte lengths.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .errors import FormatError

VERSION = 1


def write_container(path, magic: bytes, dims, params, meta: dict, arrays, raw=()):
    """arrays: ordered (name, 2-D or 1-D float array); raw: (name, bytes)."""
    if len(magic) != 8:
        raise ValueError("magic must be 8 bytes")
    meta = dict(meta)
    meta["arrays"] = [{"name": n, "shape": list(np.shape(a))} for n, a in arrays]
    meta["raw"] = [{"name": n, "bytes": len(b)} for n, b in raw]
    blob = json.dumps(meta, sort_keys=True).encode("utf-8")
    params = np.asarray(params, dtype="<f8").ravel()
    with open(path, "wb") as f:
        f.write(magic)
        f.write(struct.pack("<II", VERSION, len(dims)))
        f.write(struct.pack(f"<{len(dims)}Q", *[int(d) for d in dims]))
        f.write(struct.pack("<Q", params.size))
        f.write(params.tobytes())
        f.write(struct.pack("<Q", len(blob)))
        f.write(blob)
        for _, a in arrays:
            f.write(np.asarray(a, dtype="<f8").tobytes(order="F"))
        for _, b in raw:
            f.write(b)


def read_container(path, magic: bytes):
    """Returns (dims, params, meta, arrays: dict, raw: dict)."""

    def need(f, n, what):
        buf = f.read(n)
        if len(buf) != n:
            raise FormatError(f"{path}: truncated file while reading {what}")
        return buf

    with open(path, "rb") as f:
        got = need(f, 8, "magic")
        if got != magic:
            raise FormatError(f"{path}: bad magic {got!r}, expected {magic!r}")
        version, ndims = struct.unpack("<II", need(f, 8, "version"))
        if version != VERSION:
            raise FormatError(f"{path}: unsupported version {version}")
        dims = struct.unpack(f"<{ndims}Q", need(f, 8 * ndims, "dims"))
        (nparams,) = struct.unpack("<Q", need(f, 8, "param count"))
        params = np.frombuffer(need(f, 8 * nparams, "params"), dtype="<f8").copy()
        (metalen,) = struct.unpack("<Q", need(f, 8, "meta length"))
        try:
            meta = json.loads(need(f, metalen, "metadata").decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise FormatError(f"{path}: corrupt metadata block: {e}") from None
        arrays = {}
        for spec in meta.get("arrays", []):
            shape = tuple(spec["shape"])
            count = int(np.prod(shape)) if shape else 1
            buf = need(f, 8 * count, f"array {spec['name']}")
            arrays[spec["name"]] = np.frombuffer(buf, dtype="<f8").reshape(
                shape, order="F"
            ).copy()
        raw = {}
        for spec in meta.get("raw", []):
            raw[spec["name"]] = need(f, spec["bytes"], f"raw {spec['name']}")
        if f.read(1):
            raise FormatError(f"{path}: trailing bytes after declared payload")
    return dims, params, meta, arrays, raw
