"""Versioned binary checkpoints for (NetworkSpec, parameters, AdamState).

Layout is explicit little-endian with a magic header, a format version,
and a sha256 digest of the embedded network-spec JSON so a reader can
refuse files whose architecture metadata was corrupted or tampered with.
Arrays are stored as (name, dtype code, shape, raw bytes) records; the
same record format is reused by the policy-bundle store.
"""

from __future__ import annotations

import hashlib
import io
import json
import struct
from dataclasses import dataclass

import numpy as np

from .adam import AdamState
from .network import NetworkSpec

MAGIC = b"PDRVCKPT"
VERSION = 1

_DTYPE_CODES = {"<f4": 0, "<f8": 1, "<i8": 2}
_CODE_DTYPES = {v: k for k, v in _DTYPE_CODES.items()}


class CheckpointError(RuntimeError):
    """Unreadable, corrupt, or version-incompatible checkpoint file."""


def _pack_str(f, s: str) -> None:
    raw = s.encode("utf-8")
    f.write(struct.pack("<I", len(raw)))
    f.write(raw)


def _unpack_str(f) -> str:
    (n,) = struct.unpack("<I", _take(f, 4))
    return _take(f, n).decode("utf-8")


def _take(f, n: int) -> bytes:
    raw = f.read(n)
    if len(raw) != n:
        raise CheckpointError("truncated checkpoint")
    return raw


def write_array_dict(f, arrays: dict[str, np.ndarray]) -> None:
    f.write(struct.pack("<I", len(arrays)))
    for name in sorted(arrays):
        a = np.ascontiguousarray(arrays[name])
        le = a.dtype.newbyteorder("<")
        key = le.str
        if key not in _DTYPE_CODES:
            raise CheckpointError(f"unsupported dtype {a.dtype} for {name!r}")
        _pack_str(f, name)
        f.write(struct.pack("<BB", _DTYPE_CODES[key], a.ndim))
        f.write(struct.pack(f"<{a.ndim}I", *a.shape))
        f.write(a.astype(le, copy=False).tobytes())


def read_array_dict(f) -> dict[str, np.ndarray]:
    (count,) = struct.unpack("<I", _take(f, 4))
    out: dict[str, np.ndarray] = {}
    for _ in range(count):
        name = _unpack_str(f)
        code, ndim = struct.unpack("<BB", _take(f, 2))
        if code not in _CODE_DTYPES:
            raise CheckpointError(f"unknown dtype code {code}")
        shape = struct.unpack(f"<{ndim}I", _take(f, 4 * ndim))
        dt = np.dtype(_CODE_DTYPES[code])
        nbytes = dt.itemsize * int(np.prod(shape, dtype=np.int64))
        arr = np.frombuffer(_take(f, nbytes), dtype=dt).reshape(shape)
        out[name] = arr.astype(dt.newbyteorder("="))
    return out


@dataclass
class Checkpoint:
    spec: NetworkSpec
    params: dict[str, np.ndarray]
    adam: AdamState | None
    meta: dict


def save_checkpoint(path, spec: NetworkSpec, params: dict[str, np.ndarray],
                    adam: AdamState | None = None, meta: dict | None = None) -> None:
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<I", VERSION))
    spec_json = spec.to_json()
    _pack_str(buf, spec_json)
    buf.write(hashlib.sha256(spec_json.encode()).digest())
    # insertion order is preserved so round-tripped metadata (e.g. log rows)
    # keeps its column order
    _pack_str(buf, json.dumps(meta or {}))
    write_array_dict(buf, params)
    if adam is None:
        buf.write(struct.pack("<B", 0))
    else:
        buf.write(struct.pack("<B", 1))
        buf.write(struct.pack("<dddd", adam.lr, adam.beta1, adam.beta2, adam.eps))
        buf.write(struct.pack("<Q", adam.step))
        write_array_dict(buf, adam.m)
        write_array_dict(buf, adam.v)
    with open(path, "wb") as f:
        f.write(buf.getvalue())


def load_checkpoint(path) -> Checkpoint:
    with open(path, "rb") as fh:
        f = io.BytesIO(fh.read())
    if _take(f, len(MAGIC)) != MAGIC:
        raise CheckpointError("bad magic header (not a checkpoint file)")
    (version,) = struct.unpack("<I", _take(f, 4))
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    spec_json = _unpack_str(f)
    digest = _take(f, 32)
    if hashlib.sha256(spec_json.encode()).digest() != digest:
        raise CheckpointError("network-spec hash mismatch (corrupt file)")
    spec = NetworkSpec.from_json(spec_json)
    meta = json.loads(_unpack_str(f))
    params = read_array_dict(f)
    (has_adam,) = struct.unpack("<B", _take(f, 1))
    adam = None
    if has_adam:
        lr, b1, b2, eps = struct.unpack("<dddd", _take(f, 32))
        (step,) = struct.unpack("<Q", _take(f, 8))
        m = read_array_dict(f)
        v = read_array_dict(f)
        adam = AdamState(lr=lr, beta1=b1, beta2=b2, eps=eps, step=step, m=m, v=v)
    return Checkpoint(spec=spec, params=params, adam=adam, meta=meta)


def params_digest(params: dict[str, np.ndarray]) -> str:
    """Content hash of a parameter dict (order-independent)."""
    h = hashlib.sha256()
    for name in sorted(params):
        a = np.ascontiguousarray(params[name])
        h.update(name.encode())
        h.update(str(a.dtype).encode())
        h.update(str(a.shape).encode())
        h.update(a.astype(a.dtype.newbyteorder("<"), copy=False).tobytes())
    return h.hexdigest()
