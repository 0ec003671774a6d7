"""Self-describing tensor files.

Layout: one line of JSON (no embedded newline) followed by ``\\n`` and the raw
little-endian payload in C order::

    {"axis_labels": [...], "dtype": "f64", "magic": "TMCA1", "meta": {...}, "shape": [...]}\\n<bytes>

``dtype`` is ``"f64"`` or ``"u8"``.  Code files are ``u8`` tensors of shape
``[K, rows, cols]`` labelled ``["slot", "y", "x"]`` whose ``meta.kind`` is
``"aperture"`` or ``"shutter"``.
"""
from __future__ import annotations

import json
import os

import numpy as np

from .core import ApertureSequence, ShutterSequence
from .errors import TMCAError

MAGIC = "TMCA1"
DTYPES = {"f64": np.dtype("<f8"), "u8": np.dtype("u1")}
CODE_LABELS = ["slot", "y", "x"]


class TensorFormatError(TMCAError, ValueError):
    def __init__(self, message, offset):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    return value


def encode(array, axis_labels=None, meta=None, dtype=None) -> bytes:
    arr = np.asarray(array)
    if dtype is None:
        dtype = "u8" if arr.dtype == np.uint8 else "f64"
    if dtype not in DTYPES:
        raise ValueError(f"unsupported dtype {dtype!r}")
    labels = list(axis_labels) if axis_labels is not None else [f"axis{i}" for i in range(arr.ndim)]
    if len(labels) != arr.ndim:
        raise ValueError(f"{len(labels)} axis labels for a {arr.ndim}-D array")
    header = {
        "magic": MAGIC,
        "dtype": dtype,
        "shape": list(arr.shape),
        "axis_labels": labels,
        "meta": _jsonable(meta or {}),
    }
    text = json.dumps(header, sort_keys=True, separators=(",", ":"), allow_nan=True)
    payload = np.ascontiguousarray(arr, dtype=DTYPES[dtype]).tobytes()
    return text.encode("utf-8") + b"\n" + payload


def decode(data: bytes):
    """Parse a tensor file; returns ``(array, header)``."""
    nl = data.find(b"\n")
    if nl < 0:
        raise TensorFormatError("missing header terminator", len(data))
    try:
        header = json.loads(data[:nl].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        pos = getattr(exc, "pos", getattr(exc, "start", 0))
        raise TensorFormatError(f"malformed header: {exc}", pos) from None
    if not isinstance(header, dict) or header.get("magic") != MAGIC:
        raise TensorFormatError("bad magic", 0)
    dtype = header.get("dtype")
    if dtype not in DTYPES:
        raise TensorFormatError(f"unsupported dtype {dtype!r}", 0)
    shape = header.get("shape")
    if not isinstance(shape, list) or not all(isinstance(s, int) and s >= 0 for s in shape):
        raise TensorFormatError(f"bad shape {shape!r}", 0)
    labels = header.get("axis_labels", [])
    if len(labels) != len(shape):
        raise TensorFormatError("axis_labels length does not match shape", 0)
    expected = int(np.prod(shape, dtype=np.int64)) * DTYPES[dtype].itemsize
    payload = data[nl + 1:]
    if len(payload) != expected:
        raise TensorFormatError(f"payload is {len(payload)} bytes, expected {expected}",
                                nl + 1 + min(len(payload), expected))
    arr = np.frombuffer(payload, dtype=DTYPES[dtype]).reshape(shape)
    arr = arr.astype(np.float64 if dtype == "f64" else np.uint8)
    header.setdefault("meta", {})
    return arr, header


def write(path, array, axis_labels=None, meta=None, dtype=None):
    data = encode(array, axis_labels, meta, dtype)
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def read(path):
    with open(path, "rb") as fh:
        return decode(fh.read())


def write_codes(path, codes, meta=None):
    kind = codes.kind
    write(path, codes.codes, CODE_LABELS, {**(meta or {}), "kind": kind}, dtype="u8")


def read_codes(path, expected_kind=None):
    arr, header = read(path)
    kind = header["meta"].get("kind")
    if header["dtype"] != "u8" or arr.ndim != 3:
        raise TensorFormatError("code files must be u8 tensors of shape [K, rows, cols]", 0)
    if kind not in ("aperture", "shutter"):
        raise TensorFormatError(f"code file meta.kind must be aperture or shutter, got {kind!r}", 0)
    if expected_kind is not None and kind != expected_kind:
        raise TensorFormatError(f"expected a {expected_kind} code file, got {kind}", 0)
    if arr.max(initial=0) > 1:
        raise TensorFormatError("code entries must be 0 or 1", 0)
    return (ApertureSequence if kind == "aperture" else ShutterSequence)(arr)
