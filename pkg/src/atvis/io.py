"""File formats: CSM1 matrices, trace CSV and PGM export.

CSM1 layout (all integers unsigned 32-bit little-endian)::

    b"CSM1" | version | dtype | ndim | dims[ndim] | payload | [meta_len | meta]

``dtype`` is 0 for float64, 1 for complex128 stored as interleaved
``(re, im)`` float64 pairs and 2 for a 0/1 byte mask. The payload is row
major. The optional metadata block is UTF-8 ``key=value`` lines.
"""

from __future__ import annotations

import struct

import numpy as np

from .metrics import TraceRecord

MAGIC = b"CSM1"
VERSION = 1

DTYPE_REAL = 0
DTYPE_COMPLEX = 1
DTYPE_MASK = 2

_NUMPY_TYPE = {DTYPE_REAL: np.dtype("<f8"), DTYPE_COMPLEX: np.dtype("<c16"), DTYPE_MASK: np.dtype("u1")}


class FormatError(ValueError):
    """Malformed or truncated CSM1 file."""


def _dtype_code(a: np.ndarray) -> int:
    if a.dtype == bool:
        return DTYPE_MASK
    if np.iscomplexobj(a):
        return DTYPE_COMPLEX
    if np.issubdtype(a.dtype, np.number):
        return DTYPE_REAL
    raise TypeError(f"cannot store dtype {a.dtype} in CSM1")


def encode_matrix(array, meta: dict | None = None) -> bytes:
    a = np.asarray(array)
    if a.ndim < 1 or min(a.shape) < 1:
        raise ValueError(f"all dimensions must be >= 1, got {a.shape}")
    code = _dtype_code(a)
    payload = np.ascontiguousarray(a, dtype=_NUMPY_TYPE[code]).tobytes()
    head = MAGIC + struct.pack(f"<III{a.ndim}I", VERSION, code, a.ndim, *a.shape)
    out = head + payload
    if meta:
        text = "".join(f"{k}={v}\n" for k, v in meta.items()).encode("utf-8")
        out += struct.pack("<I", len(text)) + text
    return out


def decode_matrix(buf: bytes):
    """Return ``(array, meta)``; masks come back as ``bool`` arrays."""
    if len(buf) < 16 or buf[:4] != MAGIC:
        raise FormatError("not a CSM1 file")
    version, code, ndim = struct.unpack_from("<III", buf, 4)
    if version != VERSION:
        raise FormatError(f"unsupported CSM1 version {version}")
    if code not in _NUMPY_TYPE:
        raise FormatError(f"unknown dtype code {code}")
    pos = 16
    if len(buf) < pos + 4 * ndim:
        raise FormatError("truncated header")
    dims = struct.unpack_from(f"<{ndim}I", buf, pos)
    pos += 4 * ndim
    if ndim < 1 or min(dims) < 1:
        raise FormatError(f"invalid dimensions {dims}")
    dt = _NUMPY_TYPE[code]
    nbytes = int(np.prod(dims)) * dt.itemsize
    if len(buf) < pos + nbytes:
        raise FormatError("truncated payload")
    a = np.frombuffer(buf, dtype=dt, count=int(np.prod(dims)), offset=pos).reshape(dims).copy()
    pos += nbytes
    meta = {}
    if pos < len(buf):
        if len(buf) < pos + 4:
            raise FormatError("truncated metadata length")
        (n,) = struct.unpack_from("<I", buf, pos)
        text = buf[pos + 4 : pos + 4 + n]
        if len(text) != n:
            raise FormatError("truncated metadata")
        for line in text.decode("utf-8").splitlines():
            if "=" in line:
                k, v = line.split("=", 1)
                meta[k] = v
    if code == DTYPE_MASK:
        if (a > 1).any():
            raise FormatError("mask payload must contain only 0 and 1")
        a = a.astype(bool)
    return a, meta


def write_matrix(path, array, meta: dict | None = None) -> None:
    with open(path, "wb") as f:
        f.write(encode_matrix(array, meta))


def read_matrix(path):
    with open(path, "rb") as f:
        return decode_matrix(f.read())


def trace_csv(trace, params: dict | None = None, with_rlne: bool = True) -> str:
    """Render a trace as CSV text with ``#`` comment lines for ``params``."""
    cols = TraceRecord.columns()
    if not with_rlne:
        cols.remove("rlne")
    lines = [f"# {k} = {v}" for k, v in (params or {}).items()]
    lines.append(",".join(cols))
    for rec in trace:
        lines.append(",".join(_fmt(getattr(rec, c)) for c in cols))
    return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_trace(path, trace, params: dict | None = None, with_rlne: bool = True) -> None:
    # newline="" keeps "\n" line endings on every platform
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(trace_csv(trace, params, with_rlne))


def read_trace(path):
    """Parse a trace CSV into ``(params, columns, rows)``."""
    params, header, rows = {}, None, []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if line.startswith("#"):
                k, _, v = line[1:].partition("=")
                params[k.strip()] = v.strip()
            elif header is None:
                header = line.split(",")
            elif line:
                rows.append([float(x) for x in line.split(",")])
    return params, header, np.array(rows)


def to_gray8(image, ref=None) -> np.ndarray:
    """Moduli (or ``|image - ref|``) linearly scaled so the maximum maps to 255."""
    a = np.abs(np.asarray(image) - (0 if ref is None else np.asarray(ref)))
    if a.ndim != 2:
        raise ValueError(f"export needs a 2-D image, got shape {a.shape}")
    peak = a.max()
    if peak > 0:
        g = np.floor(a / peak * 255 + 0.5)
    else:
        g = np.zeros_like(a)
    return g.astype(np.uint8)


def write_pgm(path, gray: np.ndarray) -> None:
    gray = np.asarray(gray, dtype=np.uint8)
    n, m = gray.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{m} {n}\n255\n".encode("ascii"))
        f.write(gray.tobytes())
