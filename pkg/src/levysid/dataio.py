"""Dataset and report file formats.

Datasets exist in two interchangeable encodings, auto-detected on read:

* text: a header line ``#levy-sid-pairs v1 n=<n> M=<M> h=<h>`` followed by
  M CSV rows of 2n shortest-round-trip decimal floats, z before x;
* binary: magic ``LSID``, a version byte (1), little-endian u32 n, u64 M,
  f64 h, then the same M x 2n row-major float64 payload.

Reports are JSON with sorted keys and two-space indentation, so a report
read back and re-serialized is byte-identical.
"""

from __future__ import annotations

import json
import re
import struct

import numpy as np

from .errors import DataFormatError, DomainError
from .simulate import DatasetPair

MAGIC = b"LSID"
BINARY_VERSION = 1
_HEADER_RE = re.compile(
    r"#levy-sid-pairs v1 n=(\d+) M=(\d+) h=([^\s]+)\s*$")

# above this row count `simulate` and `pipeline` switch to binary by default
BINARY_DEFAULT_ROWS = 2_000_000


def default_format(M):
    return "bin" if M >= BINARY_DEFAULT_ROWS else "csv"


def _header_line(data):
    return f"#levy-sid-pairs v1 n={data.n} M={data.M} h={data.h!r}\n"


def write_dataset(data, path, fmt="csv"):
    """Write a DatasetPair to ``path`` as 'csv' or 'bin'."""
    if fmt == "csv":
        payload = np.hstack([data.Z, data.X])
        with open(path, "w", encoding="ascii") as fh:
            fh.write(_header_line(data))
            for row in payload.tolist():
                fh.write(",".join(repr(v) for v in row))
                fh.write("\n")
    elif fmt == "bin":
        head = MAGIC + struct.pack("<BIQd", BINARY_VERSION, data.n, data.M, data.h)
        payload = np.hstack([data.Z, data.X]).astype("<f8")
        with open(path, "wb") as fh:
            fh.write(head)
            fh.write(payload.tobytes())
    else:
        raise DomainError(f"unknown dataset format {fmt!r}; use 'csv' or 'bin'")


def _read_binary(path):
    with open(path, "rb") as fh:
        head = fh.read(4 + 1 + 4 + 8 + 8)
        if len(head) < 25 or head[:4] != MAGIC:
            raise DataFormatError(f"{path}: truncated or invalid binary header")
        version, n, M, h = struct.unpack("<BIQd", head[4:])
        if version != BINARY_VERSION:
            raise DataFormatError(
                f"{path}: unsupported binary version {version}")
        if n < 1 or M < 1:
            raise DataFormatError(f"{path}: invalid dimensions n={n}, M={M}")
        payload = np.fromfile(fh, dtype="<f8", count=M * 2 * n)
    if payload.size != M * 2 * n:
        raise DataFormatError(
            f"{path}: expected {M * 2 * n} values, found {payload.size}")
    rows = payload.reshape(M, 2 * n)
    try:
        return DatasetPair.from_arrays(rows[:, :n], rows[:, n:], h)
    except DomainError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc


def _read_csv(path):
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline()
        m = _HEADER_RE.match(header)
        if m is None:
            raise DataFormatError(
                f"{path}: missing or malformed '#levy-sid-pairs v1' header")
        n = int(m.group(1))
        M = int(m.group(2))
        try:
            h = float(m.group(3))
        except ValueError as exc:
            raise DataFormatError(f"{path}: bad h in header: {m.group(3)!r}") from exc
        if n < 1 or M < 1:
            raise DataFormatError(f"{path}: invalid dimensions n={n}, M={M}")
        try:
            rows = np.loadtxt(fh, delimiter=",", ndmin=2, dtype=np.float64)
        except ValueError as exc:
            raise DataFormatError(f"{path}: malformed data row: {exc}") from exc
    if rows.shape != (M, 2 * n):
        raise DataFormatError(
            f"{path}: header promises {M} rows of {2 * n} values, "
            f"found shape {rows.shape}")
    try:
        return DatasetPair.from_arrays(rows[:, :n], rows[:, n:], h)
    except DomainError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc


def read_dataset(path):
    """Read a dataset file, sniffing the binary magic to pick the decoder."""
    try:
        with open(path, "rb") as fh:
            magic = fh.read(4)
    except OSError as exc:
        raise DataFormatError(f"cannot open {path}: {exc}") from exc
    if magic == MAGIC:
        return _read_binary(path)
    return _read_csv(path)


def canonical_json(obj):
    """Stable JSON encoding: sorted keys, two-space indent, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, separators=(",", ": ")) + "\n"


def write_report(report, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(canonical_json(report))


def read_report(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise DataFormatError(f"cannot open {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: invalid JSON: {exc}") from exc
