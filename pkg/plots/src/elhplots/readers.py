"""Readers for the solver's on-disk formats.

Implemented from the byte-level format contract alone (no solver
imports), so any drift between writer and spec shows up here.

CSV: `#`-prefixed `key = value` metadata lines, one fixed header row,
comma-separated rows with empty fields for absent optional values.

Snapshot: 16-byte magic "ELHSNAP\\0" NUL-padded, little-endian u32
version, u32 dim, u32 n, u32 component count, f64 time, then row-major
little-endian f64 samples per component in the order
u_1..u_dim, d_1..d_dim, w_1..w_dim.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

CSV_COLUMNS = (
    "t", "E_basic", "D_total", "D_visc", "D_mu1", "D_lam1", "D_cross",
    "D_mu56", "E_hs", "D_hs", "E_eta", "D_eta", "h_max", "h_l2",
    "tangency_max", "residual",
)

SNAPSHOT_MAGIC = b"ELHSNAP\x00" + b"\x00" * 8
SNAPSHOT_VERSION = 1


class FormatError(ValueError):
    pass


@dataclass
class TimeSeries:
    meta: dict[str, str]
    columns: dict[str, np.ndarray]

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.columns[name]
        except KeyError:
            raise FormatError(f"column {name!r} missing from time series") from None


def read_timeseries(path: str) -> TimeSeries:
    meta: dict[str, str] = {}
    header: list[str] | None = None
    rows: list[list[float]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, val = (part.strip() for part in body.split("=", 1))
                    meta[key] = val
                continue
            if header is None:
                header = line.split(",")
                missing = [c for c in CSV_COLUMNS if c not in header]
                if missing:
                    raise FormatError(
                        f"{path}: header is missing column(s) {', '.join(missing)}"
                    )
                continue
            fields = line.split(",")
            if len(fields) != len(header):
                raise FormatError(f"{path}:{lineno}: expected {len(header)} fields")
            rows.append([float(f) if f else float("nan") for f in fields])
    if header is None:
        raise FormatError(f"{path}: no header row")
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return TimeSeries(meta, {name: data[:, i] for i, name in enumerate(header)})


@dataclass
class Snapshot:
    time: float
    dim: int
    n: int
    u: np.ndarray  # (dim, n, ...) samples
    d: np.ndarray
    w: np.ndarray


def read_snapshot(path: str) -> Snapshot:
    with open(path, "rb") as fh:
        magic = fh.read(16)
        if magic != SNAPSHOT_MAGIC:
            raise FormatError(f"{path}: bad magic (not a field snapshot)")
        version, dim, n, ncomp = struct.unpack("<IIII", fh.read(16))
        if version != SNAPSHOT_VERSION:
            raise FormatError(f"{path}: unsupported version {version}")
        if ncomp != 3 * dim:
            raise FormatError(f"{path}: expected {3 * dim} components, got {ncomp}")
        (t,) = struct.unpack("<d", fh.read(8))
        count = ncomp * n**dim
        payload = fh.read(count * 8)
        if len(payload) != count * 8:
            raise FormatError(f"{path}: truncated sample payload")
        vals = np.frombuffer(payload, dtype="<f8").reshape((ncomp,) + (n,) * dim)
    return Snapshot(
        time=t, dim=dim, n=n,
        u=vals[:dim], d=vals[dim:2 * dim], w=vals[2 * dim:],
    )
