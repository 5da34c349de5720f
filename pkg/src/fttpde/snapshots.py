"""Self-describing binary container for tensor-train snapshots.

FTTSNAP1 byte layout (all integers int64 little-endian, floats IEEE-754
float64 little-endian):

    bytes 0..7      magic b"FTTSNAP1"
    int64           d (number of axes)
    d * (int64 n, float64 a, float64 b)     per-axis node count and interval
    (d+1) * int64   interface ranks r_0..r_d
    d core arrays   float64 values in C (row-major) order, core k having
                    shape (r_{k-1}, n_k, r_k)

Round trips are bit-identical: load(save(u)) reproduces the exact core
bytes that were written.
"""

from __future__ import annotations

import struct

import numpy as np

from .ftt import FttTensor
from .grids import Domain, Grid1D, make_periodic_grid

MAGIC = b"FTTSNAP1"


class SnapshotFormatError(ValueError):
    """File is not a valid FTTSNAP1 container."""


def save(u: FttTensor, path) -> None:
    d = u.ndim
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<q", d))
        for g in u.domain.axes:
            fh.write(struct.pack("<qdd", g.n, g.a, g.b))
        fh.write(struct.pack(f"<{d + 1}q", *u.ranks))
        for core in u.cores:
            fh.write(np.ascontiguousarray(core, dtype="<f8").tobytes())


def load(path) -> FttTensor:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != MAGIC:
            raise SnapshotFormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
        (d,) = struct.unpack("<q", fh.read(8))
        axes: list[Grid1D] = []
        for _ in range(d):
            n, a, b = struct.unpack("<qdd", fh.read(24))
            axes.append(make_periodic_grid(n, a, b))
        ranks = struct.unpack(f"<{d + 1}q", fh.read(8 * (d + 1)))
        cores = []
        for k in range(d):
            shape = (ranks[k], axes[k].n, ranks[k + 1])
            count = int(np.prod(shape))
            buf = fh.read(8 * count)
            if len(buf) != 8 * count:
                raise SnapshotFormatError("truncated core data")
            cores.append(np.frombuffer(buf, dtype="<f8").reshape(shape).copy())
    return FttTensor(cores, Domain(axes=tuple(axes)))


def describe(path) -> dict:
    """Header summary without loading core data into a tensor."""
    u = load(path)
    return {
        "d": u.ndim,
        "axes": [{"n": g.n, "interval": [g.a, g.b]} for g in u.domain.axes],
        "ranks": list(u.ranks),
    }
