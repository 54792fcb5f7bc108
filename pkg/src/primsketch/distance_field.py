"""Exponentiated distance transforms of polylines on a square grid.

The influence of a polyline at a grid point ``g`` is ``exp(-gamma * d2)``
where ``d2`` is the squared distance from ``g`` to the nearest point of the
polyline.  Two fields are compared by the sum of absolute differences.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numba
import numpy as np

GAMMA = 6.0
GRID_EXTENT = 1.5


@dataclass(frozen=True)
class Grid:
    """``n x n`` lattice linearly spaced over ``[-extent, extent]^2``.

    ``coords`` is row-major: row ``i`` has y = ``axis[i]``, column ``j`` has
    x = ``axis[j]``.
    """

    n: int = 64
    extent: float = GRID_EXTENT

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("grid resolution must be >= 2")

    @cached_property
    def axis(self) -> np.ndarray:
        return np.linspace(-self.extent, self.extent, self.n)

    @cached_property
    def coords(self) -> np.ndarray:
        x, y = np.meshgrid(self.axis, self.axis, indexing="xy")
        c = np.column_stack([x.ravel(), y.ravel()])
        c.flags.writeable = False
        return c

    @property
    def cell_area(self) -> float:
        h = 2 * self.extent / (self.n - 1)
        return h * h


@dataclass(frozen=True)
class Field:
    values: np.ndarray  # (n, n)
    grid: Grid


def _check_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    return gamma


def point_segment_sq_dist(g, a, b) -> float:
    """Squared distance from ``g`` to the closed segment ``[a, b]``."""
    g, a, b = (np.asarray(v, dtype=float) for v in (g, a, b))
    e = b - a
    den = float(e @ e)
    t = 0.0 if den == 0 else min(1.0, max(0.0, float((g - a) @ e) / den))
    d = g - a - t * e
    return float(d @ d)


def sq_dist_to_polyline(points: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Squared distance from each of ``points`` (k, 2) to the polyline ``poly`` (m, 2)."""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    poly = np.asarray(poly, dtype=float)
    a = poly[:-1]
    e = poly[1:] - a
    den = np.einsum("ij,ij->i", e, e)
    den = np.where(den > 0, den, 1.0)
    rel = points[:, None, :] - a[None, :, :]                      # (k, s, 2)
    t = np.clip(np.einsum("ksj,sj->ks", rel, e) / den, 0.0, 1.0)
    d = rel - t[..., None] * e[None, :, :]
    return np.min(np.einsum("ksj,ksj->ks", d, d), axis=1)


def influence(g, poly, gamma: float = GAMMA) -> float:
    gamma = _check_gamma(gamma)
    return float(np.exp(-gamma * sq_dist_to_polyline(g, poly)[0]))


def field(poly, grid: Grid, gamma: float = GAMMA) -> Field:
    gamma = _check_gamma(gamma)
    poly = np.asarray(poly, dtype=float)
    if len(poly) < 2:
        raise ValueError("polyline needs at least one segment")
    d2 = sq_dist_to_polyline(grid.coords, poly)
    return Field(np.exp(-gamma * d2).reshape(grid.n, grid.n), grid)


def dt_loss(fa: Field, fb: Field) -> float:
    """Raw loss: sum over the grid of ``|fa - fb|``."""
    if fa.grid != fb.grid:
        raise ValueError("fields live on different grids")
    return float(np.sum(np.abs(fa.values - fb.values)))


def dt_loss_mean(fa: Field, fb: Field) -> float:
    """Loss normalized per grid point, comparable across resolutions."""
    return dt_loss(fa, fb) / fa.values.size


@numba.njit(cache=True, fastmath=True)
def _batch_losses(target, gx, gy, polys, gamma):
    nb, npts = polys.shape[0], polys.shape[1]
    ng = gx.shape[0]
    out = np.empty(nb)
    mind = np.empty(ng)
    for b in range(nb):
        for j in range(ng):
            mind[j] = np.inf
        for s in range(npts - 1):
            ax = polys[b, s, 0]
            ay = polys[b, s, 1]
            ex = polys[b, s + 1, 0] - ax
            ey = polys[b, s + 1, 1] - ay
            den = ex * ex + ey * ey
            inv = 1.0 / den if den > 0.0 else 0.0
            for j in range(ng):
                rx = gx[j] - ax
                ry = gy[j] - ay
                t = (rx * ex + ry * ey) * inv
                t = min(1.0, max(0.0, t))
                dx = rx - t * ex
                dy = ry - t * ey
                mind[j] = min(mind[j], dx * dx + dy * dy)
        acc = 0.0
        for j in range(ng):
            acc += abs(np.exp(-gamma * mind[j]) - target[j])
        out[b] = acc
    return out


def batch_dt_loss(target: Field, polys: np.ndarray, gamma: float = GAMMA) -> np.ndarray:
    """Raw loss between ``target`` and the field of each polyline in ``polys`` (B, m, 2).

    Equivalent to ``[dt_loss(target, field(p, grid, gamma)) for p in polys]``
    without materializing the fields.
    """
    gamma = _check_gamma(gamma)
    polys = np.ascontiguousarray(polys, dtype=np.float64)
    if polys.ndim == 2:
        polys = polys[None]
    c = target.grid.coords
    return _batch_losses(np.ascontiguousarray(target.values.ravel()),
                         np.ascontiguousarray(c[:, 0]), np.ascontiguousarray(c[:, 1]),
                         polys, gamma)


def write_field(path, f: Field) -> None:
    """Dump a field: little-endian uint32 ``n`` then ``n*n`` float64 values, row-major."""
    with open(path, "wb") as fh:
        fh.write(struct.pack("<I", f.grid.n))
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())


def read_field(path, extent: float = GRID_EXTENT) -> Field:
    raw = Path(path).read_bytes()
    (n,) = struct.unpack_from("<I", raw)
    vals = np.frombuffer(raw, dtype="<f8", offset=4)
    if vals.size != n * n:
        raise ValueError(f"{path}: expected {n * n} values, found {vals.size}")
    return Field(vals.reshape(n, n).copy(), Grid(n, extent))
