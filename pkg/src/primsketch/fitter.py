"""Direct per-stroke fitting of a primitive by minimizing the distance-field loss.

The search runs over ``(theta1, sx, theta2)``.  Translation and global
scale are not free: each transformed primitive is placed on the target by
matching arc-length moments, its centroid onto the target's centroid and
its RMS radius onto the target's RMS radius.  Both moments are rotation
invariant, so rotating the target rotates the optimum with it.  A coarse
lattice picks the ``refine_top_k`` best starts, each refined by projected
BFGS with finite-difference gradients and backtracking.  The loss has kinks,
so the winner is finished with a short compass (pattern) search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numba
import numpy as np

from .affine import SX_MAX, SX_MIN, TransformParams, compose_batch
from .distance_field import GAMMA, Field, Grid, _batch_losses, _check_gamma
from .distance_field import field as make_field
from .sketch_model import NormalizedStroke, Primitive


@dataclass(frozen=True)
class FitConfig:
    coarse_theta_steps: int = 12
    coarse_scale_levels: tuple[float, ...] = (0.25, 0.5, 0.75, 1.0)
    refine_top_k: int = 3
    max_refine_iters: int = 200
    rel_tol: float = 1e-5
    fd_epsilon: float = 1e-3

    def __post_init__(self):
        object.__setattr__(self, "coarse_scale_levels", tuple(float(v) for v in self.coarse_scale_levels))
        if self.coarse_theta_steps < 1 or self.refine_top_k < 1 or self.max_refine_iters < 0:
            raise ValueError("step counts must be positive")
        if self.rel_tol <= 0 or self.fd_epsilon <= 0:
            raise ValueError("tolerances must be positive")
        if not self.coarse_scale_levels or not all(SX_MIN <= v <= SX_MAX for v in self.coarse_scale_levels):
            raise ValueError(f"scale levels must lie in [{SX_MIN}, {SX_MAX}]")

    @classmethod
    def from_dict(cls, d: dict) -> "FitConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown fit config keys: {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class FitResult:
    primitive_id: str
    params: TransformParams
    loss: float  # mean per grid point
    evals: int
    scale: float  # the fitted polyline is scale * M @ canonical + offset
    offset: tuple[float, float]


@dataclass(frozen=True)
class Anchor:
    """Arc-length centroid and RMS radius of a target polyline."""

    center: np.ndarray
    radius: float


def curve_moments(polys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Arc-length centroid (B, 2) and RMS radius about it (B,) of polylines (B, m, 2).

    The polyline is treated as a wire of uniform density, so the moments do
    not depend on how densely it is sampled.
    """
    a, b = polys[:, :-1], polys[:, 1:]
    seg = np.linalg.norm(b - a, axis=2)                              # (B, s)
    total = seg.sum(axis=1)
    center = np.einsum("bs,bsj->bj", seg, (a + b) / 2) / total[:, None]
    ra, rb = a - center[:, None], b - center[:, None]
    second = (np.einsum("bsj,bsj->bs", ra, ra) + np.einsum("bsj,bsj->bs", ra, rb)
              + np.einsum("bsj,bsj->bs", rb, rb)) / 3
    return center, np.sqrt(np.einsum("bs,bs->b", seg, second) / total)


def anchor_of(points) -> Anchor:
    c, r = curve_moments(np.asarray(points, dtype=float)[None])
    if not r[0] > 0:
        raise ValueError("target polyline has zero extent")
    return Anchor(c[0], float(r[0]))


@numba.njit(cache=True)
def _place(canon, params, cx, cy, r):
    """Numba twin of the numpy path in ``transformed_primitive``."""
    nb, npts = params.shape[0], canon.shape[0]
    polys = np.empty((nb, npts, 2))
    scale = np.empty(nb)
    offset = np.empty((nb, 2))
    for b in range(nb):
        c1, s1 = math.cos(params[b, 0]), math.sin(params[b, 0])
        sx = params[b, 1]
        c2, s2 = math.cos(params[b, 2]), math.sin(params[b, 2])
        m00 = c2 * sx * c1 - s2 * s1
        m01 = -c2 * sx * s1 - s2 * c1
        m10 = s2 * sx * c1 + c2 * s1
        m11 = -s2 * sx * s1 + c2 * c1
        for i in range(npts):
            x, y = canon[i, 0], canon[i, 1]
            polys[b, i, 0] = m00 * x + m01 * y
            polys[b, i, 1] = m10 * x + m11 * y
        total = 0.0
        gx = 0.0
        gy = 0.0
        for i in range(npts - 1):
            ln = math.hypot(polys[b, i + 1, 0] - polys[b, i, 0], polys[b, i + 1, 1] - polys[b, i, 1])
            total += ln
            gx += ln * (polys[b, i, 0] + polys[b, i + 1, 0]) / 2
            gy += ln * (polys[b, i, 1] + polys[b, i + 1, 1]) / 2
        gx /= total
        gy /= total
        second = 0.0
        for i in range(npts - 1):
            ax, ay = polys[b, i, 0] - gx, polys[b, i, 1] - gy
            bx, by = polys[b, i + 1, 0] - gx, polys[b, i + 1, 1] - gy
            ln = math.hypot(bx - ax, by - ay)
            second += ln * (ax * ax + ay * ay + ax * bx + ay * by + bx * bx + by * by) / 3
        k = r / math.sqrt(second / total)
        ox, oy = cx - k * gx, cy - k * gy
        for i in range(npts):
            polys[b, i, 0] = k * polys[b, i, 0] + ox
            polys[b, i, 1] = k * polys[b, i, 1] + oy
        scale[b] = k
        offset[b, 0] = ox
        offset[b, 1] = oy
    return polys, scale, offset


def transformed_primitive(p: Primitive, params, anchor: Anchor, fast: bool = True):
    """Transform ``p`` for each row of ``params`` (B, 3) and place it on ``anchor``.

    Returns the polylines (B, m, 2) and the per-row ``scale`` (B,) and
    ``offset`` (B, 2) with ``poly = scale * M @ canonical + offset``.
    """
    params = np.atleast_2d(np.asarray(params, dtype=float))
    if fast:
        return _place(p.canonical_points, np.ascontiguousarray(params),
                      float(anchor.center[0]), float(anchor.center[1]), float(anchor.radius))
    m = compose_batch(params[:, 0], params[:, 1], params[:, 2])
    pts = np.einsum("bij,pj->bpi", m, p.canonical_points)
    center, radius = curve_moments(pts)
    scale = anchor.radius / radius
    offset = anchor.center - scale[:, None] * center
    return pts * scale[:, None, None] + offset[:, None, :], scale, offset


class Objective:
    """Mean per-grid-point loss of a primitive against a fixed target field."""

    def __init__(self, target: Field, p: Primitive, anchor: Anchor, gamma: float = GAMMA):
        self.target = target
        self.p = p
        self.anchor = anchor
        self.gamma = _check_gamma(gamma)
        self.evals = 0
        c = target.grid.coords
        self._args = (np.ascontiguousarray(target.values.ravel()),
                      np.ascontiguousarray(c[:, 0]), np.ascontiguousarray(c[:, 1]))

    def __call__(self, params) -> np.ndarray:
        polys, _, _ = transformed_primitive(self.p, params, self.anchor)
        self.evals += len(polys)
        return _batch_losses(*self._args, polys, self.gamma) / self.target.values.size


def coarse_lattice(cfg: FitConfig) -> np.ndarray:
    """Start lattice in lexicographic (theta1, sx, theta2) order.

    ``theta1`` covers ``[0, pi)`` since ``M(t1 + pi, s, t2 + pi) == M(t1, s, t2)``;
    for ``sx == 1`` only ``theta1 = 0`` is kept because M is then a pure rotation.
    """
    n = cfg.coarse_theta_steps
    t1s = np.arange(n) * (math.pi / n)
    t2s = np.arange(n) * (2 * math.pi / n)
    rows = []
    for t1 in t1s:
        for sx in sorted(cfg.coarse_scale_levels):
            if sx == 1.0 and t1 != 0.0:
                continue
            for t2 in t2s:
                rows.append((t1, sx, t2))
    return np.array(rows)


def project(v: np.ndarray) -> np.ndarray:
    v = np.array(v, dtype=float)
    v[..., 1] = np.clip(v[..., 1], SX_MIN, SX_MAX)
    return v


def fd_gradient(obj, v, eps: float) -> np.ndarray:
    """Central-difference gradient of ``obj`` at ``v`` (3,)."""
    v = np.asarray(v, dtype=float)
    pts = np.vstack([v + eps * np.eye(3), v - eps * np.eye(3)])
    f = obj(pts)
    return (f[:3] - f[3:]) / (2 * eps)


STALL_STEPS = 3
POLISH_STEP = 0.2
POLISH_MIN_STEP = 1e-5


def refine(obj, v0, f0: float, cfg: FitConfig) -> tuple[np.ndarray, float, list[float]]:
    """Projected quasi-Newton descent with Armijo backtracking.

    Directions come from a BFGS inverse-Hessian estimate built from
    finite-difference gradients; it is reset to the identity whenever the
    update would lose positive definiteness or a line search fails.
    Stops once the relative gain stays below ``rel_tol`` for
    ``STALL_STEPS`` consecutive steps.  Returns the final point, its loss and
    the loss history of accepted steps (non-increasing by construction).
    """
    v, f = np.asarray(v0, dtype=float), float(f0)
    history = [f]
    g = fd_gradient(obj, v, cfg.fd_epsilon)
    h = np.eye(3)
    fresh = True
    stalled = 0
    for _ in range(cfg.max_refine_iters):
        if not np.any(g):
            break
        d = -h @ g
        if g @ d >= 0:
            h, d, fresh = np.eye(3), -g, True
        step = 1.0
        accepted = False
        while step > 1e-10:
            vn = project(v + step * d)
            fn = float(obj(vn[None])[0])
            if fn < f and fn <= f + 1e-4 * float(g @ (vn - v)):
                accepted = True
                break
            step *= 0.5
        if not accepted:
            if fresh:
                break
            h, fresh = np.eye(3), True
            continue
        gn = fd_gradient(obj, vn, cfg.fd_epsilon)
        sv, yv = vn - v, gn - g
        sy = float(sv @ yv)
        if sy > 1e-12:
            rho = 1.0 / sy
            i = np.eye(3)
            h = (i - rho * np.outer(sv, yv)) @ h @ (i - rho * np.outer(yv, sv)) + rho * np.outer(sv, sv)
            fresh = False
        else:
            h, fresh = np.eye(3), True
        gain = (f - fn) / max(f, 1e-12)
        v, f, g = vn, fn, gn
        history.append(f)
        stalled = stalled + 1 if gain < cfg.rel_tol else 0
        if stalled >= STALL_STEPS:
            break
    return v, f, history


def _poll_directions() -> np.ndarray:
    dirs = [sign * e for e in np.eye(3) for sign in (1.0, -1.0)]
    for i in range(3):
        for j in range(i + 1, 3):
            for si in (1.0, -1.0):
                for sj in (1.0, -1.0):
                    d = np.zeros(3)
                    d[i], d[j] = si, sj
                    dirs.append(d / math.sqrt(2))
    return np.array(dirs)


POLL_DIRECTIONS = _poll_directions()


def polish(obj, v0, f0: float, step: float, min_step: float) -> tuple[np.ndarray, float]:
    """Compass search over coordinate and pairwise-diagonal directions.

    Handles the kinked valleys of the absolute-difference loss where a
    finite-difference gradient is not a descent direction.
    """
    v, f = np.asarray(v0, dtype=float), float(f0)
    while step >= min_step:
        cand = project(v + step * POLL_DIRECTIONS)
        vals = obj(cand)
        k = int(np.argmin(vals))
        if vals[k] < f:
            v, f = cand[k], float(vals[k])
        else:
            step *= 0.5
    return v, f


def fit_primitive(s: NormalizedStroke, p: Primitive, grid: Grid | None = None,
                  gamma: float = GAMMA, cfg: FitConfig | None = None,
                  target: Field | None = None) -> FitResult:
    """Best rotate-scale-rotate alignment of ``p`` to the normalized stroke ``s``."""
    grid = grid or Grid()
    cfg = cfg or FitConfig()
    if target is None:
        target = make_field(s.points, grid, gamma)
    obj = Objective(target, p, anchor_of(s.points), gamma)
    lattice = coarse_lattice(cfg)
    losses = obj(lattice)
    order = np.argsort(losses, kind="stable")  # ties keep lexicographic order
    best_v, best_f = lattice[order[0]], float(losses[order[0]])
    for idx in order[:cfg.refine_top_k]:
        v, f, _ = refine(obj, lattice[idx], float(losses[idx]), cfg)
        if f < best_f:
            best_v, best_f = v, f
    best_v, best_f = polish(obj, best_v, best_f, POLISH_STEP, POLISH_MIN_STEP)
    params = TransformParams(float(best_v[0]), float(best_v[1]), float(best_v[2])).canonical()
    _, scale, offset = transformed_primitive(p, best_v[None], obj.anchor)
    return FitResult(p.id, params, best_f, obj.evals, float(scale[0]), (float(offset[0, 0]), float(offset[0, 1])))


def fit_all(s: NormalizedStroke, prims, grid: Grid | None = None, gamma: float = GAMMA,
            cfg: FitConfig | None = None) -> list[FitResult]:
    """Fit every primitive in ``prims`` (in order), sharing the stroke field."""
    grid = grid or Grid()
    prims = list(prims)
    if not prims:
        raise ValueError("primitive set is empty")
    target = make_field(s.points, grid, gamma)
    return [fit_primitive(s, p, grid, gamma, cfg, target=target) for p in prims]
