"""Shape-Words style baseline: one least-squares line or circular arc per stroke.

Unlike the original method, strokes are not split; each stroke yields a
single shape so the output is message-comparable with the matcher.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .affine import SX_MIN, PrimitiveRecord, TransformParams, apply_record, compose
from .distance_field import GAMMA, Grid, dt_loss_mean, field
from .matcher import PrimitiveSketch
from .primitives import primitive_map
from .sketch_model import DegenerateStrokeError, Sketch, Stroke, normalize_stroke

ARC_RADIUS_LIMIT = 1e4


@dataclass(frozen=True)
class SWFit:
    kind: str  # "line" | "arc"
    residual: float  # mean squared point distance to the shape
    ok: bool = True
    # line
    point: np.ndarray | None = None
    direction: np.ndarray | None = None
    endpoints: np.ndarray | None = None
    # arc
    center: np.ndarray | None = None
    radius: float | None = None
    start_angle: float | None = None
    end_angle: float | None = None


def fit_line_ls(s: Stroke) -> SWFit:
    """Total-least-squares line, clipped to the projections of the stroke endpoints."""
    pts = s.points
    c = pts.mean(axis=0)
    _, sv, vt = np.linalg.svd(pts - c, full_matrices=False)
    d = vt[0]
    proj = (pts - c) @ d
    if proj[-1] < proj[0]:
        d, proj = -d, -proj
    lo, hi = proj[0], proj[-1]
    if hi - lo <= 1e-12 * max(1.0, np.abs(proj).max()):
        # closed stroke: both endpoints project to the same spot
        lo, hi = proj.min(), proj.max()
    perp = (pts - c) @ np.array([-d[1], d[0]])
    ends = np.array([c + lo * d, c + hi * d])
    return SWFit("line", float(np.mean(perp ** 2)), point=c, direction=d, endpoints=ends)


def fit_arc_ls(s: Stroke) -> SWFit:
    """Algebraic (Kasa) circle fit limited to the angular span of the points.

    Returns ``ok=False`` for fewer than 3 points or near-collinear input
    (radius above ``ARC_RADIUS_LIMIT`` times the stroke's bbox side).
    """
    pts = s.points
    if len(pts) < 3:
        return SWFit("arc", math.inf, ok=False)
    mu = pts.mean(axis=0)
    side = float(np.max(np.ptp(pts, axis=0)))
    q = (pts - mu) / side
    a = np.column_stack([q, np.ones(len(q))])
    rhs = -(q ** 2).sum(axis=1)
    sol, _, rank, _ = np.linalg.lstsq(a, rhs, rcond=None)
    if rank < 3:
        return SWFit("arc", math.inf, ok=False)
    cq = -sol[:2] / 2
    r2 = float(cq @ cq - sol[2])
    if not r2 > 0 or math.sqrt(r2) > ARC_RADIUS_LIMIT:
        return SWFit("arc", math.inf, ok=False)
    center = mu + cq * side
    radius = math.sqrt(r2) * side
    rel = pts - center
    ang = np.unwrap(np.arctan2(rel[:, 1], rel[:, 0]))
    a0, a1 = float(ang[0]), float(ang[-1])
    if abs(a1 - a0) > 2 * math.pi:
        a1 = a0 + math.copysign(2 * math.pi, a1 - a0)
    resid = float(np.mean((np.hypot(rel[:, 0], rel[:, 1]) - radius) ** 2))
    return SWFit("arc", resid, center=center, radius=radius, start_angle=a0, end_angle=a1)


def _line_record(fit: SWFit) -> PrimitiveRecord:
    p0, p1 = fit.endpoints
    length = float(np.hypot(*(p1 - p0)))
    mid = (p0 + p1) / 2
    phi = math.atan2(fit.direction[1], fit.direction[0])
    return PrimitiveRecord("line", 0.0, 1.0, phi, float(mid[0]), float(mid[1]), max(length, 1e-9))


def _arc_record(fit: SWFit, canonical_arc: np.ndarray) -> PrimitiveRecord:
    """In-family placement of the canonical half-circle over the fitted arc.

    The canonical arc's bounding box is mapped onto the fitted arc's box
    aligned with its bisector: width along the chord, height along the
    bisector.  Exact for half circles, approximate otherwise.
    """
    r = fit.radius
    span = min(abs(fit.end_angle - fit.start_angle), 2 * math.pi)
    mid = (fit.start_angle + fit.end_angle) / 2
    n = np.array([math.cos(mid), math.sin(mid)])
    half_w = r * math.sin(span / 2) if span <= math.pi else r
    height = r * (1 - math.cos(span / 2))
    half_w, height = max(half_w, 1e-9 * r), max(height, 1e-9 * r)
    base = fit.center + n * r * math.cos(span / 2)
    phi = math.atan2(-n[0], n[1])  # R(phi) @ e2 == n
    # R(phi) @ diag(half_w, height) as (w / 2) * R(theta2) @ diag(sx, 1) @ R(theta1)
    if height <= half_w:
        theta1, sx, theta2, w = math.pi / 2, height / half_w, phi - math.pi / 2, 2 * half_w
    else:
        theta1, sx, theta2, w = 0.0, half_w / height, phi, 2 * height
    sx = min(1.0, max(SX_MIN, sx))
    lin = compose(TransformParams(theta1, sx, theta2)) * (w / 2)
    # canonical arc box is [-1, 1] x [ymin, ymin + 1]; its chord midpoint goes to ``base``
    offset = np.array([-1.0, 0.0]) - canonical_arc.min(axis=0)
    t = lin @ offset + base
    return PrimitiveRecord("arc", theta1, sx, theta2, float(t[0]), float(t[1]), float(w))


def sw_record(s: Stroke) -> tuple[PrimitiveRecord, SWFit]:
    line = fit_line_ls(s)
    arc = fit_arc_ls(s)
    if arc.ok and arc.residual < line.residual:
        return _arc_record(arc, primitive_map()["arc"].canonical_points), arc
    return _line_record(line), line


def sw_abstract(sk: Sketch, grid: Grid | None = None, gamma: float = GAMMA) -> PrimitiveSketch:
    """Abstract ``sk`` with lines and arcs only.

    Residuals are distance-field losses (mean per grid point) in each
    stroke's normalized frame, the same measure the matcher reports.
    """
    grid = grid or Grid()
    pm = primitive_map()
    records, residuals, kept, skipped = [], [], [], []
    for k, stroke in enumerate(sk.strokes):
        try:
            ns = normalize_stroke(stroke)
        except DegenerateStrokeError:
            skipped.append(k)
            continue
        rec, _ = sw_record(stroke)
        drawn = apply_record(pm[rec.primitive_id], rec).points
        target = field(ns.points, grid, gamma)
        approx = field((drawn - ns.mu) / (ns.w / 2), grid, gamma)
        records.append(rec)
        residuals.append(dt_loss_mean(target, approx))
        kept.append(k)
    return PrimitiveSketch(tuple(records), tuple(residuals), (), sk.id, sk.category,
                           tuple(kept), tuple(skipped), "sw")
