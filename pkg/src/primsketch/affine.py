"""Rotate-scale-rotate transforms and primitive records.

A transform is ``M = R(theta2) @ diag(sx, 1) @ R(theta1)`` with
``sx`` in ``[0.05, 1]``.  A :class:`PrimitiveRecord` places a canonical
primitive on the canvas as ``M @ x * (w / 2) + (tx, ty)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .sketch_model import VOCABULARY, Primitive, Sketch, Stroke, wrap_angle

SX_MIN = 0.05
SX_MAX = 1.0
RECORD_SCHEMA_VERSION = 1


def rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class TransformParams:
    theta1: float = 0.0
    sx: float = 1.0
    theta2: float = 0.0

    def __post_init__(self):
        if not (SX_MIN <= self.sx <= SX_MAX):
            raise ValueError(f"sx={self.sx} outside [{SX_MIN}, {SX_MAX}]")

    def canonical(self) -> "TransformParams":
        return TransformParams(wrap_angle(self.theta1), float(self.sx), wrap_angle(self.theta2))


def compose(t: TransformParams) -> np.ndarray:
    if not (SX_MIN <= t.sx <= SX_MAX):
        raise ValueError(f"sx={t.sx} outside [{SX_MIN}, {SX_MAX}]")
    return rotation(t.theta2) @ np.diag([t.sx, 1.0]) @ rotation(t.theta1)


def compose_batch(theta1, sx, theta2) -> np.ndarray:
    """Vectorized ``compose`` without bound checks: returns (B, 2, 2)."""
    theta1, sx, theta2 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (theta1, sx, theta2)))
    c1, s1 = np.cos(theta1), np.sin(theta1)
    c2, s2 = np.cos(theta2), np.sin(theta2)
    # R2 @ diag(sx, 1) @ R1, expanded
    m = np.empty(theta1.shape + (2, 2))
    m[..., 0, 0] = c2 * sx * c1 - s2 * s1
    m[..., 0, 1] = -c2 * sx * s1 - s2 * c1
    m[..., 1, 0] = s2 * sx * c1 + c2 * s1
    m[..., 1, 1] = -s2 * sx * s1 + c2 * c1
    return m


@dataclass(frozen=True)
class PrimitiveRecord:
    """One primitive placed on the canvas: 6 reals plus the primitive id."""

    primitive_id: str
    theta1: float
    sx: float
    theta2: float
    tx: float
    ty: float
    w: float

    def __post_init__(self):
        if self.primitive_id not in VOCABULARY:
            raise ValueError(f"unknown primitive id {self.primitive_id!r}")
        if not (SX_MIN <= self.sx <= SX_MAX):
            raise ValueError(f"sx={self.sx} outside [{SX_MIN}, {SX_MAX}]")
        if not self.w > 0:
            raise ValueError("w must be positive")

    @property
    def params(self) -> TransformParams:
        return TransformParams(self.theta1, self.sx, self.theta2)

    def to_dict(self) -> dict:
        return {"id": self.primitive_id, "theta1": wrap_angle(self.theta1), "sx": float(self.sx),
                "theta2": wrap_angle(self.theta2), "tx": float(self.tx), "ty": float(self.ty),
                "w": float(self.w)}

    @classmethod
    def from_dict(cls, d: dict) -> "PrimitiveRecord":
        return cls(d["id"], float(d["theta1"]), float(d["sx"]), float(d["theta2"]),
                   float(d["tx"]), float(d["ty"]), float(d["w"]))

    def values(self) -> tuple[float, ...]:
        return (self.theta1, self.sx, self.theta2, self.tx, self.ty, self.w)


def apply_record(p: Primitive, rec: PrimitiveRecord) -> Stroke:
    if rec.primitive_id != p.id:
        raise ValueError(f"record is for {rec.primitive_id!r}, primitive is {p.id!r}")
    m = compose(rec.params)
    pts = p.canonical_points @ m.T * (rec.w / 2.0) + np.array([rec.tx, rec.ty])
    return Stroke(pts)


def reconstruct(records: Sequence[PrimitiveRecord], prims: Sequence[Primitive] | None = None,
                id: str | None = None, category: str | None = None) -> Sketch:
    """Redraw records as strokes, in record order."""
    from .primitives import primitive_map

    pm = primitive_map(prims)
    if not records:
        raise ValueError("cannot reconstruct a sketch from zero records")
    strokes = []
    for rec in records:
        if rec.primitive_id not in pm:
            raise KeyError(f"primitive {rec.primitive_id!r} not in primitive set")
        strokes.append(apply_record(pm[rec.primitive_id], rec))
    return Sketch(tuple(strokes), id=id, category=category)
