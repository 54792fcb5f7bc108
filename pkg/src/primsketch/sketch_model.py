"""Strokes, sketches and primitives, plus the parsers that produce them.

Points are stored as ``(m, 2)`` float arrays.  All containers are frozen
and their arrays are marked read-only, so they can be shared freely.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

VOCABULARY = ("line", "arc", "circle", "corner", "triangle", "square", "u_shape")


class SketchParseError(ValueError):
    """Raised for malformed input records; carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class DegenerateStrokeError(ValueError):
    """A stroke with fewer than two distinct points or a zero-size bounding box."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Stroke:
    """Ordered polyline of at least two distinct consecutive points."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64).reshape(-1, 2)
        if not np.all(np.isfinite(pts)):
            raise ValueError("stroke contains non-finite coordinates")
        if len(pts) > 1:
            keep = np.ones(len(pts), dtype=bool)
            keep[1:] = np.any(pts[1:] != pts[:-1], axis=1)
            pts = pts[keep]
        if len(pts) < 2:
            raise DegenerateStrokeError("stroke needs at least 2 distinct points")
        object.__setattr__(self, "points", _frozen(pts))

    def __len__(self) -> int:
        return len(self.points)

    def __eq__(self, other):
        if not isinstance(other, Stroke):
            return NotImplemented
        return self.points.shape == other.points.shape and bool(np.all(self.points == other.points))

    __hash__ = None


@dataclass(frozen=True)
class Sketch:
    strokes: tuple[Stroke, ...]
    id: str | None = None
    category: str | None = None

    def __post_init__(self):
        strokes = tuple(s if isinstance(s, Stroke) else Stroke(s) for s in self.strokes)
        if not strokes:
            raise ValueError(f"sketch {self.id!r} has no strokes")
        object.__setattr__(self, "strokes", strokes)

    @property
    def n_points(self) -> int:
        return sum(len(s) for s in self.strokes)


@dataclass(frozen=True)
class Primitive:
    """Canonical primitive shape, centred on its point mean."""

    id: str
    canonical_points: np.ndarray

    def __post_init__(self):
        if self.id not in VOCABULARY:
            raise ValueError(f"unknown primitive id {self.id!r}")
        pts = np.array(self.canonical_points, dtype=np.float64).reshape(-1, 2)
        if len(pts) < 2:
            raise ValueError("primitive needs at least 2 points")
        object.__setattr__(self, "canonical_points", _frozen(pts))

    @property
    def index(self) -> int:
        return VOCABULARY.index(self.id)

    __hash__ = None


@dataclass(frozen=True)
class NormalizedStroke:
    """Stroke centred on its point mean and divided by half its longest bbox side."""

    points: np.ndarray
    mu: np.ndarray
    w: float

    def denormalize(self) -> np.ndarray:
        return self.points * (self.w / 2.0) + self.mu


@dataclass(frozen=True)
class Message:
    """One budget unit: up to three human points, or one primitive record."""

    kind: str  # "human_points" | "primitive"
    stroke_index: int | None = None
    points: np.ndarray | None = None
    record: object | None = None


def normalize_stroke(s: Stroke) -> NormalizedStroke:
    pts = s.points
    mu = pts.mean(axis=0)
    w = float(np.max(pts.max(axis=0) - pts.min(axis=0)))
    if not w > 0:
        raise DegenerateStrokeError("stroke has a zero-size bounding box")
    norm = (pts - mu) / (w / 2.0)
    return NormalizedStroke(points=_frozen(norm), mu=_frozen(mu), w=w)


def segment_messages(sk: Sketch) -> list[Message]:
    """Split every stroke, in drawing order, into consecutive 3-point messages.

    A trailing group of one or two points still costs a full message.
    """
    out = []
    for k, stroke in enumerate(sk.strokes):
        pts = stroke.points
        for start in range(0, len(pts), 3):
            out.append(Message("human_points", stroke_index=k, points=pts[start:start + 3]))
    return out


def _sketch_id(obj: dict, lineno: int) -> str:
    for key in ("key_id", "id"):
        if key in obj:
            return str(obj[key])
    return f"line{lineno}"


def parse_ndjson(data: bytes | str | Iterable[str], strict: bool = True) -> list[Sketch]:
    """Parse QuickDraw-style NDJSON: one object per line with ``drawing: [[xs, ys], ...]``.

    Strokes with fewer than two distinct points are dropped with a warning.
    A sketch left with no strokes is rejected: ``SketchParseError`` when
    *strict*, otherwise a warning and the sketch is skipped.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    lines = data.splitlines() if isinstance(data, str) else list(data)
    sketches = []
    for lineno, raw in enumerate(lines, start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as e:
            raise SketchParseError(f"malformed JSON ({e.msg})", lineno) from None
        if not isinstance(obj, dict) or not isinstance(obj.get("drawing"), list):
            raise SketchParseError("missing 'drawing' list", lineno)
        sid = _sketch_id(obj, lineno)
        strokes = []
        for k, pair in enumerate(obj["drawing"]):
            try:
                xs, ys = pair[0], pair[1]
                if len(xs) != len(ys):
                    raise ValueError("x/y length mismatch")
                pts = np.column_stack([np.asarray(xs, float), np.asarray(ys, float)])
            except (TypeError, ValueError, IndexError) as e:
                raise SketchParseError(f"stroke {k} malformed: {e}", lineno) from None
            try:
                strokes.append(Stroke(pts))
            except DegenerateStrokeError:
                warnings.warn(f"line {lineno}: sketch {sid} stroke {k} has < 2 points, dropped",
                              stacklevel=2)
            except ValueError as e:
                raise SketchParseError(f"stroke {k}: {e}", lineno) from None
        if not strokes:
            msg = f"sketch {sid} has no usable strokes"
            if strict:
                raise SketchParseError(msg, lineno)
            warnings.warn(f"line {lineno}: {msg}, rejected", stacklevel=2)
            continue
        sketches.append(Sketch(tuple(strokes), id=sid, category=obj.get("word")))
    return sketches


def to_ndjson(sketches: Sequence[Sketch]) -> str:
    lines = []
    for sk in sketches:
        obj = {}
        if sk.category is not None:
            obj["word"] = sk.category
        if sk.id is not None:
            obj["key_id"] = sk.id
        obj["drawing"] = [[s.points[:, 0].tolist(), s.points[:, 1].tolist()] for s in sk.strokes]
        lines.append(json.dumps(obj))
    return "\n".join(lines) + "\n"


def parse_stroke3(rows: Sequence[Sequence[float]], id: str | None = None,
                  category: str | None = None) -> Sketch:
    """Build a sketch from ``(dx, dy, pen_lift)`` offset rows starting at the origin.

    A row with ``pen_lift == 1`` ends the current stroke after its point.
    Length-1 strokes are dropped; if nothing remains the input is rejected.
    """
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[0] == 0 or rows.shape[1] != 3:
        raise SketchParseError("stroke-3 input must be a nonempty list of (dx, dy, pen_lift)")
    pos = np.cumsum(rows[:, :2], axis=0)
    strokes, current = [], [np.zeros(2)]
    for p, lift in zip(pos, rows[:, 2]):
        current.append(p)
        if lift >= 0.5:
            strokes.append(current)
            current = []
    if current:
        strokes.append(current)
    out = []
    for pts in strokes:
        try:
            out.append(Stroke(np.asarray(pts)))
        except DegenerateStrokeError:
            continue
    if not out:
        raise SketchParseError("stroke-3 input yields no stroke with 2 or more points")
    return Sketch(tuple(out), id=id, category=category)


def to_stroke3(sk: Sketch) -> list[list[float]]:
    """Inverse of :func:`parse_stroke3` for sketches whose first point is the origin."""
    rows = []
    prev = np.zeros(2)
    for k, s in enumerate(sk.strokes):
        pts = s.points
        start = 1 if k == 0 and np.all(pts[0] == 0) else 0
        for j in range(start, len(pts)):
            d = pts[j] - prev
            rows.append([float(d[0]), float(d[1]), 1.0 if j == len(pts) - 1 else 0.0])
            prev = pts[j]
    return rows


def polyline_length(points: np.ndarray) -> float:
    return float(np.sum(np.hypot(*np.diff(points, axis=0).T)))


def wrap_angle(theta: float) -> float:
    """Canonical angle in [0, 2pi)."""
    t = math.fmod(theta, 2 * math.pi)
    if t < 0:
        t += 2 * math.pi
    return 0.0 if t >= 2 * math.pi else t
