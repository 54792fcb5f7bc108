"""Primitive selection, loss-based compatibility and sketch abstraction."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .affine import PrimitiveRecord
from .distance_field import GAMMA, Grid
from .fitter import FitConfig, FitResult, fit_all
from .sketch_model import VOCABULARY, DegenerateStrokeError, Primitive, Sketch, normalize_stroke

KAPPA = 0.2


@dataclass(frozen=True)
class Compatibility:
    ids: tuple[str, ...]
    probs: np.ndarray
    kappa: float = KAPPA

    @property
    def scores(self) -> list[tuple[str, float]]:
        return list(zip(self.ids, self.probs.tolist()))

    def __getitem__(self, pid: str) -> float:
        return float(self.probs[self.ids.index(pid)])


@dataclass(frozen=True)
class PrimitiveSketch:
    """Abstracted sketch: one record per kept source stroke, in drawing order."""

    records: tuple[PrimitiveRecord, ...]
    residuals: tuple[float, ...] = ()
    compat: tuple[tuple[float, ...], ...] = ()
    sketch_id: str | None = None
    category: str | None = None
    stroke_indices: tuple[int, ...] = ()
    skipped: tuple[int, ...] = ()
    method: str = "pmn"

    def to_dict(self) -> dict:
        return {
            "sketch_id": self.sketch_id,
            "category": self.category,
            "method": self.method,
            "records": [r.to_dict() for r in self.records],
            "residuals": list(self.residuals),
            "compat": [list(c) for c in self.compat],
            "stroke_indices": list(self.stroke_indices),
            "skipped": list(self.skipped),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PrimitiveSketch":
        return cls(
            records=tuple(PrimitiveRecord.from_dict(r) for r in d["records"]),
            residuals=tuple(d.get("residuals", ())),
            compat=tuple(tuple(c) for c in d.get("compat", ())),
            sketch_id=d.get("sketch_id"),
            category=d.get("category"),
            stroke_indices=tuple(d.get("stroke_indices", ())),
            skipped=tuple(d.get("skipped", ())),
            method=d.get("method", "pmn"),
        )


def compatibility(fits: Sequence[FitResult], kappa: float = KAPPA) -> Compatibility:
    """Softmax of ``-loss / kappa`` over the fitted primitives."""
    if not fits:
        raise ValueError("no fits")
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    z = -np.array([f.loss for f in fits]) / kappa
    z -= z.max()
    e = np.exp(z)
    return Compatibility(tuple(f.primitive_id for f in fits), e / e.sum(), kappa)


def weighted_loss(fits: Sequence[FitResult], comp: Compatibility) -> float:
    if tuple(f.primitive_id for f in fits) != comp.ids:
        raise ValueError("fits and compatibility are not aligned")
    return float(np.dot(comp.probs, [f.loss for f in fits]))


def select(fits: Sequence[FitResult]) -> FitResult:
    """Lowest-loss fit; ties go to the earlier primitive in the vocabulary."""
    if not fits:
        raise ValueError("no fits")
    return min(fits, key=lambda f: (f.loss, VOCABULARY.index(f.primitive_id)))


def record_from_fit(fit: FitResult, p: Primitive, mu, w: float) -> PrimitiveRecord:
    """Place a fit on the canvas of a stroke with point mean ``mu`` and bbox side ``w``.

    In the normalized frame the fit is ``scale * M @ x + offset``; undoing
    the stroke normalization gives ``w_rec = scale * w`` and
    ``t = mu + offset * w / 2``.
    """
    t = fit.params
    tx = mu[0] + fit.offset[0] * w / 2.0
    ty = mu[1] + fit.offset[1] * w / 2.0
    return PrimitiveRecord(p.id, t.theta1, t.sx, t.theta2, float(tx), float(ty), float(fit.scale * w))


def abstract_sketch(sk: Sketch, prims: Sequence[Primitive] | None = None, grid: Grid | None = None,
                    gamma: float = GAMMA, cfg: FitConfig | None = None,
                    kappa: float = KAPPA) -> PrimitiveSketch:
    """Replace every stroke of ``sk`` by its best-fitting primitive."""
    from .primitives import default_primitives, primitive_map

    prims = tuple(prims) if prims is not None else default_primitives()
    pm = primitive_map(prims)
    grid = grid or Grid()
    records, residuals, compat, kept, skipped = [], [], [], [], []
    for k, stroke in enumerate(sk.strokes):
        try:
            ns = normalize_stroke(stroke)
        except DegenerateStrokeError:
            warnings.warn(f"sketch {sk.id}: stroke {k} is degenerate, skipped", stacklevel=2)
            skipped.append(k)
            continue
        fits = fit_all(ns, prims, grid, gamma, cfg)
        best = select(fits)
        records.append(record_from_fit(best, pm[best.primitive_id], ns.mu, ns.w))
        residuals.append(best.loss)
        compat.append(tuple(compatibility(fits, kappa).probs.tolist()))
        kept.append(k)
    return PrimitiveSketch(tuple(records), tuple(residuals), tuple(compat), sk.id, sk.category,
                           tuple(kept), tuple(skipped), "pmn")


def dump_results(results: Sequence[PrimitiveSketch], primitive_ids=VOCABULARY) -> str:
    doc = {"format": "primsketch-records", "version": 1, "primitive_ids": list(primitive_ids),
           "sketches": [r.to_dict() for r in results]}
    return json.dumps(doc, indent=1)


def load_results(text: str) -> list[PrimitiveSketch]:
    doc = json.loads(text)
    if isinstance(doc, dict) and "sketches" in doc:
        items = doc["sketches"]
    elif isinstance(doc, list):
        items = doc
    else:
        items = [doc]
    return [PrimitiveSketch.from_dict(d) for d in items]
