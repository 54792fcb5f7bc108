"""Primitive-usage analytics and run reports."""

from __future__ import annotations

import csv
import io
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Sequence

from .matcher import PrimitiveSketch
from .sketch_model import VOCABULARY

OVERALL = "__all__"


@dataclass(frozen=True)
class UsageStats:
    """Percentage of records per primitive id, overall and per category."""

    overall: dict[str, float]
    per_category: dict[str, dict[str, float]]
    counts: dict[str, int]

    def ranking(self, category: str | None = None) -> list[str]:
        table = self.overall if category is None else self.per_category[category]
        return sorted(VOCABULARY, key=lambda i: (-table[i], VOCABULARY.index(i)))

    def to_dict(self) -> dict:
        return {"overall": self.overall, "per_category": self.per_category, "counts": self.counts}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["category", "records", *VOCABULARY])
        rows = [(OVERALL, self.overall)] + sorted(self.per_category.items())
        for cat, table in rows:
            w.writerow([cat, self.counts[cat], *(f"{table[i]:.2f}" for i in VOCABULARY)])
        return buf.getvalue()


def _percentages(c: Counter) -> dict[str, float]:
    total = sum(c.values())
    return {i: (100.0 * c[i] / total if total else 0.0) for i in VOCABULARY}


def usage_stats(results: Sequence[PrimitiveSketch]) -> UsageStats:
    overall = Counter()
    per_cat: dict[str, Counter] = defaultdict(Counter)
    for ps in results:
        ids = [r.primitive_id for r in ps.records]
        overall.update(ids)
        per_cat[ps.category or "unknown"].update(ids)
    counts = {OVERALL: sum(overall.values())}
    counts.update({k: sum(v.values()) for k, v in per_cat.items()})
    return UsageStats(_percentages(overall),
                      {k: _percentages(v) for k, v in sorted(per_cat.items())}, counts)


@dataclass
class RunReport:
    method: str
    settings: dict
    entries: list[dict] = field(default_factory=list)
    timing: dict[str, float] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def add(self, ps: PrimitiveSketch, compression: dict, seconds: float) -> None:
        self.entries.append({
            "sketch_id": ps.sketch_id,
            "category": ps.category,
            "residuals": list(ps.residuals),
            "mean_residual": sum(ps.residuals) / len(ps.residuals) if ps.residuals else None,
            "skipped_strokes": list(ps.skipped),
            "compression": compression,
            "seconds": seconds,
        })

    def to_dict(self) -> dict:
        ratios = [e["compression"]["ratio"] for e in self.entries]
        return {
            "method": self.method,
            "settings": self.settings,
            "notes": self.notes,
            "timing": self.timing,
            "mean_compression_ratio": sum(ratios) / len(ratios) if ratios else None,
            "sketches": self.entries,
        }
