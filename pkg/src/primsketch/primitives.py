"""The shipped 7-primitive vocabulary, loaded from ``data/primitives.json``."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

from .sketch_model import VOCABULARY, Primitive

PRIMITIVES_VERSION = 1


def load_primitive_doc(text: str) -> tuple[Primitive, ...]:
    doc = json.loads(text)
    if doc.get("format") != "primsketch-primitives":
        raise ValueError("not a primitive-set document")
    if doc.get("version") != PRIMITIVES_VERSION:
        raise ValueError(f"unsupported primitive-set version {doc.get('version')!r}")
    prims = tuple(Primitive(p["id"], p["points"]) for p in doc["primitives"])
    return tuple(sorted(prims, key=lambda p: p.index))


@lru_cache(maxsize=1)
def default_primitives() -> tuple[Primitive, ...]:
    """All seven canonical primitives in vocabulary order."""
    text = resources.files("primsketch").joinpath("data/primitives.json").read_text()
    prims = load_primitive_doc(text)
    assert tuple(p.id for p in prims) == VOCABULARY
    return prims


def primitive_map(prims=None) -> dict[str, Primitive]:
    return {p.id: p for p in (prims if prims is not None else default_primitives())}


def subset(ids) -> tuple[Primitive, ...]:
    """Sub-vocabulary in vocabulary order; unknown ids raise ``KeyError``."""
    ids = set(ids)
    unknown = ids - set(VOCABULARY)
    if unknown:
        raise KeyError(f"unknown primitive ids: {sorted(unknown)}")
    m = primitive_map()
    return tuple(m[i] for i in VOCABULARY if i in ids)
