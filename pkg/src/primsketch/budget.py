"""Message accounting and budget truncation.

A human message is up to three consecutive stroke points; a primitive
message is one record.  Both encode to 25 bytes: six little-endian float32
values followed by one uint8 (stroke index or primitive index).
"""

from __future__ import annotations

import math
import struct
import warnings
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .matcher import PrimitiveSketch
from .sketch_model import VOCABULARY, Message, Sketch, Stroke, segment_messages

MESSAGE_FORMAT = "<6fB"
MESSAGE_BYTES = struct.calcsize(MESSAGE_FORMAT)
DEFAULT_FRACTIONS = (0.1, 0.2, 0.3)


@dataclass(frozen=True)
class BudgetReport:
    total_messages: int
    kept_messages: int
    budget_fraction: float
    kind: str  # "human" | "primitive"


def encode_human_message(msg: Message) -> bytes:
    vals = np.zeros(6)
    flat = np.asarray(msg.points, dtype=float).ravel()
    vals[:len(flat)] = flat
    if not 0 <= msg.stroke_index <= 255:
        raise ValueError("stroke index does not fit the uint8 message field")
    return struct.pack(MESSAGE_FORMAT, *vals, msg.stroke_index)


def encode_primitive_message(rec) -> bytes:
    return struct.pack(MESSAGE_FORMAT, *rec.values(), VOCABULARY.index(rec.primitive_id))


def encode_messages(x: Sketch | PrimitiveSketch) -> bytes:
    if isinstance(x, PrimitiveSketch):
        return b"".join(encode_primitive_message(r) for r in x.records)
    return b"".join(encode_human_message(m) for m in segment_messages(x))


def count_messages(x: Sketch | PrimitiveSketch) -> int:
    if isinstance(x, PrimitiveSketch):
        if not x.records:
            warnings.warn(f"primitive sketch {x.sketch_id} has no records", stacklevel=2)
        return len(x.records)
    return sum(math.ceil(len(s) / 3) for s in x.strokes)


def kept_count(total: int, budget_fraction: float) -> int:
    if not 0 < budget_fraction <= 1:
        raise ValueError("budget fraction must be in (0, 1]")
    if total == 0:
        return 0
    # guard against 0.3 * 10 == 2.9999999999999996
    return max(1, math.floor(budget_fraction * total + 1e-9))


def truncate(x: Sketch | PrimitiveSketch, budget_fraction: float,
             order: Sequence[int] | None = None):
    """Keep the first ``k`` messages, by default in drawing order.

    ``order`` is an optional ranking (a permutation of message indices) from
    an external selector; the kept messages are still emitted in drawing
    order.  Human strokes are cut at 3-point message boundaries; runs of
    non-adjacent kept messages of one stroke become separate strokes.
    """
    total = count_messages(x)
    k = kept_count(total, budget_fraction)
    if order is None:
        keep = list(range(k))
    else:
        order = list(order)
        if sorted(order) != list(range(total)):
            raise ValueError("order must be a permutation of message indices")
        keep = sorted(order[:k])
    if isinstance(x, PrimitiveSketch):
        sel = lambda seq: tuple(seq[i] for i in keep) if len(seq) == total else seq
        return replace(x, records=sel(x.records), residuals=sel(x.residuals), compat=sel(x.compat),
                       stroke_indices=sel(x.stroke_indices))
    msgs = segment_messages(x)
    strokes, run, prev = [], [], None
    for i in keep:
        m = msgs[i]
        contiguous = prev is not None and prev == i - 1 and msgs[prev].stroke_index == m.stroke_index
        if not contiguous and run:
            strokes.append(np.vstack(run))
            run = []
        run.append(m.points)
        prev = i
    if run:
        strokes.append(np.vstack(run))
    kept = [Stroke(p) for p in strokes if len(p) >= 2]
    if len(kept) < len(strokes):
        warnings.warn("isolated single-point message dropped from truncated geometry", stacklevel=2)
    return Sketch(tuple(kept), id=x.id, category=x.category)


def budget_reports(x: Sketch | PrimitiveSketch, fractions=DEFAULT_FRACTIONS) -> list[BudgetReport]:
    total = count_messages(x)
    kind = "primitive" if isinstance(x, PrimitiveSketch) else "human"
    return [BudgetReport(total, kept_count(total, f), float(f), kind) for f in fractions]


def compression_summary(sk: Sketch, ps: PrimitiveSketch, fractions=DEFAULT_FRACTIONS) -> dict:
    human = count_messages(sk)
    prim = count_messages(ps)
    return {
        "sketch_id": sk.id,
        "human_messages": human,
        "primitive_messages": prim,
        "ratio": prim / human,
        "kept": {f"{f:g}": {"human": kept_count(human, f),
                            "primitive": kept_count(prim, f) if prim else 0}
                 for f in fractions},
    }
