"""SVG output and matplotlib report figures."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .affine import reconstruct
from .matcher import PrimitiveSketch
from .sketch_model import VOCABULARY, Sketch

# fixed id -> colour legend
PRIMITIVE_COLORS = {
    "arc": "#e6194b",
    "circle": "#3cb44b",
    "line": "#4363d8",
    "corner": "#f58231",
    "triangle": "#911eb4",
    "square": "#42d4f4",
    "u_shape": "#f032e6",
}
HUMAN_COLOR = "#000000"


def _fmt(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _path_d(points: np.ndarray) -> str:
    head, *rest = points
    return "M" + _fmt(head[0]) + " " + _fmt(head[1]) + "".join(
        " L" + _fmt(x) + " " + _fmt(y) for x, y in rest)


def render_svg(x: Sketch | PrimitiveSketch, prims=None, stroke_width: float = 2.0,
               padding: float = 0.05) -> str:
    """Deterministic SVG: one ``<path>`` per stroke or primitive record."""
    if isinstance(x, PrimitiveSketch):
        sk = reconstruct(x.records, prims)
        classes = [r.primitive_id for r in x.records]
        colors = [PRIMITIVE_COLORS[c] for c in classes]
        title = x.sketch_id
    else:
        sk = x
        classes = ["stroke"] * len(sk.strokes)
        colors = [HUMAN_COLOR] * len(sk.strokes)
        title = x.id
    allpts = np.vstack([s.points for s in sk.strokes])
    lo, hi = allpts.min(axis=0), allpts.max(axis=0)
    pad = padding * max(float(np.max(hi - lo)), 1e-9)
    lo, size = lo - pad, (hi - lo) + 2 * pad
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{_fmt(lo[0])} {_fmt(lo[1])} '
           f'{_fmt(size[0])} {_fmt(size[1])}">']
    if title is not None:
        out.append(f"<title>{escape(str(title))}</title>")
    for s, cls, col in zip(sk.strokes, classes, colors):
        out.append(f'<path class="{cls}" d="{_path_d(s.points)}" fill="none" stroke="{col}" '
                   f'stroke-width="{_fmt(stroke_width)}" stroke-linecap="round" stroke-linejoin="round"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _mpl():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _draw(ax, sk: Sketch, colors):
    for s, c in zip(sk.strokes, colors):
        ax.plot(s.points[:, 0], s.points[:, 1], color=c, lw=1.5, solid_capstyle="round")
    ax.set_aspect("equal")
    ax.invert_yaxis()
    ax.set_xticks([])
    ax.set_yticks([])


def plot_abstraction(sk: Sketch, ps: PrimitiveSketch, path, prims=None) -> None:
    """Original sketch next to its primitive reconstruction."""
    plt = _mpl()
    fig, (a, b) = plt.subplots(1, 2, figsize=(6, 3))
    _draw(a, sk, [HUMAN_COLOR] * len(sk.strokes))
    a.set_title(f"human ({len(sk.strokes)} strokes)", fontsize=9)
    if ps.records:
        _draw(b, reconstruct(ps.records, prims), [PRIMITIVE_COLORS[r.primitive_id] for r in ps.records])
    b.set_title(f"{ps.method} ({len(ps.records)} primitives)", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def plot_usage(stats, path) -> None:
    """Bar chart of primitive usage (%) overall and per category."""
    plt = _mpl()
    cats = list(stats.per_category)
    rows = [("all", stats.overall)] + [(c, stats.per_category[c]) for c in cats]
    fig, ax = plt.subplots(figsize=(max(6, 1.1 * len(rows) + 2), 3.5))
    width = 0.8 / len(VOCABULARY)
    xs = np.arange(len(rows))
    for j, pid in enumerate(VOCABULARY):
        ax.bar(xs + (j - 3) * width, [t[pid] for _, t in rows], width,
               color=PRIMITIVE_COLORS[pid], label=pid)
    ax.set_xticks(xs)
    ax.set_xticklabels([r for r, _ in rows], rotation=30, ha="right")
    ax.set_ylabel("usage (%)")
    ax.legend(fontsize=7, ncol=4)
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def plot_budget(summaries: Sequence[dict], path) -> None:
    """Human vs primitive message counts per sketch."""
    plt = _mpl()
    h = [s["human_messages"] for s in summaries]
    p = [s["primitive_messages"] for s in summaries]
    fig, ax = plt.subplots(figsize=(4, 4))
    ax.scatter(h, p, s=12, color="#4363d8")
    top = max(h + p + [1])
    ax.plot([0, top], [0, top], color="0.6", lw=0.8, ls="--")
    ax.plot([0, top], [0, 0.7 * top], color="#e6194b", lw=0.8, ls=":", label="ratio 0.7")
    ax.set_xlabel("human messages")
    ax.set_ylabel("primitive messages")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def write_svgs(items, out_dir, prims=None) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, x in enumerate(items):
        sid = (x.sketch_id if isinstance(x, PrimitiveSketch) else x.id) or f"sketch{i}"
        p = out_dir / f"{i:04d}_{_safe(sid)}.svg"
        p.write_text(render_svg(x, prims))
        paths.append(p)
    return paths


def _safe(s: str) -> str:
    return "".join(c if c.isalnum() or c in "-_" else "_" for c in str(s))[:60]
