"""Regenerate src/primsketch/data/quickdraw_sample.ndjson.

A synthetic stand-in for a Quickdraw "simplified" download: hand-drawn
looking sketches of nine categories, wobbled with smooth noise, scaled
into a 0..255 box, simplified with RDP (epsilon 2) and rounded to ints,
which is how the public simplified files are prepared.
"""

import json
from pathlib import Path

import numpy as np
from skimage.measure import approximate_polygon

SEED = 20240611
PER_CATEGORY = {"cat": 6, "chair": 5, "face": 6, "fire truck": 5, "mosquito": 5,
                "owl": 6, "pig": 6, "purse": 5, "shoe": 6}
RDP_EPS = 2.0


def arc(c, r, a0, a1, n=40, ry=None):
    t = np.linspace(a0, a1, n)
    return np.column_stack([c[0] + r * np.cos(t), c[1] + (ry or r) * np.sin(t)])


def circle(c, r, ry=None, start=0.0):
    return arc(c, r, start, start + 2 * np.pi, 48, ry)


def poly(*pts, n=12):
    pts = np.asarray(pts, float)
    segs = [np.linspace(a, b, n, endpoint=False) for a, b in zip(pts[:-1], pts[1:])]
    return np.vstack(segs + [pts[-1:]])


def line(a, b):
    return poly(a, b)


def rect(x0, y0, x1, y1):
    return poly((x0, y0), (x1, y0), (x1, y1), (x0, y1), (x0, y0))


def face(rng):
    r = rng.uniform(38, 48)
    ex = rng.uniform(14, 18)
    return [circle((50, 50), r, start=rng.uniform(-2, 0)),
            circle((50 - ex, 40), rng.uniform(4, 7)),
            circle((50 + ex, 40), rng.uniform(4, 7)),
            arc((50, 55), rng.uniform(16, 22), 0.3, np.pi - 0.3),
            line((50, 45), (50, 56))]


def cat(rng):
    r = rng.uniform(30, 36)
    s = [circle((50, 55), r, ry=r * rng.uniform(0.85, 1.0), start=rng.uniform(-2, 0)),
         poly((28, 33), (26, 8), (44, 24)),
         poly((56, 24), (74, 8), (72, 33)),
         circle((39, 50), 4), circle((61, 50), 4),
         arc((45, 62), 5, 0.2, np.pi - 0.2), arc((55, 62), 5, 0.2, np.pi - 0.2)]
    for dy in (-3, 4):
        s.append(line((34, 62 + dy), (8, 58 + 2 * dy)))
        s.append(line((66, 62 + dy), (92, 58 + 2 * dy)))
    return s


def pig(rng):
    r = rng.uniform(34, 40)
    return [circle((50, 52), r * 1.2, ry=r, start=rng.uniform(-2, 0)),
            circle((50, 56), 12, ry=9), circle((46, 56), 2.5), circle((54, 56), 2.5),
            circle((36, 42), 3.5), circle((64, 42), 3.5),
            poly((24, 28), (20, 10), (36, 20)), poly((64, 20), (80, 10), (76, 28)),
            arc((96, 50), 6, -np.pi, np.pi * 0.8)]


def owl(rng):
    return [circle((50, 55), rng.uniform(30, 34), ry=42, start=rng.uniform(-2, 0)),
            circle((38, 40), 10), circle((62, 40), 10),
            circle((38, 40), 3), circle((62, 40), 3),
            poly((46, 50), (50, 58), (54, 50), (46, 50)),
            arc((32, 68), 12, np.pi * 0.6, np.pi * 1.4),
            arc((68, 68), 12, -np.pi * 0.4, np.pi * 0.4),
            poly((30, 20), (34, 10), (40, 17)), poly((60, 17), (66, 10), (70, 20))]


def chair(rng):
    h = rng.uniform(36, 44)
    return [rect(30, 10, 70, 10 + h), rect(26, 10 + h, 74, 18 + h),
            line((30, 18 + h), (30, 95)), line((70, 18 + h), (70, 95)),
            arc((50, 10 + h * 0.5), 12, np.pi * 1.1, np.pi * 1.9)]


def fire_truck(rng):
    return [rect(10, 35, 75, 70), poly((75, 70), (75, 45), (92, 50), (96, 70), (75, 70)),
            circle((28, 74), 9), circle((80, 74), 9),
            circle((28, 74), 3), circle((80, 74), 3),
            poly((15, 30), (65, 18)), poly((18, 34), (68, 22)),
            circle((84, 38), 4)]


def mosquito(rng):
    return [circle((50, 55), 22, ry=8, start=rng.uniform(-2, 0)),
            circle((22, 55), 7),
            circle((55, 35), 14, ry=8), circle((62, 30), 12, ry=7),
            line((16, 55), (2, 60)),
            poly((42, 60), (36, 72), (30, 86)), poly((52, 62), (52, 76), (48, 90)),
            poly((62, 60), (70, 74), (76, 88)),
            arc((20, 48), 4, np.pi, 2 * np.pi)]


def purse(rng):
    return [poly((15, 40), (85, 40), (92, 90), (8, 90), (15, 40)),
            arc((50, 40), rng.uniform(22, 28), np.pi, 2 * np.pi),
            circle((50, 55), 5),
            line((15, 48), (85, 48))]


def shoe(rng):
    return [poly((10, 20), (10, 70), (92, 70), (92, 60), (60, 50), (40, 20)),
            arc((50, 70), 45, 0.05, np.pi - 0.05, ry=6),
            circle((30, 34), 3), circle((36, 44), 3),
            line((26, 38), (44, 34)), line((30, 48), (50, 42)),
            arc((25, 20), 15, 0, np.pi, ry=6)]


TEMPLATES = {"cat": cat, "chair": chair, "face": face, "fire truck": fire_truck,
             "mosquito": mosquito, "owl": owl, "pig": pig, "purse": purse, "shoe": shoe}


def wobble(pts, rng, rel=0.02):
    """Smooth hand tremor: low-frequency sinusoids scaled to the stroke length."""
    length = np.sum(np.hypot(*np.diff(pts, axis=0).T))
    t = np.linspace(0, 1, len(pts))[:, None]
    out = pts + rng.normal(0, 0.1, pts.shape)
    for _ in range(2):
        f = rng.uniform(0.3, 1.5)
        out += rel * length * rng.normal(size=2) * np.sin(2 * np.pi * f * t + rng.uniform(0, 2 * np.pi))
    return out


def draw(category, rng):
    strokes = TEMPLATES[category](rng)
    # whole-sketch pose jitter
    th = rng.normal(0, 0.08)
    rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    aniso = np.diag(rng.uniform(0.9, 1.1, 2))
    strokes = [wobble(s @ (rot @ aniso).T, rng) for s in strokes]
    allp = np.vstack(strokes)
    lo, side = allp.min(axis=0), np.ptp(allp, axis=0).max()
    out = []
    for s in strokes:
        q = (s - lo) / side * 255.0
        q = approximate_polygon(q, RDP_EPS)
        q = np.rint(q).astype(int)
        keep = np.r_[True, np.any(q[1:] != q[:-1], axis=1)]
        q = q[keep]
        if len(q) >= 2:
            out.append([q[:, 0].tolist(), q[:, 1].tolist()])
    return out


def main():
    rng = np.random.default_rng(SEED)
    lines = []
    key = 5000000000000000
    for cat_name, n in PER_CATEGORY.items():
        for _ in range(n):
            key += int(rng.integers(1, 10**9))
            lines.append(json.dumps({"word": cat_name, "countrycode": "ZZ", "timestamp": "2017-03-01 00:00:00.00000 UTC",
                                     "recognized": True, "key_id": str(key), "drawing": draw(cat_name, rng)},
                                    separators=(",", ":")))
    out = Path(__file__).resolve().parents[1] / "src" / "primsketch" / "data" / "quickdraw_sample.ndjson"
    out.write_text("\n".join(lines) + "\n")
    print(f"wrote {len(lines)} sketches to {out}")


if __name__ == "__main__":
    main()
