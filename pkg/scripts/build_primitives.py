"""Regenerate src/primsketch/data/primitives.json (canonical primitive set)."""

import json
from pathlib import Path

import numpy as np

VERSION = 1


def _arc(t0, t1, n):
    t = np.linspace(t0, t1, n)
    return np.column_stack([np.cos(t), np.sin(t)])


def raw_shapes():
    return {
        "line": np.array([[-1.0, 0.0], [1.0, 0.0]]),
        "arc": _arc(0.0, np.pi, 13),
        "circle": _arc(0.0, 2 * np.pi, 25),
        "corner": np.array([[-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]]),
        "triangle": np.array([[-1.0, -1.0], [1.0, -1.0], [0.0, 1.0], [-1.0, -1.0]]),
        "square": np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0]]),
        "u_shape": np.vstack([[[-1.0, 1.0]], _arc(np.pi, 2 * np.pi, 9), [[1.0, 1.0]]]),
    }


def main():
    prims = []
    for pid, pts in raw_shapes().items():
        pts = pts - pts.mean(axis=0)
        pts = pts / (np.max(np.ptp(pts, axis=0)) / 2.0)
        pts[np.abs(pts) < 1e-15] = 0.0
        prims.append({"id": pid, "points": pts.tolist()})
    doc = {"format": "primsketch-primitives", "version": VERSION, "primitives": prims}
    out = Path(__file__).resolve().parents[1] / "src" / "primsketch" / "data" / "primitives.json"
    body = ",\n".join("  " + json.dumps(p) for p in prims)
    header = json.dumps({k: v for k, v in doc.items() if k != "primitives"})[:-1]
    out.write_text(header + ', "primitives": [\n' + body + "\n]}\n")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
