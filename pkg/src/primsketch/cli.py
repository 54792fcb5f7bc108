"""Command-line front end.

Subcommands: ``abstract``, ``render``, ``budget``, ``stats``, ``fit-debug``.
Exit codes: 0 ok, 1 input error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import asdict
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import budget as budget_mod
from .distance_field import GAMMA, Grid, field, write_field
from .fitter import FitConfig, anchor_of, fit_all, transformed_primitive
from .matcher import KAPPA, PrimitiveSketch, abstract_sketch, compatibility, dump_results, load_results
from .primitives import default_primitives
from .render import plot_abstraction, plot_budget, plot_usage, write_svgs
from .report import RunReport, usage_stats
from .sketch_model import SketchParseError, normalize_stroke, parse_ndjson, parse_stroke3
from .sw_baseline import sw_abstract

JOBS_ENV = "PRIMSKETCH_JOBS"


def _env_jobs() -> int:
    try:
        return max(1, int(os.environ.get(JOBS_ENV, "1")))
    except ValueError:
        return 1


class InputError(Exception):
    pass


def read_sketches(path: str):
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror or e}") from None
    try:
        if p.suffix == ".json":
            doc = json.loads(text)
            # a single stroke-3 sketch is a list of rows; several are a list of those
            if doc and isinstance(doc[0][0], (int, float)):
                doc = [doc]
            return [parse_stroke3(rows, id=f"{p.stem}{i}") for i, rows in enumerate(doc)]
        return parse_ndjson(text, strict=False)
    except SketchParseError as e:
        raise InputError(f"{path}: {e}") from None
    except (json.JSONDecodeError, TypeError, IndexError) as e:
        raise InputError(f"{path}: not a stroke-3 JSON array ({e})") from None


def read_records(path: str) -> list[PrimitiveSketch]:
    try:
        return load_results(Path(path).read_text())
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror or e}") from None
    except (json.JSONDecodeError, KeyError, ValueError) as e:
        raise InputError(f"{path}: invalid records file ({e})") from None


def fit_config(args) -> FitConfig:
    overrides = {}
    if getattr(args, "config", None):
        try:
            overrides.update(json.loads(Path(args.config).read_text()))
        except OSError as e:
            raise InputError(f"cannot read {args.config}: {e.strerror or e}") from None
        except json.JSONDecodeError as e:
            raise InputError(f"{args.config}: invalid JSON ({e})") from None
    for flag, key in (("coarse_steps", "coarse_theta_steps"), ("refine_iters", "max_refine_iters"),
                      ("top_k", "refine_top_k")):
        if getattr(args, flag, None) is not None:
            overrides[key] = getattr(args, flag)
    try:
        return FitConfig.from_dict(overrides)
    except (TypeError, ValueError) as e:
        raise InputError(f"fit config: {e}") from None


def _abstract_one(job):
    sk, method, n, gamma, cfg, kappa = job
    t0 = time.perf_counter()
    if method == "sw":
        ps = sw_abstract(sk, Grid(n), gamma)
    else:
        ps = abstract_sketch(sk, None, Grid(n), gamma, cfg, kappa)
    return ps, time.perf_counter() - t0


def run_abstract(sketches, method="pmn", grid_n=64, gamma=GAMMA, cfg=None, kappa=KAPPA, jobs=1):
    """Library entry behind ``abstract``: results in input order plus per-sketch seconds."""
    cfg = cfg or FitConfig()
    work = [(sk, method, grid_n, gamma, cfg, kappa) for sk in sketches]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            out = list(ex.map(_abstract_one, work))
    else:
        out = [_abstract_one(w) for w in work]
    return [o[0] for o in out], [o[1] for o in out]


def cmd_abstract(args) -> int:
    t0 = time.perf_counter()
    sketches = read_sketches(args.input)
    cfg = fit_config(args)
    t_parse = time.perf_counter() - t0
    results, secs = run_abstract(sketches, args.method, args.grid, args.gamma, cfg, args.kappa, args.jobs)
    t_fit = time.perf_counter() - t0 - t_parse
    Path(args.out).write_text(dump_results(results))
    report = RunReport(args.method, {"grid": args.grid, "gamma": args.gamma, "kappa": args.kappa,
                                     "fit": asdict(cfg)})
    if args.method == "sw":
        report.notes.append("baseline fits one line or arc per stroke; strokes are not split")
    for sk, ps, s in zip(sketches, results, secs):
        report.add(ps, budget_mod.compression_summary(sk, ps) if ps.records else
                   {"ratio": 0.0, "human_messages": budget_mod.count_messages(sk), "primitive_messages": 0}, s)
    t1 = time.perf_counter()
    if args.svg:
        write_svgs(results, args.svg)
    if args.figures:
        fig_dir = Path(args.figures)
        fig_dir.mkdir(parents=True, exist_ok=True)
        for i, (sk, ps) in enumerate(zip(sketches, results)):
            plot_abstraction(sk, ps, fig_dir / f"{i:04d}_abstraction.png")
    report.timing = {"parse": t_parse, "fit": t_fit, "render": time.perf_counter() - t1}
    if args.report:
        Path(args.report).write_text(json.dumps(report.to_dict(), indent=1))
    print(f"abstracted {len(results)} sketches ({sum(len(r.records) for r in results)} records) "
          f"-> {args.out}")
    return 0


def cmd_render(args) -> int:
    if Path(args.input).suffix in (".ndjson", ".json") and not args.records:
        items = read_sketches(args.input)
    else:
        items = read_records(args.records or args.input)
    paths = write_svgs(items, args.svg)
    print(f"wrote {len(paths)} SVG files to {args.svg}")
    return 0


def _fractions(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad fraction list {text!r}") from None
    if not all(0 < v <= 1 for v in vals):
        raise argparse.ArgumentTypeError("fractions must lie in (0, 1]")
    return vals


def budget_table(sketches, results, fractions):
    """Rows of (sketch_id, kind, total, kept per fraction...) for human and primitive sketches."""
    by_id = {r.sketch_id: r for r in results}
    rows = []
    for sk in sketches:
        rows.append([sk.id, "human", budget_mod.count_messages(sk),
                     *(r.kept_messages for r in budget_mod.budget_reports(sk, fractions))])
        ps = by_id.get(sk.id)
        if ps is not None:
            rows.append([sk.id, "primitive", budget_mod.count_messages(ps),
                         *(r.kept_messages for r in budget_mod.budget_reports(ps, fractions))])
    return rows


def cmd_budget(args) -> int:
    sketches = read_sketches(args.input)
    results = read_records(args.records) if args.records else []
    rows = budget_table(sketches, results, args.fractions)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["sketch_id", "kind", "total", *(f"kept@{f:g}" for f in args.fractions)])
    w.writerows(rows)
    if results:
        by_id = {r.sketch_id: r for r in results}
        sums = [budget_mod.compression_summary(sk, by_id[sk.id], args.fractions)
                for sk in sketches if sk.id in by_id and by_id[sk.id].records]
        if sums:
            mean = sum(s["ratio"] for s in sums) / len(sums)
            print(f"# mean primitive/human message ratio: {mean:.4f} over {len(sums)} sketches")
            if args.figure:
                plot_budget(sums, args.figure)
    return 0


def cmd_stats(args) -> int:
    results = read_records(args.records)
    stats = usage_stats(results)
    text = json.dumps(stats.to_dict(), indent=1)
    if args.out:
        Path(args.out).write_text(text)
    if args.csv:
        Path(args.csv).write_text(stats.to_csv())
    if args.figure:
        plot_usage(stats, args.figure)
    sys.stdout.write(stats.to_csv())
    return 0


def cmd_fit_debug(args) -> int:
    sketches = read_sketches(args.input)
    try:
        stroke = sketches[args.sketch].strokes[args.stroke]
    except IndexError:
        raise InputError(f"no stroke {args.stroke} in sketch {args.sketch}") from None
    cfg = fit_config(args)
    grid = Grid(args.grid)
    ns = normalize_stroke(stroke)
    prims = default_primitives()
    fits = fit_all(ns, prims, grid, args.gamma, cfg)
    anchor = anchor_of(ns.points)
    comp = compatibility(fits, args.kappa)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_field(out / "target.field", field(ns.points, grid, args.gamma))
    rows = []
    for p, f, prob in zip(prims, fits, comp.probs):
        poly, _, _ = transformed_primitive(p, [[f.params.theta1, f.params.sx, f.params.theta2]], anchor)
        write_field(out / f"{p.id}.field", field(poly[0], grid, args.gamma))
        rows.append({"id": p.id, "loss": f.loss, "compat": float(prob), "evals": f.evals,
                     "theta1": f.params.theta1, "sx": f.params.sx, "theta2": f.params.theta2})
    (out / "losses.json").write_text(json.dumps({"grid": args.grid, "gamma": args.gamma,
                                                 "candidates": rows}, indent=1))
    for r in rows:
        print(f"{r['id']:>9}  loss={r['loss']:.6f}  compat={r['compat']:.4f}  evals={r['evals']}")
    return 0


def _add_fit_flags(p):
    p.add_argument("--grid", type=int, default=64, help="grid resolution per axis")
    p.add_argument("--gamma", type=float, default=GAMMA)
    p.add_argument("--kappa", type=float, default=KAPPA)
    p.add_argument("--coarse-steps", type=int, dest="coarse_steps")
    p.add_argument("--refine-iters", type=int, dest="refine_iters")
    p.add_argument("--top-k", type=int, dest="top_k")
    p.add_argument("--config", help="JSON file with FitConfig overrides")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="primsketch", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("abstract", help="replace strokes by fitted primitives")
    p.add_argument("--input", required=True, help="NDJSON sketches or stroke-3 JSON")
    p.add_argument("--out", required=True, help="records JSON output")
    p.add_argument("--svg", help="directory for one SVG per sketch")
    p.add_argument("--figures", help="directory for matplotlib comparison figures")
    p.add_argument("--report", help="run report JSON output")
    p.add_argument("--method", choices=("pmn", "sw"), default="pmn")
    p.add_argument("--jobs", type=int, default=_env_jobs(),
                   help=f"worker processes (default from ${JOBS_ENV}, else 1)")
    _add_fit_flags(p)
    p.set_defaults(func=cmd_abstract)

    p = sub.add_parser("render", help="write SVGs for sketches or records")
    p.add_argument("--input", required=True)
    p.add_argument("--records", help="records JSON (renders primitives instead of --input)")
    p.add_argument("--svg", required=True)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("budget", help="message counts kept at budget fractions")
    p.add_argument("--input", required=True)
    p.add_argument("--records")
    p.add_argument("--fractions", type=_fractions, default=budget_mod.DEFAULT_FRACTIONS)
    p.add_argument("--figure", help="PNG scatter of human vs primitive message counts")
    p.set_defaults(func=cmd_budget)

    p = sub.add_parser("stats", help="primitive usage percentages")
    p.add_argument("--records", required=True)
    p.add_argument("--out", help="JSON output")
    p.add_argument("--csv", help="CSV output")
    p.add_argument("--figure", help="PNG bar chart")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("fit-debug", help="dump fields and per-primitive losses for one stroke")
    p.add_argument("--input", required=True)
    p.add_argument("--sketch", type=int, default=0)
    p.add_argument("--stroke", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    _add_fit_flags(p)
    p.set_defaults(func=cmd_fit_debug)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as e:
        print(f"primsketch: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
