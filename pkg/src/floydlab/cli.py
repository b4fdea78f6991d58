"""Command-line interface: ``floydlab <subcommand> [options]``.

Every subcommand writes a JSON report holding its configuration, library
versions, timings and results.  Subcommands with tabular data also write a
CSV file, either through ``--emit-plot`` or by giving ``--out`` a ``.csv``
name (the JSON report then goes next to it with a ``.json`` suffix).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import platform
import sys
import time
import warnings
from fractions import Fraction

from . import __version__
from .cayley import PathWord, exact_growth_rate, growth_rate, sphere_counts
from .errors import FloydLabError
from .floyd import (FloydParams, boundary_distance, chain_graph, expand_letters,
                    exhaustive_chain_min, fiber_class, floyd_distance, make_ray,
                    shortcut_distance, visual_distance)
from .geometry import (TransitionParams, components, is_tight, is_transitional_path,
                       truncate)
from .group import IDENTITY, load_group
from .measure import (DivergenceWarning, TreeMeasure, ahlfors_fit, box_dimension,
                      covering_sum, shadow_ratio_stats)
from .sampling import random_element, random_ray, rng_from
from .trees import build_iterated_tree, critical_exponent, full_tree

SUBCOMMANDS = ("growth", "floyd-dist", "shortcut-dist", "transitional", "tight-check",
               "tree-build", "ps-measure", "shadow-stats", "dim-estimate", "visual-compare",
               "bench")


# ----------------------------------------------------------------------
# serialization

def _clean(obj):
    """JSON-safe copy: Fractions and numpy scalars become floats, NaN/inf become null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, bool) or obj is None or isinstance(obj, (str, int)):
        return obj
    if isinstance(obj, (float, Fraction)) or hasattr(obj, "__float__"):
        x = float(obj)
        return x if math.isfinite(x) else None
    return str(obj)


def dumps(report: dict) -> str:
    return json.dumps(_clean(report), indent=2) + "\n"


def csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_clean(v) if not isinstance(v, str) else v for v in r])
    return buf.getvalue()


def _write(path: str, text: str):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


# ----------------------------------------------------------------------
# helpers

def _params(args) -> FloydParams:
    group = args.group_spec
    base = group.parse(args.o) if getattr(args, "o", None) else IDENTITY
    return FloydParams(Fraction(args.lam), base, args.radius)


def _read_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise FloydLabError(f"cannot read {path!r}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise FloydLabError(f"{path}:{exc.lineno}: {exc.msg}") from None


def _read_paths(group, path: str) -> list:
    """Paths from a text file: one per line, ``letters`` or ``start : letters``."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise FloydLabError(f"cannot read {path!r}: {exc}") from None
    out = []
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        start, letters = IDENTITY, line
        if ":" in line:
            head, letters = line.split(":", 1)
            try:
                start = group.parse(head)
            except FloydLabError as exc:
                raise FloydLabError(f"{path}:{n}: {exc}") from None
        try:
            out.append(PathWord.build(group, start, expand_letters(group, letters)))
        except FloydLabError as exc:
            raise FloydLabError(f"{path}:{n}: {exc}") from None
    if not out:
        raise FloydLabError(f"{path}: no paths found")
    return out


def _rays(args) -> list:
    group = args.group_spec
    if args.rays:
        data = _read_json(args.rays)
        return [make_ray(group, r.get("prefix", ""), r["period"]) for r in data]
    rng = rng_from(args.seed)
    rays = []
    for _ in range(args.random):
        rays.append(random_ray(group, rng, args.prefix_len, args.period_len))
    return list(dict.fromkeys(rays))


def _tree(args):
    group = args.group_spec
    if getattr(args, "tree", "iterated") == "full":
        return full_tree(group, args.levels)
    return build_iterated_tree(group, args.L, args.delta, args.C, args.levels, args.eps, args.R)


# ----------------------------------------------------------------------
# subcommands; each returns (results, csv_columns, csv_rows)

def cmd_growth(args):
    group = args.group_spec
    rep = growth_rate(group, args.n_max)
    lo, hi = exact_growth_rate(group)
    res = {"estimate": rep.estimate, "lower": rep.lower, "upper": rep.upper,
           "exact_root_bracket": [lo, hi]}
    return res, ("n", "sphere", "ball", "log_ball_over_n"), rep.rows


def cmd_floyd_dist(args):
    group = args.group_spec
    params = _params(args)
    if args.pairs:
        pairs = [(group.parse(x), group.parse(y)) for x, y in _read_json(args.pairs)]
    else:
        rng = rng_from(args.seed)
        pairs = [(random_element(group, rng, args.length), random_element(group, rng, args.length))
                 for _ in range(args.random)]
    out = []
    for x, y in pairs:
        iv = floyd_distance(group, x, y, params, method=args.method)
        d = iv.as_dict()
        out.append({"x": group.format(x), "y": group.format(y), "lower": d["lower"],
                    "upper": d["upper"], "radius": d["radius"], "escaped_ball": d["escaped_ball"]})
    rows = [(p["x"], p["y"], p["lower"], p["upper"]) for p in out]
    return {"pairs": out}, ("x", "y", "lower", "upper"), rows


def cmd_shortcut_dist(args):
    group = args.group_spec
    params = _params(args)
    rays = _rays(args)
    graph = chain_graph(group, rays, params)
    out, violations, mismatches = [], 0, 0
    check = len(rays) <= args.exhaustive_max
    for i in range(len(rays)):
        for j in range(i + 1, len(rays)):
            sc = shortcut_distance(group, rays[i], rays[j], rays, params, graph)
            fl = graph.floyd[i][j]
            if sc.upper > fl.upper:
                violations += 1
            row = {"xi": rays[i].label(), "eta": rays[j].label(),
                   "shortcut_lower": sc.lower, "shortcut_upper": sc.upper,
                   "floyd_lower": fl.lower, "floyd_upper": fl.upper,
                   "same_fiber": graph.classes[i] == graph.classes[j]
                   and graph.classes[i].is_parabolic}
            if check:
                ex = exhaustive_chain_min(graph.weights, i, j)
                row["exhaustive_chain"] = ex
                mismatches += ex != sc.upper
            out.append(row)
    res = {"rays": [r.label() for r in rays],
           "fibers": [c.kind for c in graph.classes],
           "pairs": out, "shortcut_above_floyd": violations,
           "exhaustive_checked": check, "exhaustive_mismatches": mismatches}
    rows = [(p["xi"], p["eta"], p["shortcut_upper"], p["floyd_upper"]) for p in out]
    return res, ("xi", "eta", "shortcut", "floyd"), rows


def cmd_transitional(args):
    group = args.group_spec
    p = TransitionParams(args.eps, args.R, args.L)
    out = []
    for path in _read_paths(group, args.path):
        rep = is_transitional_path(group, path, p)
        out.append({"start": group.format(path.start), "letters": " ".join(path.letters),
                    "transitional_path": rep.ok, "max_gap": rep.max_gap,
                    "verdicts": [{"vertex": group.format(v),
                                  "kind": d.kind,
                                  "coset": None if d.coset is None else
                                  {"rep": group.format(d.coset.rep), "factor": d.coset.factor}}
                                 for v, d in zip(path.vertices, rep.verdicts)]})
    return {"paths": out}, None, None


def cmd_tight_check(args):
    group = args.group_spec
    out = []
    for path in _read_paths(group, args.path):
        trunc = truncate(group, path, args.K, args.eps)
        comps = components(group, path, args.eps, args.K)
        out.append({"letters": " ".join(path.letters),
                    "tight": is_tight(group, path, args.c, args.l),
                    "components": [{"start": a, "end": b, "coset_rep": group.format(c.rep),
                                    "factor": c.factor} for a, b, c in comps],
                    "truncation": " ".join(trunc.letters),
                    "truncation_tight": is_tight(group, trunc, args.c, args.l)})
    return {"paths": out}, None, None


def cmd_tree_build(args):
    tree = _tree(args)
    res = tree.as_dict(adjacency_levels=args.adjacency_levels)
    res["audit"] = tree.audit(sample=args.audit_sample, seed=args.seed)
    ce = critical_exponent(tree)
    res["critical_exponent"] = {k: v for k, v in ce.as_dict().items()
                                if k not in ("counts", "partial_sums")}
    res["growth_rate"] = exact_growth_rate(tree.group)[0]
    rows = [(i, n) for i, n in enumerate(tree.level_sizes())]
    return res, ("level", "nodes"), rows


def cmd_ps_measure(args):
    tree = _tree(args)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DivergenceWarning)
        m = TreeMeasure(tree, args.s)
        if m.s <= m.delta:
            warnings.warn(f"s = {m.s:.6f} <= delta_T = {m.delta:.6f}", DivergenceWarning)
    group = tree.group
    rows = []
    for g, t, letters in tree.iter_nodes(1):
        rows.append((group.format(g), m.prefix_mass(letters)))
    rng = rng_from(args.seed)
    sample = [group.format(g) for g, _ in m.sample_leaves(rng, args.samples)]
    res = {"s": m.s, "delta_hat": m.delta, "depth": m.depth, "partition": m.Z,
           "level1_masses": [{"node": a, "mass": b} for a, b in rows],
           "sample_leaves": sample, "warnings": [str(w.message) for w in caught]}
    return res, ("node", "mass"), rows


def cmd_shadow_stats(args):
    tree = _tree(args)
    out = []
    for depth in args.depths:
        m = TreeMeasure(tree, None, depth)
        st = shadow_ratio_stats(m, args.r, (args.lo, min(args.hi, depth)))
        st["depth"] = depth
        st["per_level"] = {str(k): list(v) for k, v in st["per_level"].items()}
        out.append(st)
    rows = [(o["depth"], o["min"], o["max"], o["ratio"]) for o in out]
    return {"runs": out}, ("depth", "min", "max", "ratio"), rows


def cmd_dim_estimate(args):
    group = args.group_spec
    lam = Fraction(args.lam)
    tree = _tree(args)
    m = TreeMeasure(tree)
    fit = ahlfors_fit(m, points=args.points, seed=args.seed, lam=lam)
    cover = {}
    for s in args.cover_s:
        sums = [covering_sum(group, s, n, lam) for n in range(args.cover_n[0], args.cover_n[1] + 1)]
        cover[str(s)] = {"sums": sums,
                         "decreasing": all(b < a for a, b in zip(sums, sums[1:])),
                         "increasing": all(b > a for a, b in zip(sums, sums[1:]))}
    box = box_dimension(group, lam, range(args.cover_n[0], args.cover_n[1] + 1))
    res = {"ahlfors": fit.as_dict(), "covering_sums": cover, "box_dimension": box.as_dict(),
           "delta_hat": m.delta, "s": m.s,
           "predicted": exact_growth_rate(group)[0] / -math.log(float(lam))}
    rows = []
    for (t, mean_log, n), r in zip(fit.rows, fit.residuals or [0.0] * len(fit.rows)):
        rows.append((t, n, math.exp(mean_log), r))
    return res, ("scale", "count", "mass", "residual"), rows


def cmd_visual_compare(args):
    group = args.group_spec
    params = FloydParams(Fraction(args.lam), IDENTITY, args.radius)
    a = args.a if args.a is not None else -math.log(float(params.lam))
    rng = rng_from(args.seed)
    out = []
    while len(out) < args.pairs:
        xi = random_ray(group, rng, args.prefix_len, args.period_len)
        eta = random_ray(group, rng, args.prefix_len, args.period_len)
        if xi == eta or fiber_class(group, xi) == fiber_class(group, eta):
            continue
        iv = boundary_distance(group, xi, eta, params)
        nu = visual_distance(group, xi, eta, a)
        out.append({"xi": xi.label(), "eta": eta.label(), "visual": nu,
                    "ratio_lower": float(iv.lower) / nu, "ratio_upper": float(iv.upper) / nu})
    lo = min(p["ratio_lower"] for p in out)
    hi = max(p["ratio_upper"] for p in out)
    slack = max(p["ratio_upper"] - p["ratio_lower"] for p in out)
    res = {"a": a, "ratio_min": lo, "ratio_max": hi, "max_slack": slack, "pairs": out}
    rows = [(p["xi"], p["eta"], p["ratio_lower"], p["ratio_upper"]) for p in out]
    return res, ("xi", "eta", "ratio_lower", "ratio_upper"), rows


def cmd_bench(args):
    group = args.group_spec
    rng = rng_from(args.seed)
    params = FloydParams(Fraction(args.lam), IDENTITY, 12)
    timings = {}
    t0 = time.perf_counter()
    sphere_counts(group, 40)
    timings["sphere_counts_40"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    for _ in range(50):
        x, y = random_element(group, rng, 8), random_element(group, rng, 8)
        floyd_distance(group, x, y, params)
    timings["floyd_distance_x50"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    tree = build_iterated_tree(group, 6, 1, 1, 3)
    timings["tree_build_L6"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    critical_exponent(tree)
    timings["critical_exponent"] = time.perf_counter() - t0
    return {"operations": timings}, None, None


COMMANDS = {
    "growth": cmd_growth, "floyd-dist": cmd_floyd_dist, "shortcut-dist": cmd_shortcut_dist,
    "transitional": cmd_transitional, "tight-check": cmd_tight_check,
    "tree-build": cmd_tree_build, "ps-measure": cmd_ps_measure,
    "shadow-stats": cmd_shadow_stats, "dim-estimate": cmd_dim_estimate,
    "visual-compare": cmd_visual_compare, "bench": cmd_bench,
}


# ----------------------------------------------------------------------
# argument parsing

def _common(suppress: bool = False) -> argparse.ArgumentParser:
    """Global options.  The subcommand copies suppress their defaults so a
    flag given before the subcommand name is not overwritten."""
    def d(value):
        return argparse.SUPPRESS if suppress else value

    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--group", default=d("F2"), help="builtin name (F2, G2, G3, Z) or TOML file")
    g.add_argument("--lambda", dest="lam", default=d("1/2"), help="Floyd parameter in (0, 1)")
    g.add_argument("--seed", type=int, default=d(0))
    g.add_argument("--threads", type=int, default=d(1),
                   help="worker cap (results do not depend on it)")
    g.add_argument("--out", default=d(None), help="report path (.json, or .csv for the table)")
    g.add_argument("--emit-plot", default=d(None), help="CSV path for the plot series")
    g.add_argument("--no-timings", action="store_true", default=d(False),
                   help="omit timings for byte-stable output")
    return p


def _tree_args(p, L=8, levels=3):
    p.add_argument("--L", type=int, default=L)
    p.add_argument("--delta", type=float, default=1)
    p.add_argument("--C", type=int, default=1)
    p.add_argument("--levels", type=int, default=levels)
    p.add_argument("--eps", type=int, default=1)
    p.add_argument("--R", type=int, default=3)
    p.add_argument("--tree", choices=("iterated", "full"), default="iterated")


def _ray_args(p):
    p.add_argument("--rays", help="JSON list of {prefix, period} rays")
    p.add_argument("--random", type=int, default=8, help="number of random rays otherwise")
    p.add_argument("--prefix-len", type=int, default=2)
    p.add_argument("--period-len", type=int, default=2)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="floydlab", parents=[_common()],
                                     description="Floyd metrics, transitional trees and "
                                                 "dimension estimates on free products.")
    parser.add_argument("--version", action="version", version=f"floydlab {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="subcommand")

    def add(name, help_text):
        return sub.add_parser(name, parents=[_common(suppress=True)], help=help_text)

    p = add("growth", "sphere and ball counts with the growth rate")
    p.add_argument("--n-max", type=int, default=40)

    p = add("floyd-dist", "certified Floyd distances between elements")
    p.add_argument("--o", default="e", help="basepoint word")
    p.add_argument("--radius", type=int, default=12)
    p.add_argument("--pairs", help="JSON list of [x, y] word pairs")
    p.add_argument("--random", type=int, default=10)
    p.add_argument("--length", type=int, default=6)
    p.add_argument("--method", choices=("pieces", "ball"), default="pieces")

    p = add("shortcut-dist", "shortcut distances on a ray sample")
    p.add_argument("--o", default="e")
    p.add_argument("--radius", type=int, default=12)
    p.add_argument("--exhaustive-max", type=int, default=12)
    _ray_args(p)

    p = add("transitional", "deep/transitional verdicts along paths")
    p.add_argument("--path", required=True)
    p.add_argument("--eps", type=int, default=1)
    p.add_argument("--R", type=int, default=3)
    p.add_argument("--L", type=int, default=8)

    p = add("tight-check", "tightness and K-truncation of paths")
    p.add_argument("--path", required=True)
    p.add_argument("--eps", type=int, default=1)
    p.add_argument("--K", type=int, default=4)
    p.add_argument("--c", type=float, default=1)
    p.add_argument("--l", type=float, default=4)

    p = add("tree-build", "iterated transitional tree with audit")
    _tree_args(p)
    p.add_argument("--adjacency-levels", type=int, default=2)
    p.add_argument("--audit-sample", type=int, default=64)

    p = add("ps-measure", "leaf measure on a tree")
    _tree_args(p)
    p.add_argument("--s", type=float)
    p.add_argument("--samples", type=int, default=10)

    p = add("shadow-stats", "shadow ratio band across depths")
    _tree_args(p, levels=6)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--lo", type=int, default=2)
    p.add_argument("--hi", type=int, default=5)
    p.add_argument("--depths", type=int, nargs="+", default=[5, 6])

    p = add("dim-estimate", "Ahlfors fit, covering sums and box dimension")
    _tree_args(p, levels=6)
    p.add_argument("--points", type=int, default=6)
    p.add_argument("--cover-s", type=float, nargs="+", default=[1.3, 1.8])
    p.add_argument("--cover-n", type=int, nargs=2, default=[6, 14])

    p = add("visual-compare", "Floyd against visual distance on boundary pairs")
    p.add_argument("--a", type=float, help="visual parameter (default -log lambda)")
    p.add_argument("--radius", type=int, default=20)
    p.add_argument("--pairs", type=int, default=100)
    p.add_argument("--prefix-len", type=int, default=3)
    p.add_argument("--period-len", type=int, default=2)

    add("bench", "time core operations")
    return parser


def _versions() -> dict:
    import numpy
    return {"floydlab": __version__, "python": platform.python_version(),
            "numpy": numpy.__version__}


def run(args) -> tuple:
    """Run a parsed command: (report, csv columns or None, csv rows)."""
    args.group_spec = load_group(args.group)
    t0 = time.perf_counter()
    results, columns, rows = COMMANDS[args.command](args)
    elapsed = time.perf_counter() - t0
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("group_spec",)}
    report = {"command": args.command, "config": config, "versions": _versions(),
              "results": results}
    if not args.no_timings:
        report["timings"] = {"total_seconds": elapsed}
    return report, columns, rows


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_usage(sys.stderr)
        return 2
    try:
        report, columns, rows = run(args)
    except (FloydLabError, OSError, ValueError, ZeroDivisionError) as exc:
        print(f"floydlab {args.command}: error: {exc}", file=sys.stderr)
        return 1
    text = dumps(report)
    table = csv_text(columns, rows) if columns else None
    out = args.out
    if out and out.endswith(".csv"):
        if table is None:
            print(f"floydlab {args.command}: error: no table output for this subcommand",
                  file=sys.stderr)
            return 1
        _write(out, table)
        _write(os.path.splitext(out)[0] + ".json", text)
    elif out:
        _write(out, text)
    else:
        sys.stdout.write(text)
    if args.emit_plot:
        if table is None:
            print(f"floydlab {args.command}: error: no table output for this subcommand",
                  file=sys.stderr)
            return 1
        _write(args.emit_plot, table)
    return 0


if __name__ == "__main__":
    sys.exit(main())
