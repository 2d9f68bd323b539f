"""Command line entry point.

Exit status: 0 on success, 1 when a report assertion fails, 2 on usage errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from .config import load_config, make_spec
from .errors import LamplighterError, SchemaError
from .exact import cover_dp, hitting_times, mixing_profile, mixing_time_exact, spectrum
from .exact.profile import DEFAULT_EPS
from .experiments import EXPERIMENTS, run_experiment
from .graphs import build_graph, lazy_kernel, write_edge_list
from .montecarlo import (batch_means, returns_to_origin, sample_trajectories, tv_lower_zero_count,
                         tv_upper_cover, uncovered_mgf_mc)
from .report import load_report, summary_lines, write_curve_csv, write_outputs
from .wreath import wreath_kernel

log = logging.getLogger("lamplighter_lab")


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    return [int(s) for s in text.split(",") if s.strip()]


def _str_list(text: str) -> list[str]:
    return [s.strip() for s in text.split(";") if s.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lamplighter-lab", description="Random walks on lamplighter graphs.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("graph", help="build a base graph and print or export it")
    g.add_argument("--graph", required=True, help="e.g. cycle:6, torus:16,2, regular:64,4,1")
    g.add_argument("--edges", help="write the edge list here ('-' for stdout)")

    e = sub.add_parser("exact", help="exact computations on a small kernel")
    e.add_argument("what", choices=["spectrum", "hitting", "profile", "cover"])
    e.add_argument("--graph", required=True)
    e.add_argument("--wreath", action="store_true", help="work on the lamplighter graph over the base")
    e.add_argument("--eps", type=float, default=DEFAULT_EPS)
    e.add_argument("--metric", choices=["tv", "sep", "unif"], default="tv")
    e.add_argument("--csv", help="write the table here instead of stdout")

    m = sub.add_parser("mc", help="Monte Carlo estimates on the base walk")
    m.add_argument("what", choices=["cover", "mgf", "tv-lower", "tv-upper", "returns"])
    m.add_argument("--graph", help="base graph (not used by 'returns')")
    m.add_argument("--seed", type=int, required=True)
    m.add_argument("--N", type=int, default=10_000)
    m.add_argument("--t", type=int, help="time for mgf / tv bounds, horizon for returns")
    m.add_argument("--k", type=int, default=0, help="base mixing allowance for tv-upper")
    m.add_argument("--K", type=float, default=1.0, help="zero-count threshold multiplier for tv-lower")
    m.add_argument("--d", type=int, default=3, help="dimension for returns")
    m.add_argument("--workers", type=int, default=1)

    x = sub.add_parser("experiment", help="run a named experiment and write its report")
    x.add_argument("name", nargs="?", choices=sorted(EXPERIMENTS))
    x.add_argument("--config", help="flat key = value file; flags override it")
    x.add_argument("--seed", type=int)
    x.add_argument("--out", required=True)
    x.add_argument("--N", type=int)
    x.add_argument("--sizes", type=_int_list, help="comma-separated sizes")
    x.add_argument("--graphs", type=_str_list, help="semicolon-separated graph specs")
    x.add_argument("--eps", type=float)
    x.add_argument("--workers", type=int, default=1)
    x.add_argument("--no-figures", action="store_true", help="skip matplotlib rendering")

    r = sub.add_parser("report", help="validate a report and print its summary")
    r.add_argument("path", help="report.json or the directory holding it")
    return p


def _emit_rows(header, rows, path=None):
    fh = open(path, "w", newline="") if path else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    finally:
        if path:
            fh.close()


def _cmd_graph(a) -> int:
    g = build_graph(a.graph)
    print(f"{g.tag}: n={g.n} degree={g.degree} transitive={g.transitive} connected={g.is_connected()}")
    if a.edges == "-":
        write_edge_list(g, sys.stdout)
    elif a.edges:
        with open(a.edges, "w") as fh:
            write_edge_list(g, fh)
    return 0


def _cmd_exact(a) -> int:
    base = lazy_kernel(build_graph(a.graph))
    k = wreath_kernel(base) if a.wreath else base
    if a.what == "spectrum":
        res = spectrum(k)
        _emit_rows(["index", "eigenvalue"], [(i, repr(float(v))) for i, v in enumerate(res.eigenvalues)], a.csv)
        log.info("lambda2=%.12g T_rel=%.12g", res.lambda2, res.t_rel)
    elif a.what == "hitting":
        h = hitting_times(k)
        _emit_rows(["x", *range(k.n)], [(x, *map(repr, map(float, row))) for x, row in enumerate(h.matrix)],
                   a.csv)
        log.info("t*=%.12g", h.t_star)
    elif a.what == "profile":
        t, prof = mixing_time_exact(k, a.eps, a.metric)
        cols = {"t": list(range(prof.horizon + 1)), "tv": prof.tv, "sep": prof.sep, "unif": prof.unif}
        if a.csv:
            write_curve_csv(Path(a.csv), cols)
        else:
            _emit_rows(list(cols), zip(*cols.values()))
        print(f"mixing time ({a.metric}, eps={a.eps:.6g}) = {t}", file=sys.stderr)
    else:
        if a.wreath:
            raise UsageError("--wreath: cover DP runs on the base graph")
        dp = cover_dp(base)
        cols = {"t": list(range(dp.horizon + 1)), "mgf": dp.mgf_curve(), "cover_cdf": dp.cover_cdf()}
        if a.csv:
            write_curve_csv(Path(a.csv), cols)
        else:
            _emit_rows(list(cols), zip(*cols.values()))
        print(f"E cover = {dp.expected_cover:.12g}", file=sys.stderr)
    return 0


def _cmd_mc(a) -> int:
    if a.what == "returns":
        if a.t is None:
            raise UsageError("--t: horizon required")
        est = returns_to_origin(a.d, a.t, a.N, a.seed, workers=a.workers)
    else:
        if not a.graph:
            raise UsageError("--graph: required")
        base = lazy_kernel(build_graph(a.graph))
        if a.what == "cover":
            batch = sample_trajectories(base, 0, N=a.N, master_seed=a.seed, workers=a.workers)
            est = batch_means(batch.cover_times)
        else:
            if a.t is None:
                raise UsageError("--t: time required")
            if a.what == "mgf":
                est = uncovered_mgf_mc(base, 0, a.t, a.N, a.seed, workers=a.workers)
            elif a.what == "tv-lower":
                est = tv_lower_zero_count(base, a.t, a.N, a.K, a.seed, workers=a.workers)
            else:
                prof = mixing_profile(base, a.k + 1)
                est = tv_upper_cover(base, a.t, a.k, a.N, a.seed, prof, workers=a.workers)
    print(json.dumps(est.as_dict()))
    return 0


def _cmd_experiment(a) -> int:
    config = load_config(a.config) if a.config else {}
    overrides = {"name": a.name, "seed": a.seed, "N": a.N, "sizes": a.sizes, "graphs": a.graphs,
                 "eps": a.eps, "out": a.out, "workers": a.workers}
    if overrides["seed"] is None and "seed" not in config:
        raise UsageError("--seed: a master seed is required")
    if overrides["name"] is None and "name" not in config:
        raise UsageError("name: choose an experiment or give one in --config")
    spec = make_spec(config, overrides)
    rep = run_experiment(spec)
    path = write_outputs(rep, a.out, figures=not a.no_figures)
    for line in summary_lines(rep.to_dict()):
        print(line)
    print(f"wrote {path}")
    return 0 if rep.passed else 1


def _cmd_report(a) -> int:
    path = Path(a.path)
    if path.is_dir():
        path = path / "report.json"
    data = load_report(path)
    for line in summary_lines(data):
        print(line)
    return 0 if data["passed"] else 1


COMMANDS = {"graph": _cmd_graph, "exact": _cmd_exact, "mc": _cmd_mc, "experiment": _cmd_experiment,
            "report": _cmd_report}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[a.command](a)
    except UsageError as exc:
        print(f"{parser.prog} {a.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, SchemaError, FileNotFoundError) as exc:
        # InvalidSpec, WrongFamily and friends are ValueErrors: bad input, not a failed run
        print(f"{parser.prog} {a.command}: error: {exc}", file=sys.stderr)
        return 2
    except LamplighterError as exc:
        print(f"{parser.prog} {a.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
