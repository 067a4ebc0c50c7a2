"""Command-line front end: ``run``, ``check``, ``sweep`` and ``cache gc``.

Exit codes: 0 when every cross-check passes, 1 when a cross-check fails,
2 for an invalid scenario or argument, 3 when a method fails (the partial
report is still written).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .cache import ResultCache
from .config import METHODS, ConfigError, bundled_scenarios, load_scenario
from .report import EXIT_CONFIG, EXIT_OK, SweepError, run, sweep, sweep_csv, write_report

__all__ = ["main", "build_parser"]

log = logging.getLogger("vresidue")


def _number(text: str):
    try:
        v = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc
    return int(v) if v.is_integer() and "." not in text and "e" not in text.lower() else v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vresidue", description="Classical and virtual residues by contour, "
                                "Koszul boundary and exponential integrals.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="evaluate a scenario and write report.json and traces.csv")
    r.add_argument("scenario", help="scenario YAML file or the name of a bundled scenario")
    r.add_argument("--method", action="append", choices=METHODS, help="method to run (repeatable)")
    r.add_argument("--seed", type=int, help="Monte Carlo seed")
    r.add_argument("--out", default="vresidue-out", help="output directory")
    r.add_argument("--nodes", type=int, help="finest quadrature node count")
    r.add_argument("--tol", type=float, help="quadrature tolerance")
    r.add_argument("--budget", type=int, help="Monte Carlo budget")
    r.add_argument("--tolerance", type=float, help="cross-check tolerance floor")
    r.add_argument("--no-cache", action="store_true", help="bypass the result cache")

    c = sub.add_parser("check", help="run a property suite")
    c.add_argument("suite", choices=["algebra", "koszul", "mq", "oracles", "all"])
    c.add_argument("--json", help="also write the results to this JSON file")

    s = sub.add_parser("sweep", help="convergence study over one parameter, written as CSV")
    s.add_argument("scenario")
    s.add_argument("--param", required=True, choices=["nodes", "budget", "eps", "t"])
    s.add_argument("--values", required=True, nargs="+", type=_number)
    s.add_argument("--method", action="append", choices=METHODS)
    s.add_argument("--seed", type=int)
    s.add_argument("--out", help="CSV file (stdout when omitted)")

    g = sub.add_parser("cache", help="result cache maintenance")
    gs = g.add_subparsers(dest="cache_command", required=True)
    gs.add_parser("gc", help="drop entries of other tool versions and corrupt entries")

    sub.add_parser("scenarios", help="list the bundled scenarios")
    return p


def _config(args):
    cfg = load_scenario(args.scenario)
    if getattr(args, "method", None):
        cfg = replace(cfg, methods=tuple(dict.fromkeys(args.method)))
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, seed=args.seed)
    q = dict(cfg.quadrature)
    if getattr(args, "nodes", None):
        q["nodes"] = args.nodes
    if getattr(args, "tol", None):
        q["tol"] = args.tol
    mq = dict(cfg.mq)
    if getattr(args, "budget", None):
        mq["budget"] = args.budget
    cfg = replace(cfg, quadrature=q, mq=mq)
    if getattr(args, "tolerance", None):
        cfg = replace(cfg, tolerance=args.tolerance)
    return cfg


def _cmd_run(args) -> int:
    cfg = _config(args)
    cache = ResultCache(__version__, enabled=not args.no_cache)
    report = run(cfg, cache)
    pj, pc = write_report(report, args.out)
    for row in report["rows"]:
        if row["status"] == "ok":
            v = complex(*row["value"])
            print(f"{row['component']:>12} {row['method']:>9}  {v.real:+.12g} {v.imag:+.3g}i  "
                  f"err {row['error']:.2g}")
        else:
            print(f"{row['component']:>12} {row['method']:>9}  {row['status']}: {row['message']}")
    for v in report["verdicts"]:
        tag = "PASS" if v["passed"] else "FAIL"
        print(f"[{tag}] {v['component']} {v['pair'][0]} vs {v['pair'][1]}: "
              f"|delta| {v['delta']:.3g} <= {v['tolerance']:.3g}")
    print(f"cache: {cache.hits} hits, {cache.misses} misses; wrote {pj} and {pc}")
    return report["exit_code"]


def _cmd_check(args) -> int:
    from .checks import run_suite

    results = []
    for r in run_suite(args.suite):
        print(r.line())
        results.append(r)
    if args.json:
        Path(args.json).write_text(json.dumps([r.as_dict() for r in results], indent=2) + "\n")
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if not failed else 1


def _cmd_sweep(args) -> int:
    cfg = _config(args)
    rows = sweep(cfg, args.param, args.values)
    text = sweep_csv(rows)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 3 if any(r["status"] == "error" for r in rows) else EXIT_OK


def _cmd_cache(args) -> int:
    info = ResultCache(__version__).gc()
    print(json.dumps(info, indent=2))
    return EXIT_OK


def _cmd_scenarios(args) -> int:
    for name, path in sorted(bundled_scenarios().items()):
        print(f"{name:28} {path}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {"run": _cmd_run, "check": _cmd_check, "sweep": _cmd_sweep, "cache": _cmd_cache,
                "scenarios": _cmd_scenarios}
    try:
        return handlers[args.command](args)
    except (ConfigError, SweepError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
