"""Run orchestration, cross-check verdicts, reports and convergence sweeps.

A run evaluates each requested method on each selected component and emits

* ``report.json``: rows ``{component, method, status, value, error, nodes}``,
  cross-check verdicts and the overall verdict, validated against the
  bundled report schema;
* ``traces.csv``: the convergence trace of every row with columns
  ``component, method, level, nodes, value_re, value_im, error``.

Wall times, cache flags and the creation time sit under the ``timing`` key;
the rest of the report is a deterministic function of the scenario and
seed.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from datetime import datetime, timezone
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from . import expr as E
from .cache import ResultCache, cache_key
from .config import RunConfig, load_schema, scene_hash
from .cycles import CycleError, MCSpec, QuadratureSpec
from .koszul import residue_boundary, residue_contour
from .mq import MQError, residue_mq
from .oracles import OracleError, coeff_oracle, jacobian, point_residue_nondegenerate, vafa_sum

__all__ = [
    "REPORT_FORMAT",
    "EXIT_OK",
    "EXIT_CHECK_FAILED",
    "EXIT_CONFIG",
    "EXIT_METHOD",
    "run",
    "sweep",
    "write_report",
    "validate_report",
    "SWEEP_COLUMNS",
    "TRACE_COLUMNS",
]

log = logging.getLogger(__name__)

REPORT_FORMAT = "vresidue-report/1"
EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_METHOD = 0, 1, 2, 3
TRACE_COLUMNS = ("component", "method", "level", "nodes", "value_re", "value_im", "error")
SWEEP_COLUMNS = ("param", "value", "component", "method", "status", "value_re", "value_im", "error",
                 "nodes", "reference_re", "reference_im", "abs_diff_reference")

_DEFAULT_NODES = {1: 32, 2: 24, 3: 12}


class Skip(Exception):
    """A method does not apply to a component."""


# ---------------------------------------------------------------------------
# method settings


def _quadrature(cfg: RunConfig, method: str, n: int, nodes: int = None) -> QuadratureSpec:
    q = dict(cfg.quadrature)
    if nodes is not None:
        q["nodes"] = nodes
        q.pop("max_nodes", None)
        return QuadratureSpec(nodes=nodes, levels=q.get("levels", 2), tol=q.get("tol", 1e-9))
    default = 64 if method == "contour" else _DEFAULT_NODES.get(n, 12)
    return QuadratureSpec(
        nodes=q.get("nodes", default),
        levels=q.get("levels", 2),
        tol=q.get("tol", 1e-9),
        max_nodes=q.get("max_nodes", 2_000_000 if method != "contour" else 400_000),
    )


def _separation(sc, comp) -> float:
    p = np.asarray(comp.point)
    ds = [np.linalg.norm(np.asarray(o.point) - p) for o in sc.point_components()
          if o is not comp and o.chart == comp.chart]
    return min(ds) if ds else math.inf


def _point_radius(sc, comp, given) -> float:
    if given is not None:
        return float(given)
    return min(0.5, 0.4 * _separation(sc, comp))


def _mq_integrator(cfg: RunConfig, n: int, budget: int = None, nodes: int = None):
    kind = cfg.mq.get("integrator", "quadrature" if n == 1 else "mc")
    if budget is not None:
        kind = "mc"
    if kind == "mc":
        return MCSpec(budget=int(budget or cfg.mq.get("budget", 100_000)), seed=cfg.seed)
    if n != 1:
        raise Skip("ball quadrature for the exponential route is implemented for n = 1")
    return QuadratureSpec(nodes=nodes or cfg.quadrature.get("nodes", 64), tol=cfg.quadrature.get("tol", 1e-9))


def _simple_zero(sc, comp):
    """Jacobian of ``s`` at a point component when it is invertible."""
    n = sc.n
    jac = [x for row in jacobian(sc, comp.chart) for x in row]
    J = np.array([complex(v) for v in E.evaluate(jac, np.asarray(comp.point))]).reshape(n, n)
    if abs(np.linalg.det(J)) <= 1e-8:
        return None
    return J


def _component(sc, label):
    return next(z for z in sc.zeros if z.label == label)


# ---------------------------------------------------------------------------
# oracles


def _monomial_exponents(sc):
    if not sc.single_chart:
        return None
    out = []
    for i, si in enumerate(sc.s()):
        if not E.is_polynomial(si):
            return None
        cf = E.polynomial_coefficients(si, sc.n)
        if len(cf) != 1:
            return None
        (m, c), = cf.items()
        if c != 1 or any(k for j, k in enumerate(m) if j != i) or m[i] < 1:
            return None
        out.append(m[i])
    return tuple(out)


def _oracle(sc, comp):
    if comp.kind != "point":
        raise Skip("no analytic oracle for positive-dimensional components")
    a = _monomial_exponents(sc)
    g = sc.g(comp.chart)
    if a is not None and E.is_polynomial(g) and np.allclose(comp.point, 0):
        return coeff_oracle(g, a), "coeff_oracle"
    try:
        if sc.W is not None:
            return vafa_sum(sc, g, [comp.location()]), "vafa_sum"
        return point_residue_nondegenerate(sc, comp), "point_residue_nondegenerate"
    except OracleError as exc:
        raise Skip(str(exc)) from exc


# ---------------------------------------------------------------------------
# evaluation of one row


def _params(cfg: RunConfig, method: str, comp_label: str, overrides: dict) -> dict:
    sc = cfg.scene
    p = {"seed": cfg.seed}
    if method in ("contour", "boundary"):
        p["quadrature"] = dict(cfg.quadrature)
        p["radius"] = cfg.contour_radius if method == "contour" else cfg.boundary_radius
    if method == "mq":
        p["mq"] = dict(cfg.mq)
        p["quadrature"] = dict(cfg.quadrature)
    p.update(overrides)
    p["n"] = sc.n
    return p


def _evaluate(cfg: RunConfig, method: str, label: str, overrides: dict) -> dict:
    """Compute one row; raises Skip when the method does not apply."""
    sc = cfg.scene
    nodes = overrides.get("nodes")
    info = {}
    if method == "mq":
        if not sc.single_chart:
            raise Skip("the exponential route is implemented on single-chart scenes")
        integ = _mq_integrator(cfg, sc.n, overrides.get("budget"), nodes)
        t = overrides.get("t", cfg.mq.get("t", 1.0))
        res = residue_mq(sc, t, integ, convention=cfg.mq.get("convention", "deform"))
        info.update({k: res.info[k] for k in ("t", "radius", "convention") if k in res.info})
        info["integrator"] = "mc" if isinstance(integ, MCSpec) else "quadrature"
    elif method == "oracle":
        value, source = _oracle(sc, _component(sc, label))
        return {"value": complex(value), "error": 0.0, "nodes": 0, "converged": True,
                "info": {"oracle": source}, "trace": []}
    else:
        comp = _component(sc, label)
        if method == "contour":
            if comp.kind != "point":
                raise Skip("torus contours need an isolated point")
            r = _point_radius(sc, comp, overrides.get("radius", cfg.contour_radius))
            q = _quadrature(cfg, "contour", sc.n, nodes)
            lin = _simple_zero(sc, comp)
            if lin is not None:
                # radius in w = J (z - c) coordinates
                r *= float(np.min(np.linalg.svd(lin, compute_uv=False)))
            for _ in range(8):
                try:
                    res = residue_contour(sc, q=q, radii=r, component=comp, linearize=lin is not None)
                    break
                except CycleError:
                    r /= 2
            else:
                raise CycleError(f"no torus around {label} avoids the zeros of every s_i")
            info["torus"] = "linearized" if lin is not None else "coordinate"
        else:
            if comp.kind == "point":
                r = _point_radius(sc, comp, overrides.get("eps", cfg.boundary_radius))
            else:
                r = float(overrides.get("eps", cfg.boundary_radius or 0.05))
            res = residue_boundary(sc, comp, r, _quadrature(cfg, "boundary", sc.n, nodes))
        info["radius"] = float(r)
    return {
        "value": complex(res.value),
        "error": float(res.error),
        "nodes": int(res.nodes),
        "converged": bool(res.converged),
        "info": info,
        "trace": [[int(lv), int(nn), complex(v), float(e)] for lv, nn, v, e in res.trace],
    }


def _encode(row: dict) -> dict:
    out = dict(row)
    if out.get("value") is not None:
        v = complex(out["value"])
        out["value"] = [v.real, v.imag]
    out["trace"] = [[lv, nn, [complex(v).real, complex(v).imag], e] for lv, nn, v, e in row.get("trace", [])]
    return out


def _decode(row: dict) -> dict:
    out = dict(row)
    if out.get("value") is not None:
        out["value"] = complex(*out["value"])
    out["trace"] = [[lv, nn, complex(*v), e] for lv, nn, v, e in row.get("trace", [])]
    return out


# ---------------------------------------------------------------------------
# verdicts


def _tolerance(a: dict, b: dict, floor: float) -> float:
    mc = any(r.get("info", {}).get("integrator") == "mc" for r in (a, b))
    if mc:
        return max(floor, 3 * math.hypot(a["error"], b["error"]))
    return max(floor, a["error"] + b["error"])


def _verdicts(rows: list, floor: float, compact: bool) -> list:
    ok = [(i, r) for i, r in enumerate(rows) if r["status"] == "ok"]
    out = []
    by_comp = {}
    for i, r in ok:
        by_comp.setdefault(r["component"], []).append((i, r))
    for comp in sorted(by_comp, key=lambda c: (c == "total", c)):
        group = by_comp[comp]
        for x in range(len(group)):
            for y in range(x + 1, len(group)):
                (i, a), (j, b) = group[x], group[y]
                d = abs(complex(*a["value"]) - complex(*b["value"]))
                tol = _tolerance(a, b, floor)
                out.append({"component": comp, "pair": [a["method"], b["method"]], "rows": [i, j],
                            "delta": d, "tolerance": tol, "passed": bool(d <= tol)})
        if compact and comp == "total":
            for i, a in group:
                d = abs(complex(*a["value"]))
                tol = max(floor, a["error"] if a.get("info", {}).get("integrator") != "mc" else 3 * a["error"])
                out.append({"component": "total", "pair": [a["method"], "vanishing-total"], "rows": [i],
                            "delta": d, "tolerance": tol, "passed": bool(d <= tol)})
    return out


# ---------------------------------------------------------------------------
# run


def run(cfg: RunConfig, cache: ResultCache = None) -> dict:
    """Evaluate every requested method; returns the report (not yet written)."""
    sc = cfg.scene
    cache = cache or ResultCache(__version__, enabled=False)
    shash = scene_hash(sc)
    rows, timing = [], []
    plan = []
    for method in cfg.methods:
        if method == "mq":
            plan.append((method, "total"))
        else:
            plan.extend((method, c) for c in cfg.components)
    for method, label in plan:
        params = _params(cfg, method, label, {})
        key = cache_key(shash, method, label, params, __version__)
        t0 = time.perf_counter()
        cached = cache.get(key)
        if cached is not None:
            row = _decode(cached)
        else:
            try:
                row = _evaluate(cfg, method, label, {})
                row["status"] = "ok"
            except Skip as exc:
                row = {"status": "skipped", "message": str(exc)}
            except (MQError, CycleError, OracleError, ArithmeticError, ValueError) as exc:
                log.warning("%s on %s failed: %s", method, label, exc)
                row = {"status": "error", "message": f"{type(exc).__name__}: {exc}"}
            if row["status"] != "error":
                cache.put(key, _encode({**row, "component": label, "method": method}))
        row.update(component=label, method=method)
        rows.append(row)
        timing.append({"wall_time": round(time.perf_counter() - t0, 6), "cached": cached is not None})
    # totals over all declared components
    labels = [z.label for z in sc.zeros]
    if set(cfg.components) == set(labels) and len(labels) > 1:
        for method in cfg.methods:
            if method == "mq":
                continue
            parts = [r for r in rows if r["method"] == method and r["component"] in labels]
            if parts and all(r["status"] == "ok" for r in parts):
                rows.append({
                    "component": "total", "method": method, "status": "ok",
                    "value": sum(r["value"] for r in parts), "error": sum(r["error"] for r in parts),
                    "nodes": sum(r["nodes"] for r in parts), "converged": all(r["converged"] for r in parts),
                    "info": {"summed": len(parts)}, "trace": [],
                })
                timing.append({"wall_time": 0.0, "cached": False})
    elif len(labels) == 1:
        for r in rows:
            if r["method"] == "mq":
                r["component"] = labels[0]
    enc = [_encode(r) for r in rows]
    compact = sc.kind == "projective-plane"
    verdicts = _verdicts(enc, cfg.tolerance, compact)
    errors = [r for r in enc if r["status"] == "error"]
    passed = not errors and all(v["passed"] for v in verdicts)
    code = EXIT_METHOD if errors else (EXIT_OK if passed else EXIT_CHECK_FAILED)
    report = {
        "format": REPORT_FORMAT,
        "tool_version": __version__,
        "scenario": {"name": sc.name, "path": cfg.path, "hash": shash, "kind": sc.kind, "n": sc.n,
                     "components": labels},
        "settings": cfg.settings(),
        "rows": [{k: v for k, v in r.items() if k != "trace"} for r in enc],
        "verdicts": verdicts,
        "passed": bool(passed),
        "exit_code": code,
        "timing": {"created": datetime.now(timezone.utc).isoformat(timespec="seconds"), "rows": timing},
    }
    report["_traces"] = [(r["component"], r["method"], r.get("trace", [])) for r in enc]
    return report


def validate_report(report: dict) -> None:
    """Raise :class:`jsonschema.ValidationError` unless the report matches the bundled schema."""
    jsonschema.validate({k: v for k, v in report.items() if not k.startswith("_")}, load_schema("report"))


def traces_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for comp, method, trace in report.get("_traces", []):
        for lv, nn, v, e in trace:
            w.writerow([comp, method, lv, nn, repr(v[0]), repr(v[1]), repr(e)])
    return buf.getvalue()


def write_report(report: dict, out_dir) -> tuple:
    """Validate and write ``report.json`` and ``traces.csv``; returns both paths."""
    validate_report(report)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    pj, pc = out / "report.json", out / "traces.csv"
    body = {k: v for k, v in report.items() if not k.startswith("_")}
    pj.write_text(json.dumps(body, indent=2, sort_keys=True) + "\n")
    pc.write_text(traces_csv(report))
    return pj, pc


# ---------------------------------------------------------------------------
# sweep

_APPLIES = {"nodes": ("contour", "boundary", "mq"), "budget": ("mq",), "eps": ("boundary",), "t": ("mq",)}


class SweepError(ValueError):
    """Parameter does not apply to any enabled method."""


def sweep(cfg: RunConfig, param: str, values) -> list:
    """One row per (value, component, method) with residue and error.

    ``nodes`` sets the finest quadrature count (two levels, no adaptive
    refinement), ``budget`` the Monte Carlo budget, ``eps`` the boundary
    radius and ``t`` the exponential-route parameter.  Rows carry the
    oracle value as reference when one exists.
    """
    if param not in _APPLIES:
        raise SweepError(f"unknown sweep parameter {param!r}; choose from {sorted(_APPLIES)}")
    methods = [m for m in cfg.methods if m in _APPLIES[param]]
    if param == "nodes" and "mq" in methods and cfg.scene.n != 1:
        methods.remove("mq")
    if not methods:
        raise SweepError(f"parameter {param!r} applies to none of the enabled methods {list(cfg.methods)}")
    sc = cfg.scene
    refs = {}
    for z in sc.zeros:
        try:
            refs[z.label] = _oracle(sc, z)[0]
        except Skip:
            pass
    total_ref = sum(refs.values()) if len(refs) == len(sc.zeros) and refs else None
    out = []
    for v in values:
        for method in methods:
            labels = ["total"] if method == "mq" else list(cfg.components)
            for label in labels:
                ov = {param: v}
                ref = total_ref if label == "total" else refs.get(label)
                if method == "mq" and len(sc.zeros) == 1:
                    ref = refs.get(sc.zeros[0].label)
                try:
                    row = _evaluate(cfg, method, label, ov)
                    status = "ok"
                except Skip as exc:
                    row, status = {"message": str(exc)}, "skipped"
                except (MQError, CycleError, OracleError, ArithmeticError, ValueError) as exc:
                    row, status = {"message": str(exc)}, "error"
                val = row.get("value")
                out.append({
                    "param": param,
                    "value": v,
                    "component": label,
                    "method": method,
                    "status": status,
                    "value_re": None if val is None else val.real,
                    "value_im": None if val is None else val.imag,
                    "error": row.get("error"),
                    "nodes": row.get("nodes"),
                    "reference_re": None if ref is None else complex(ref).real,
                    "reference_im": None if ref is None else complex(ref).imag,
                    "abs_diff_reference": None if ref is None or val is None else abs(val - ref),
                })
    return out


def sweep_csv(rows: list) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if r[k] is None else (repr(r[k]) if isinstance(r[k], float) else r[k]))
                    for k in SWEEP_COLUMNS})
    return buf.getvalue()
