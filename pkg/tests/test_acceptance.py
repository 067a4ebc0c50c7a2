"""Acceptance criteria, one test each; every test records a PASS/FAIL line."""
import time

import pytest

from vresidue import checks
from vresidue.cache import ResultCache
from vresidue.config import load_scenario
from vresidue.cycles import QuadratureSpec
from vresidue.koszul import residue_boundary, residue_contour
from vresidue.mq import residue_mq
from vresidue.oracles import newton_critical_points, point_residue_nondegenerate, vafa_sum
from vresidue.report import run
from vresidue.scene import lg_scene, p2_scene


def timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def test_criterion_01_cauchy_calibration(record_criterion):
    (ok, d), dt = timed(checks.check_cauchy)
    passed = ok and d["error"] <= 1e-10 and dt < 1.0
    record_criterion(1, "Cauchy calibration", passed, f"|Res - 1| = {d['error']:.2g}", dt)
    assert passed


def test_criterion_02_monomial_suite(record_criterion):
    r, dt = timed(checks.monomial_suite)
    passed = r["passed"] and r["tuples"] == 92 and r["weights"] == 20 and dt < 60
    record_criterion(2, "monomial suite vs coefficient oracle", passed,
                     f"{r['tuples']} tuples x {r['weights']} weights, contour err {r['max_contour_error']:.2g}, "
                     f"boundary err {r['max_boundary_error']:.2g}", dt)
    assert passed, r["failures"][:5]


def test_criterion_03_koszul_ladder(record_criterion):
    (ok, d), dt = timed(checks.check_ladder)
    record_criterion(3, "Koszul ladder identities", ok,
                     f"{d['scenes']} scene charts, {d['non_exact']} non-exact, max defect {d['max_pointwise']:.2g}", dt)
    assert ok, d["failures"]


@pytest.mark.slow
def test_criterion_04_radius_independence(record_criterion):
    r, dt = timed(checks.monomial_independence)
    record_criterion(4, "radius independence at r, r/2, r/4", r["passed"],
                     f"{r['tuples']} tuples, max gap {r['max_deviation']:.2g}, "
                     f"max combined error {r['max_combined_error']:.2g}", dt)
    assert r["passed"], r["failures"][:5]


def test_criterion_05_mq_equals_contour(record_criterion):
    (ok, d), dt = timed(checks.check_mq_vs_contour)
    passed = ok and dt < 300
    worst = max(row["diff"] / row["tol"] for row in d["rows"])
    record_criterion(5, "exponential residue equals contour residue", passed,
                     f"{len(d['rows'])} scenes, worst diff/tol {worst:.2g}", dt)
    assert passed, d["rows"]


def test_criterion_06_t_independence(record_criterion):
    (ok, d), dt = timed(checks.check_t_independence)
    worst = max(row["max_deviation"] / row["combined"] for row in d["rows"])
    record_criterion(6, "exponential residue constant in t", ok,
                     f"{len(d['rows'])} scenes, t in (0.5, 1, 2), worst gap/error {worst:.2g}", dt)
    assert ok, d["rows"]


def test_criterion_07_scaling(record_criterion):
    (ok, d), dt = timed(checks.check_scaling)
    worst = max(row["diff"] / row["combined"] for row in d["rows"])
    record_criterion(7, "scaling t^n relation", ok, f"{len(d['rows'])} cases, t in (2, 3), worst gap/error {worst:.2g}",
                     dt)
    assert ok, d["rows"]


def test_criterion_08_vafa(record_criterion):
    def body():
        W = "z1^3/3 - z1"
        pts = newton_critical_points(W, [1.2, -1.2])
        q = QuadratureSpec(nodes=64, tol=1e-9)
        out = []
        for f, want in (("1", 0), ("z1", 1), ("z1^2", 0)):
            sc = lg_scene(W, 1, observable=f)
            v = vafa_sum(sc, f, pts)
            c = residue_contour(sc, radii=2.0).value
            m = residue_mq(sc, 1.0, q).value
            out.append((f, want, v, c, m))
        return out

    rows, dt = timed(body)
    worst = max(max(abs(v - c), abs(v - m), abs(c - m), abs(v - want)) for _, want, v, c, m in rows)
    passed = worst <= 1e-6
    record_criterion(8, "LG correlators: critical-point sum = contour = exponential", passed,
                     "values " + ", ".join(f"f={f}: {v.real:.3g}" for f, _, v, _, _ in rows) + f"; max gap {worst:.2g}",
                     dt)
    assert passed, rows


def test_criterion_09_p2_residues_sum_to_zero(record_criterion):
    def body():
        rep = run(load_scenario("p2-t0.3"), ResultCache("acceptance", enabled=False))
        totals = {r["method"]: complex(*r["value"]) for r in rep["rows"] if r["component"] == "total"}
        return rep, totals

    (rep, totals), dt = timed(body)
    points = [r for r in rep["rows"] if r["component"] != "total"]
    passed = (len({r["component"] for r in points}) == 4 and set(totals) == {"contour", "boundary", "oracle"}
              and all(abs(v) <= 1e-6 for v in totals.values()) and rep["exit_code"] == 0)
    record_criterion(9, "four point residues on P2 (t = 0.3) sum to zero", passed,
                     ", ".join(f"{m} {abs(v):.2g}" for m, v in sorted(totals.items())), dt)
    assert passed, rep["verdicts"]


@pytest.mark.slow
def test_criterion_10_virtual_residue(record_criterion):
    def body():
        sc = p2_scene(0.0)
        line = next(z for z in sc.zeros if z.kind == "curve")
        pt = next(z for z in sc.zeros if z.kind == "point")
        q = QuadratureSpec(nodes=24, levels=2, tol=1e-9, max_nodes=2_000_000)
        t1 = residue_boundary(sc, line, 0.05, q)
        t2 = residue_boundary(sc, line, 0.025, q)
        p_oracle = point_residue_nondegenerate(sc, pt)
        p_bound = residue_boundary(sc, pt, 0.1, q).value
        return t1, t2, p_oracle, p_bound

    (t1, t2, p_oracle, p_bound), dt = timed(body)
    gap_point = abs(t1.value + p_oracle)
    gap_eps = abs(t1.value - t2.value)
    comb = max(t1.error + t2.error, 1e-12)
    passed = gap_point <= 1e-3 and gap_eps <= comb and abs(p_bound - p_oracle) <= 1e-6 and dt < 600
    record_criterion(10, "tube residue along L0 = -(point residue at [1,0,0])", passed,
                     f"tube {t1.value.real:.10g} at eps 0.05, point {p_oracle.real:.3g}, "
                     f"|eps 0.05 - eps 0.025| {gap_eps:.2g} <= {comb:.2g}", dt)
    assert passed


def test_criterion_11_operator_identities(record_criterion):
    (ok1, d1), dt1 = timed(checks.check_quasi_iso)
    (ok2, d2), dt2 = timed(checks.check_trace_dbar)
    passed = ok1 and ok2 and d1["forms"] == 20 and d2["forms"] == 10
    record_criterion(11, "quasi-isomorphism identity and tr(dbar gamma) = 0", passed,
                     f"residual {d1['max_residual']:.2g} on {d1['forms']} forms, |tr| {d2['max_abs_trace']:.2g} "
                     f"on {d2['forms']} forms", dt1 + dt2)
    assert passed


def test_criterion_12_algebra_suite(record_criterion):
    results, dt = timed(lambda: checks.algebra_suite(200))
    passed = all(r.passed for r in results)
    record_criterion(12, "sign lemmas, commutator and norm inequalities on 200 inputs", passed,
                     ", ".join(f"{r.name} {'ok' if r.passed else 'FAIL'}" for r in results), dt)
    assert passed, [r.line() for r in results if not r.passed]


def test_acceptance_suite_is_complete():
    names = [n for n in globals() if n.startswith("test_criterion_")]
    assert sorted(int(n.split("_")[2]) for n in names) == list(range(1, 13))
