"""Property suites for the algebra, residue routes and oracles.

Every check returns a :class:`CheckResult`; :func:`run_suite` dispatches by
suite name (``algebra``, ``koszul``, ``mq``, ``oracles`` or ``all``).  Random
inputs come from a seeded :class:`numpy.random.Generator`, so every run of a
suite is reproducible.
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from math import comb

import numpy as np

from . import expr as E
from .algebra import (
    HermitianMetric,
    TensorForm,
    contract_weight,
    dbar,
    degree,
    iota_covector,
    iota_section,
    norm_sq,
    pairing,
    wedge,
)
from .cycles import MCSpec, QuadratureSpec
from .koszul import (
    CutoffFn,
    T_s,
    beta_chain,
    form_is_zero,
    quasi_iso_check,
    radius_independence,
    residue_boundary,
    residue_contour,
    trace,
    trace_dbar,
)
from .mq import closedness_residuals, residue_mq, scaling_check, t_independence
from .oracles import (
    coeff_oracle,
    newton_critical_points,
    point_residue_nondegenerate,
    vafa_sum,
)
from .scene import Scene, affine_scene, lg_scene, monomial_scene, p2_scene

__all__ = [
    "CheckResult",
    "SUITES",
    "run_suite",
    "random_coeff",
    "random_form",
    "random_metric",
    "monomial_tuples",
    "monomial_suite",
    "monomial_independence",
    "suite_scenes",
    "mq_scenes",
]


@dataclass
class CheckResult:
    """Outcome of one property check."""

    suite: str
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        info = ", ".join(f"{k}={_fmt(v)}" for k, v in self.detail.items())
        return f"[{tag}] {self.suite}.{self.name} ({self.seconds:.2f} s) {info}"

    def as_dict(self) -> dict:
        return {
            "suite": self.suite,
            "name": self.name,
            "passed": bool(self.passed),
            "detail": {k: _jsonable(v) for k, v in self.detail.items()},
            "seconds": round(self.seconds, 3),
        }


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.3g}"
    if isinstance(v, complex):
        return f"{v.real:.6g}{v.imag:+.3g}j"
    return str(v)


def _jsonable(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    return v


def _timed(suite: str, name: str, fn) -> CheckResult:
    t0 = time.perf_counter()
    passed, detail = fn()
    return CheckResult(suite, name, bool(passed), detail, time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# random inputs


def _subset(rng, n: int, k: int = None) -> list:
    if k is None:
        k = int(rng.integers(0, n + 1))
    return sorted(int(x) for x in rng.choice(n, size=k, replace=False))


def random_coeff(rng, n: int, holomorphic: bool = False, max_deg: int = 2) -> E.Expr:
    """Random polynomial coefficient with small Gaussian-integer coefficients."""
    c = E.const(complex(int(rng.integers(-3, 4)), int(rng.integers(-3, 4))))
    for _ in range(int(rng.integers(0, max_deg + 1))):
        i = int(rng.integers(0, n))
        c = c * (E.zvar(i) if holomorphic or rng.random() < 0.5 else E.zbvar(i))
    return c + E.const(int(rng.integers(-2, 3)))


def random_form(rng, n: int, i=None, j=None, k=None, l=None, terms: int = 2,
                holomorphic: bool = False) -> TensorForm:
    """Sum of random blades; fixed sizes give a form of pure type."""
    out = TensorForm.zero(n)
    for _ in range(terms):
        out = out + TensorForm.blade(
            n,
            random_coeff(rng, n, holomorphic),
            dz=_subset(rng, n, i),
            dzb=_subset(rng, n, j),
            e=_subset(rng, n, k),
            es=_subset(rng, n, l),
        )
    return out


def random_metric(rng, n: int) -> HermitianMetric:
    """Constant positive definite Hermitian matrix ``A A^H + I/2``."""
    A = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / math.sqrt(2)
    H = A @ A.conj().T + 0.5 * np.eye(n)
    return HermitianMetric([[complex(round(H[a, b].real, 6), round(H[a, b].imag, 6)) if a != b
                             else round(H[a, a].real, 6) for b in range(n)] for a in range(n)])


def _random_gram(rng, n: int) -> np.ndarray:
    A = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / math.sqrt(2)
    return A @ A.conj().T + 0.5 * np.eye(n)


def _random_point(rng, n: int) -> np.ndarray:
    return (rng.normal(size=n) + 1j * rng.normal(size=n)) / math.sqrt(2)


def _section(rng, n: int) -> TensorForm:
    out = TensorForm.zero(n)
    for a in range(n):
        out = out + TensorForm.blade(n, random_coeff(rng, n), e=[a])
    return out


def _covector(rng, n: int) -> TensorForm:
    out = TensorForm.zero(n)
    for a in range(n):
        out = out + TensorForm.blade(n, random_coeff(rng, n), es=[a])
    return out


def _dims(trials: int):
    for t in range(trials):
        yield 1 + t % 3


# ---------------------------------------------------------------------------
# algebra suite


def check_contraction_sign(trials: int = 200, seed: int = 0):
    """``alpha ^ (u ⌟ theta) = u ⌟ (iota_alpha theta)`` and ``iota_gamma (u ⌟ theta) = u ⌟ (gamma ^ theta)``."""
    rng = np.random.default_rng(seed)
    fails, count = 0, 0
    for n in _dims(trials):
        u = TensorForm.blade(n, random_coeff(rng, n), dz=_subset(rng, n), dzb=_subset(rng, n), e=range(n))
        l = int(rng.integers(0, n + 1))
        th = random_form(rng, n, k=0, l=l)
        if l >= 1:
            al = _section(rng, n)
            count += 1
            fails += not form_is_zero(wedge(al, contract_weight(u, th)) - contract_weight(u, iota_section(al, th)))
        if l < n:
            ga = _covector(rng, n)
            count += 1
            fails += not form_is_zero(iota_covector(ga, contract_weight(u, th)) - contract_weight(u, wedge(ga, th)))
    return fails == 0, {"cases": count, "failures": fails}


def check_contraction_leibniz(trials: int = 200, seed: int = 1):
    """``alpha ^ (u ⌟ theta) = u ⌟ (alpha theta)`` and the ``dbar`` Leibniz rule for ``⌟``."""
    rng = np.random.default_rng(seed)
    fails = 0
    for n in _dims(trials):
        k = int(rng.integers(0, n + 1))
        l = int(rng.integers(0, k + 1))
        u = random_form(rng, n, i=int(rng.integers(0, n + 1)), j=int(rng.integers(0, n + 1)), k=k, l=0)
        th = random_form(rng, n, i=int(rng.integers(0, n + 1)), j=int(rng.integers(0, n + 1)), k=0, l=l)
        a = random_form(rng, n, k=0, l=0)
        fails += not form_is_zero(wedge(a, contract_weight(u, th)) - contract_weight(u, wedge(a, th)))
        if th.is_zero():
            continue
        sign = -1 if degree(n, next(iter(th.terms))) % 2 else 1
        lhs = dbar(contract_weight(u, th))
        rhs = contract_weight(dbar(u), th) * sign + contract_weight(u, dbar(th))
        fails += not form_is_zero(lhs - rhs)
    return fails == 0, {"cases": 2 * trials, "failures": fails}


def check_pairing_leibniz(trials: int = 200, seed: int = 2):
    """``dbar <a, b> = <dbar a, b> + (-1)^#a <a, dbar b>``."""
    rng = np.random.default_rng(seed)
    fails = 0
    for n in _dims(trials):
        a = random_form(rng, n, i=int(rng.integers(0, n + 1)), j=int(rng.integers(0, n + 1)),
                        k=int(rng.integers(0, n + 1)), l=int(rng.integers(0, n + 1)))
        b = random_form(rng, n)
        if a.is_zero():
            continue
        sign = -1 if degree(n, next(iter(a.terms))) % 2 else 1
        lhs = dbar(pairing(a, b))
        rhs = pairing(dbar(a), b) + pairing(a, dbar(b)) * sign
        fails += not form_is_zero(lhs - rhs)
    return fails == 0, {"cases": trials, "failures": fails}


def _normalized_sbar(s: TensorForm) -> TensorForm:
    n = s.n
    comps = [s.coefficient(1 << (2 * n + a)) for a in range(n)]
    nsq = E.ZERO
    for c in comps:
        nsq = nsq + c * E.conj_expr(c)
    inv = E.recip(nsq)
    out = TensorForm.zero(n)
    for a, c in enumerate(comps):
        out = out + TensorForm.blade(n, E.conj_expr(c) * inv, es=[a])
    return out


def check_homotopy(trials: int = 200, seed: int = 3):
    """``[s^, T_s] = s ^ T_s + T_s s ^ = 1`` on forms valued in ``wedge V``."""
    rng = np.random.default_rng(seed)
    fails = 0
    for n in _dims(trials):
        s = TensorForm.zero(n)
        while s.is_zero():
            for a in range(n):
                s = s + TensorForm.blade(n, random_coeff(rng, n, holomorphic=True), e=[a])
        sb = _normalized_sbar(s)
        v = random_form(rng, n, k=int(rng.integers(0, n + 1)), l=0, terms=2)
        d = wedge(s, T_s(sb, v)) + T_s(sb, wedge(s, v)) - v
        fails += not form_is_zero(d)
    return fails == 0, {"cases": trials, "failures": fails}


def check_dbar_squared(trials: int = 200, seed: int = 4):
    rng = np.random.default_rng(seed)
    fails = 0
    for n in _dims(trials):
        a = random_form(rng, n, terms=3)
        fails += not form_is_zero(dbar(dbar(a)))
    return fails == 0, {"cases": trials, "failures": fails}


def _ratio(lhs: float, rhs: float) -> float:
    if rhs <= 0:
        return 0.0 if lhs <= 1e-300 else math.inf
    return lhs / rhs


def check_product_bound(trials: int = 200, seed: int = 5):
    """``|a b|^2 <= c c' |a|^2 |b|^2`` with ``c, c'`` the ranks of the two bundles."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for n in _dims(trials):
        i, j, l = (int(x) for x in rng.integers(0, n + 1, size=3))
        k, m, r = (int(x) for x in rng.integers(0, n + 1, size=3))
        a = random_form(rng, n, i=i, j=j, k=l, l=0, terms=3)
        b = random_form(rng, n, i=k, j=m, k=r, l=0, terms=3)
        c = comb(n, i) * comb(n, j) * comb(n, l)
        cp = comb(n, k) * comb(n, m) * comb(n, r)
        h, G, p = random_metric(rng, n), _random_gram(rng, n), _random_point(rng, n)
        lhs = norm_sq(wedge(a, b), h, G, p)
        rhs = c * cp * norm_sq(a, h, G, p) * norm_sq(b, h, G, p)
        worst = max(worst, _ratio(lhs, rhs))
    return worst <= 1 + 1e-12, {"points": trials, "max_ratio": worst}


def check_pairing_bound(trials: int = 200, seed: int = 6):
    """``|<a, b>|^2 <= |a|^2 |b|^2`` for ``a`` in ``wedge^k V`` and ``b`` a ``(p, q)``-form in ``wedge^k V*``."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for n in _dims(trials):
        k, p_, q_ = (int(x) for x in rng.integers(0, n + 1, size=3))
        a = random_form(rng, n, i=0, j=0, k=k, l=0, terms=3)
        b = random_form(rng, n, i=p_, j=q_, k=0, l=k, terms=3)
        h, G, p = random_metric(rng, n), _random_gram(rng, n), _random_point(rng, n)
        lhs = norm_sq(pairing(a, b), h, G, p)
        rhs = norm_sq(a, h, G, p) * norm_sq(b, h, G, p)
        worst = max(worst, _ratio(lhs, rhs))
    return worst <= 1 + 1e-12, {"points": trials, "max_ratio": worst}


def check_contraction_bound(trials: int = 200, seed: int = 7):
    """``|u ⌟ v|^2 <= b c^2 |u|^2 |v|^2`` with ``b = rank(Omega^(0,q) wedge^l V*)``, ``c = rank(wedge^(k-l) V*)``."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for n in _dims(trials):
        k = int(rng.integers(0, n + 1))
        l = int(rng.integers(0, k + 1))
        q_ = int(rng.integers(0, n + 1))
        u = random_form(rng, n, i=n, j=0, k=k, l=0, terms=3)
        v = random_form(rng, n, i=0, j=q_, k=0, l=l, terms=3)
        b = comb(n, q_) * comb(n, l)
        c = comb(n, k - l)
        h, G, p = random_metric(rng, n), _random_gram(rng, n), _random_point(rng, n)
        lhs = norm_sq(contract_weight(u, v), h, G, p)
        rhs = b * c * c * norm_sq(u, h, G, p) * norm_sq(v, h, G, p)
        worst = max(worst, _ratio(lhs, rhs))
    return worst <= 1 + 1e-12, {"points": trials, "max_ratio": worst}


def algebra_suite(trials: int = 200) -> list:
    checks = [
        ("contraction_sign", check_contraction_sign),
        ("contraction_leibniz", check_contraction_leibniz),
        ("pairing_leibniz", check_pairing_leibniz),
        ("homotopy", check_homotopy),
        ("dbar_squared", check_dbar_squared),
        ("product_bound", check_product_bound),
        ("pairing_bound", check_pairing_bound),
        ("contraction_bound", check_contraction_bound),
    ]
    return [_timed("algebra", name, lambda f=f: f(trials)) for name, f in checks]


# ---------------------------------------------------------------------------
# koszul suite


def monomial_tuples(max_n: int = 3, max_total: int = 8) -> list:
    """Exponent tuples ``(a_1..a_n)`` with ``n <= max_n`` and ``sum a_i <= max_total``."""
    return [a for n in range(1, max_n + 1) for a in itertools.product(range(1, max_total + 1), repeat=n)
            if sum(a) <= max_total]


_THETA_NODES = {1: 16, 2: 24, 3: 20}


def monomial_quadrature(a, tol: float = None, max_nodes: int = None) -> QuadratureSpec:
    """Sphere rule that is exact in the angles for weights of degree ``<= a_i`` in ``z_i``.

    For ``s = z^a`` each term of the boundary integrand has a single
    frequency ``1 - a_i`` in the angle of ``z_i`` times a weight monomial of
    degree ``<= a_i``, so ``max(a_i, 2)`` periodic nodes integrate it
    exactly.  Those directions stay fixed; only the polar angles refine.
    """
    n = len(a)
    npd = (_THETA_NODES[n],) * (n - 1) + tuple(max(int(x), 2) for x in a)
    return QuadratureSpec(nodes_per_dim=npd, fixed=tuple(range(n - 1, 2 * n - 1)), tol=tol or 1e-10,
                          max_nodes=max_nodes)


def _random_weight(rng, a) -> E.Expr:
    """Random polynomial with per-variable degree ``<= a_i`` that contains the residue monomial."""
    n = len(a)
    target = tuple(x - 1 for x in a)
    out = E.ZERO
    for m in itertools.product(*[range(x + 1) for x in a]):
        if rng.random() < 0.5 or m == target:
            c = complex(*np.round(rng.normal(size=2), 3))
            term = E.const(c)
            for i, mi in enumerate(m):
                if mi:
                    term = term * E.zvar(i) ** mi
            out = out + term
    return out


def _monomials(a) -> tuple:
    mons = list(itertools.product(*[range(x + 1) for x in a]))
    exprs = []
    for m in mons:
        term = E.ONE
        for i, mi in enumerate(m):
            if mi:
                term = term * E.zvar(i) ** mi
        exprs.append(term)
    return mons, exprs


def monomial_suite(tuples=None, n_weights: int = 20, seed: int = 1, tol: float = 1e-7) -> dict:
    """Contour and sphere residues of ``s = z^a`` against random polynomial weights.

    Both routes integrate each weight monomial once and combine the moments
    with the weight coefficients; every value is compared with
    :func:`coeff_oracle`.
    """
    rng = np.random.default_rng(seed)
    tuples = tuples if tuples is not None else monomial_tuples()
    worst_c = worst_b = 0.0
    failures = []
    for a in tuples:
        n = len(a)
        sc = monomial_scene(a, 1)
        weights = [_random_weight(rng, a) for _ in range(n_weights)]
        mons, exprs = _monomials(a)
        qc = QuadratureSpec(nodes_per_dim=tuple(2 * x + 2 for x in a), levels=1)
        contour = residue_contour(sc, q=qc, weights=exprs)
        bound = residue_boundary(sc, sc.zeros[0], 1.0, monomial_quadrature(a), weights=exprs,
                                 theta_breaks=(math.pi / 4,))
        for w in weights:
            cf = E.polynomial_coefficients(w, n)
            ref = coeff_oracle(w, a)
            vc = sum(cf.get(m, 0) * r.value for m, r in zip(mons, contour))
            vb = sum(cf.get(m, 0) * r.value for m, r in zip(mons, bound))
            ec, eb = abs(vc - ref), abs(vb - ref)
            worst_c, worst_b = max(worst_c, ec), max(worst_b, eb)
            if max(ec, eb) > tol:
                failures.append({"a": list(a), "contour": ec, "boundary": eb})
    return {
        "tuples": len(tuples),
        "weights": n_weights,
        "max_contour_error": worst_c,
        "max_boundary_error": worst_b,
        "failures": failures,
        "passed": not failures,
    }


def monomial_independence(tuples=None, radii=(4.0, 2.0, 1.0)) -> dict:
    """Boundary residues at several radii for ``s = z^a`` with the residue monomial as weight."""
    tuples = tuples if tuples is not None else monomial_tuples()
    worst_dev, worst_comb, failures = 0.0, 0.0, []
    for a in tuples:
        g = E.ONE
        for i, x in enumerate(a):
            if x > 1:
                g = g * E.zvar(i) ** (x - 1)
        sc = monomial_scene(a, g)
        q = monomial_quadrature(a, tol=1e-9, max_nodes=400_000)
        rep = radius_independence(sc, sc.zeros[0], radii, q)
        worst_dev = max(worst_dev, rep.max_deviation)
        worst_comb = max(worst_comb, rep.combined_error)
        if not rep.passed:
            failures.append({"a": list(a), "deviation": rep.max_deviation, "combined": rep.combined_error})
    return {"tuples": len(tuples), "radii": list(radii), "max_deviation": worst_dev,
            "max_combined_error": worst_comb, "failures": failures, "passed": not failures}


def suite_scenes() -> list:
    """Every scene used by the residue checks, as ``(scene, chart)`` pairs."""
    out = [(monomial_scene(a, 1), "C") for a in monomial_tuples()]
    out.append((affine_scene(["z1"], 1, n=1), "C"))
    for W in ("z1^3/3-z1", "z1^4/4-z1"):
        for f in ("1", "z1", "z1^2"):
            out.append((lg_scene(W, 1, observable=f), "C"))
    for t in (0.3, 0.0):
        sc = p2_scene(t)
        out.extend((sc, c.id) for c in sc.charts)
    return out


def _ladder_points(rng, n: int, count: int = 16) -> np.ndarray:
    z = (rng.normal(size=(count, n)) + 1j * rng.normal(size=(count, n))) / math.sqrt(2)
    return z


def check_ladder(scenes=None, seed: int = 0):
    """Ladder identities of the Koszul chain on every suite scene."""
    rng = np.random.default_rng(seed)
    scenes = scenes if scenes is not None else suite_scenes()
    worst, not_exact, fails = 0.0, 0, []
    for sc, chart in scenes:
        res = beta_chain(sc, chart).check_ladder(_ladder_points(rng, sc.n))
        for name, (exact, pw) in res.items():
            if not exact:
                not_exact += 1
                worst = max(worst, pw)
                if not pw <= 1e-10:
                    fails.append({"scene": sc.name, "chart": chart, "identity": name, "defect": pw})
    return not fails, {"scenes": len(scenes), "non_exact": not_exact, "max_pointwise": worst,
                       "failures": fails}


def check_cauchy():
    sc = affine_scene(["z1"], 1, n=1)
    r = residue_contour(sc)
    err = abs(r.value - 1)
    return err <= 1e-10, {"value": r.value, "error": err}


def _cutoff_form(rng, n: int) -> TensorForm:
    out = TensorForm.zero(n)
    for _ in range(3):
        dz = [i for i in range(n) if rng.random() < 0.5]
        dzb = [i for i in range(n) if rng.random() < 0.5]
        e = [i for i in range(n) if rng.random() < 0.5]
        c = E.const(complex(*rng.normal(size=2)))
        for i in range(n):
            c = c * E.zvar(i) ** int(rng.integers(0, 2)) * E.zbvar(i) ** int(rng.integers(0, 2))
        out = out + TensorForm.blade(n, c, dz=dz, dzb=dzb, e=e)
    return out


def check_quasi_iso(count: int = 20, seed: int = 0):
    """``[dbar_s, R_rho] = 1 - T_rho`` pointwise on random polynomial forms."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    cases = [(1, ["z1"]), (2, ["z1", "z2"]), (2, ["z1^2", "z2"])]
    done = 0
    for n, sec in itertools.cycle(cases):
        if done >= count:
            break
        sc = affine_scene(sec, 1, n=n)
        rho = CutoffFn([0] * n, 0.5, 1.5)
        a = _cutoff_form(rng, n)
        pts = (rng.normal(size=(40, n)) + 1j * rng.normal(size=(40, n))) * 0.8
        pts = pts[np.linalg.norm(pts, axis=1) > 0.1]
        worst = max(worst, quasi_iso_check(sc, a, rho, pts))
        done += 1
    return worst <= 1e-8, {"forms": count, "max_residual": worst}


def _support_form(rng, n: int) -> TensorForm:
    g = TensorForm.zero(n)
    for j in range(n):
        c = E.const(complex(*rng.normal(size=2)))
        c = c * E.zvar(0) ** int(rng.integers(0, 3)) * E.zbvar(n - 1) ** int(rng.integers(0, 3))
        g = g + TensorForm.blade(n, c, dz=range(n), dzb=[i for i in range(n) if i != j])
    return g


def check_trace_dbar(count: int = 10, seed: int = 0):
    """``tr(dbar(rho gamma)) = 0`` for cut-off polynomial forms; the uncut integral is reported as a control."""
    rng = np.random.default_rng(seed)
    worst, control = 0.0, 0.0
    for k in range(count):
        n = 1 + k % 2
        rho = CutoffFn([0.1] * n, 0.5, 1.5)
        g = _support_form(rng, n)
        worst = max(worst, abs(trace_dbar(g, rho).value))
        control = max(control, abs(trace(dbar(g), radius=1.0).value))
    return worst <= 1e-8, {"forms": count, "max_abs_trace": worst, "max_uncut_control": control}


def koszul_suite(full: bool = True) -> list:
    out = [
        _timed("koszul", "cauchy", check_cauchy),
        _timed("koszul", "ladder", check_ladder),
    ]

    def mono():
        r = monomial_suite()
        return r["passed"], {k: v for k, v in r.items() if k != "passed"}

    def indep():
        r = monomial_independence()
        return r["passed"], {k: v for k, v in r.items() if k != "passed"}

    out.append(_timed("koszul", "monomial_suite", mono))
    if full:
        out.append(_timed("koszul", "radius_independence", indep))
    out.append(_timed("koszul", "quasi_iso", check_quasi_iso))
    out.append(_timed("koszul", "trace_dbar", check_trace_dbar))
    return out


# ---------------------------------------------------------------------------
# mq suite

_MC_BUDGET = 1_000_000


def mq_scenes() -> list:
    """Scenes satisfying the growth assumption, with the integrator used for each."""
    q = QuadratureSpec(nodes=64, tol=1e-9)
    out = []
    for sec, g in ((["z1"], "1"), (["z1^2"], "z1"), (["z1^3"], "z1^2")):
        out.append((affine_scene(sec, g, n=1), q))
    for f in ("1", "z1", "z1^2"):
        out.append((lg_scene("z1^3/3-z1", 1, observable=f), q))
    for sec, g in ((["z1", "z2"], "1"), (["z1^2", "z2"], "z1"), (["z1^2", "z2^2"], "z1*z2")):
        out.append((affine_scene(sec, g, n=2), MCSpec(budget=_MC_BUDGET)))
    return out


def check_closedness(seed: int = 0):
    worst = 0.0
    for sc, _ in mq_scenes():
        for conv in ("deform", "scale"):
            r = closedness_residuals(sc, 1.5, samples=20, seed=seed, convention=conv)
            worst = max(worst, *r.values())
    return worst <= 1e-10, {"max_residual": worst}


def check_mq_vs_contour():
    """MQ residue against the contour residue on the point scenes."""
    rows = []
    ok = True
    for sc, integ in mq_scenes():
        ref = sum(residue_contour(sc, component=z, radii=0.5).value for z in sc.zeros) if sc.kind == "lg" \
            else residue_contour(sc).value
        r = residue_mq(sc, 1.0, integ)
        d = abs(r.value - ref)
        tol = 1e-6 if sc.n == 1 else 3 * r.error
        ok = ok and d <= tol
        rows.append({"scene": sc.name, "mq": r.value, "contour": ref, "diff": d, "tol": tol})
    return ok, {"rows": rows}


def check_t_independence():
    rows, ok = [], True
    for sc, integ in mq_scenes():
        rep = t_independence(sc, (0.5, 1.0, 2.0), integ)
        ok = ok and rep.passed
        rows.append({"scene": sc.name, "max_deviation": rep.max_deviation, "combined": rep.combined_error})
    return ok, {"rows": rows}


def check_scaling():
    rows, ok = [], True
    for sc, integ in mq_scenes():
        for t in (2.0, 3.0):
            rep = scaling_check(sc, t, integ)
            ok = ok and rep.passed
            rows.append({"scene": sc.name, "t": t, "diff": abs(rep.scaled - rep.reference),
                         "combined": rep.combined_error})
    return ok, {"rows": rows}


def mq_suite() -> list:
    return [
        _timed("mq", "closedness", check_closedness),
        _timed("mq", "mq_vs_contour", check_mq_vs_contour),
        _timed("mq", "t_independence", check_t_independence),
        _timed("mq", "scaling", check_scaling),
    ]


# ---------------------------------------------------------------------------
# oracles suite


def check_coeff_examples():
    cases = [("z1*z2^3", (2, 4), 1), ("1", (1, 1), 1), ("z1^2", (2, 1), 0)]
    got = [coeff_oracle(g, a) for g, a, _ in cases]
    ok = all(abs(v - want) == 0 for v, (_, _, want) in zip(got, cases))
    return ok, {"values": got}


def check_coeff_vs_contour(seed: int = 2):
    r = monomial_suite(n_weights=3, seed=seed, tol=1e-8)
    return r["max_contour_error"] <= 1e-8, {"tuples": r["tuples"], "max_contour_error": r["max_contour_error"]}


def check_newton():
    pts = newton_critical_points("z1^3/3-z1", [1.2, -1.2])
    locs = sorted(complex(p.location.coords[0]).real for p in pts)
    Hs = sorted(p.H.real for p in pts)
    deg = newton_critical_points("z1^5/5", [0.1])
    ok = (np.allclose(locs, [-1, 1], atol=1e-10) and np.allclose(Hs, [-2, 2], atol=1e-9)
          and len(deg) == 1 and not deg[0].nondegenerate)
    return ok, {"points": locs, "H": Hs, "degenerate_flagged": bool(deg and not deg[0].nondegenerate)}


def check_vafa(tol: float = 1e-7):
    rows, ok = [], True
    for W, seeds in (("z1^3/3-z1", [1.2, -1.2]), ("z1^4/4-z1", [1.0, complex(-0.5, 0.9), complex(-0.5, -0.9)])):
        pts = newton_critical_points(W, seeds)
        for f in ("1", "z1", "z1^2"):
            sc = lg_scene(W, 1, observable=f)
            v = vafa_sum(sc, f, pts)
            c = residue_contour(sc, radii=2.0).value
            d = abs(v - c)
            ok = ok and d <= tol
            rows.append({"W": W, "f": f, "vafa": v, "contour": c, "diff": d})
    return ok, {"rows": rows}


def check_p2_sum(t: float = 0.3):
    sc = p2_scene(t)
    vals = [point_residue_nondegenerate(sc, z) for z in sc.zeros]
    total = sum(vals)
    return abs(total) <= 1e-7, {"values": vals, "sum": total}


def oracles_suite() -> list:
    return [
        _timed("oracles", "coeff_examples", check_coeff_examples),
        _timed("oracles", "coeff_vs_contour", check_coeff_vs_contour),
        _timed("oracles", "newton", check_newton),
        _timed("oracles", "vafa", check_vafa),
        _timed("oracles", "p2_sum", check_p2_sum),
    ]


SUITES = {
    "algebra": algebra_suite,
    "koszul": koszul_suite,
    "mq": mq_suite,
    "oracles": oracles_suite,
}


def run_suite(name: str) -> list:
    """Run one suite, or every suite for ``"all"``."""
    if name == "all":
        out = []
        for fn in SUITES.values():
            out.extend(fn())
        return out
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES) + ['all']}")
    return SUITES[name]()
