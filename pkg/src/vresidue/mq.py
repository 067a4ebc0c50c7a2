"""Exponential-integral route to the residue.

With ``xi = -(*, s)_h`` and ``S = -|s|^2 + dbar xi``, the class of
``psi ⌟ e^S`` is ``dbar_s``-closed and rapidly decreasing, and

    Res = (-1)^n / (2 pi i)^n * int_M psi ⌟ e^S.

``e^(tS) = e^(-t|s|^2) sum_k t^k (dbar xi)^k / k!`` is finite by degree.
The ``t`` deformation multiplies the exponent; the scaling variant replaces
``s`` by ``t s`` instead.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import expr as E
from .algebra import TensorForm, contract_weight, dbar, evaluate_form, iota_section, wedge
from .cycles import (
    IntegralResult,
    MCSpec,
    QuadratureSpec,
    ball_cycle,
    mc_integrate,
    pullback_integrate,
    top_density_factor,
    truncation_radius,
)
from .expr import Expr
from .koszul import max_form_norm
from .scene import Scene, SceneError, growth_probe, norm_s_sq, xi

__all__ = [
    "ExpS",
    "DecayReport",
    "exp_S",
    "mq_form",
    "mq_integrand",
    "closedness_residuals",
    "residue_mq",
    "t_independence",
    "scaling_check",
    "decay_probe",
    "integral1_probe",
    "MQError",
]

log = logging.getLogger(__name__)


class MQError(ValueError):
    """Scene or parameters outside the exponential route's assumptions."""


def _num(x) -> Expr:
    return E.const(x)


@dataclass(frozen=True)
class ExpS:
    """``e^(tS)`` as a Gaussian factor times a finite sum of exterior powers.

    ``exp_terms[k] = (dbar xi)^k / k!`` lies in ``Omega^(0,k)(wedge^k V*)``.
    ``a`` and ``b`` are the factors in ``-a |s|^2 + b dbar xi``: ``(t, t)``
    for the deformation and ``(t^2, t)`` for the scaling convention.
    """

    n: int
    t: float
    convention: str
    gauss: Expr
    exp_terms: tuple
    a: float
    b: float
    chart: str = None

    def term(self, k: int) -> TensorForm:
        """``b^k exp_term_k``."""
        return self.exp_terms[k].scale(_num(self.b**k))

    def series(self) -> TensorForm:
        out = TensorForm.zero(self.n)
        for k in range(len(self.exp_terms)):
            out = out + self.term(k)
        return out

    def form(self) -> TensorForm:
        return self.series().scale(self.gauss)


def exp_S(sc: Scene, t: float = 1.0, chart: str = None, convention: str = "deform") -> ExpS:
    """Truncated exponential of ``t S`` (or of ``S`` for ``t s``)."""
    if not t > 0:
        raise MQError("t must be positive")
    if convention == "deform":
        a, b = t, t
    elif convention == "scale":
        a, b = t * t, t
    else:
        raise MQError(f"unknown convention {convention!r}")
    chart = chart or sc.default_chart
    n = sc.n
    dxi = dbar(xi(sc, chart))
    terms = [TensorForm.scalar(n, E.ONE)]
    for k in range(1, n + 1):
        nxt = wedge(dxi, terms[-1]).scale(_num(1.0 / k))
        if nxt.is_zero():
            break
        terms.append(nxt)
    gauss = E.exp(-norm_s_sq(sc, chart) * _num(a))
    return ExpS(n, float(t), convention, gauss, tuple(terms), float(a), float(b), chart)


def mq_form(sc: Scene, t: float = 1.0, chart: str = None, convention: str = "deform") -> TensorForm:
    """Every component of ``psi ⌟ e^(tS)``."""
    ex = exp_S(sc, t, chart, convention)
    psi = sc.psi_form(chart)
    return contract_weight(psi, ex.series()).scale(ex.gauss)


def mq_integrand(sc: Scene, t: float = 1.0, chart: str = None, convention: str = "deform") -> TensorForm:
    """The ``(n, n)`` scalar part of ``psi ⌟ e^(tS)``."""
    n = sc.n
    ex = exp_S(sc, t, chart, convention)
    if len(ex.exp_terms) <= n:
        return TensorForm.zero(n)
    return contract_weight(sc.psi_form(chart), ex.term(n)).scale(ex.gauss)


def closedness_residuals(sc: Scene, t: float = 1.0, points=None, samples: int = 50, seed: int = 0,
                         chart: str = None, convention: str = "deform") -> dict:
    """Largest pointwise norms of ``(dbar + iota_s) e^(tS)`` and ``dbar_s (psi ⌟ e^(tS))``."""
    if points is None:
        rng = np.random.default_rng(seed)
        points = (rng.normal(size=(samples, sc.n)) + 1j * rng.normal(size=(samples, sc.n))) / math.sqrt(2)
    s = sc.section_form(chart)
    if convention == "scale":
        s = s.scale(_num(t))
    ex = exp_S(sc, t, chart, convention).form()
    lhs = dbar(ex) + iota_section(s, ex)
    a = mq_form(sc, t, chart, convention)
    rhs = dbar(a) + wedge(s, a)
    return {"expS": max_form_norm(lhs, points), "psi_expS": max_form_norm(rhs, points)}


# ---------------------------------------------------------------------------
# the integral


def _poly_degree(e: Expr) -> int:
    try:
        return max((sum(k) for k in E.polynomial_coefficients(e, E.max_index(e) + 1)), default=0)
    except (ValueError, TypeError):
        return 0


def _default_radius(sc: Scene, t: float, a: float, tol: float) -> float:
    growth = growth_probe(sc)
    if growth.warning:
        raise MQError(f"growth check failed: {growth.message}")
    m = _poly_degree(sc.g()) + sc.n * max(_poly_degree(si) for si in sc.s())
    R = truncation_radius(sc, tol=tol, C0=growth.C0, n=sc.n, m=m, t=a)
    return max(R, growth.shells[0])


def residue_mq(sc: Scene, t: float = 1.0, integrator=None, convention: str = "deform",
               radius: float = None, tol: float = 1e-12) -> IntegralResult:
    """``(-1)^n (2 pi i)^-n int psi ⌟ e^(tS)`` over ``C^n``.

    ``integrator`` is a :class:`QuadratureSpec` (ball quadrature, default
    for ``n = 1``) or an :class:`MCSpec` (default for ``n >= 2``).  The
    ball radius comes from the growth probe and the Gaussian tail bound
    unless ``radius`` is given.
    """
    if not sc.single_chart:
        raise MQError("the exponential route is implemented on single-chart scenes")
    n = sc.n
    if integrator is None:
        integrator = QuadratureSpec(nodes=64, tol=1e-9) if n == 1 else MCSpec(budget=100_000)
    a = t if convention == "deform" else t * t
    top = mq_integrand(sc, t, convention=convention)
    c = (-1) ** n / (2j * math.pi) ** n
    if top.is_zero():
        return IntegralResult(0j, 0.0, 0, True)
    R = radius or _default_radius(sc, t, a, tol)
    if isinstance(integrator, QuadratureSpec):
        zs = [np.linalg.norm(z.point) for z in sc.point_components()]
        breaks = sorted({b for b in [R / 8, R / 4, R / 2] + [r for r in zs if r > 0] if 0 < b < R})
        cyc = ball_cycle(R, n=n, radial_breaks=tuple(breaks))
        res = pullback_integrate(top, cyc, integrator)
    elif isinstance(integrator, MCSpec):
        (mask, coef), = top.terms.items()
        factor = top_density_factor(n)
        centers = [z.point for z in sc.point_components()]

        def f(z):
            return E.evaluate(coef, z) * factor

        if integrator.width is None:
            # no narrower than the Gaussian factor along any coordinate
            dmax = max(1, max(_poly_degree(si) for si in sc.s()))
            integrator = replace(integrator, width=a ** (-1.0 / (2 * dmax)))
        res = mc_integrate(f, integrator, n, centers=centers, radius=R)
    else:
        raise MQError(f"unknown integrator {integrator!r}")
    out = res.scaled(c)
    out.info.update(method="mq", t=t, radius=R, convention=convention)
    return out


@dataclass
class TReport:
    ts: list
    values: list
    errors: list
    max_deviation: float
    combined_error: float
    passed: bool


def _pairwise(vals, errs, k: float = 1.0, floor: float = 0.0):
    dev, comb, ok = 0.0, 0.0, True
    for i in range(len(vals)):
        for j in range(i + 1, len(vals)):
            d = abs(vals[i] - vals[j])
            c = max(k * math.hypot(errs[i], errs[j]) if k != 1.0 else errs[i] + errs[j], floor)
            dev, comb = max(dev, d), max(comb, c)
            ok = ok and d <= c
    return dev, comb, ok


def _error_multiplier(integrator) -> float:
    return 3.0 if isinstance(integrator, MCSpec) else 1.0


def t_independence(sc: Scene, ts=(0.5, 1.0, 2.0), integrator=None, floor: float = 2e-6) -> TReport:
    """MQ residues over several ``t``; passes when every gap is within the combined error.

    For deterministic quadrature the combined error is the sum of the two
    estimates (at least ``floor``); for Monte Carlo it is three combined
    standard errors.
    """
    ts = list(ts)
    if any(not t > 0 for t in ts):
        raise MQError("every t must be positive")
    results = [residue_mq(sc, t, integrator) for t in ts]
    vals = [r.value for r in results]
    errs = [r.error for r in results]
    dev, comb, ok = _pairwise(vals, errs, _error_multiplier(integrator or _default_integrator(sc)), floor)
    return TReport(ts, vals, errs, dev, comb, ok)


def _default_integrator(sc):
    return QuadratureSpec() if sc.n == 1 else MCSpec()


@dataclass
class ScalingReport:
    t: float
    scaled: complex
    reference: complex
    scaled_error: float
    reference_error: float
    relative_difference: float
    combined_error: float
    passed: bool


def scaling_check(sc: Scene, t: float, integrator=None, floor: float = 1e-5) -> ScalingReport:
    """Compare ``int psi ⌟ e^(S_t)`` for ``s_t = t s`` with ``t^-n int psi ⌟ e^S``.

    Both integrals are reported without the residue normalisation.
    """
    if not t > 0:
        raise MQError("t must be positive")
    n = sc.n
    c = (2j * math.pi) ** n / (-1) ** n
    a = residue_mq(sc, t, integrator, convention="scale")
    b = residue_mq(sc, 1.0, integrator, convention="scale")
    lhs, lerr = a.value * c, a.error * abs(c)
    rhs, rerr = b.value * c / t**n, b.error * abs(c) / t**n
    k = _error_multiplier(integrator or _default_integrator(sc))
    comb = max(k * math.hypot(lerr, rerr) if k != 1.0 else lerr + rerr, floor * max(abs(rhs), 1e-300))
    diff = abs(lhs - rhs)
    rel = diff / abs(rhs) if rhs else diff
    return ScalingReport(t, lhs, rhs, lerr, rerr, rel, comb, diff <= comb)


# ---------------------------------------------------------------------------
# decay diagnostics


@dataclass
class DecayReport:
    """Shell suprema of ``(1 + d^2)^m |alpha|`` (rapid decay) and ``(1 + d^2)^-m |alpha|`` (temperedness)."""

    shells: list
    m: list
    weighted: dict
    tempered: dict
    verdict: str

    def as_dict(self) -> dict:
        return {
            "shells": self.shells,
            "m": self.m,
            "weighted": {str(k): v for k, v in self.weighted.items()},
            "tempered": {str(k): v for k, v in self.tempered.items()},
            "verdict": self.verdict,
        }


def _abs_values(alpha, z) -> np.ndarray:
    if isinstance(alpha, TensorForm):
        if alpha.is_zero():
            return np.zeros(len(z))
        vals = evaluate_form(alpha, z)
        return np.sqrt(sum(np.abs(v) ** 2 for v in vals.values()))
    return np.abs(E.evaluate(E._as_expr(alpha), z, check=False))


def _non_increasing_tail(seq) -> bool:
    seq = [v for v in seq if np.isfinite(v)] if all(np.isfinite(seq)) else None
    if seq is None:
        return False
    return seq[-1] <= seq[-2] * 1.05 + 1e-300 and seq[-1] <= max(seq[:-1]) * 1.05 + 1e-300


def decay_probe(alpha, sc: Scene, shells=None, m_list=(0, 1, 2, 4), samples: int = 128, seed: int = 0) -> DecayReport:
    """Empirical growth class of ``alpha`` (a TensorForm or scalar Expr).

    ``rapidly-decreasing-consistent`` when every weighted sequence has a
    non-increasing tail; ``tempered-consistent`` when some
    ``(1 + d^2)^-m |alpha|`` does; ``violation`` otherwise.
    """
    if not sc.single_chart:
        raise SceneError("decay_probe needs a single-chart scene")
    from .scene import _sphere_samples

    shells = sorted(float(r) for r in (shells or [2.0**k for k in range(0, 6)]))
    rng = np.random.default_rng(seed)
    dirs = _sphere_samples(sc.n, samples, rng)
    sups = []
    with np.errstate(over="ignore", invalid="ignore"):
        for r in shells:
            sups.append(float(np.max(_abs_values(alpha, r * dirs))))
        weighted = {m: [s * (1 + r * r) ** m for s, r in zip(sups, shells)] for m in m_list}
        tempered = {m: [s * (1 + r * r) ** (-m) for s, r in zip(sups, shells)] for m in m_list}
    if all(_non_increasing_tail(v) for v in weighted.values()):
        verdict = "rapidly-decreasing-consistent"
    elif any(_non_increasing_tail(v) for v in tempered.values()):
        verdict = "tempered-consistent"
    else:
        verdict = "violation"
    return DecayReport(shells, list(m_list), weighted, tempered, verdict)


def integral1_probe(sc: Scene, R: float, k: int = 0, t: float = 1.0, samples: int = 400, seed: int = 0) -> dict:
    """Fit ``|T_s (dbar T_s)^k (psi ⌟ e^S)| <= C1 e^(-|s|^2) (1 + d^2)^mu`` on ``R <= d <= 2R``.

    The common factor ``|dbar rho|`` is left out.  Returns the fitted
    ``C1`` and ``mu`` together with the sampled ratios; nothing is asserted.
    """
    from .koszul import T_s
    from .scene import s_bar

    rng = np.random.default_rng(seed)
    n = sc.n
    g = rng.normal(size=(samples, n)) + 1j * rng.normal(size=(samples, n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    d = R * (1 + rng.random(samples))
    z = g * d[:, None]
    sb = s_bar(sc)
    a = mq_form(sc, t)
    op = T_s(sb, a)
    for _ in range(k):
        op = T_s(sb, dbar(op))
    num = _abs_values(op, z)
    den = np.exp(-t * E.evaluate(norm_s_sq(sc), z).real)
    with np.errstate(divide="ignore"):
        ratio = num / den
    x = np.log1p(d * d)
    y = np.log(np.maximum(ratio, 1e-300))
    mu = float(np.polyfit(x, y, 1)[0]) if np.ptp(x) > 0 else 0.0
    C1 = float(np.max(ratio / (1 + d * d) ** mu))
    return {"R": R, "k": k, "C1": C1, "mu": mu, "max_ratio": float(np.max(ratio)), "samples": samples}
