"""Koszul representative of the residue class and boundary residues.

On ``U = M \\ Z`` the chain ``beta_0 = iota_sbar psi``,
``beta_k = -iota_sbar dbar beta_(k-1)`` solves ``dbar_s (sum beta_k) = psi``
where ``dbar_s = dbar + s^``.  The residue of a component is
``(2 pi i)^-n`` times the integral of ``eta = (-1)^(n-1) beta_(n-1)`` over the
boundary of a neighbourhood of the component.

This module also implements the operators ``T_rho`` and ``R_rho`` built from a
cut-off function, the identity ``[dbar_s, R_rho] = 1 - T_rho`` as a pointwise
check, and the trace ``tr(alpha) = int alpha_(0,n)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import expr as E
from .algebra import TensorForm, dbar, evaluate_form, iota_covector, wedge
from .cycles import (
    CycleError,
    IntegralResult,
    QuadratureSpec,
    ball_cycle,
    check_avoids_zeros,
    pullback_integrate,
    torus_cycle,
    tube_cycle,
)
from .expr import Expr
from .scene import Scene, norm_s_sq, s_bar

__all__ = [
    "KoszulChain",
    "CutoffFn",
    "beta_chain",
    "dbar_s",
    "residue_boundary",
    "residue_contour",
    "radius_independence",
    "T_s",
    "T_rho",
    "R_rho",
    "quasi_iso_check",
    "trace",
    "trace_dbar",
    "form_is_zero",
    "max_form_norm",
]


def form_is_zero(a: TensorForm) -> bool:
    """Exact test that every coefficient vanishes on the complement of its poles."""
    return all(E.is_identically_zero(c) for c in a.terms.values())


def max_form_norm(a: TensorForm, z) -> float:
    """Largest coefficient-vector norm of ``a`` over the points ``z``."""
    if a.is_zero():
        return 0.0
    vals = evaluate_form(a, z)
    tot = sum(np.abs(v) ** 2 for v in vals.values())
    return float(np.sqrt(np.max(tot)))


# ---------------------------------------------------------------------------
# chain


@dataclass(frozen=True)
class KoszulChain:
    """``beta_0 .. beta_(n-1)`` on one chart, with ``beta_k`` in ``Omega^(n,k)(wedge^(n-1-k) V)``."""

    chart: str
    betas: tuple
    psi: TensorForm
    s: TensorForm
    sbar: TensorForm

    @property
    def n(self) -> int:
        return self.psi.n

    @property
    def eta(self) -> TensorForm:
        return self.betas[-1].scale((-1) ** (self.n - 1))

    def total(self) -> TensorForm:
        out = TensorForm.zero(self.n)
        for b in self.betas:
            out = out + b
        return out

    def ladder(self) -> dict:
        """Defect forms of the ladder identities (all zero for a valid chain)."""
        out = {"s^beta0 - psi": wedge(self.s, self.betas[0]) - self.psi}
        for k in range(1, self.n):
            out[f"s^beta{k} + dbar beta{k - 1}"] = wedge(self.s, self.betas[k]) + dbar(self.betas[k - 1])
        out[f"dbar beta{self.n - 1}"] = dbar(self.betas[-1])
        out["dbar_s(sum beta) - psi"] = dbar_s(self.s, self.total()) - self.psi
        return out

    def check_ladder(self, points=None) -> dict:
        """Per identity: ``(exact, max pointwise defect)``.

        The exact test clears ``|s|^2`` denominators; the pointwise defect is
        evaluated at ``points`` when given.
        """
        res = {}
        for name, d in self.ladder().items():
            exact = form_is_zero(d)
            pw = max_form_norm(d, points) if points is not None else 0.0
            res[name] = (exact, pw)
        return res


def dbar_s(s: TensorForm, a: TensorForm) -> TensorForm:
    """``dbar_s a = dbar a + s ^ a``."""
    return dbar(a) + wedge(s, a)


def beta_chain(sc: Scene, chart: str = None) -> KoszulChain:
    """Koszul chain of the scene's weight on one chart."""
    chart = chart or sc.default_chart
    sb = s_bar(sc, chart)
    psi = sc.psi_form(chart)
    betas = [iota_covector(sb, psi)]
    for _ in range(1, sc.n):
        betas.append(-iota_covector(sb, dbar(betas[-1])))
    return KoszulChain(chart, tuple(betas), psi, sc.section_form(chart), sb)


# ---------------------------------------------------------------------------
# residues


def _as_weights(sc: Scene, weights):
    if weights is None:
        return None
    out = []
    for g in weights:
        out.append(E.parse(g, sc.n) if isinstance(g, str) else E._as_expr(g))
    return out


def _finalize(res, n: int):
    c = 1 / (2j * math.pi) ** n
    if isinstance(res, list):
        return [r.scaled(c) for r in res]
    return res.scaled(c)


def residue_boundary(sc: Scene, component, radius: float, q: QuadratureSpec = None, weights=None,
                     theta_breaks=()):
    """Residue of a component as ``(2 pi i)^-n int_N eta``.

    ``N`` is a sphere of the given radius around an isolated point, or the
    tube of that radius around a projective coordinate line.  With
    ``weights`` the chain is built for the unit weight once and each weight
    multiplies the boundary integrand (valid because weights are
    holomorphic), returning one result per weight.
    """
    q = q or QuadratureSpec(nodes=24)
    if isinstance(component, str):
        component = next(z for z in sc.zeros if z.label == component)
    cyc = tube_cycle(component, radius, sc, theta_breaks)
    charts = sorted({p.chart for p in cyc.patches})
    counts = q.counts(cyc.dim, q.levels - 1)
    check_avoids_zeros(sc, cyc, counts)
    ws = _as_weights(sc, weights)
    forms = {}
    for c in charts:
        if ws is not None:
            forms[c] = beta_chain(_unit_weight(sc, c), c).eta
        else:
            forms[c] = beta_chain(sc, c).eta
    res = pullback_integrate(forms, cyc, q, weights=ws)
    return _finalize(res, sc.n)


def _unit_weight(sc: Scene, chart: str) -> Scene:
    from dataclasses import replace

    w = dict(sc.weight)
    w[chart] = E.ONE
    return replace(sc, weight=w)


def residue_contour(sc: Scene, center=None, radii=None, q: QuadratureSpec = None, chart: str = None,
                    weights=None, component=None, linearize: bool = False):
    """Classical residue ``(2 pi i)^-n int_Gamma g dz / (s_1 ... s_n)`` over a torus.

    By default ``Gamma`` is the coordinate torus around ``center``; it must
    avoid the zeros of every ``s_i`` and the residue is that of the common
    zeros inside the polydisk.  With ``linearize`` at a simple zero the
    torus is ``z = c + J^-1 w``, ``|w_i| = r_i`` with ``J = ds/dz(c)``, so
    that ``s ~ w``; the run fails unless ``|s_i - w_i| < |w_i|`` at every
    node, which keeps ``Gamma`` in the class of ``{|s_i| = eps}``.
    """
    q = q or QuadratureSpec(nodes=64)
    if component is not None:
        if isinstance(component, str):
            component = next(z for z in sc.zeros if z.label == component)
        center, chart = component.point, component.chart
    chart = chart or sc.default_chart
    n = sc.n
    center = np.zeros(n, dtype=complex) if center is None else np.asarray(center, dtype=complex)
    radii = [1.0] * n if radii is None else list(np.broadcast_to(radii, (n,)))
    s = sc.s(chart)
    frame = None
    if linearize:
        jac = [E.d_z(si, j) for si in s for j in range(n)]
        Jm = np.array([complex(v) for v in E.evaluate(jac, center)]).reshape(n, n)
        if abs(np.linalg.det(Jm)) <= 1e-8:
            raise CycleError("linearized torus needs a simple zero")
        frame = np.linalg.inv(Jm)
    cyc = torus_cycle(radii, center, chart, frame=frame)
    counts = q.counts(cyc.dim, q.levels - 1)
    for p, z, J, w in cyc.nodes(counts):
        vals = np.stack(E.evaluate(list(s), z), axis=-1)
        worst = float(np.min(np.abs(vals)))
        if worst <= 1e-12:
            raise CycleError(f"a component of s vanishes on the torus (|s_i| = {worst:.3g})")
        if frame is not None:
            lin = (z - center) @ Jm.T
            if np.max(np.abs(vals - lin) / np.abs(lin)) >= 1:
                raise CycleError("torus too large for the linearization of s")
    den = E.ONE
    for si in s:
        den = den * si
    inv = E.recip(den)
    ws = _as_weights(sc, weights)
    if ws is None:
        form = TensorForm.blade(n, sc.g(chart) * inv, dz=range(n))
    else:
        form = TensorForm.blade(n, inv, dz=range(n))
    res = pullback_integrate(form, cyc, q, weights=ws)
    return _finalize(res, n)


@dataclass
class IndependenceReport:
    values: list
    errors: list
    max_deviation: float
    combined_error: float
    passed: bool
    results: list = field(default_factory=list)


def radius_independence(sc: Scene, component, radii, q: QuadratureSpec = None, method: str = "boundary",
                        floor: float = 1e-10) -> IndependenceReport:
    """Residues of one component at several radii and their largest pairwise gap.

    The check passes when every pairwise gap is within the sum of the two
    error estimates (or ``floor``, whichever is larger).
    """
    results = []
    for r in radii:
        if method == "boundary":
            results.append(residue_boundary(sc, component, r, q))
        elif method == "contour":
            results.append(residue_contour(sc, radii=[r] * sc.n, q=q, component=component))
        else:
            raise ValueError(f"unknown method {method!r}")
    vals = [r.value for r in results]
    errs = [r.error for r in results]
    dev, comb, ok = 0.0, 0.0, True
    for i in range(len(vals)):
        for j in range(i + 1, len(vals)):
            d = abs(vals[i] - vals[j])
            c = max(errs[i] + errs[j], floor)
            dev, comb = max(dev, d), max(comb, c)
            ok = ok and d <= c
    return IndependenceReport(vals, errs, dev, comb, ok, results)


# ---------------------------------------------------------------------------
# cut-off and the operators T_rho, R_rho

_SMOOTH = (Fraction(10), Fraction(-15), Fraction(6))  # coefficients of x^3, x^4, x^5


@dataclass(frozen=True)
class CutoffFn:
    """Radial cut-off: 1 for ``|z-c| <= r_in``, 0 for ``|z-c| >= r_out``.

    In between ``rho = 1 - (10 x^3 - 15 x^4 + 6 x^5)`` with
    ``x = (|z-c|^2 - r_in^2) / (r_out^2 - r_in^2)``, which is C^2 across both
    radii.  Each of the three pieces is an exact Expr.
    """

    center: tuple
    r_in: float
    r_out: float

    def __post_init__(self):
        if not 0 < self.r_in < self.r_out:
            raise ValueError("need 0 < r_in < r_out")
        object.__setattr__(self, "center", tuple(complex(c) for c in self.center))

    @property
    def n(self) -> int:
        return len(self.center)

    def pieces(self) -> tuple:
        n = self.n
        d2 = E.ZERO
        for i, c in enumerate(self.center):
            w = E.zvar(i) - E.const(c)
            d2 = d2 + w * E.conj_expr(w)
        a, b = Fraction(repr(self.r_in**2)), Fraction(repr(self.r_out**2))
        x = (d2 - E.const(a)) * E.const(1 / (b - a))
        poly = E.ZERO
        for k, coef in zip((3, 4, 5), _SMOOTH):
            poly = poly + E.const(coef) * x**k
        return (E.ONE, E.ONE - poly, E.ZERO)

    def piece_index(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        r = np.linalg.norm(z - np.asarray(self.center), axis=-1)
        return np.where(r <= self.r_in, 0, np.where(r >= self.r_out, 2, 1))

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        idx = self.piece_index(z)
        out = np.empty(idx.shape)
        for k, p in enumerate(self.pieces()):
            mask = idx == k
            if np.any(mask):
                out[mask] = E.evaluate(p, z[mask]).real
        return out


def T_s(sb: TensorForm, a: TensorForm) -> TensorForm:
    """``T_s = iota_sbar``."""
    return iota_covector(sb, a)


def _bracket(sb: TensorForm, a: TensorForm) -> TensorForm:
    """``[dbar, T_s] a = dbar T_s a + T_s dbar a``."""
    return dbar(T_s(sb, a)) + T_s(sb, dbar(a))


def _geometric(sb: TensorForm, a: TensorForm, n: int) -> TensorForm:
    """``sum_(k<=n) (-1)^k [dbar, T_s]^k a``."""
    out = a
    term = a
    for k in range(1, n + 1):
        term = -_bracket(sb, term)
        if term.is_zero():
            break
        out = out + term
    return out


def R_rho(sb: TensorForm, rho: Expr, a: TensorForm) -> TensorForm:
    return T_s(sb, _geometric(sb, a, a.n)).scale(E.ONE - rho)


def T_rho(sb: TensorForm, rho: Expr, a: TensorForm) -> TensorForm:
    n = a.n
    drho = dbar(TensorForm.scalar(n, rho))
    return a.scale(rho) + wedge(drho, T_s(sb, _geometric(sb, a, n)))


def quasi_iso_check(sc: Scene, alpha: TensorForm, rho: CutoffFn, points, chart: str = None) -> float:
    """Largest pointwise norm of ``[dbar_s, R_rho] alpha - (1 - T_rho) alpha``.

    The graded commutator is ``dbar_s R_rho + R_rho dbar_s`` since both
    operators are odd.  Each point is evaluated with the cut-off piece that
    contains it.
    """
    chart = chart or sc.default_chart
    points = np.asarray(points, dtype=complex)
    sb = s_bar(sc, chart)
    s = sc.section_form(chart)
    idx = rho.piece_index(points)
    worst = 0.0
    for k, piece in enumerate(rho.pieces()):
        mask = idx == k
        if not np.any(mask):
            continue
        lhs = dbar_s(s, R_rho(sb, piece, alpha)) + R_rho(sb, piece, dbar_s(s, alpha))
        rhs = alpha - T_rho(sb, piece, alpha)
        worst = max(worst, max_form_norm(lhs - rhs, points[mask]))
    return worst


def trace(alpha: TensorForm, radius: float = None, q: QuadratureSpec = None, cutoff: CutoffFn = None,
          breaks=()) -> IntegralResult:
    """``tr(alpha) = int alpha_(0,n)`` over the ball of the given radius.

    ``alpha_(0,n)`` is the scalar ``(n, n)`` part.  With a cut-off, ``alpha``
    is taken to be ``rho`` times the given form on each cut-off piece: the
    integral runs over the support of ``rho`` with radial panels split at the
    cut-off radii, so every panel sees a single polynomial piece.
    """
    n = alpha.n
    top = alpha.component(n, n, 0, 0)
    q = q or QuadratureSpec(nodes=24)
    if top.is_zero():
        return IntegralResult(0j, 0.0, 0, True)
    if cutoff is None:
        if radius is None:
            raise ValueError("give a radius or a cut-off")
        return pullback_integrate(top, ball_cycle(radius, n=n, radial_breaks=tuple(breaks)), q)
    return _piecewise_trace(lambda piece: top.scale(piece), cutoff, q)


def _piecewise_trace(make, cutoff: CutoffFn, q: QuadratureSpec) -> IntegralResult:
    """Integrate ``make(piece)`` over the inner ball and the transition shell."""
    n = cutoff.n
    c = np.asarray(cutoff.center)
    inner, mid, _ = cutoff.pieces()
    parts = [
        pullback_integrate(make(inner), ball_cycle(cutoff.r_in, c), q),
        pullback_integrate(make(mid), ball_cycle(cutoff.r_out, c, inner=cutoff.r_in), q),
    ]
    value = sum(p.value for p in parts)
    err = sum(p.error for p in parts)
    nodes = sum(p.nodes for p in parts)
    return IntegralResult(value, err, nodes, all(p.converged for p in parts))


def trace_dbar(gamma: TensorForm, cutoff: CutoffFn, q: QuadratureSpec = None) -> IntegralResult:
    """``tr(dbar(rho gamma))`` for a polynomial form ``gamma``; zero by Stokes."""
    n = gamma.n
    q = q or QuadratureSpec(nodes=24)
    return _piecewise_trace(lambda piece: dbar(gamma.scale(piece)).component(n, n, 0, 0), cutoff, q)
