"""Oriented integration cycles, pullback quadrature and Monte Carlo.

A :class:`Cycle` is a list of :class:`Patch` objects.  Each patch lives in
one chart and maps a parameter box to chart points together with the exact
Jacobian ``dz/du``.  A form of matching degree is pulled back by replacing
``dz_i`` with ``sum_a (dz_i/du_a) du_a`` (and ``dzbar_i`` with the conjugate
row), which for a top-degree blade amounts to a determinant.

Conventions: ``C^n`` carries the complex orientation
``dx_1 dy_1 ... dx_n dy_n``; boundary cycles carry the outward-normal-first
orientation; coordinate tori are oriented by ``d arg z_1 ... d arg z_n``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from . import expr as E
from .algebra import AlgebraError, TensorForm, blade_shape

__all__ = [
    "ParamDim",
    "Patch",
    "Cycle",
    "QuadratureSpec",
    "MCSpec",
    "IntegralResult",
    "CycleError",
    "torus_cycle",
    "sphere_cycle",
    "ball_cycle",
    "tube_cycle",
    "pullback_integrate",
    "mc_integrate",
    "truncation_radius",
    "top_density_factor",
    "check_avoids_zeros",
]


class CycleError(ValueError):
    """Invalid cycle construction (radius, overlap with other components)."""


@dataclass(frozen=True)
class ParamDim:
    """One parameter direction: periodic (trapezoid) or an interval (Gauss-Legendre).

    ``breaks`` splits an interval into panels; ``density`` scales the node count.
    """

    lo: float
    hi: float
    periodic: bool
    breaks: tuple = ()
    density: float = 1.0

    def rule(self, nodes: int):
        nodes = max(int(nodes), 1 if self.periodic else 2)
        if self.periodic:
            h = (self.hi - self.lo) / nodes
            return self.lo + h * np.arange(nodes), np.full(nodes, h)
        x, w = np.polynomial.legendre.leggauss(nodes)
        edges = [self.lo, *sorted(b for b in self.breaks if self.lo < b < self.hi), self.hi]
        xs, ws = [], []
        for a, b in zip(edges, edges[1:]):
            xs.append(0.5 * (b - a) * x + 0.5 * (b + a))
            ws.append(0.5 * (b - a) * w)
        return np.concatenate(xs), np.concatenate(ws)


@dataclass
class Patch:
    """Parametrized piece of a cycle.

    ``fmap(u)`` takes a list of flat parameter arrays and returns
    ``(z, J)`` with shapes ``(N, n)`` and ``(N, n, d)``.  ``normal(z)``
    returns an outward normal in real coordinates for boundary patches.
    """

    chart: str
    dims: tuple
    fmap: Callable
    normal: Callable = None
    orientation: int = 0

    def __post_init__(self):
        if self.orientation == 0:
            self.orientation = _orientation(self)


@dataclass
class Cycle:
    kind: str
    n: int
    dim: int
    patches: tuple
    label: str = ""
    info: dict = field(default_factory=dict)

    def nodes(self, nodes_per_dim):
        """Yield ``(patch, z, J, w)`` with orientation folded into ``w``."""
        for p in self.patches:
            yield (p,) + _grid(p, nodes_per_dim)


def _real(v: np.ndarray) -> np.ndarray:
    """(..., n) complex -> (..., 2n) real in the order Re z1, Im z1, Re z2, ..."""
    out = np.empty(v.shape[:-1] + (2 * v.shape[-1],))
    out[..., 0::2] = v.real
    out[..., 1::2] = v.imag
    return out


def _orientation(p: Patch) -> int:
    mids = []
    for d in p.dims:
        # a generic interior point avoids coordinate degeneracies
        mids.append(np.array([d.lo + 0.3819660113 * (d.hi - d.lo)]))
    z, J = p.fmap(mids)
    cols = [_real(J[0, :, a]) for a in range(J.shape[-1])]
    n2 = 2 * z.shape[-1]
    if len(cols) == n2:
        det = np.linalg.det(np.stack(cols, axis=1))
    elif len(cols) == n2 - 1:
        if p.normal is None:
            return 1
        nvec = p.normal(z)[0]
        det = np.linalg.det(np.stack([nvec] + cols, axis=1))
    else:
        return 1
    if abs(det) < 1e-14:
        raise CycleError("degenerate parametrization at the orientation probe")
    return 1 if det > 0 else -1


def _grid(p: Patch, nodes_per_dim):
    rules = [d.rule(nn) for d, nn in zip(p.dims, nodes_per_dim)]
    xs = np.meshgrid(*[r[0] for r in rules], indexing="ij")
    ws = np.meshgrid(*[r[1] for r in rules], indexing="ij")
    u = [x.ravel() for x in xs]
    w = np.prod([x.ravel() for x in ws], axis=0) * p.orientation
    z, J = p.fmap(u)
    return z, J, w


# ---------------------------------------------------------------------------
# builders


def torus_cycle(radii, center=None, chart: str = "C", frame=None) -> Cycle:
    """Torus ``z = c + A w`` with ``|w_i| = r_i``, oriented by ``d arg w_1 ... d arg w_n``.

    ``frame`` is the complex matrix ``A`` (identity by default, giving the
    coordinate torus ``|z_i - c_i| = r_i``).  A holomorphic linear frame
    keeps the complex orientation.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or np.any(radii <= 0):
        raise CycleError("torus radii must be positive")
    n = len(radii)
    c = np.zeros(n, dtype=complex) if center is None else np.asarray(center, dtype=complex)
    A = None if frame is None else np.asarray(frame, dtype=complex).reshape(n, n)
    if A is not None and abs(np.linalg.det(A)) < 1e-14:
        raise CycleError("torus frame must be invertible")

    def fmap(u):
        th = np.stack(u, axis=-1)
        ph = radii * np.exp(1j * th)
        J = np.zeros(th.shape[:-1] + (n, n), dtype=complex)
        idx = np.arange(n)
        J[..., idx, idx] = 1j * ph
        if A is None:
            return c + ph, J
        return c + ph @ A.T, A @ J

    dims = tuple(ParamDim(0.0, 2 * math.pi, True) for _ in range(n))
    info = {"radii": radii.tolist(), "center": c.tolist()}
    if A is not None:
        info["frame"] = [[[x.real, x.imag] for x in row] for row in A]
    return Cycle("torus", n, n, (Patch(chart, dims, fmap, orientation=1),), info=info)


def _sphere_coords(theta: list, n: int):
    """Unit-sphere moduli ``x_k`` in the positive orthant and ``dx_k/dtheta_j``."""
    m = len(theta[0]) if theta else 1
    s = [np.sin(t) for t in theta]
    c = [np.cos(t) for t in theta]
    x = np.empty((m, n))
    dx = np.zeros((m, n, n - 1))
    prefix = np.ones(m)
    for k in range(n):
        if k < n - 1:
            x[:, k] = prefix * c[k]
        else:
            x[:, k] = prefix
        for j in range(min(k, n - 1)):
            # derivative of the sin(theta_j) factor
            others = np.ones(m)
            for jj in range(k if k < n - 1 else n - 1):
                if jj != j:
                    others = others * s[jj]
            dx[:, k, j] = others * c[j] * (c[k] if k < n - 1 else 1.0)
        if k < n - 1:
            dx[:, k, k] = -prefix * s[k]
            prefix = prefix * s[k]
    return x, dx


def sphere_cycle(radius: float, center=None, n: int = None, chart: str = "C", theta_breaks=()) -> Cycle:
    """Round sphere ``S^(2n-1)`` with the boundary orientation.

    Parameters are ``theta_1..theta_(n-1)`` in ``[0, pi/2]`` (Gauss-Legendre)
    followed by the phases ``phi_1..phi_n`` (trapezoid).
    """
    if not radius or radius <= 0 or not math.isfinite(radius):
        raise CycleError("sphere radius must be positive")
    if center is None:
        if n is None:
            raise CycleError("give a center or a dimension")
        center = np.zeros(n, dtype=complex)
    c = np.asarray(center, dtype=complex)
    n = len(c)
    R = float(radius)

    def fmap(u):
        th, ph = u[: n - 1], u[n - 1:]
        m = len(ph[0])
        x, dx = _sphere_coords(th, n) if n > 1 else (np.ones((m, 1)), np.zeros((m, 1, 0)))
        e = np.exp(1j * np.stack(ph, axis=-1))
        z = c + R * x * e
        J = np.zeros((m, n, 2 * n - 1), dtype=complex)
        J[:, :, : n - 1] = R * dx * e[:, :, None]
        idx = np.arange(n)
        J[:, idx, n - 1 + idx] = 1j * R * x * e
        return z, J

    def normal(z):
        return _real(z - c)

    dims = tuple(ParamDim(0.0, math.pi / 2, False, tuple(theta_breaks)) for _ in range(n - 1))
    dims += tuple(ParamDim(0.0, 2 * math.pi, True) for _ in range(n))
    return Cycle("sphere", n, 2 * n - 1, (Patch(chart, dims, fmap, normal),),
                 info={"radius": R, "center": c.tolist()})


def ball_cycle(radius: float, center=None, n: int = None, chart: str = "C", radial_breaks=(),
               inner: float = 0.0) -> Cycle:
    """Closed ball (or the shell ``inner <= |z-c| <= radius``) as a ``2n``-dimensional domain.

    Parameters are the radius followed by the sphere angles.
    """
    if not radius or radius <= 0 or not 0 <= inner < radius:
        raise CycleError("need 0 <= inner < radius")
    sph = sphere_cycle(1.0, np.zeros(n if center is None else len(center)), chart=chart)
    c = np.zeros(sph.n, dtype=complex) if center is None else np.asarray(center, dtype=complex)
    n = sph.n
    sp = sph.patches[0]

    def fmap(u):
        r = u[0]
        zs, Js = sp.fmap(u[1:])
        z = c + r[:, None] * zs
        J = np.concatenate([zs[:, :, None], r[:, None, None] * Js], axis=-1)
        return z, J

    dims = (ParamDim(float(inner), float(radius), False, tuple(radial_breaks)),) + sp.dims
    return Cycle("ball", n, 2 * n, (Patch(chart, dims, fmap),),
                 info={"radius": float(radius), "center": c.tolist()})


def _line_tube_patch(scene, line: int, eps: float, chart_index: int, other_index: int):
    """Patch of ``|x_line|^2 = eps^2 (|x_a|^2 + |x_b|^2)`` inside chart ``U_chart_index``.

    In that chart ``w = x_line / x_chart`` and ``b = x_other / x_chart`` with
    ``|b| <= 1``; parameters are ``(alpha, rho, phi)`` with
    ``w = eps sqrt(1 + rho^2) e^(i alpha)`` and ``b = rho e^(i phi)``.
    """
    cid = f"U{chart_index}"
    others = [j for j in range(3) if j != chart_index]
    pw, pb = others.index(line), others.index(other_index)

    def fmap(u):
        al, rho, ph = u
        m = len(al)
        q = np.sqrt(1 + rho * rho)
        ea, ep = np.exp(1j * al), np.exp(1j * ph)
        z = np.zeros((m, 2), dtype=complex)
        J = np.zeros((m, 2, 3), dtype=complex)
        z[:, pw] = eps * q * ea
        z[:, pb] = rho * ep
        J[:, pw, 0] = 1j * z[:, pw]
        J[:, pw, 1] = eps * rho / q * ea
        J[:, pb, 1] = ep
        J[:, pb, 2] = 1j * z[:, pb]
        return z, J

    def normal(z):
        nv = np.zeros(z.shape, dtype=complex)
        nv[:, pw] = z[:, pw] / np.abs(z[:, pw])
        return _real(nv)

    dims = (
        ParamDim(0.0, 2 * math.pi, True),
        ParamDim(0.0, 1.0, False),
        ParamDim(0.0, 2 * math.pi, True),
    )
    return Patch(cid, dims, fmap, normal)


def tube_cycle(component, eps: float, scene, theta_breaks=()) -> Cycle:
    """Boundary of a tubular neighbourhood of a zero-locus component.

    Isolated points get a sphere of radius ``eps``.  Projective coordinate
    lines ``{x_c = 0}`` in the projective plane get
    ``{|x_c|^2 = eps^2 (|x_a|^2 + |x_b|^2)}``, split at ``|x_a| = |x_b|``
    into one piece per chart.
    """
    if eps is None or eps <= 0:
        raise CycleError("tube radius must be positive")
    if component.kind == "point":
        cyc = sphere_cycle(eps, component.point, chart=component.chart, theta_breaks=theta_breaks)
        for other in scene.point_components():
            if other is component or other.chart != component.chart:
                continue
            if np.linalg.norm(np.asarray(other.point) - np.asarray(component.point)) <= eps:
                raise CycleError(f"sphere around {component.label} contains {other.label}")
        cyc.label = component.label
        return cyc
    if component.line is None or scene.kind != "projective-plane":
        raise CycleError("tubes are available for points and projective coordinate lines")
    from .scene import homogeneous

    c = component.line
    a, b = [j for j in range(3) if j != c]
    for other in scene.zeros:
        if other is component or other.kind != "point":
            continue
        x = homogeneous(other.chart, other.point)
        if abs(x[c]) ** 2 <= eps**2 * (abs(x[a]) ** 2 + abs(x[b]) ** 2) * (1 + 1e-12):
            raise CycleError(f"tube of radius {eps} around {component.label} contains {other.label}")
    patches = (_line_tube_patch(scene, c, eps, a, b), _line_tube_patch(scene, c, eps, b, a))
    return Cycle("tube", 2, 3, patches, label=component.label, info={"eps": eps, "line": c})


def check_avoids_zeros(scene, cycle: Cycle, nodes_per_dim, floor: float = 1e-13) -> float:
    """Smallest ``|s|^2`` over the quadrature nodes.

    Raises when it is zero or below ``floor`` times the largest value, which
    flags cycles through the zero locus while allowing high-order zeros.
    """
    from .scene import norm_s_sq

    worst, best = math.inf, 0.0
    for p, z, J, w in cycle.nodes(nodes_per_dim):
        v = E.evaluate(norm_s_sq(scene, p.chart), z).real
        worst = min(worst, float(np.min(v)))
        best = max(best, float(np.max(v)))
    if not worst > floor * best:
        raise CycleError(f"cycle passes within |s|^2 = {worst:.3g} of the zero locus")
    return worst


# ---------------------------------------------------------------------------
# deterministic quadrature


@dataclass(frozen=True)
class QuadratureSpec:
    """Product quadrature: trapezoid on periodic directions, Gauss-Legendre otherwise.

    ``nodes`` is the finest node count per direction (per panel for split
    intervals); ``nodes_per_dim`` overrides it direction by direction.
    Level ``k`` of ``levels`` uses ``nodes / 2^(levels-1-k)`` nodes; the
    error estimate is the difference of the last two levels.  Directions
    listed in ``fixed`` keep their count on every level (for directions
    where the rule is already exact).  With ``max_nodes`` set, levels keep
    doubling past ``levels`` until the estimate meets ``tol`` (absolute or
    relative) or the next level would exceed ``max_nodes`` points.
    """

    nodes: int = 32
    levels: int = 2
    nodes_per_dim: tuple = None
    fixed: tuple = ()
    max_nodes: int = None
    rule: str = "product"
    tol: float = 1e-10
    chunk: int = 200_000

    def __post_init__(self):
        refined = [b for k, b in enumerate(self.nodes_per_dim or ()) if k not in self.fixed]
        if self.nodes < 4 or (refined and min(refined) < 4):
            raise ValueError("quadrature needs at least 4 nodes per refined dimension")
        if self.nodes_per_dim and min(self.nodes_per_dim) < 1:
            raise ValueError("node counts must be positive")
        if self.levels < 1:
            raise ValueError("levels must be at least 1")
        if self.rule != "product":
            raise ValueError(f"unknown rule {self.rule!r}")

    def counts(self, dim: int, level: int):
        base = self.nodes_per_dim or (self.nodes,) * dim
        if len(base) != dim:
            raise ValueError(f"nodes_per_dim has {len(base)} entries for a {dim}-dimensional cycle")
        f = 2 ** (self.levels - 1 - level)
        return tuple(b if k in self.fixed else max(4, int(round(b / f))) for k, b in enumerate(base))


@dataclass
class IntegralResult:
    value: complex
    error: float
    nodes: int
    converged: bool
    trace: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {
            "value": [self.value.real, self.value.imag],
            "error": self.error,
            "nodes": self.nodes,
            "converged": self.converged,
        }
        out.update(self.info)
        return out

    def scaled(self, c: complex) -> "IntegralResult":
        return IntegralResult(
            self.value * c,
            self.error * abs(c),
            self.nodes,
            self.converged,
            [(lv, nn, v * c, e * abs(c)) for lv, nn, v, e in self.trace],
            dict(self.info),
        )


def _top_blades(form: TensorForm, d: int):
    out = []
    for m, c in form.terms.items():
        sh = blade_shape(form.n, m)
        if sh.K or sh.L or len(sh.I) + len(sh.J) != d:
            raise AlgebraError("form must be a scalar form of the cycle dimension")
        out.append((sh, c))
    return out


def _pullback_det(sh, J: np.ndarray) -> np.ndarray:
    rows = [J[:, i, :] for i in sh.I] + [np.conj(J[:, j, :]) for j in sh.J]
    return np.linalg.det(np.stack(rows, axis=1))


def _integrate_level(forms, cycle: Cycle, counts, weights, chunk: int):
    """Sum over patches; returns (values per weight, abs-sum per weight, nodes)."""
    nw = len(weights)
    vals = np.zeros(nw, dtype=complex)
    absum = np.zeros(nw)
    total = 0
    for p, z, J, w in cycle.nodes(counts):
        form = forms[p.chart] if isinstance(forms, dict) else forms
        blades = _top_blades(form, cycle.dim)
        total += len(w)
        for start in range(0, len(w), chunk):
            sl = slice(start, start + chunk)
            zc, Jc, wc = z[sl], J[sl], w[sl]
            coeffs = E.evaluate([c for _, c in blades], zc, check=False)
            f = np.zeros(len(wc), dtype=complex)
            for (sh, _), cv in zip(blades, coeffs):
                f += cv * _pullback_det(sh, Jc)
            if not np.all(np.isfinite(f)):
                raise E.EvaluationOverflowError("non-finite integrand on the cycle")
            wf = wc * f
            if nw == 1 and weights[0] is None:
                vals[0] += wf.sum()
                absum[0] += np.abs(wf).sum()
                continue
            gv = E.evaluate([g if g is not None else E.ONE for g in weights], zc)
            for k in range(nw):
                t = wf * gv[k]
                vals[k] += t.sum()
                absum[k] += np.abs(t).sum()
    return vals, absum, total


def pullback_integrate(form, cycle: Cycle, q: QuadratureSpec = None, weights=None):
    """Integrate a scalar form of degree ``cycle.dim`` over ``cycle``.

    Parameters
    ----------
    form : TensorForm or dict
        The form, or a map from chart id to the form in that chart.
    cycle : Cycle
    q : QuadratureSpec, optional
    weights : list of Expr, optional
        Extra scalar factors; when given, one result per factor is returned
        and the form is evaluated only once per level.

    Returns
    -------
    IntegralResult or list of IntegralResult
    """
    q = q or QuadratureSpec()
    many = weights is not None
    wlist = list(weights) if many else [None]
    trace = [[] for _ in wlist]
    prev = None
    eps = np.finfo(float).eps
    level = 0
    while True:
        counts = q.counts(cycle.dim, level)
        vals, absum, nodes = _integrate_level(form, cycle, counts, wlist, q.chunk)
        done = True
        for k in range(len(wlist)):
            floor = 64 * eps * absum[k]
            if prev is not None:
                err = max(abs(vals[k] - prev[k]), floor)
            elif q.levels == 1:
                err = floor
            else:
                err = math.inf
            trace[k].append((level, nodes, complex(vals[k]), float(err)))
            done = done and err <= max(q.tol, q.tol * abs(vals[k]))
        prev = vals
        level += 1
        if level < q.levels:
            continue
        if done or q.max_nodes is None:
            break
        if int(np.prod(q.counts(cycle.dim, level))) * len(cycle.patches) > q.max_nodes:
            break
    out = []
    for k in range(len(wlist)):
        _, nodes, value, err = trace[k][-1]
        converged = err <= max(q.tol, q.tol * abs(value))
        out.append(IntegralResult(value, float(err), nodes, bool(converged), trace[k]))
    return out if many else out[0]


def top_density_factor(n: int) -> complex:
    """``dz_1..dz_n dzbar_1..dzbar_n = factor * dV`` for the Lebesgue measure ``dV``."""
    return (-1) ** (n * (n - 1) // 2) * (-2j) ** n


# ---------------------------------------------------------------------------
# Monte Carlo


@dataclass(frozen=True)
class MCSpec:
    """Monte Carlo configuration.

    ``sampler`` is ``"mixture"`` (complex Gaussians at the centers plus a
    uniform share on the ball) or ``"uniform-ball"``.  The Gaussians have
    covariance ``width^2`` per complex coordinate, i.e. ``width^2 / 2`` per
    real coordinate; ``width = None`` means 1 unless a caller picks one.
    """

    budget: int = 100_000
    sampler: str = "mixture"
    seed: int = 0
    batches: int = 16
    uniform_fraction: float = 0.1
    radius: float = None
    tol: float = None
    width: float = None

    def __post_init__(self):
        if self.budget < 1000:
            raise ValueError("Monte Carlo budget must be at least 1000")
        if self.batches < 8:
            raise ValueError("Monte Carlo needs at least 8 batches")
        if self.sampler not in ("mixture", "uniform-ball"):
            raise ValueError(f"unknown sampler {self.sampler!r}")
        if self.width is not None and not self.width > 0:
            raise ValueError("mixture width must be positive")


def _ball_volume(n: int, R: float) -> float:
    return math.pi**n * R ** (2 * n) / math.factorial(n)


def _uniform_ball(rng, m: int, n: int, R: float) -> np.ndarray:
    g = rng.normal(size=(m, 2 * n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = R * rng.random(m) ** (1.0 / (2 * n))
    x = g * r[:, None]
    return x[:, 0::2] + 1j * x[:, 1::2]


def mc_integrate(integrand, sampler: MCSpec, n: int, centers=None, radius: float = None) -> IntegralResult:
    """Importance-sampled estimate of ``int_{C^n} f dV``.

    ``integrand`` maps an ``(m, n)`` complex array to values of ``f``.  The
    budget is split into ``sampler.batches`` equal batches with independent
    child seeds; the standard error is the spread of batch means.
    """
    centers = np.zeros((1, n), dtype=complex) if centers is None or len(centers) == 0 else np.asarray(centers, dtype=complex).reshape(-1, n)
    R = sampler.radius or radius
    if R is None:
        R = float(np.max(np.linalg.norm(centers, axis=1))) + 4.0
    frac = 1.0 if sampler.sampler == "uniform-ball" else sampler.uniform_fraction
    w = sampler.width or 1.0
    vol = _ball_volume(n, R)
    B = sampler.batches
    per = sampler.budget // B
    children = np.random.SeedSequence(sampler.seed).spawn(B)
    means = np.empty(B, dtype=complex)
    for b, ss in enumerate(children):
        rng = np.random.default_rng(ss)
        m_u = rng.binomial(per, frac) if 0 < frac < 1 else int(per * frac)
        m_g = per - m_u
        pts = [_uniform_ball(rng, m_u, n, R)]
        if m_g:
            which = rng.integers(len(centers), size=m_g)
            g = w * (rng.normal(size=(m_g, n)) + 1j * rng.normal(size=(m_g, n))) / math.sqrt(2)
            pts.append(centers[which] + g)
        z = np.concatenate(pts)
        dens = np.zeros(len(z))
        if frac > 0:
            inside = np.linalg.norm(z, axis=1) <= R
            dens += frac * inside / vol
        if frac < 1:
            d2 = np.abs(z[:, None, :] - centers[None, :, :]) ** 2
            dens += (1 - frac) * np.mean(np.exp(-d2.sum(-1) / w**2), axis=1) / (math.pi * w * w) ** n
        if np.any(dens <= 0):
            raise ZeroDivisionError("sample drawn where the sampling density vanishes")
        f = np.asarray(integrand(z), dtype=complex)
        means[b] = np.mean(f / dens)
    value = complex(np.mean(means))
    spread = np.sqrt(np.var(means.real, ddof=1) + np.var(means.imag, ddof=1))
    stderr = float(spread / math.sqrt(B))
    converged = sampler.tol is None or stderr <= sampler.tol
    return IntegralResult(value, stderr, per * B, converged, [(0, per * B, value, stderr)])


# ---------------------------------------------------------------------------
# truncation


def truncation_radius(scene=None, tol: float = 1e-10, C0: float = None, n: int = None, m: float = 0.0, t: float = 1.0) -> float:
    """Radius beyond which the Gaussian tail bound drops below ``tol``.

    Solves ``r^(2n+2m) exp(-t C0 (1 + r^2)) = tol`` for the root beyond the
    maximum of the left side, and never returns less than the smallest
    ball enclosing every declared zero plus one.
    """
    if C0 is None and scene is not None:
        C0 = scene.C0
    if C0 is None or not C0 > 0:
        raise ValueError("a positive growth constant C0 is required")
    if n is None:
        n = scene.n
    floor = 1.0
    if scene is not None:
        pts = [np.linalg.norm(z.point) for z in scene.point_components()]
        floor = (max(pts) if pts else 0.0) + 1.0
    if not math.isfinite(tol):
        return floor
    p = 2 * n + 2 * m
    a = t * C0

    def g(r):
        return p * math.log(r) - a * (1 + r * r) - math.log(tol)

    lo = max(math.sqrt(p / (2 * a)), 1e-9)
    if g(lo) <= 0:
        return max(lo, floor)
    hi = lo * 2
    while g(hi) > 0:
        hi *= 2
    return max(brentq(g, lo, hi, xtol=1e-14), floor)
