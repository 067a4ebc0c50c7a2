"""Problem data: charts, bundle trivializations, metric, section and weight.

A :class:`Scene` describes a rank-``n`` bundle ``V`` over an ``n``-dimensional
complex manifold, given by charts with holomorphic frames, a holomorphic
section ``s`` and a weight ``psi`` (a section of ``K_M (x) det V``), together
with the declared components of the zero locus of ``s``.

In every chart the weight is stored as a coefficient ``g`` of
``dz_1..dz_n (x) e_1..e_n``.  Inside the algebra of bundle-valued forms it is
represented by the interleaved product ``g e_1 dz_1 e_2 dz_2 ... e_n dz_n``,
which equals ``(-1)^(n(n+1)/2) g dz_1..dz_n e_1..e_n`` in canonical order.
With this identification the Koszul and exponential residues of
``dz (x) e`` against ``s = z`` are both ``+1``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import expr as E
from .algebra import HermitianMetric, TensorForm, dbar
from .expr import Expr

__all__ = [
    "Chart",
    "Transition",
    "ZeroComponent",
    "Scene",
    "SceneError",
    "GrowthReport",
    "weight_sign",
    "affine_scene",
    "monomial_scene",
    "lg_scene",
    "p2_scene",
    "xi",
    "s_bar",
    "norm_s_sq",
    "action_S",
    "growth_probe",
]

log = logging.getLogger(__name__)


class SceneError(ValueError):
    """A scene failed validation."""


def weight_sign(n: int) -> int:
    """Sign relating the interleaved weight blade to canonical order."""
    return -1 if (n * (n + 1) // 2) % 2 else 1


@dataclass(frozen=True)
class Chart:
    id: str
    n: int
    names: tuple = ()

    def __post_init__(self):
        if self.n < 1:
            raise SceneError("chart dimension must be at least 1")
        names = tuple(self.names) or tuple(f"z{i + 1}" for i in range(self.n))
        if len(names) != self.n or len(set(names)) != self.n:
            raise SceneError(f"chart {self.id}: need {self.n} distinct coordinate names")
        object.__setattr__(self, "names", names)


@dataclass(frozen=True)
class Transition:
    """Change of chart from ``source`` to ``target``.

    ``coords[j]`` is the j-th target coordinate as a function of the source
    coordinates.  ``bundle`` is the matrix ``G`` with ``s_target = G s_source``
    for section coefficients.
    """

    source: str
    target: str
    coords: tuple
    bundle: tuple


@dataclass(frozen=True)
class ZeroComponent:
    """A declared connected component of the zero locus.

    ``kind`` is ``"point"`` (with ``chart`` and ``point``) or ``"curve"``
    (with ``param``: per chart, coordinate Exprs in one complex parameter,
    written with the variable ``z1``).  ``line`` optionally names the
    homogeneous coordinate that vanishes on a projective coordinate line.
    """

    label: str
    kind: str
    chart: str
    point: tuple = None
    param: dict = None
    line: int = None

    def __post_init__(self):
        if self.kind not in ("point", "curve"):
            raise SceneError(f"unknown component kind {self.kind!r}")
        if self.kind == "point":
            if self.point is None:
                raise SceneError(f"point component {self.label} needs coordinates")
            object.__setattr__(self, "point", tuple(complex(c) for c in self.point))
        elif not self.param:
            raise SceneError(f"curve component {self.label} needs a parametrization")

    def location(self) -> E.Point:
        if self.kind != "point":
            raise SceneError(f"{self.label} is not an isolated point")
        return E.Point(self.chart, self.point)


@dataclass(frozen=True)
class Scene:
    """Validated problem datum.

    Build instances with :func:`affine_scene`, :func:`lg_scene`,
    :func:`p2_scene` or the config loader, then call :meth:`validate`.
    """

    name: str
    n: int
    charts: tuple
    section: dict
    weight: dict
    metrics: dict = field(default_factory=dict)
    transitions: dict = field(default_factory=dict)
    zeros: tuple = ()
    W: Expr = None
    C0: float = None
    compact_radius: float = None
    kind: str = "affine"
    meta: dict = field(default_factory=dict)

    # access ---------------------------------------------------------------
    def chart(self, cid=None) -> Chart:
        if cid is None:
            return self.charts[0]
        for c in self.charts:
            if c.id == cid:
                return c
        raise SceneError(f"unknown chart {cid!r}")

    @property
    def default_chart(self) -> str:
        return self.charts[0].id

    @property
    def single_chart(self) -> bool:
        return len(self.charts) == 1

    def metric(self, cid=None) -> HermitianMetric:
        cid = cid or self.default_chart
        return self.metrics.get(cid) or HermitianMetric.identity(self.n)

    def s(self, cid=None) -> tuple:
        return self.section[cid or self.default_chart]

    def g(self, cid=None) -> Expr:
        return self.weight[cid or self.default_chart]

    def section_form(self, cid=None) -> TensorForm:
        """``s = sum_i s_i e_i`` as an element of ``A^0(V)``."""
        n = self.n
        out = TensorForm.zero(n)
        for i, si in enumerate(self.s(cid)):
            out = out + TensorForm.blade(n, si, e=[i])
        return out

    def psi_form(self, cid=None) -> TensorForm:
        """The weight as an element of ``Omega^(n,0)(wedge^n V)``."""
        n = self.n
        return TensorForm.blade(n, self.g(cid) * weight_sign(n), dz=range(n), e=range(n))

    def with_weight(self, g, cid=None) -> "Scene":
        """Copy with a new weight coefficient (single chart scenes)."""
        if not self.single_chart and cid is None:
            raise SceneError("multi-chart scenes need per-chart weights")
        g = _coerce(g, self.chart(cid))
        w = dict(self.weight)
        w[cid or self.default_chart] = g
        return replace(self, weight=w)

    def scaled(self, t: float) -> "Scene":
        """Copy with ``s`` replaced by ``t s``."""
        sec = {c: tuple(si * t for si in v) for c, v in self.section.items()}
        return replace(self, section=sec, name=f"{self.name}*{t:g}")

    def point_components(self):
        return [z for z in self.zeros if z.kind == "point"]

    # validation -----------------------------------------------------------
    def validate(self, samples: int = 50, seed: int = 0) -> "Scene":
        """Check holomorphy, zero membership and overlap consistency."""
        if not self.charts:
            raise SceneError("scene has no charts")
        ids = [c.id for c in self.charts]
        if len(set(ids)) != len(ids):
            raise SceneError("chart ids must be distinct")
        for c in self.charts:
            if c.n != self.n:
                raise SceneError(f"chart {c.id} has dimension {c.n}, expected {self.n}")
            sec = self.section.get(c.id)
            if sec is None or len(sec) != self.n:
                raise SceneError(f"chart {c.id}: section needs {self.n} components (rank V = dim M)")
            if c.id not in self.weight:
                raise SceneError(f"chart {c.id}: missing weight coefficient")
            for i, si in enumerate(sec):
                _check_holomorphic(si, f"s{i + 1} on chart {c.id}")
                if E.max_index(si) >= self.n:
                    raise SceneError(f"s{i + 1} on chart {c.id} uses an undefined coordinate")
            _check_holomorphic(self.weight[c.id], f"weight on chart {c.id}")
            if c.id in self.metrics:
                h = self.metrics[c.id]
                if h.n != self.n:
                    raise SceneError(f"metric on chart {c.id} has wrong size")
        if self.W is not None:
            _check_holomorphic(self.W, "superpotential")
        rng = np.random.default_rng(seed)
        for c in self.charts:
            if c.id in self.metrics:
                pts = _random_points(rng, 8, self.n)
                self.metrics[c.id].check_positive(pts)
        for z in self.zeros:
            self._check_zero(z, rng)
        for (a, b), tr in self.transitions.items():
            self._check_transition(tr, rng, samples)
        return self

    def _check_zero(self, z: ZeroComponent, rng) -> None:
        if z.kind == "point":
            p = np.asarray(z.point, dtype=complex)
            if p.shape != (self.n,):
                raise SceneError(f"component {z.label}: wrong coordinate count")
            vals = E.evaluate(list(self.s(z.chart)), p)
            if max(abs(complex(v)) for v in vals) > 1e-10:
                raise SceneError(f"component {z.label}: s does not vanish at the declared point")
            return
        u = np.concatenate([[0.0], rng.normal(size=12) + 1j * rng.normal(size=12)])
        for cid, exprs in z.param.items():
            coords = np.stack([_eval_1d(e, u) for e in exprs], axis=-1)
            vals = E.evaluate(list(self.s(cid)), coords)
            worst = max(float(np.max(np.abs(v))) for v in vals)
            if worst > 1e-10:
                raise SceneError(f"component {z.label}: s does not vanish on the declared curve")

    def _check_transition(self, tr: Transition, rng, samples: int) -> None:
        src, tgt = tr.source, tr.target
        pts = _random_points(rng, samples * 4, self.n)
        try:
            tcoords = np.stack(E.evaluate(list(tr.coords), pts, check=False), axis=-1)
        except E.SingularEvaluationError as exc:
            raise SceneError(f"transition {src}->{tgt} is undefined at generic points") from exc
        ok = np.all(np.isfinite(tcoords), axis=-1) & (np.max(np.abs(tcoords), axis=-1) < 1e3)
        pts, tcoords = pts[ok][:samples], tcoords[ok][:samples]
        n = self.n
        G = np.stack(
            [np.stack(E.evaluate(list(row), pts), axis=-1) for row in tr.bundle], axis=-2
        )
        s_src = np.stack(E.evaluate(list(self.s(src)), pts), axis=-1)
        s_tgt = np.stack(E.evaluate(list(self.s(tgt)), tcoords), axis=-1)
        pushed = np.einsum("pij,pj->pi", G, s_src)
        scale = 1 + np.max(np.abs(s_tgt))
        if np.max(np.abs(pushed - s_tgt)) > 1e-9 * scale:
            raise SceneError(f"section is inconsistent across {src}->{tgt}")
        D = np.stack(
            [
                np.stack(E.evaluate([E.d_z(c, j) for j in range(n)], pts), axis=-1)
                for c in tr.coords
            ],
            axis=-2,
        )
        lhs = E.evaluate(self.g(tgt), tcoords) * np.linalg.det(D)
        rhs = E.evaluate(self.g(src), pts) * np.linalg.det(G)
        scale = 1 + np.max(np.abs(rhs))
        if np.max(np.abs(lhs - rhs)) > 1e-9 * scale:
            raise SceneError(f"weight is inconsistent across {src}->{tgt}")

    def fingerprint(self) -> dict:
        """Canonical plain-data description used for hashing."""
        return {
            "name": self.name,
            "n": self.n,
            "kind": self.kind,
            "charts": [[c.id, list(c.names)] for c in self.charts],
            "section": {k: [str(e) for e in v] for k, v in sorted(self.section.items())},
            "weight": {k: str(v) for k, v in sorted(self.weight.items())},
            "metrics": {
                k: [[str(x) for x in row] for row in h.entries] for k, h in sorted(self.metrics.items())
            },
            "transitions": {
                f"{a}->{b}": [[str(c) for c in tr.coords], [[str(x) for x in r] for r in tr.bundle]]
                for (a, b), tr in sorted(self.transitions.items())
            },
            "zeros": [
                [z.label, z.kind, z.chart, [repr(c) for c in (z.point or ())], z.line]
                for z in self.zeros
            ],
            "W": None if self.W is None else str(self.W),
            "C0": self.C0,
            "compact_radius": self.compact_radius,
        }


def _check_holomorphic(e: Expr, what: str) -> None:
    if not E.is_holomorphic(e):
        raise SceneError(f"{what} is not holomorphic")


def _random_points(rng, count: int, n: int) -> np.ndarray:
    return rng.normal(size=(count, n)) + 1j * rng.normal(size=(count, n))


def _eval_1d(e: Expr, u: np.ndarray) -> np.ndarray:
    return E.evaluate(e, u[:, None]) * np.ones(u.shape)


def _coerce(x, chart: Chart) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, str):
        return E.parse(x, chart.n)
    return E.const(x)


# ---------------------------------------------------------------------------
# builders


def affine_scene(
    section,
    weight=1,
    n: int = None,
    metric=None,
    zeros=None,
    name: str = "affine",
    W=None,
    C0=None,
    compact_radius=None,
    kind: str = "affine",
) -> Scene:
    """Single-chart scene on ``C^n``.

    ``section`` and ``weight`` accept Exprs or strings in ``z1..zn``.
    ``zeros`` is a list of points (coordinate tuples) or ZeroComponents; the
    origin is declared when omitted and ``s(0) = 0``.
    """
    if n is None:
        n = len(section)
    chart = Chart("C", n)
    sec = tuple(_coerce(x, chart) for x in section)
    g = _coerce(weight, chart)
    comps = []
    if zeros is None:
        origin = np.zeros(n, dtype=complex)
        if all(abs(complex(E.evaluate(si, origin))) == 0 for si in sec):
            comps.append(ZeroComponent("origin", "point", "C", tuple(origin)))
    else:
        for k, z in enumerate(zeros):
            if isinstance(z, ZeroComponent):
                comps.append(z)
            else:
                comps.append(ZeroComponent(f"p{k}", "point", "C", tuple(np.atleast_1d(z))))
    metrics = {}
    if metric is not None:
        metrics["C"] = metric if isinstance(metric, HermitianMetric) else HermitianMetric(
            [[_coerce(x, chart) for x in row] for row in metric]
        )
    return Scene(
        name=name,
        n=n,
        charts=(chart,),
        section={"C": sec},
        weight={"C": g},
        metrics=metrics,
        zeros=tuple(comps),
        W=None if W is None else _coerce(W, chart),
        C0=C0,
        compact_radius=compact_radius,
        kind=kind,
    ).validate()


def monomial_scene(exponents, weight=1, name: str = None) -> Scene:
    """``s = (z_1^a_1, ..., z_n^a_n)`` with its single zero at the origin."""
    n = len(exponents)
    if any(a < 1 for a in exponents):
        raise SceneError("monomial exponents must be positive")
    sec = [E.zvar(i) ** int(a) for i, a in enumerate(exponents)]
    name = name or "monomial-" + "-".join(str(a) for a in exponents)
    return affine_scene(sec, weight, n=n, name=name)


def _univariate_roots(p: Expr) -> list:
    coeffs = E.polynomial_coefficients(p, 1)
    deg = max(k[0] for k in coeffs)
    arr = [coeffs.get((d,), 0) for d in range(deg, -1, -1)]
    return list(np.roots(arr)) if deg > 0 else []


def _snap(r: complex) -> complex:
    """Round a numeric root onto nearby exact values when possible."""
    re, im = round(r.real), round(r.imag)
    if abs(r.real - re) < 1e-9:
        r = complex(re, r.imag)
    if abs(r.imag - im) < 1e-9:
        r = complex(r.real, im)
    return r


def lg_scene(W, n: int = 1, observable=1, zeros=None, name: str = "lg", names=None) -> Scene:
    """Landau-Ginzburg scene: ``V`` is the cotangent bundle and ``s = dW``.

    The weight coefficient is the observable ``f`` (``psi = f dz (x) dz^dual``
    under the frame ``dz_i`` of ``V``).  Without declared zeros the critical
    points are found by root solving when ``n = 1`` or when each ``dW/dz_i``
    depends on ``z_i`` only.
    """
    chart = Chart("C", n, tuple(names) if names else ())
    if isinstance(W, str):
        W = E.parse(W, n, names)
    if not E.is_holomorphic(W):
        raise SceneError("superpotential must be holomorphic")
    sec = tuple(E.d_z(W, i) for i in range(n))
    if zeros is None:
        per_axis = []
        for i, si in enumerate(sec):
            if E.max_index(si) > i or any(
                E.d_z(si, j) != E.ZERO for j in range(n) if j != i
            ):
                raise SceneError("declare the critical points of a non-separable superpotential")
            one = E.substitute(si, [E.zvar(0) if j == i else E.ZERO for j in range(n)])
            per_axis.append(sorted({_snap(complex(r)) for r in _univariate_roots(one)}, key=lambda c: (c.real, c.imag)))
        grid = np.array(np.meshgrid(*per_axis, indexing="ij")).reshape(n, -1).T
        zeros = [tuple(p) for p in grid]
    return affine_scene(sec, observable, n=n, zeros=zeros, name=name, W=W, kind="lg")


def p2_scene(t: float, ell=(1, 0, 0), name: str = None) -> Scene:
    """The projective plane with ``V = O(2) + O(2)`` and ``s_t = (x0 x1, (x0 + t(x1 - x2)) x2)``.

    ``ell`` gives the linear form ``l(x) = l0 x0 + l1 x1 + l2 x2``, a section
    of ``O(1) = K (x) det V``.  Chart ``Uk`` uses the affine coordinates
    ``x_j / x_k`` for ``j != k`` in increasing order.
    """
    t = float(t)
    ell = tuple(ell)
    charts = []
    section, weight, metrics = {}, {}, {}
    homog = {}
    for k in range(3):
        others = [j for j in range(3) if j != k]
        cid = f"U{k}"
        charts.append(Chart(cid, 2, tuple(f"x{j}/x{k}" for j in others)))
        X = [E.ONE] * 3
        for pos, j in enumerate(others):
            X[j] = E.zvar(pos)
        homog[cid] = X
        s1 = X[0] * X[1]
        s2 = (X[0] + E.const(t) * (X[1] - X[2])) * X[2]
        section[cid] = (s1, s2)
        lin = sum((E.const(c) * X[j] for j, c in enumerate(ell)), E.ZERO)
        weight[cid] = lin * (-1) ** k
        metrics[cid] = HermitianMetric.identity(2)
    transitions = {}
    for a in range(3):
        for b in range(3):
            if a == b:
                continue
            X = homog[f"U{a}"]
            coords = tuple(X[j] / X[b] for j in range(3) if j != b)
            f = E.recip(X[b]) ** 2
            G = ((f, E.ZERO), (E.ZERO, f))
            transitions[(f"U{a}", f"U{b}")] = Transition(f"U{a}", f"U{b}", coords, G)

    def point(label, x):
        x = [complex(v) for v in x]
        k = int(np.argmax(np.abs(x)))
        coords = tuple(x[j] / x[k] for j in range(3) if j != k)
        return ZeroComponent(label, "point", f"U{k}", coords)

    if t != 0:
        zeros = [
            point("[0,1,0]", (0, 1, 0)),
            point("[1,0,0]", (1, 0, 0)),
            point(f"[{t:g},0,1]", (t, 0, 1)),
            point("[0,1,1]", (0, 1, 1)),
        ]
    else:
        u = E.zvar(0)
        line = ZeroComponent("L0", "curve", "U1", param={"U1": (E.ZERO, u), "U2": (E.ZERO, u)}, line=0)
        zeros = [line, point("[1,0,0]", (1, 0, 0))]
    return Scene(
        name=name or f"p2-t{t:g}",
        n=2,
        charts=tuple(charts),
        section=section,
        weight=weight,
        metrics=metrics,
        transitions=transitions,
        zeros=tuple(zeros),
        kind="projective-plane",
        meta={"t": t, "ell": ell},
    ).validate()


def homogeneous(chart_id: str, coords) -> np.ndarray:
    """Homogeneous coordinates of projective-plane chart points ``(..., 2) -> (..., 3)``."""
    k = int(chart_id[1:])
    coords = np.asarray(coords, dtype=complex)
    out = np.ones(coords.shape[:-1] + (3,), dtype=complex)
    others = [j for j in range(3) if j != k]
    for pos, j in enumerate(others):
        out[..., j] = coords[..., pos]
    return out


# ---------------------------------------------------------------------------
# derived data


def norm_s_sq(sc: Scene, chart=None) -> Expr:
    """``|s|^2_h = sum h_{i jbar} s_i conj(s_j)``."""
    h = sc.metric(chart)
    s = sc.s(chart)
    sb = [E.conj_expr(x) for x in s]
    out = E.ZERO
    for i in range(sc.n):
        for j in range(sc.n):
            if not h[i, j].is_zero():
                out = out + h[i, j] * s[i] * sb[j]
    return out


def _pair_with_s(sc: Scene, chart) -> list:
    """Coefficients ``sum_j h_{i jbar} conj(s_j)`` of ``(*, s)_h``."""
    h = sc.metric(chart)
    sb = [E.conj_expr(x) for x in sc.s(chart)]
    return [sum((h[i, j] * sb[j] for j in range(sc.n)), E.ZERO) for i in range(sc.n)]


def xi(sc: Scene, chart=None) -> TensorForm:
    """``xi = -(*, s)_h`` as a section of ``V*``."""
    out = TensorForm.zero(sc.n)
    for i, c in enumerate(_pair_with_s(sc, chart)):
        out = out + TensorForm.blade(sc.n, -c, es=[i])
    return out


def s_bar(sc: Scene, chart=None, normalized: bool = True) -> TensorForm:
    """``(*, s)_h / |s|^2_h``; with ``normalized=False`` the numerator only."""
    inv = E.recip(norm_s_sq(sc, chart)) if normalized else E.ONE
    out = TensorForm.zero(sc.n)
    for i, c in enumerate(_pair_with_s(sc, chart)):
        out = out + TensorForm.blade(sc.n, c * inv, es=[i])
    return out


def action_S(sc: Scene, chart=None, t: float = 1.0, convention: str = "deform") -> TensorForm:
    """The exponent ``S = -|s|^2 + dbar xi``, scaled by ``t``.

    ``convention="deform"`` returns ``t S``; ``convention="scale"`` returns
    ``S`` for the section ``t s``, i.e. ``-t^2 |s|^2 + t dbar xi``.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    dxi = dbar(xi(sc, chart))
    base = norm_s_sq(sc, chart)
    if convention == "deform":
        a, b = t, t
    elif convention == "scale":
        a, b = t * t, t
    else:
        raise ValueError(f"unknown convention {convention!r}")
    return TensorForm.scalar(sc.n, -base * _num(a)) + dxi.scale(_num(b))


def _num(x: float) -> Expr:
    return E.const(x)


# ---------------------------------------------------------------------------
# growth


@dataclass
class GrowthReport:
    """Shell infima of ``|s|^2 / (1 + d^2)``."""

    shells: list
    infima: list
    C0: float
    warning: bool
    message: str

    def as_dict(self) -> dict:
        return {
            "shells": list(self.shells),
            "infima": list(self.infima),
            "C0": self.C0,
            "warning": self.warning,
            "message": self.message,
        }


def _sphere_samples(n: int, count: int, rng) -> np.ndarray:
    """Unit vectors in C^n: coordinate axes, their pairwise diagonals and random directions."""
    dirs = [np.eye(n, dtype=complex)[i] for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            v = np.zeros(n, dtype=complex)
            v[i] = v[j] = 1 / math.sqrt(2)
            dirs.append(v)
    g = rng.normal(size=(count, n)) + 1j * rng.normal(size=(count, n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return np.concatenate([np.array(dirs), g])


def growth_probe(sc: Scene, shells=None, samples: int = 256, seed: int = 0) -> GrowthReport:
    """Sample ``|s|^2 / (1 + d^2)`` on spheres about the origin.

    The reported candidate ``C0`` is the smallest shell infimum.  A warning
    is raised when it is (numerically) zero or when the infima decay along
    the shells, both of which contradict a lower bound ``|s|^2 >= C0 (1 + d^2)``.
    """
    if not sc.single_chart:
        raise SceneError("growth_probe needs a single-chart scene")
    if shells is None:
        r0 = max([np.linalg.norm(z.point) for z in sc.point_components()] + [0.0]) + 1.0
        shells = [r0 * 2.0**k for k in range(2, 7)]
    shells = sorted(float(r) for r in shells)
    rng = np.random.default_rng(seed)
    dirs = _sphere_samples(sc.n, samples, rng)
    ssq = norm_s_sq(sc)
    infima = []
    for r in shells:
        vals = E.evaluate(ssq, r * dirs).real / (1 + r * r)
        infima.append(float(np.min(vals)))
    C0 = min(infima)
    msgs = []
    warning = False
    if C0 <= 1e-8:
        warning = True
        msgs.append("|s|^2/(1+d^2) reaches zero on a probed shell")
    elif len(infima) >= 3 and all(b < a for a, b in zip(infima, infima[1:])) and infima[-1] < 0.5 * infima[0]:
        warning = True
        msgs.append("|s|^2/(1+d^2) decays along the probed shells")
    if warning:
        log.warning("growth probe on %s: %s", sc.name, "; ".join(msgs))
    return GrowthReport(shells, infima, C0, warning, "; ".join(msgs) or "ok")
