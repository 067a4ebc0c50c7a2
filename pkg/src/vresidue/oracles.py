"""Independent analytic reference values.

* :func:`coeff_oracle` -- residue of ``g dz / (z_1^a_1 ... z_n^a_n)`` read off
  as a Taylor coefficient of ``g``;
* :func:`vafa_sum` -- ``sum_p f(p) / H(p)`` over nondegenerate critical
  points of a superpotential;
* :func:`newton_critical_points` -- critical points of ``W`` from seeds;
* :func:`point_residue_nondegenerate` -- ``g(p) / det(ds/dz)(p)`` at a
  simple zero.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import expr as E
from .expr import Expr, Point

__all__ = [
    "CriticalPoint",
    "OracleError",
    "coeff_oracle",
    "vafa_sum",
    "newton_critical_points",
    "point_residue_nondegenerate",
    "jacobian",
]

log = logging.getLogger(__name__)

DEGENERATE_H = 1e-8


class OracleError(ValueError):
    """Input outside an oracle's domain (non-polynomial, degenerate point)."""


@dataclass(frozen=True)
class CriticalPoint:
    location: Point
    H: complex
    nondegenerate: bool
    grad_norm: float = 0.0


def coeff_oracle(g, exponents) -> complex:
    """Coefficient of ``z_1^(a_1-1) ... z_n^(a_n-1)`` in the polynomial ``g``.

    Examples
    --------
    >>> coeff_oracle(E.parse("z1*z2^3", 2), (2, 4))
    (1+0j)
    """
    n = len(exponents)
    if isinstance(g, str):
        g = E.parse(g, n)
    g = E._as_expr(g)
    if not E.is_polynomial(g) or not E.is_holomorphic(g):
        raise OracleError(f"coefficient oracle needs a holomorphic polynomial, got {g}")
    if any(a < 1 for a in exponents):
        raise OracleError("exponents must be positive")
    coeffs = E.polynomial_coefficients(g, n)
    return complex(coeffs.get(tuple(int(a) - 1 for a in exponents), 0j))


def _grad_hess(W: Expr, n: int):
    grad = [E.d_z(W, i) for i in range(n)]
    hess = [[E.d_z(grad[i], j) for j in range(n)] for i in range(n)]
    return grad, hess


def _eval_vec(exprs, z) -> np.ndarray:
    return np.array([complex(v) for v in E.evaluate(exprs, z)])


def newton_critical_points(W, seeds, tol: float = 1e-10, n: int = None, max_iter: int = 100,
                           dedup: float = 1e-6) -> list:
    """Newton iteration on ``dW = 0`` from each seed.

    A seed converges when ``|dW| <= tol`` and the last step is below
    ``1e-10 (1 + |z|)``.  Non-converging seeds are dropped with a warning;
    points closer than ``dedup`` are merged.  Each point carries the Hessian
    determinant and a nondegeneracy flag (``|H| > 1e-8``).
    """
    seeds = [s if isinstance(s, Point) else Point("C", np.atleast_1d(s)) for s in seeds]
    if n is None:
        n = seeds[0].dim if seeds else 1
    if isinstance(W, str):
        W = E.parse(W, n)
    if not E.is_holomorphic(W):
        raise OracleError("superpotential must be holomorphic")
    grad, hess = _grad_hess(W, n)
    flat_hess = [h for row in hess for h in row]
    found = []
    for seed in seeds:
        z = seed.array().copy()
        ok = False
        for _ in range(max_iter):
            gv = _eval_vec(grad, z)
            Hm = _eval_vec(flat_hess, z).reshape(n, n)
            try:
                step = np.linalg.solve(Hm, gv)
            except np.linalg.LinAlgError:
                step = np.linalg.lstsq(Hm, gv, rcond=None)[0]
            z = z - step
            gnorm = float(np.linalg.norm(_eval_vec(grad, z)))
            if gnorm <= tol and np.linalg.norm(step) <= 1e-10 * (1 + np.linalg.norm(z)):
                ok = True
                break
        if not ok:
            gnorm = float(np.linalg.norm(_eval_vec(grad, z)))
            if gnorm <= tol:
                ok = True
        if not ok:
            log.warning("Newton from seed %s did not converge (|dW| = %.3g)", seed.coords, gnorm)
            continue
        if any(np.linalg.norm(z - c.location.array()) < dedup for c in found):
            continue
        H = complex(np.linalg.det(_eval_vec(flat_hess, z).reshape(n, n)))
        found.append(CriticalPoint(Point(seed.chart, tuple(z)), H, abs(H) > DEGENERATE_H, gnorm))
    return found


def vafa_sum(sc, f, points) -> complex:
    """``sum_p f(p) / H(p)`` with ``H = det(d_i d_j W)``."""
    if sc.W is None:
        raise OracleError("scene has no superpotential")
    n = sc.n
    if isinstance(f, str):
        f = E.parse(f, n)
    f = E._as_expr(f)
    _, hess = _grad_hess(sc.W, n)
    flat = [h for row in hess for h in row]
    total = 0j
    for p in points:
        loc = p.location if isinstance(p, CriticalPoint) else p
        z = loc.array()
        H = complex(np.linalg.det(_eval_vec(flat, z).reshape(n, n)))
        if abs(H) <= DEGENERATE_H or (isinstance(p, CriticalPoint) and not p.nondegenerate):
            raise OracleError(f"degenerate critical point at {loc.coords}")
        total += complex(E.evaluate(f, z)) / H
    return total


def jacobian(sc, chart: str = None):
    """Matrix of Exprs ``d s_i / d z_j`` on a chart."""
    s = sc.s(chart)
    return [[E.d_z(si, j) for j in range(sc.n)] for si in s]


def point_residue_nondegenerate(sc, p) -> complex:
    """Residue at a simple zero: ``g(p) / det(ds/dz)(p)`` in the chart of ``p``."""
    if not isinstance(p, Point):
        p = p.location()
    z = p.array()
    s = sc.s(p.chart)
    sv = _eval_vec(list(s), z)
    if np.max(np.abs(sv)) > 1e-9:
        raise OracleError(f"s does not vanish at {p.coords}")
    J = np.array(_eval_vec([x for row in jacobian(sc, p.chart) for x in row], z)).reshape(sc.n, sc.n)
    det = complex(np.linalg.det(J))
    if abs(det) <= DEGENERATE_H:
        raise OracleError(f"degenerate zero at {p.coords}")
    return complex(E.evaluate(sc.g(p.chart), z)) / det
