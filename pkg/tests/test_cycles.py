import math

import numpy as np
import pytest

from vresidue import expr as E
from vresidue.algebra import TensorForm
from vresidue.cycles import (
    CycleError,
    MCSpec,
    QuadratureSpec,
    ball_cycle,
    mc_integrate,
    pullback_integrate,
    sphere_cycle,
    top_density_factor,
    torus_cycle,
    truncation_radius,
    tube_cycle,
)
from vresidue.scene import p2_scene

TWO_PI_I = 2j * math.pi


def test_cauchy_unit_circle():
    form = TensorForm.blade(1, E.recip(E.zvar(0)), dz=[0])
    r = pullback_integrate(form, torus_cycle([1.0]))
    assert abs(r.value - TWO_PI_I) < 1e-12


def test_product_cauchy():
    form = TensorForm.blade(2, E.recip(E.zvar(0) * E.zvar(1)), dz=[0, 1])
    r = pullback_integrate(form, torus_cycle([1.0, 0.5], center=[0, 0]))
    assert abs(r.value - TWO_PI_I**2) < 1e-11


def test_holomorphic_integrand_vanishes():
    form = TensorForm.blade(1, E.zvar(0), dz=[0])
    assert abs(pullback_integrate(form, torus_cycle([1.0])).value) < 1e-13


def test_framed_torus_keeps_orientation():
    # z = A^-1 w with a non-diagonal complex frame still encircles 0 positively
    A = np.array([[1.0, 0.5j], [0.2, 1.0 - 0.3j]])
    form = TensorForm.blade(2, E.recip(E.zvar(0) * E.zvar(1)), dz=[0, 1])
    cyc = torus_cycle([0.3, 0.3], center=[0, 0], frame=np.linalg.inv(A))
    r = pullback_integrate(form, cyc)
    assert cyc.dim == 2
    # A is diagonally dominant, so the w-torus deforms to the z-torus off {z1 z2 = 0}
    assert abs(r.value / TWO_PI_I**2 - 1) < 1e-10


def test_singular_frame_rejected():
    with pytest.raises(CycleError):
        torus_cycle([1.0, 1.0], frame=np.zeros((2, 2)))


def test_sphere_volume_by_stokes():
    # d(zbar1 dz1 dz2 dzbar2) = dz1 dz2 dzbar1 dzbar2 = 4 dV, so the boundary integral is 4 vol(B^4) = 2 pi^2
    form = TensorForm.blade(2, E.zbvar(0), dz=[0, 1], dzb=[1])
    r = pullback_integrate(form, sphere_cycle(1.0, n=2), QuadratureSpec(nodes=16))
    assert top_density_factor(2) == 4
    assert abs(r.value - 2 * math.pi**2) < 1e-10


def test_sphere_n1_is_circle():
    form = TensorForm.blade(1, E.recip(E.zvar(0)), dz=[0])
    r = pullback_integrate(form, sphere_cycle(2.0, n=1))
    assert abs(r.value - TWO_PI_I) < 1e-12


@pytest.mark.parametrize("r", [0.0, -1.0, float("nan")])
def test_degenerate_sphere_rejected(r):
    with pytest.raises(CycleError):
        sphere_cycle(r, n=2)


def test_ball_volume():
    n = 2
    form = TensorForm.blade(n, 1, dz=[0, 1], dzb=[0, 1])
    r = pullback_integrate(form, ball_cycle(1.0, n=n), QuadratureSpec(nodes=12))
    assert abs(r.value / top_density_factor(n) - math.pi**2 / 2) < 1e-10


def test_tube_has_boundary_dimension():
    sc = p2_scene(0.0)
    curve = next(z for z in sc.zeros if z.kind == "curve")
    cyc = tube_cycle(curve, 0.05, sc)
    assert cyc.dim == 3
    assert len({p.chart for p in cyc.patches}) >= 2


def test_quadrature_node_floor():
    with pytest.raises(ValueError):
        QuadratureSpec(nodes=3)


def test_quadrature_refinement_estimate():
    form = TensorForm.blade(1, E.exp(E.zvar(0)) * E.recip(E.zvar(0) ** 3), dz=[0])
    r = pullback_integrate(form, torus_cycle([1.0]), QuadratureSpec(nodes=32, levels=3))
    assert abs(r.value - TWO_PI_I / 2) < 1e-12
    assert r.converged
    assert len(r.trace) == 3


@pytest.mark.parametrize("kw", [{"budget": 10}, {"batches": 2}, {"sampler": "grid"}])
def test_mcspec_invariants(kw):
    with pytest.raises(ValueError):
        MCSpec(**kw)


def test_mc_gaussian_integral():
    f = lambda z: np.exp(-np.sum(np.abs(z) ** 2, axis=1))
    r = mc_integrate(f, MCSpec(budget=200_000, seed=3), 2)
    assert abs(r.value - math.pi**2) < 4 * r.error + 1e-12
    assert r.error > 0


def test_mc_is_reproducible():
    f = lambda z: np.exp(-np.sum(np.abs(z) ** 2, axis=1))
    a = mc_integrate(f, MCSpec(budget=10_000, seed=7), 1)
    b = mc_integrate(f, MCSpec(budget=10_000, seed=7), 1)
    assert a.value == b.value


def test_truncation_radius_bound():
    R = truncation_radius(C0=1.0, n=1, tol=1e-10)
    assert R ** 2 * math.exp(-(1 + R * R)) <= 1.0001e-10
    with pytest.raises(ValueError):
        truncation_radius(C0=0.0, n=1)
