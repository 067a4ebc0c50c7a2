import numpy as np
import pytest

from vresidue import checks
from vresidue import expr as E
from vresidue.algebra import TensorForm, dbar
from vresidue.cycles import CycleError, QuadratureSpec
from vresidue.koszul import (
    CutoffFn,
    beta_chain,
    form_is_zero,
    quasi_iso_check,
    radius_independence,
    residue_boundary,
    residue_contour,
    trace,
    trace_dbar,
)
from vresidue.oracles import coeff_oracle
from vresidue.scene import affine_scene, lg_scene, monomial_scene, p2_scene


def test_cauchy_calibration():
    r = residue_contour(affine_scene(["z1"], 1, n=1))
    assert abs(r.value - 1) < 1e-12


def test_cauchy_boundary_matches():
    sc = affine_scene(["z1"], 1, n=1)
    r = residue_boundary(sc, sc.zeros[0], 1.0)
    assert abs(r.value - 1) < 1e-12


@pytest.mark.parametrize("a,g", [((2, 3), "z1*z2^2"), ((1, 2), "z2"), ((2, 1, 1), "z1"), ((3,), "z1^2 + 5")])
def test_contour_and_boundary_match_oracle(a, g):
    sc = monomial_scene(a, g)
    ref = coeff_oracle(g, a)
    c = residue_contour(sc, q=QuadratureSpec(nodes=16))
    b = residue_boundary(sc, sc.zeros[0], 1.0, checks.monomial_quadrature(a))
    assert abs(c.value - ref) < 1e-10
    assert abs(b.value - ref) < 1e-7


def test_off_monomial_weight_gives_zero():
    sc = monomial_scene((2, 2), "z1")
    assert abs(residue_contour(sc, q=QuadratureSpec(nodes=16)).value) < 1e-12


def test_chain_shapes_and_ladder():
    sc = monomial_scene((1, 2), "z2")
    ch = beta_chain(sc)
    assert len(ch.betas) == 2
    assert set(ch.betas[0].shapes()) == {(2, 0, 1, 0)}
    assert set(ch.betas[1].shapes()) == {(2, 1, 0, 0)}
    assert all(form_is_zero(d) for d in ch.ladder().values())


def test_ladder_on_p2_charts():
    sc = p2_scene(0.3)
    for c in sc.charts:
        assert all(form_is_zero(d) for d in beta_chain(sc, c.id).ladder().values())


def test_ladder_defect_is_detected():
    sc = monomial_scene((1, 1), 1)
    ch = beta_chain(sc)
    wrong = ch.betas[0].scale(2)
    from vresidue.algebra import wedge

    assert not form_is_zero(wedge(ch.s, wrong) - ch.psi)


def test_contour_rejects_torus_through_zeros():
    sc = affine_scene(["z1 - 1"], 1, n=1, zeros=[(1,)])
    with pytest.raises(CycleError):
        residue_contour(sc, center=[0], radii=[1.0])


def test_linearized_torus_at_sheared_zero():
    # s = (z2, z1 + 3 z2) pairs s1 with z2, so the coordinate torus has the wrong orientation
    sc = affine_scene(["z2", "z1 + 3*z2"], 1)
    lin = residue_contour(sc, radii=0.1, linearize=True)
    assert abs(lin.value - (-1)) < 1e-12


def test_linearized_torus_checks_its_radius():
    sc = affine_scene(["z1", "z2*(z1 + 0.3 - 0.3*z2)"], 1, zeros=[(0, 0)])
    with pytest.raises(CycleError):
        residue_contour(sc, radii=0.5, linearize=True)
    assert abs(residue_contour(sc, radii=0.02, linearize=True).value - 1 / 0.3) < 1e-10


def test_radius_independence_report():
    sc = monomial_scene((2, 1), "z1")
    rep = radius_independence(sc, sc.zeros[0], [1.0, 0.5, 0.25], checks.monomial_quadrature((2, 1)))
    assert rep.passed
    assert all(abs(v - 1) < 1e-8 for v in rep.values)


def test_lg_contour_sum():
    sc = lg_scene("z1^3/3 - z1", 1, observable="z1")
    r = residue_contour(sc, radii=2.0)
    assert abs(r.value - 1) < 1e-12


def test_cutoff_values():
    rho = CutoffFn([0.0], 0.5, 1.0)
    z = np.array([[0.1], [0.75], [2.0]])
    v = rho(z)
    assert v[0] == 1 and v[2] == 0 and 0 < v[1] < 1
    with pytest.raises(ValueError):
        CutoffFn([0.0], 1.0, 0.5)


def test_quasi_iso_identity():
    rng = np.random.default_rng(5)
    sc = affine_scene(["z1 + 0.1", "z2"], 1, zeros=[])
    rho = CutoffFn([-0.1, 0.0], 0.3, 0.8)
    alpha = TensorForm.blade(2, E.parse("z1*zb2 + 1", 2), dz=[0], e=[1])
    pts = rng.normal(size=(30, 2)) + 1j * rng.normal(size=(30, 2))
    assert quasi_iso_check(sc, alpha, rho, pts) < 1e-10


def test_trace_of_dbar_vanishes():
    gamma = TensorForm.blade(1, E.parse("zb1 + z1^2*zb1 + 2", 1), dz=[0])
    rho = CutoffFn([0.0], 0.5, 1.5)
    assert abs(trace_dbar(gamma, rho).value) < 1e-10
    # without the cut-off the boundary term survives
    assert abs(trace(dbar(gamma), radius=1.0).value) > 1e-3


@pytest.mark.parametrize("check", [checks.check_cauchy, checks.check_quasi_iso])
def test_koszul_checks(check):
    ok, detail = check()
    assert ok, detail
