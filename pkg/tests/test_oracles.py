import pytest

from vresidue import checks
from vresidue import expr as E
from vresidue.oracles import (
    OracleError,
    coeff_oracle,
    newton_critical_points,
    point_residue_nondegenerate,
    vafa_sum,
)
from vresidue.scene import affine_scene, lg_scene, p2_scene


@pytest.mark.parametrize("g,a,want", [("z1*z2^3", (2, 4), 1), ("1", (1, 1), 1), ("z1^2", (2, 1), 0),
                                      ("3i*z1^2 + z1", (3,), 3j)])
def test_coeff_oracle(g, a, want):
    assert coeff_oracle(g, a) == want


def test_coeff_oracle_domain():
    with pytest.raises(OracleError):
        coeff_oracle("zb1", (1,))
    with pytest.raises(OracleError):
        coeff_oracle("exp(z1)", (1,))
    with pytest.raises(OracleError):
        coeff_oracle("z1", (0,))


def test_newton_cubic():
    pts = newton_critical_points("z1^3/3 - z1", [1.3, -0.7])
    assert sorted(round(p.location.coords[0].real, 10) for p in pts) == [-1.0, 1.0]
    assert all(p.nondegenerate for p in pts)


def test_newton_merges_duplicates():
    pts = newton_critical_points("z1^3/3 - z1", [1.3, 0.9, 1.1])
    assert len(pts) == 1


def test_newton_flags_degenerate():
    pts = newton_critical_points("z1^4/4", [0.2])
    assert len(pts) == 1 and not pts[0].nondegenerate


@pytest.mark.parametrize("f,want", [("1", 0), ("z1", 1), ("z1^2", 0)])
def test_vafa_cubic(f, want):
    sc = lg_scene("z1^3/3 - z1", 1, observable=f)
    pts = newton_critical_points("z1^3/3 - z1", [1.2, -1.2])
    assert abs(vafa_sum(sc, f, pts) - want) < 1e-12


def test_vafa_refuses_degenerate_points():
    sc = lg_scene("z1^4/4", 1)
    pts = newton_critical_points("z1^4/4", [0.2])
    with pytest.raises(OracleError):
        vafa_sum(sc, "1", pts)


def test_vafa_needs_superpotential():
    with pytest.raises(OracleError):
        vafa_sum(affine_scene(["z1"], 1, n=1), "1", [])


def test_point_residue_simple_zero():
    sc = affine_scene(["2*z1", "z1 + 3*z2"], "5")
    assert abs(point_residue_nondegenerate(sc, sc.zeros[0]) - 5 / 6) < 1e-15


def test_point_residue_refuses_degenerate_zero():
    sc = affine_scene(["z1^2"], 1, n=1)
    with pytest.raises(OracleError):
        point_residue_nondegenerate(sc, sc.zeros[0])


def test_p2_residues_cancel():
    sc = p2_scene(0.3)
    vals = [point_residue_nondegenerate(sc, z) for z in sc.zeros]
    assert abs(sum(vals)) < 1e-12
    assert any(abs(v) > 0.5 for v in vals)


@pytest.mark.parametrize("check", [checks.check_coeff_examples, checks.check_newton, checks.check_vafa,
                                   checks.check_p2_sum])
def test_oracle_checks(check):
    ok, detail = check()
    assert ok, detail
