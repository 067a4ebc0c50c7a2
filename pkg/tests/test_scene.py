import numpy as np
import pytest

from vresidue import expr as E
from vresidue.scene import (
    SceneError,
    ZeroComponent,
    action_S,
    affine_scene,
    growth_probe,
    lg_scene,
    monomial_scene,
    p2_scene,
    weight_sign,
    xi,
)


def test_weight_sign_pattern():
    assert [weight_sign(n) for n in range(1, 5)] == [-1, -1, 1, 1]


def test_affine_declares_origin():
    sc = affine_scene(["z1", "z2^2"], "z2")
    assert [z.label for z in sc.zeros] == ["origin"]


def test_section_must_be_holomorphic():
    with pytest.raises(SceneError):
        affine_scene(["zb1"], 1)


def test_weight_must_be_holomorphic():
    with pytest.raises(SceneError):
        affine_scene(["z1"], "zb1")


def test_rank_must_match_dimension():
    with pytest.raises(SceneError):
        affine_scene(["z1"], 1, n=2)


def test_declared_zero_must_vanish():
    with pytest.raises(SceneError):
        affine_scene(["z1 - 1"], 1, zeros=[(0,)])


def test_monomial_needs_positive_exponents():
    with pytest.raises(SceneError):
        monomial_scene([0, 1])


def test_lg_finds_critical_points():
    sc = lg_scene("z1^3/3 - z1", 1)
    pts = sorted(z.point[0].real for z in sc.zeros)
    assert pts == [-1.0, 1.0]


def test_lg_separable_grid():
    sc = lg_scene("z1^3/3 + z2^3/3", 2)
    assert len(sc.zeros) == 1


def test_p2_scene_validates_overlaps():
    sc = p2_scene(0.3)
    assert {c.id for c in sc.charts} == {"U0", "U1", "U2"}
    assert len(sc.point_components()) == 4


def test_p2_degenerate_has_curve():
    sc = p2_scene(0.0)
    kinds = sorted(z.kind for z in sc.zeros)
    assert kinds == ["curve", "point"]


def test_curve_needs_param():
    with pytest.raises(SceneError):
        ZeroComponent("c", "curve", "C")


def test_scaled_section():
    sc = affine_scene(["z1"], 1).scaled(2.0)
    assert complex(E.evaluate(sc.s()[0], np.array([1.0]))) == 2


def test_xi_pairs_with_s_to_norm():
    sc = affine_scene(["z1", "2*z2"], 1)
    x = xi(sc)
    assert set(x.shapes()) == {(0, 0, 0, 1)}


def test_action_has_two_parts():
    sc = affine_scene(["z1"], 1)
    S = action_S(sc)
    assert (0, 0, 0, 0) in S.shapes()
    assert (0, 1, 0, 1) in S.shapes()


def test_growth_probe_flags_violation():
    bad = growth_probe(affine_scene(["z1*z2", "z2"], 1))
    good = growth_probe(affine_scene(["z1", "z2"], 1))
    assert bad.warning
    assert not good.warning
    assert good.C0 > 0.5


def test_fingerprint_changes_with_weight():
    a = affine_scene(["z1"], 1).fingerprint()
    b = affine_scene(["z1"], 2).fingerprint()
    assert a != b
