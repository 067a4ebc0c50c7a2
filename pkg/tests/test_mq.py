import math

import numpy as np
import pytest

from vresidue import checks
from vresidue.cycles import MCSpec, QuadratureSpec
from vresidue.mq import (
    MQError,
    closedness_residuals,
    decay_probe,
    mq_form,
    mq_integrand,
    residue_mq,
    scaling_check,
    t_independence,
)
from vresidue.scene import affine_scene, lg_scene, p2_scene

Q = QuadratureSpec(nodes=64, tol=1e-9)


@pytest.mark.parametrize("sec,g", [(["z1"], "1"), (["z1^2"], "z1"), (["z1^3"], "z1^2")])
def test_one_dimensional_mq_matches_residue(sec, g):
    r = residue_mq(affine_scene(sec, g, n=1), 1.0, Q)
    assert abs(r.value - 1) < 1e-6


def test_mq_sees_only_the_residue_monomial():
    r = residue_mq(affine_scene(["z1^2"], "1", n=1), 1.0, Q)
    assert abs(r.value) < 1e-6


def test_integrand_is_top_degree():
    sc = affine_scene(["z1", "z2"], 1)
    top = mq_integrand(sc)
    assert set(top.shapes()) == {(2, 2, 0, 0)}
    assert not mq_form(sc).is_zero()


@pytest.mark.parametrize("conv", ["deform", "scale"])
def test_closedness(conv):
    sc = affine_scene(["z1^2", "z2"], "z1")
    res = closedness_residuals(sc, 1.5, samples=10, convention=conv)
    assert max(res.values()) < 1e-10


def test_lg_mq_sum():
    sc = lg_scene("z1^3/3 - z1", 1, observable="z1")
    assert abs(residue_mq(sc, 1.0, Q).value - 1) < 1e-6


def test_growth_violation_is_refused():
    with pytest.raises(MQError):
        residue_mq(affine_scene(["z1*z2", "z2"], 1, zeros=[(0, 0)]), 1.0, MCSpec(budget=1000, batches=8))


def test_multichart_scene_is_refused():
    with pytest.raises(MQError):
        residue_mq(p2_scene(0.3))


def test_monte_carlo_two_dimensional():
    sc = affine_scene(["z1", "z2"], 1)
    r = residue_mq(sc, 1.0, MCSpec(budget=100_000, seed=1))
    assert abs(r.value - 1) < 4 * r.error
    assert r.error < 0.05


def test_t_independence_quadrature():
    rep = t_independence(affine_scene(["z1^2"], "z1", n=1), (0.5, 1.0, 2.0), Q)
    assert rep.passed
    assert rep.max_deviation < 1e-6


def test_nonpositive_t_rejected():
    with pytest.raises(MQError):
        t_independence(affine_scene(["z1"], 1, n=1), (0.0, 1.0), Q)


def test_scaling_quadrature():
    rep = scaling_check(affine_scene(["z1^2"], "z1", n=1), 2.0, Q)
    assert rep.passed
    assert rep.relative_difference < 1e-6


def test_decay_probe_reports_rapid_decay():
    sc = affine_scene(["z1"], 1, n=1)
    assert decay_probe(mq_integrand(sc), sc).verdict == "rapidly-decreasing-consistent"
    assert decay_probe(sc.s()[0], sc).verdict == "tempered-consistent"


def test_mq_scene_list():
    kinds = [(sc.n, type(i).__name__) for sc, i in checks.mq_scenes()]
    assert kinds.count((1, "QuadratureSpec")) == 6
    assert kinds.count((2, "MCSpec")) == 3
