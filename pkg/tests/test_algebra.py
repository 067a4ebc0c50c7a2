import numpy as np
import pytest

from vresidue import checks
from vresidue import expr as E
from vresidue.algebra import (
    AlgebraError,
    HermitianMetric,
    TensorForm,
    contract_weight,
    dbar,
    degree,
    inner,
    iota_covector,
    iota_section,
    kappa,
    norm_sq,
    wedge,
)


def gen(n, kind, i):
    return TensorForm.generator(n, kind, i)


def test_generators_anticommute():
    n = 2
    names = ("dz", "dzb", "e", "es")
    for a in names:
        for b in names:
            for i in range(n):
                for j in range(n):
                    x, y = gen(n, a, i), gen(n, b, j)
                    assert wedge(x, y) == -wedge(y, x)


def test_degree_counts_dual_frame_negatively():
    t = TensorForm.blade(2, 1, dz=[0], dzb=[1], e=[0, 1], es=[0])
    (mask,) = t.terms
    assert degree(2, mask) == 3


def test_kappa_pairs_matching_frames():
    n = 2
    f = E.parse("z1", n)
    t = TensorForm.blade(n, f, dz=[0], e=[1], es=[1])
    assert kappa(t) == TensorForm.blade(n, f, dz=[0])
    assert kappa(TensorForm.blade(n, 1, e=[0], es=[1])).is_zero()


def test_dbar_on_coefficients_and_square_zero():
    n = 2
    a = TensorForm.blade(n, E.parse("z1*zb1^2*zb2", n), dz=[1], e=[0])
    d = dbar(a)
    assert not d.is_zero()
    assert dbar(d).is_zero()


def test_dbar_kills_holomorphic_forms():
    a = TensorForm.blade(2, E.parse("z1^3 + z2", 2), dz=[0, 1], e=[0])
    assert dbar(a).is_zero()


def test_contract_weight_top_degree():
    # dz e_1 against e*_1 leaves a scalar form
    n = 1
    u = TensorForm.blade(n, 1, dz=[0], e=[0])
    th = TensorForm.blade(n, 1, es=[0])
    r = contract_weight(u, th)
    assert r.degrees() == {1}
    assert not r.is_zero()


def test_iota_section_lowers_dual_degree():
    n = 2
    alpha = gen(n, "e", 0)
    w = TensorForm.blade(n, 1, es=[0, 1])
    r = iota_section(alpha, w)
    assert set(r.shapes()) == {(0, 0, 0, 1)}
    assert r == TensorForm.blade(n, 1, es=[1]) or r == -TensorForm.blade(n, 1, es=[1])


def test_iota_covector_rejects_dual_valued_input():
    n = 2
    with pytest.raises(AlgebraError):
        iota_covector(gen(n, "es", 0), TensorForm.blade(n, 1, es=[1]))


def test_dimension_mismatch():
    with pytest.raises(AlgebraError):
        gen(1, "dz", 0) + gen(2, "dz", 0)


def test_metric_must_be_hermitian():
    with pytest.raises(AlgebraError):
        HermitianMetric([[1, 1j], [1j, 1]])
    HermitianMetric([[2, 1j], [-1j, 2]])


def test_norm_under_scaled_metric():
    n = 1
    h = HermitianMetric.diagonal([4])
    e = gen(n, "e", 0)
    es = gen(n, "es", 0)
    p = np.zeros(1)
    assert abs(norm_sq(e, h, p=p) - 4) < 1e-12
    assert abs(norm_sq(es, h, p=p) - 0.25) < 1e-12


def test_inner_needs_positive_metric():
    h = HermitianMetric.diagonal([-1])
    with pytest.raises(AlgebraError):
        inner(gen(1, "e", 0), gen(1, "e", 0), np.zeros(1), h)


@pytest.mark.parametrize(
    "check",
    [
        checks.check_contraction_sign,
        checks.check_contraction_leibniz,
        checks.check_pairing_leibniz,
        checks.check_homotopy,
        checks.check_dbar_squared,
        checks.check_product_bound,
        checks.check_pairing_bound,
        checks.check_contraction_bound,
    ],
)
def test_identities_on_random_inputs(check):
    ok, detail = check(30)
    assert ok, detail


def test_commutator_detects_wrong_sign():
    # s ^ T_s - T_s s ^ is not the identity, so the check must be able to fail
    from vresidue.koszul import T_s, form_is_zero

    rng = np.random.default_rng(0)
    n = 2
    s = TensorForm(n, {m: c for m, c in checks._section(rng, n).terms.items()})
    sb = checks._normalized_sbar(s)
    a = checks.random_form(rng, n, 0, 1, 1, 0, holomorphic=False)
    bad = wedge(s, T_s(sb, a)) - T_s(sb, wedge(s, a)) - a
    good = wedge(s, T_s(sb, a)) + T_s(sb, wedge(s, a)) - a
    assert form_is_zero(good)
    assert not form_is_zero(bad)
