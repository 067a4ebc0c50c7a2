import cmath

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vresidue import expr as E


def z(i):
    return E.zvar(i)


def zb(i):
    return E.zbvar(i)


def test_parse_and_evaluate():
    e = E.parse("z1^2*zb2 + 3i*z2 - 1/2", 2)
    p = np.array([1 + 1j, 2 - 1j])
    want = p[0] ** 2 * np.conj(p[1]) + 3j * p[1] - 0.5
    assert abs(complex(E.evaluate(e, p)) - want) < 1e-12


def test_wirtinger_rules():
    e = z(0) * zb(0)
    assert E.d_z(e, 0) == zb(0)
    assert E.d_zbar(e, 0) == z(0)
    assert E.d_zbar(z(0) ** 3, 0).is_zero()


def test_exp_derivative():
    e = E.exp(-z(0) * zb(0))
    assert E.d_zbar(e, 0) == -z(0) * e


def test_conjugation_is_involution():
    e = E.parse("(2+i)*z1^2*zb2 - exp(z1*zb1)", 2)
    assert E.conj_expr(E.conj_expr(e)) == e


def test_to_string_round_trip():
    e = E.parse("z1^3/3 - z1 + i*zb2", 2)
    assert E.parse(E.to_string(e), 2) == e


def test_reciprocal_and_singular_evaluation():
    r = E.recip(z(0))
    assert E.d_z(r, 0) == -E.recip(z(0) ** 2)
    with pytest.raises(E.SingularEvaluationError):
        E.evaluate(r, np.zeros(1))


@pytest.mark.parametrize("text", ["z1 +", "z0", "foo(z1)", "z1^z2", "(z1"])
def test_syntax_errors(text):
    with pytest.raises(E.ExprSyntaxError):
        E.parse(text, 1)


def test_index_out_of_range():
    with pytest.raises(E.ExprSyntaxError):
        E.parse("z3", 2)


def test_polynomial_coefficients():
    cf = E.polynomial_coefficients(E.parse("2*z1*z2^2 - i", 2), 2)
    assert cf == {(1, 2): 2, (0, 0): -1j}


def test_substitute():
    e = E.parse("z1*z2", 2)
    assert E.substitute(e, [z(1), z(0) + 1]) == z(1) * z(0) + z(1)


def test_holomorphic_flags():
    assert E.is_holomorphic(E.parse("z1^2+z2", 2))
    assert not E.is_holomorphic(E.parse("zb1", 1))


coeffs = st.tuples(st.integers(-3, 3), st.integers(-3, 3)).map(lambda t: complex(*t))


@settings(max_examples=60, deadline=None)
@given(a=coeffs, b=coeffs, k=st.integers(0, 3), m=st.integers(0, 3))
def test_wirtinger_matches_finite_differences(a, b, k, m):
    e = E.const(a) * z(0) ** k * zb(1) ** m + E.const(b) * z(1) * zb(0)
    p = np.array([0.3 - 0.2j, -0.4 + 0.7j])
    for i in range(2):
        for bar in (False, True):
            d = E.d_zbar(e, i) if bar else E.d_z(e, i)
            exact = complex(E.evaluate(d, p))
            assert abs(exact - E.fd_wirtinger(e, i, p, bar=bar)) < 1e-6


@settings(max_examples=40, deadline=None)
@given(a=coeffs, b=coeffs)
def test_dbar_commutes(a, b):
    e = E.const(a) * z(0) * zb(0) ** 2 * zb(1) + E.const(b) * E.exp(zb(0) * z(1))
    assert E.d_zbar(E.d_zbar(e, 0), 1) == E.d_zbar(E.d_zbar(e, 1), 0)


def test_exp_evaluation():
    e = E.exp(z(0))
    assert abs(complex(E.evaluate(e, np.array([1j * cmath.pi]))) + 1) < 1e-12
