import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fockvolterra.errors import SymbolOverflow
from fockvolterra.symbols import (FunctionSymbol, Polynomial, derivative, evaluate,
                                  format_symbol, line_integral, parse_complex, parse_symbol)

small = st.floats(-5, 5, allow_nan=False, allow_infinity=False)
cplx = st.builds(complex, small, small)
coeff_lists = st.lists(cplx, min_size=0, max_size=6)


def test_trailing_zeros_are_trimmed():
    p = Polynomial([1, 2, 0, 0])
    assert p.coeffs == (1, 2)
    assert p.degree() == 1
    assert Polynomial([0, 0]).degree() == -1
    assert Polynomial([0, 0]).is_zero


def test_horner_matches_numpy_polyval():
    c = [1 + 2j, -3, 0.5j, 2]
    z = np.array([0.3 - 1j, 2.0, -1.5j])
    assert np.allclose(Polynomial(c)(z), np.polynomial.polynomial.polyval(z, c))


@given(coeff_lists, coeff_lists, cplx)
def test_product_evaluates_as_product(a, b, z):
    pa, pb = Polynomial(a), Polynomial(b)
    lhs = (pa * pb)(z)
    rhs = pa(z) * pb(z)
    assert abs(lhs - rhs) <= 1e-9 * (1 + abs(rhs))


@given(coeff_lists, coeff_lists, cplx)
def test_sum_evaluates_as_sum(a, b, z):
    pa, pb = Polynomial(a), Polynomial(b)
    assert abs((pa + pb)(z) - (pa(z) + pb(z))) <= 1e-9 * (1 + abs(pa(z)) + abs(pb(z)))


@given(coeff_lists)
def test_antiderivative_then_derivative_is_identity(c):
    p = Polynomial(c)
    q = p.antiderivative().derivative()
    assert len(q.coeffs) == len(p.coeffs)
    assert np.allclose(q.coeffs, p.coeffs)


def test_log_abs_of_huge_monomial_does_not_overflow():
    p = Polynomial.monomial(500)
    assert p.log_abs(10.0) == pytest.approx(500 * math.log(10.0))


def test_exppoly_evaluation():
    f = FunctionSymbol.exppoly([1, 1], [0, 0, 0.5])
    z = 1 + 1j
    assert evaluate(f, z) == pytest.approx((1 + z) * cmath.exp(0.5 * z * z))


def test_overflow_is_reported():
    f = FunctionSymbol.exppoly([1], [0, 0, 1])
    with pytest.raises(SymbolOverflow):
        evaluate(f, 30.0)


def test_outside_scope_tag():
    assert FunctionSymbol.exppoly([1], [0, 0, 0, 1]).exponent_above_quadratic
    assert not FunctionSymbol.exppoly([1], [0, 0, 1]).exponent_above_quadratic


def test_derivative_of_exppoly():
    f = FunctionSymbol.exppoly([0, 1], [0, 2])  # z e^{2z}
    d = derivative(f)  # (1 + 2z) e^{2z}
    assert d.prefactor.coeffs == (1, 2)
    assert d.exponent.coeffs == (0, 2)


def test_line_integral_exact_for_polynomials():
    p = Polynomial([1, -2, 3, 0, 5j])
    z = 1.3 - 0.7j
    assert line_integral(p, z) == pytest.approx(p.antiderivative()(z), abs=1e-13)


def test_line_integral_accepts_scalar_only_callables():
    assert line_integral(lambda w: cmath.exp(w), 1j) == pytest.approx(cmath.exp(1j) - 1)


@pytest.mark.parametrize("text, value", [("1", 1), ("-2.5i", -2.5j), ("1+2i", 1 + 2j),
                                         ("i", 1j), ("-i", -1j), ("1-i", 1 - 1j)])
def test_parse_complex(text, value):
    assert parse_complex(text) == value


@given(coeff_lists, coeff_lists)
def test_format_parse_round_trip(a, b):
    f = FunctionSymbol.exppoly(a, b)
    assert parse_symbol(format_symbol(f)) == f


def test_poly_and_exppoly_with_empty_exponent_are_equal():
    assert parse_symbol("poly:[1,2]") == parse_symbol("exppoly:[1,2]|[]")


@pytest.mark.parametrize("bad", ["poly:1,2", "exppoly:[1]", "trig:[1]"])
def test_parse_rejects_malformed(bad):
    with pytest.raises(ValueError):
        parse_symbol(bad)
