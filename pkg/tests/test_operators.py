import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fockvolterra.errors import NotCompact, PreconditionError
from fockvolterra.operators import (BOUNDED, COMPACT, UNBOUNDED, OperatorKind, apply,
                                    apply_symbol, column_norm, growth_exponent, growth_probe,
                                    matrix, schatten_diagnostic, singular_values,
                                    degree_verdict)
from fockvolterra.symbols import FunctionSymbol, Polynomial
from fockvolterra.weight import SpaceParams, monomial_norm

cplx = st.builds(complex, st.floats(-2, 2), st.floats(-2, 2))
polys = st.lists(cplx, min_size=1, max_size=5).map(Polynomial)


# -- pointwise action --------------------------------------------------------------------

def test_volterra_on_monomial():
    a, n, z = 1.5 - 0.5j, 3, 0.8 + 0.4j
    T = OperatorKind.volterra([0, 0, a])
    assert apply(T, FunctionSymbol.monomial(n), z) == pytest.approx(2 * a * z ** (n + 2) / (n + 2))


def test_parts_identity_example():
    f, g, z = FunctionSymbol.poly([1, 0, 1]), [0, 0, 1], 1 + 1j
    lhs = apply(OperatorKind.volterra(g), f, z) + apply(OperatorKind.companion(g), f, z)
    rhs = apply(OperatorKind.multiplier(g), f, z) - f(0.0) * 0.0
    assert lhs == pytest.approx(rhs, abs=1e-13)


def test_companion_with_constant_symbol():
    f = FunctionSymbol.poly([2, -1, 3])
    z = 0.3 - 1.1j
    assert apply(OperatorKind.companion([4]), f, z) == pytest.approx(4 * (f(z) - f(0.0)))


@given(polys, polys, cplx)
def test_parts_identity_property(f, g, z):
    fs = FunctionSymbol(f)
    lhs = apply(OperatorKind.volterra(g), fs, z) + apply(OperatorKind.companion(g), fs, z)
    gf = complex(g(z) * f(z))
    rhs = gf - complex(f(0.0)) * complex(g(0.0))
    assert abs(lhs - rhs) <= 1e-10 * (1 + abs(gf))


def test_quadrature_path_for_exppoly():
    f = FunctionSymbol.exppoly([1], [0, 1])  # e^z
    z = 0.5 + 0.5j
    # V_z e^w = int_0^z e^w dw
    assert apply(OperatorKind.volterra([0, 1]), f, z) == pytest.approx(np.exp(z) - 1, abs=1e-14)
    # I_z e^w = int_0^z w e^w dw = (z-1) e^z + 1
    assert apply(OperatorKind.companion([0, 1]), f, z) == pytest.approx((z - 1) * np.exp(z) + 1)


def test_symbolic_apply_needs_polynomial_for_integrals():
    with pytest.raises(PreconditionError):
        apply_symbol(OperatorKind.volterra([0, 1]), FunctionSymbol.exppoly([1], [0, 1]))


# -- matrices ----------------------------------------------------------------------------

def test_matrix_entries_m0():
    A = matrix(OperatorKind.volterra([0, 0, 1]), SpaceParams(), 12).entries
    assert A[2, 0] == pytest.approx(math.sqrt(2), rel=1e-13)
    for n in range(10):
        assert A[n + 2, n] == pytest.approx(2 * math.sqrt((n + 1) / (n + 2)), rel=1e-12)
    B = matrix(OperatorKind.volterra([0, 1]), SpaceParams(), 12).entries
    for n in range(11):
        assert B[n + 1, n] == pytest.approx(1 / math.sqrt(n + 1), rel=1e-12)


def test_identity_multiplier():
    A = matrix(OperatorKind.multiplier([1]), SpaceParams(1), 10)
    assert np.allclose(A.entries, np.eye(10), atol=1e-15)
    assert np.allclose(singular_values(A), np.ones(10))


def test_volterra_ignores_constant_term():
    a = matrix(OperatorKind.volterra([5, 1, 2]), SpaceParams(1), 10).entries
    b = matrix(OperatorKind.volterra([0, 1, 2]), SpaceParams(1), 10).entries
    assert np.array_equal(a, b)


@pytest.mark.parametrize("T", [OperatorKind.volterra([0, 1, 1j]), OperatorKind.companion([1, 2]),
                               OperatorKind.multiplier([0.5, 0, 1]),
                               OperatorKind.differentiation()])
@pytest.mark.parametrize("m", [0, 2])
def test_matrix_columns_match_apply(T, m):
    params = SpaceParams(m)
    N = 14
    A = matrix(T, params, N)
    for n in range(N - A.band):
        img = apply_symbol(T, FunctionSymbol.monomial(n)).prefactor
        nu_n = monomial_norm(n, params)
        coeffs = np.zeros(N, dtype=complex)
        for j, c in enumerate(img.coeffs):
            coeffs[j] = c * monomial_norm(j, params) / nu_n
        assert np.allclose(A.entries[:, n], coeffs, rtol=1e-12, atol=1e-12)


def test_matrix_requires_hilbert_space():
    with pytest.raises(PreconditionError):
        matrix(OperatorKind.volterra([0, 1]), SpaceParams(0, 1.5), 10)


def test_csv_lists_nonzero_entries():
    text = matrix(OperatorKind.volterra([0, 1]), SpaceParams(), 5).to_csv().splitlines()
    assert text[0] == "row,col,re,im"
    assert len(text) == 1 + 4


# -- singular values -----------------------------------------------------------------------

def test_singular_values_vz():
    s = singular_values(matrix(OperatorKind.volterra([0, 1]), SpaceParams(), 200))
    assert s[0] == pytest.approx(1.0)
    assert s[1] == pytest.approx(1 / math.sqrt(2), rel=1e-12)


@pytest.mark.parametrize("T", [OperatorKind.volterra([0, 1]), OperatorKind.volterra([0, 0, 1]),
                               OperatorKind.volterra([0, 0, 0, 2j])])
def test_one_band_singular_values_are_band_moduli(T):
    A = matrix(T, SpaceParams(1), 60)
    k = A.band
    band = np.sort(np.abs([A.entries[n + k, n] for n in range(60 - k)]))[::-1]
    assert np.allclose(singular_values(A), band, rtol=1e-12, atol=1e-12)


def test_vz2_plateau_near_two():
    s = singular_values(matrix(OperatorKind.volterra([0, 0, 1]), SpaceParams(), 400))
    assert 1.99 < s[0] < 2.0


@pytest.mark.parametrize("g", [[0, 1], [0, 0, 1]])
def test_truncation_stability_of_top_singular_values(g):
    T = OperatorKind.volterra(g)
    a = singular_values(matrix(T, SpaceParams(), 200), 10)
    b = singular_values(matrix(T, SpaceParams(), 400), 10)
    assert np.max(np.abs(a - b) / b) < 1e-6


# -- Schatten ----------------------------------------------------------------------------------

@pytest.mark.parametrize("m, tol", [(0, 0.05), (1, 0.1)])
def test_schatten_dichotomy(m, tol):
    rows = {r["p"]: r for r in schatten_diagnostic(OperatorKind.volterra([0, 1]),
                                                     SpaceParams(m), [2.0, 2.5], N=400)}
    assert rows[2.0]["verdict"] == "Divergent"
    assert rows[2.0]["log_fit_error"] < 0.1
    assert rows[2.5]["verdict"] == "Convergent"
    assert abs(rows[2.0]["decay_exponent_fit"] + 0.5) <= tol


def test_schatten_refuses_noncompact():
    with pytest.raises(NotCompact):
        schatten_diagnostic(OperatorKind.volterra([0, 0, 1]), SpaceParams(), [2.0])


def test_schatten_finite_rank_is_convergent():
    rows = schatten_diagnostic(OperatorKind.volterra([3]), SpaceParams(), [1.0])
    assert rows[0]["verdict"] == "Convergent"


# -- growth probe -----------------------------------------------------------------------------

def test_growth_probe_differentiation_m0():
    seq = dict(growth_probe(OperatorKind.differentiation(), SpaceParams(), 100))
    assert seq[100] == pytest.approx(10.0, abs=1e-9)


def test_growth_probe_closed_forms_m0():
    seq = dict(growth_probe(OperatorKind.companion([0, 1]), SpaceParams(), 50))
    for n in (1, 10, 50):
        assert seq[n] == pytest.approx(n / math.sqrt(n + 1), rel=1e-12)
    seq = dict(growth_probe(OperatorKind.volterra([0, 0, 0, 1]), SpaceParams(), 50))
    for n in (0, 7, 50):
        assert seq[n] == pytest.approx(3 * math.sqrt((n + 1) * (n + 2) * (n + 3)) / (n + 3),
                                       rel=1e-12)


@pytest.mark.parametrize("m", [0, 1, 2])
def test_vz2_growth_probe_plateau(m):
    seq = growth_probe(OperatorKind.volterra([0, 0, 1]), SpaceParams(m), 500)
    assert max(v for _, v in seq) <= 2.5


def test_growth_probe_mixed_exponents_constant_multiplier_m0():
    # ratio of C-normalised norms of z^n from F^2 into F^3 decays
    seq = growth_probe(OperatorKind.multiplier([1]), SpaceParams(0, 2.0), 60,
                       target=SpaceParams(0, 3.0))
    assert growth_exponent(seq) < 0


def test_column_norm_matches_matrix():
    T = OperatorKind.companion([1, 1j, 2])
    A = matrix(T, SpaceParams(1), 30).entries
    for n in (0, 5, 20):
        assert column_norm(T, SpaceParams(1), n) == pytest.approx(np.linalg.norm(A[:, n]),
                                                                  rel=1e-12)


# -- rules -------------------------------------------------------------------------------------

@pytest.mark.parametrize("T, p, q, verdict", [
    (OperatorKind.volterra([0, 1, 1]), 2, 2, BOUNDED),
    (OperatorKind.volterra([0, 1]), 2, 3, COMPACT),
    (OperatorKind.volterra([0, 0, 0, 1]), 2, 2, UNBOUNDED),
    (OperatorKind.volterra([0, 1]), 2, 0.8, UNBOUNDED),
    (OperatorKind.volterra([0, 1]), 2, 1.5, COMPACT),
    (OperatorKind.volterra([0, 0, 1]), 2, 1.5, UNBOUNDED),
    (OperatorKind.companion([0, 1]), 2, 2, UNBOUNDED),
    (OperatorKind.companion([0, 1]), 1, 4, UNBOUNDED),
    (OperatorKind.companion([7]), 2, 3, BOUNDED),
    (OperatorKind.companion([7]), 2, 1, UNBOUNDED),
    (OperatorKind.multiplier([]), 2, 1, COMPACT),
    (OperatorKind.differentiation(), 2, 2, UNBOUNDED),
])
def test_degree_verdicts(T, p, q, verdict):
    assert degree_verdict(T, p, q)[0] == verdict


@given(st.sampled_from(["volterra", "companion", "multiplier"]), st.integers(-1, 4),
       st.floats(0.5, 4), st.floats(0.5, 4))
def test_verdict_is_one_of_three(kind, deg, p, q):
    g = [] if deg < 0 else [1.0] * (deg + 1)
    v, rule = degree_verdict(getattr(OperatorKind, kind)(g), p, q)
    assert v in (BOUNDED, COMPACT, UNBOUNDED)
    assert rule
