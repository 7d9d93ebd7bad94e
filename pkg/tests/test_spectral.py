import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fockvolterra.errors import PreconditionError
from fockvolterra.operators import OperatorKind
from fockvolterra.spectral import (BOUNDARY, RESOLVENT, SPECTRUM, ResolventSpec, circle,
                                   companion_spectrum, lemma4_check, multiplier_spectrum,
                                   resolvent_apply, resolvent_residual, spectrum_scan,
                                   truncated_eigenvalues)
from fockvolterra.symbols import FunctionSymbol, Polynomial
from fockvolterra.weight import SpaceParams, norm


def test_resolvent_of_one():
    spec = ResolventSpec(1.0, 3.0)
    z = 1.2 - 0.4j
    assert resolvent_apply(spec, FunctionSymbol.poly([1]), z) == pytest.approx(
        cmath.exp(z * z / 3) / 3)


def test_resolvent_with_zero_symbol():
    h = FunctionSymbol.poly([1, 2, -1j])
    z = 0.7 + 0.2j
    assert resolvent_apply(ResolventSpec(0.0, 2.0), h, z) == pytest.approx(h(z) / 2)


def test_resolvent_residual_example():
    z = np.linspace(-2, 2, 9) + 0.5j
    res = resolvent_residual(ResolventSpec(1.0, 3.0), FunctionSymbol.poly([1, 0, 1]), z)
    assert np.max(res) <= 1e-9


def test_lambda_zero_rejected():
    with pytest.raises(PreconditionError):
        ResolventSpec(1.0, 0.0)


@given(st.lists(st.builds(complex, st.floats(-1, 1), st.floats(-1, 1)), min_size=1, max_size=5),
       st.floats(2.1, 6.0), st.floats(0, 2 * math.pi))
def test_resolvent_identity_property(h, lam_mod, arg):
    spec = ResolventSpec(1.0, lam_mod * cmath.exp(1j * arg))
    hs = FunctionSymbol.poly(h)
    z = np.array([2.0 * cmath.exp(1j * t) for t in np.linspace(0, 6, 20)]) * np.linspace(0.1, 1, 20)
    scale = 1 + max(abs(hs(zz)) for zz in z)
    assert np.max(resolvent_residual(spec, hs, z)) <= 1e-8 * scale


# -- scans ---------------------------------------------------------------------------------------

def test_scan_examples():
    scan = spectrum_scan(1.0, SpaceParams(), [3.0, 1.0])
    assert scan.classifications() == [RESOLVENT, SPECTRUM]


def test_scan_compact_perturbation_only():
    scan = spectrum_scan(0.0, SpaceParams(), [0.0, 0.5], b=1.0)
    assert scan.classifications() == [SPECTRUM, RESOLVENT]


def test_boundary_band():
    scan = spectrum_scan(1.0, SpaceParams(), [2.0, 2.03j])
    assert scan.classifications() == [BOUNDARY, BOUNDARY]


@pytest.mark.parametrize("m", [0, 1])
def test_disk_dichotomy(m):
    params = SpaceParams(m)
    inside = spectrum_scan(1.0, params, circle(0.5 * 2) + circle(0.9 * 2, phase=0.1))
    outside = spectrum_scan(1.0, params, circle(1.25 * 2) + circle(2.0 * 2, phase=0.1))
    assert set(inside.classifications()) == {SPECTRUM}
    assert set(outside.classifications()) == {RESOLVENT}


@pytest.mark.parametrize("theta", [math.pi / 3, math.pi / 2])
def test_rotation_equivariance(theta):
    lams = [1.0, 1.5j, 3.0, -4.0 + 1j]
    rot = cmath.exp(1j * theta)
    a = spectrum_scan(1.0, SpaceParams(), lams).classifications()
    b = spectrum_scan(rot, SpaceParams(), [rot * x for x in lams]).classifications()
    assert a == b


@pytest.mark.parametrize("N", [10, 50, 200])
def test_truncations_are_nilpotent_but_unused(N):
    T = OperatorKind.volterra([0, 0, 1])
    assert np.all(truncated_eigenvalues(T, SpaceParams(), N) == 0)
    # every nonzero lambda would be "resolvent" if eigenvalues were used
    assert spectrum_scan(1.0, SpaceParams(), [1.0], N_list=(N, 2 * N)).classifications() == [SPECTRUM]


def test_scan_csv_columns():
    text = spectrum_scan(1.0, SpaceParams(), [0.0, 3.0]).to_csv().splitlines()
    assert text[0] == ("lambda_re,lambda_im,membership_status,growth_rate,resnorm_N50,"
                       "resnorm_N100,resnorm_N200,classification")
    assert text[1].endswith(",Spectrum")


def test_scan_without_hilbert_space_uses_membership_only():
    scan = spectrum_scan(1.0, SpaceParams(0, 1.0), [1.0, 3.0])
    assert scan.classifications() == [SPECTRUM, RESOLVENT]
    assert scan.records[0].resolvent_norms == (None, None, None)


# -- derivative-side bound -----------------------------------------------------------------------------------------

def test_derivative_bound_constant_function():
    spec, params = ResolventSpec(1.0, 3.0), SpaceParams()
    rep = lemma4_check(FunctionSymbol.poly([1]), spec, params)
    expected = norm(FunctionSymbol.exppoly([1], [0, 0, 1 / 3]), params) ** 2
    assert rep.rhs == pytest.approx(1.0)
    assert rep.lhs == pytest.approx(expected, rel=1e-10)


def test_derivative_bound_zero_function_is_flagged():
    rep = lemma4_check(FunctionSymbol.poly([]), ResolventSpec(1.0, 3.0), SpaceParams())
    assert rep.degenerate and rep.ratio == 0.0


def test_derivative_bound_precondition():
    with pytest.raises(PreconditionError):
        lemma4_check(FunctionSymbol.poly([1]), ResolventSpec(1.0, 1.5), SpaceParams())


@pytest.mark.parametrize("m", [0, 1])
def test_derivative_bound_bounded_over_monomials(m):
    spec = ResolventSpec(1.0, 3.0)
    ratios = [lemma4_check(FunctionSymbol.monomial(n), spec, SpaceParams(m)).ratio
              for n in range(7)]
    assert max(ratios) < 50
    assert all(math.isfinite(r) and r > 0 for r in ratios)


# -- scalar operators ----------------------------------------------------------------------------------

def test_companion_spectrum():
    assert companion_spectrum(2, 2).is_spectrum
    assert not companion_spectrum(2, 5).is_spectrum
    assert companion_spectrum(0, 0).is_spectrum
    # I_c kills constants
    assert companion_spectrum(2, 0).is_spectrum


def test_companion_resolvent_is_division_on_functions_vanishing_at_zero():
    h = FunctionSymbol.poly([0, 1, 1j])
    r = companion_spectrum(2, 5).resolve(h)
    assert np.allclose(r.prefactor.coeffs, np.array(h.prefactor.coeffs) / 3)
    params = SpaceParams(1)
    assert norm(r, params) / norm(h, params) == pytest.approx(1 / 3, rel=1e-12)


def test_companion_resolvent_solves_the_equation():
    h = FunctionSymbol.poly([1, -2, 3])
    c, lam = 2.0, 5.0
    f = companion_spectrum(c, lam).resolve(h)
    z = 0.4 + 0.9j
    If = c * (f(z) - f(0.0))
    assert lam * f(z) - If == pytest.approx(h(z))


def test_multiplier_spectrum():
    assert multiplier_spectrum(1 + 1j, 1 + 1j).is_spectrum
    assert multiplier_spectrum(1 + 1j, 1 + 1j).is_point_spectrum
    assert not multiplier_spectrum(0, 1).is_spectrum
    assert not multiplier_spectrum(3, 3 + 1e-12).is_spectrum
