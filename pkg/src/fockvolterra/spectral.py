"""Resolvents and spectra.

For ``g(z) = a z^2 + b z + c`` the Volterra operator has the disc
``|lambda| <= 2|a|`` as spectrum. Two independent witnesses decide a point:
whether ``exp(a z^2 / lambda)`` (the resolvent applied to ``1``, up to a factor)
belongs to the space, and whether ``||(lambda I - T_N)^{-1}||`` blows up with
the truncation size ``N``. Eigenvalues of ``T_N`` are never used; the
truncations are nilpotent.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .errors import PreconditionError
from .operators import OperatorKind, matrix
from .symbols import FunctionSymbol, Polynomial, derivative, line_integral
from .weight import (MembershipVerdict, SpaceParams, _norm_log_integrand,
                     _tail_checked_log_integral, auto_grid, lp_denominator, membership)

SPECTRUM, RESOLVENT, BOUNDARY, INCONCLUSIVE = "Spectrum", "Resolvent", "Boundary", "Inconclusive"
GROWTH_FACTOR = 10.0
STABLE_VARIATION = 0.5
BOUNDARY_BAND = 0.02
DEFAULT_TRUNCATIONS = (50, 100, 200)


@dataclass(frozen=True)
class ResolventSpec:
    """``g(z) = a z^2`` and a nonzero spectral parameter ``lam``."""

    a: complex
    lam: complex

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "lam", complex(self.lam))
        if self.lam == 0:
            raise PreconditionError("lambda must be nonzero")

    @property
    def inside(self) -> bool:
        return abs(self.lam) <= 2.0 * abs(self.a)

    @property
    def exponent(self) -> Polynomial:
        """``g / lambda`` as a polynomial."""
        return Polynomial([0.0, 0.0, self.a / self.lam])

    @property
    def operator(self) -> OperatorKind:
        return OperatorKind.volterra([0.0, 0.0, self.a])


def resolvent_apply(spec: ResolventSpec, h: FunctionSymbol, z) -> complex:
    """``f(z)`` for the unique entire ``f`` with ``lambda f - V_g f = h``.

    ``f = (1/lam) e^{g/lam} (h(0) + int_0^z e^{-g(w)/lam} h'(w) dw)``, the
    integral taken on the segment by Gauss-Legendre.

    Raises
    ------
    SymbolOverflow
        When ``Re(g(z)/lam)`` is too large to exponentiate.
    """
    lam = spec.lam
    grow = FunctionSymbol(Polynomial([1.0]), spec.exponent)
    h0 = complex(h(0.0))
    dh = derivative(h)
    if dh.is_zero:
        integrand = None
    else:
        integrand = dh * FunctionSymbol(Polynomial([1.0]), -spec.exponent)

    def one(zz: complex) -> complex:
        s = h0
        if integrand is not None:
            s += line_integral(integrand, zz)
        return complex(grow(zz)) * s / lam

    if np.ndim(z) == 0:
        return one(complex(z))
    z = np.asarray(z, dtype=complex)
    return np.array([one(zz) for zz in z.ravel()]).reshape(z.shape)


def resolvent_residual(spec: ResolventSpec, h: FunctionSymbol, z) -> np.ndarray:
    """``|lam f(z) - (V_g f)(z) - h(z)|`` with ``f`` from :func:`resolvent_apply`."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    dg = spec.operator.g.derivative()
    out = np.empty(z.shape, dtype=float)
    for i, zz in enumerate(z):
        f_z = resolvent_apply(spec, h, zz)
        vf = line_integral(lambda w: resolvent_apply(spec, h, w) * dg(w), zz)
        out[i] = abs(spec.lam * f_z - vf - complex(h(zz)))
    return out


# -- truncated resolvent norms -----------------------------------------------------

def truncated_resolvent_norm(T: OperatorKind, params: SpaceParams, lam: complex, N: int) -> float:
    """Spectral norm of ``(lam I - T_N)^{-1}``; ``inf`` if it overflows."""
    A = matrix(T, params, N).entries
    L = lam * np.eye(N) - A
    if np.allclose(np.triu(A), 0):
        with np.errstate(over="ignore", invalid="ignore"):
            inv = solve_triangular(L, np.eye(N, dtype=complex), lower=True)
    else:
        inv = np.linalg.inv(L)
    if not np.all(np.isfinite(inv)):
        return math.inf
    with np.errstate(over="ignore"):
        return float(np.linalg.norm(inv, 2))


def truncated_eigenvalues(T: OperatorKind, params: SpaceParams, N: int) -> np.ndarray:
    """Eigenvalues of ``T_N``; all zero for strictly lower-triangular shifts."""
    A = matrix(T, params, N).entries
    if np.allclose(np.triu(A), 0):
        return np.zeros(N, dtype=complex)
    return np.linalg.eigvals(A)


@dataclass(frozen=True)
class LambdaRecord:
    """One point of a spectrum scan."""

    lam: complex
    membership: Optional[MembershipVerdict]
    resolvent_norms: tuple
    classification: str
    truncations: tuple = DEFAULT_TRUNCATIONS

    @property
    def norm_growth(self) -> Optional[float]:
        v = [x for x in self.resolvent_norms if x is not None]
        if len(v) < 2:
            return None
        return v[-1] / v[0] if v[0] > 0 else math.inf

    def to_dict(self) -> dict:
        return {
            "lambda": [self.lam.real, self.lam.imag],
            "membership": None if self.membership is None else self.membership.to_dict(),
            "resolvent_norms": {str(N): _num(v) for N, v in zip(self.truncations,
                                                                  self.resolvent_norms)},
            "classification": self.classification,
        }


def _num(x):
    if x is None:
        return None
    return x if math.isfinite(x) else "inf"


@dataclass(frozen=True)
class SpectrumScan:
    a: complex
    b: complex
    params: SpaceParams
    truncations: tuple
    records: tuple = field(default_factory=tuple)

    @property
    def radius(self) -> float:
        return 2.0 * abs(self.a)

    def classifications(self) -> list:
        return [r.classification for r in self.records]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lambda_re", "lambda_im", "membership_status", "growth_rate"]
                   + [f"resnorm_N{N}" for N in self.truncations] + ["classification"])
        for r in self.records:
            mv = r.membership
            status = "" if mv is None else mv.status
            rate = "" if mv is None or mv.growth_rate is None else repr(mv.growth_rate)
            norms = ["" if v is None else repr(v) for v in r.resolvent_norms]
            w.writerow([repr(r.lam.real), repr(r.lam.imag), status, rate] + norms
                       + [r.classification])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"a": [self.a.real, self.a.imag], "b": [self.b.real, self.b.imag],
                "radius": self.radius, "params": self.params.to_dict(),
                "truncations": list(self.truncations),
                "records": [r.to_dict() for r in self.records]}


def _classify_point(lam: complex, radius: float, mv: Optional[MembershipVerdict],
                    norms: Sequence) -> str:
    if lam == 0:
        return SPECTRUM
    if radius > 0 and abs(abs(lam) - radius) <= BOUNDARY_BAND * radius:
        return BOUNDARY
    vals = [v for v in norms if v is not None]
    grows = len(vals) >= 2 and vals[-1] >= GROWTH_FACTOR * vals[0]
    stable = (len(vals) < 2
              or (math.isfinite(vals[-1]) and max(vals) <= (1.0 + STABLE_VARIATION) * min(vals)))
    if (mv is not None and mv.status == "NonMember") or grows:
        return SPECTRUM
    if (mv is None or mv.status == "Member") and stable:
        return RESOLVENT
    return INCONCLUSIVE


def spectrum_scan(a: complex, params: SpaceParams, lambdas: Sequence[complex],
                  N_list: Sequence[int] = DEFAULT_TRUNCATIONS, b: complex = 0.0) -> SpectrumScan:
    """Classify each ``lambda`` as Spectrum, Resolvent, Boundary or Inconclusive.

    Membership of ``exp(a z^2 / lambda)`` is tested in ``params``; truncated
    resolvent norms of ``V_{a z^2 + b z}`` are added when ``p = 2``. The disc
    radius is ``2|a|`` whatever ``b`` is, the linear part being compact.
    """
    a, b = complex(a), complex(b)
    radius = 2.0 * abs(a)
    T = OperatorKind.volterra([0.0, b, a])
    N_list = tuple(int(N) for N in N_list)
    records = []
    for lam in lambdas:
        lam = complex(lam)
        if lam == 0:
            records.append(LambdaRecord(lam, None, tuple(None for _ in N_list), SPECTRUM, N_list))
            continue
        f = FunctionSymbol(Polynomial([1.0]), Polynomial([0.0, 0.0, a / lam]))
        mv = membership(f, params)
        if params.p == 2 and not T.g.derivative().is_zero:
            norms = tuple(truncated_resolvent_norm(T, params, lam, N) for N in N_list)
        elif params.p == 2:
            norms = tuple(1.0 / abs(lam) for _ in N_list)
        else:
            norms = tuple(None for _ in N_list)
        records.append(LambdaRecord(lam, mv, norms, _classify_point(lam, radius, mv, norms),
                                    N_list))
    return SpectrumScan(a, b, params, N_list, tuple(records))


def circle(radius: float, n: int = 24, phase: float = 0.0) -> list:
    """``n`` equally spaced points on ``|lambda| = radius``."""
    return [radius * complex(math.cos(phase + 2 * math.pi * k / n),
                             math.sin(phase + 2 * math.pi * k / n)) for k in range(n)]


# -- norm equivalence with the exponential factor ------------------------------------

@dataclass(frozen=True)
class DerivativeBoundReport:
    lhs: float
    rhs: float
    ratio: float
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "ratio": self.ratio,
                "degenerate": self.degenerate}


def lemma4_check(f: FunctionSymbol, spec: ResolventSpec,
                 params: SpaceParams) -> DerivativeBoundReport:
    """Compare ``int |e^{g/lam} f|^p e^{-p psi}`` with its derivative-side bound.

    The right side is ``|f(0)|^p + int |f' e^{g/lam}|^p (1 + |psi'|)^{-p} e^{-p psi} dA``.
    """
    if spec.inside:
        raise PreconditionError(f"need |lambda| > 2|a|, got |lambda|={abs(spec.lam)}")
    if f.is_zero:
        return DerivativeBoundReport(0.0, 0.0, 0.0, degenerate=True)
    p, m = params.p, params.m
    ef = FunctionSymbol(f.prefactor, f.exponent + spec.exponent)
    lhs_log = _tail_checked_log_integral(_norm_log_integrand(ef, params), auto_grid(ef, params))

    f0 = abs(complex(f(0.0)))
    rhs_log = p * math.log(f0) if f0 > 0 else -math.inf
    df = derivative(f)
    if not df.is_zero:
        edf = FunctionSymbol(df.prefactor, df.exponent + spec.exponent)
        base = _norm_log_integrand(edf, params)

        def log_integrand(z):
            r = np.abs(z)
            # 1 + |psi'| = lp_denominator / (1 + r)
            return base(z) - p * (np.log(lp_denominator(m, r)) - np.log1p(r))

        rhs_log = float(np.logaddexp(rhs_log, _tail_checked_log_integral(
            log_integrand, auto_grid(edf, params))))
    lhs, rhs = math.exp(lhs_log), math.exp(rhs_log)
    return DerivativeBoundReport(lhs, rhs, math.exp(lhs_log - rhs_log))


# -- constant symbols ---------------------------------------------------------------

@dataclass(frozen=True)
class ScalarSpectrum:
    """Spectrum of ``M_value`` or, with ``annihilates_constants``, of ``I_value``.

    ``I_c f = c (f - f(0))`` kills the constants, so ``0`` joins ``{c}``.
    Membership uses exact equality; tolerances are the caller's business.
    """

    value: complex
    lam: complex
    annihilates_constants: bool = False

    @property
    def spectrum(self) -> tuple:
        c = complex(self.value)
        if self.annihilates_constants and c != 0:
            return (0j, c)
        return (c,)

    @property
    def is_spectrum(self) -> bool:
        return complex(self.lam) in self.spectrum

    @property
    def is_point_spectrum(self) -> bool:
        return self.is_spectrum

    def resolve(self, h: FunctionSymbol) -> FunctionSymbol:
        """``(lam - T)^{-1} h``; equals ``h / (lam - value)`` when ``h(0) = 0``."""
        if self.is_spectrum:
            raise PreconditionError("lambda lies in the spectrum")
        lam, c = complex(self.lam), complex(self.value)
        if not self.annihilates_constants or not h.is_poly:
            if self.annihilates_constants and complex(h(0.0)) != 0:
                raise PreconditionError("closed form needs a polynomial h or h(0) = 0")
            return FunctionSymbol(h.prefactor * (1.0 / (lam - c)), h.exponent)
        shifted = h.prefactor - c * complex(h(0.0)) / lam
        return FunctionSymbol(shifted * (1.0 / (lam - c)))

    def to_dict(self) -> dict:
        return {"value": [complex(self.value).real, complex(self.value).imag],
                "lambda": [complex(self.lam).real, complex(self.lam).imag],
                "spectrum": [[x.real, x.imag] for x in self.spectrum],
                "is_spectrum": self.is_spectrum}


def companion_spectrum(c: complex, lam: complex) -> ScalarSpectrum:
    """``I_c`` for constant ``c``: spectrum ``{0, c}`` (``{0}`` when ``c = 0``)."""
    return ScalarSpectrum(complex(c), complex(lam), annihilates_constants=True)


def multiplier_spectrum(alpha: complex, lam: complex) -> ScalarSpectrum:
    """``M_alpha = alpha I``: spectrum and point spectrum ``{alpha}``."""
    return ScalarSpectrum(complex(alpha), complex(lam))
