"""Closed-form entire functions: polynomials and polynomial times exp(polynomial).

Everything here is immutable. Evaluation is vectorised over numpy arrays so the
same objects can be fed straight into the plane quadratures of
:mod:`fockvolterra.weight`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from .errors import SymbolOverflow

Number = Union[int, float, complex]

# largest exponent real part we agree to exponentiate
EXP_LIMIT = 700.0


@dataclass(frozen=True, init=False)
class Polynomial:
    """Polynomial with complex coefficients, ``coeffs[k]`` multiplying ``z**k``.

    Trailing zeros are stripped on construction, so the zero polynomial has
    ``coeffs == ()`` and ``degree() == -1``.
    """

    coeffs: tuple

    def __init__(self, coeffs: Iterable[Number] = ()):
        c = [complex(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def monomial(cls, n: int, c: Number = 1.0) -> "Polynomial":
        return cls([0.0] * n + [c])

    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def lowest_degree(self) -> int:
        """Index of the first nonzero coefficient (-1 for the zero polynomial)."""
        for k, c in enumerate(self.coeffs):
            if c != 0:
                return k
        return -1

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for c in reversed(self.coeffs):
            out = out * z + c
        return out if out.ndim else complex(out)

    def log_abs(self, z) -> np.ndarray:
        """``log|P(z)|`` without forming ``P(z)``'s leading power explicitly.

        The lowest nonzero power is factored out so ``z**500`` and friends never
        overflow.
        """
        z = np.asarray(z, dtype=complex)
        if self.is_zero:
            return np.full(z.shape, -np.inf)
        s = self.lowest_degree()
        rest = Polynomial(self.coeffs[s:])
        with np.errstate(divide="ignore"):
            lz = np.log(np.abs(z)) if s else 0.0
            return s * lz + np.log(np.abs(rest(z)))

    def derivative(self) -> "Polynomial":
        return Polynomial([k * c for k, c in enumerate(self.coeffs)][1:])

    def antiderivative(self) -> "Polynomial":
        """Coefficientwise antiderivative vanishing at the origin."""
        return Polynomial([0.0] + [c / (k + 1) for k, c in enumerate(self.coeffs)])

    def __add__(self, other):
        other = _as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [0] * (n - len(self.coeffs))
        b = list(other.coeffs) + [0] * (n - len(other.coeffs))
        return Polynomial([x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def __neg__(self):
        return Polynomial([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        other = _as_poly(other)
        if self.is_zero or other.is_zero:
            return Polynomial()
        return Polynomial(np.convolve(np.array(self.coeffs), np.array(other.coeffs)))

    __rmul__ = __mul__

    def __repr__(self):
        return f"Polynomial({list(self.coeffs)!r})"


def _as_poly(x) -> Polynomial:
    if isinstance(x, Polynomial):
        return x
    return Polynomial([x])


ZERO = Polynomial()


@dataclass(frozen=True)
class FunctionSymbol:
    """``prefactor(z) * exp(exponent(z))``.

    A plain polynomial is the case ``exponent == 0``; equality is structural so
    ``FunctionSymbol.poly(p) == FunctionSymbol.exppoly(p, [])``.
    """

    prefactor: Polynomial
    exponent: Polynomial = field(default=ZERO)

    @classmethod
    def poly(cls, coeffs: Union[Polynomial, Sequence[Number]]) -> "FunctionSymbol":
        return cls(_coerce(coeffs))

    @classmethod
    def exppoly(cls, prefactor, exponent) -> "FunctionSymbol":
        return cls(_coerce(prefactor), _coerce(exponent))

    @classmethod
    def monomial(cls, n: int, c: Number = 1.0) -> "FunctionSymbol":
        return cls(Polynomial.monomial(n, c))

    @property
    def is_poly(self) -> bool:
        return self.exponent.is_zero

    @property
    def is_zero(self) -> bool:
        return self.prefactor.is_zero

    @property
    def exponent_above_quadratic(self) -> bool:
        """Exponent of degree above two; such symbols are accepted but tagged."""
        return self.exponent.degree() > 2

    def __call__(self, z):
        return evaluate(self, z)

    def log_abs(self, z) -> np.ndarray:
        """``log|f(z)|``, finite wherever ``f(z) != 0`` regardless of size."""
        z = np.asarray(z, dtype=complex)
        out = self.prefactor.log_abs(z)
        if not self.exponent.is_zero:
            out = out + np.real(self.exponent(z))
        return out

    def __mul__(self, other):
        if not isinstance(other, FunctionSymbol):
            return FunctionSymbol(self.prefactor * other, self.exponent)
        return FunctionSymbol(self.prefactor * other.prefactor, self.exponent + other.exponent)

    __rmul__ = __mul__

    def __str__(self):
        return format_symbol(self)


def _coerce(p) -> Polynomial:
    return p if isinstance(p, Polynomial) else Polynomial(p)


def evaluate(f: FunctionSymbol, z):
    """Exact value of ``f`` at ``z`` (scalar or array).

    Raises
    ------
    SymbolOverflow
        If ``Re(exponent(z))`` exceeds :data:`EXP_LIMIT` anywhere.
    """
    pre = f.prefactor(z)
    if f.exponent.is_zero:
        return pre
    q = np.asarray(f.exponent(z))
    if np.any(np.real(q) > EXP_LIMIT):
        raise SymbolOverflow(f"Re(exponent) = {np.max(np.real(q)):.1f} exceeds {EXP_LIMIT}")
    out = pre * np.exp(q)
    return out if np.ndim(out) else complex(out)


def derivative(f: FunctionSymbol) -> FunctionSymbol:
    """``(P e^Q)' = (P' + P Q') e^Q``; polynomials stay polynomials."""
    p, q = f.prefactor, f.exponent
    return FunctionSymbol(p.derivative() + p * q.derivative(), q)


@lru_cache(maxsize=32)
def _gauss_legendre_unit(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1.0) / 2.0, w / 2.0


def line_integral(integrand: Callable, z: Number, n_nodes: int = 64) -> complex:
    """Gauss-Legendre approximation of the integral of ``integrand`` along [0, z].

    Exact to rounding for polynomial integrands of degree ``<= 2*n_nodes - 1``.
    ``integrand`` may be vectorised; if it is not, it is called pointwise.
    """
    if n_nodes < 2:
        raise ValueError("n_nodes must be at least 2")
    t, w = _gauss_legendre_unit(n_nodes)
    z = complex(z)
    nodes = t * z
    try:
        vals = np.asarray(integrand(nodes), dtype=complex)
        if vals.shape != nodes.shape:
            raise ValueError
    except (TypeError, ValueError):
        vals = np.array([complex(integrand(complex(x))) for x in nodes])
    return complex(z * np.dot(w, vals))


# -- textual syntax ----------------------------------------------------------

_LIST = re.compile(r"^\[(.*)\]$")


def parse_complex(token: str) -> complex:
    """Parse ``"re+imi"`` style literals: ``"1"``, ``"-2.5i"``, ``"1+2i"``, ``"i"``."""
    t = token.strip().replace(" ", "").lower()
    if not t:
        raise ValueError("empty complex literal")
    if t.endswith("i"):
        t = t[:-1] + "j"
        if t in ("j", "+j", "-j") or t[-2] in "+-":
            t = t[:-1] + "1j"
    return complex(t)


def _parse_list(text: str) -> Polynomial:
    m = _LIST.match(text.strip())
    if not m:
        raise ValueError(f"expected a bracketed coefficient list, got {text!r}")
    body = m.group(1).strip()
    if not body:
        return Polynomial()
    return Polynomial(parse_complex(tok) for tok in body.split(","))


def parse_symbol(text: str) -> FunctionSymbol:
    """Parse ``poly:[c0,c1,...]`` or ``exppoly:[p-coeffs]|[q-coeffs]``."""
    kind, _, rest = text.strip().partition(":")
    kind = kind.strip().lower()
    if kind == "poly":
        return FunctionSymbol(_parse_list(rest))
    if kind == "exppoly":
        left, sep, right = rest.partition("|")
        if not sep:
            raise ValueError(f"exppoly needs 'prefactor|exponent': {text!r}")
        return FunctionSymbol(_parse_list(left), _parse_list(right))
    raise ValueError(f"unknown symbol kind {kind!r}")


def format_complex(c: complex) -> str:
    c = complex(c)
    re_, im = c.real, c.imag
    if im == 0:
        return repr(re_)
    if re_ == 0:
        return f"{im!r}i"
    return f"{re_!r}{'+' if im >= 0 else '-'}{abs(im)!r}i"


def _format_list(p: Polynomial) -> str:
    return "[" + ",".join(format_complex(c) for c in p.coeffs) + "]"


def format_symbol(f: FunctionSymbol) -> str:
    if f.is_poly:
        return "poly:" + _format_list(f.prefactor)
    return "exppoly:" + _format_list(f.prefactor) + "|" + _format_list(f.exponent)
