"""Volterra, companion, multiplication and differentiation operators.

Each operator is available pointwise (:func:`apply`), as a banded matrix in the
orthonormal monomial basis ``z^n / nu_n`` of the ``p = 2`` space
(:func:`matrix`), and through singular-value / Schatten / growth diagnostics.

Matrix entries come from termwise integration of monomials, so the only
numerical error in them is that of the radial moments ``nu_n``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ConvergenceFailure, NotCompact, PreconditionError
from .symbols import FunctionSymbol, Polynomial, derivative, line_integral
from .weight import SpaceParams, log_monomial_norm, log_norm, sobolev_constant

VOLTERRA = "volterra"
COMPANION = "companion"
MULTIPLIER = "multiplier"
DIFFERENTIATION = "differentiation"
KINDS = (VOLTERRA, COMPANION, MULTIPLIER, DIFFERENTIATION)

_SHORT = {VOLTERRA: "V", COMPANION: "I", MULTIPLIER: "M", DIFFERENTIATION: "D"}


@dataclass(frozen=True)
class OperatorKind:
    """One of ``V_g``, ``I_g``, ``M_g`` or ``D``; ``g`` is ``None`` only for ``D``."""

    tag: str
    g: Optional[Polynomial] = None

    def __post_init__(self):
        if self.tag not in KINDS:
            raise ValueError(f"unknown operator {self.tag!r}")
        if self.tag == DIFFERENTIATION:
            if self.g is not None:
                raise ValueError("differentiation takes no symbol")
        elif not isinstance(self.g, Polynomial):
            object.__setattr__(self, "g", Polynomial(self.g if self.g is not None else ()))

    @classmethod
    def volterra(cls, g) -> "OperatorKind":
        return cls(VOLTERRA, _poly(g))

    @classmethod
    def companion(cls, g) -> "OperatorKind":
        return cls(COMPANION, _poly(g))

    @classmethod
    def multiplier(cls, g) -> "OperatorKind":
        return cls(MULTIPLIER, _poly(g))

    @classmethod
    def differentiation(cls) -> "OperatorKind":
        return cls(DIFFERENTIATION)

    @property
    def degree(self) -> int:
        return self.g.degree() if self.g is not None else -1

    @property
    def shifts(self) -> list:
        """``(k, factor(n))`` pairs: ``T z^n = sum_k factor_k(n) z^{n+k}``."""
        if self.tag == DIFFERENTIATION:
            return [(-1, lambda n: float(n))]
        out = []
        for k, c in enumerate(self.g.coeffs):
            if c == 0:
                continue
            if self.tag == VOLTERRA:
                if k == 0:
                    continue
                out.append((k, lambda n, k=k, c=c: k * c / (n + k)))
            elif self.tag == COMPANION:
                out.append((k, lambda n, k=k, c=c: n * c / (n + k) if n + k > 0 else 0.0))
            else:
                out.append((k, lambda n, c=c: c))
        return out

    @property
    def band(self) -> int:
        """Largest downward shift; that many trailing columns lose their image."""
        ks = [k for k, _ in self.shifts]
        return max([0] + ks)

    def label(self) -> str:
        if self.tag == DIFFERENTIATION:
            return "D"
        from .symbols import format_symbol
        return f"{_SHORT[self.tag]}[{format_symbol(FunctionSymbol(self.g))}]"

    def to_dict(self) -> dict:
        from .symbols import format_symbol
        return {"operator": self.tag,
                "g": None if self.g is None else format_symbol(FunctionSymbol(self.g))}


def _poly(g) -> Polynomial:
    if isinstance(g, Polynomial):
        return g
    if isinstance(g, FunctionSymbol):
        if not g.is_poly:
            raise ValueError("operator symbols must be polynomials")
        return g.prefactor
    if isinstance(g, (int, float, complex)):
        return Polynomial([g])
    return Polynomial(g)


# -- pointwise action ----------------------------------------------------------

def apply_symbol(T: OperatorKind, f: FunctionSymbol) -> FunctionSymbol:
    """Closed-form ``T f`` when it exists (always for polynomial ``f``).

    ``V_g`` and ``I_g`` on a non-polynomial ``f`` have no closed form in the
    two symbol families and raise :class:`PreconditionError`.
    """
    if T.tag == DIFFERENTIATION:
        return derivative(f)
    if T.tag == MULTIPLIER:
        return FunctionSymbol(f.prefactor * T.g, f.exponent)
    if not f.is_poly:
        raise PreconditionError("integral operators have closed forms only on polynomials")
    if T.tag == VOLTERRA:
        return FunctionSymbol((f.prefactor * T.g.derivative()).antiderivative())
    return FunctionSymbol((f.prefactor.derivative() * T.g).antiderivative())


def apply(T: OperatorKind, f: FunctionSymbol, z, n_nodes: int = 64):
    """``(T f)(z)``.

    Exact for polynomial ``f``; otherwise the integral operators are evaluated
    with Gauss-Legendre on the segment ``[0, z]``.
    """
    if f.is_poly or T.tag in (MULTIPLIER, DIFFERENTIATION):
        return apply_symbol(T, f)(z)
    if T.tag == VOLTERRA:
        dg = T.g.derivative()
        integrand = lambda w: f(w) * dg(w)  # noqa: E731
    else:
        df = derivative(f)
        integrand = lambda w: df(w) * T.g(w)  # noqa: E731
    if np.ndim(z) == 0:
        return line_integral(integrand, z, n_nodes)
    z = np.asarray(z, dtype=complex)
    return np.array([line_integral(integrand, zz, n_nodes) for zz in z.ravel()]).reshape(z.shape)


# -- matrices ------------------------------------------------------------------

@dataclass(frozen=True)
class OperatorMatrix:
    """``A[j, n] = <T e_n, e_j>`` for the orthonormal monomials, ``j, n < size``."""

    kind: OperatorKind
    params: SpaceParams
    size: int
    entries: np.ndarray
    log_basis_norms: np.ndarray
    band: int

    @property
    def basis_norms(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_basis_norms)

    @property
    def truncated_columns(self) -> list:
        """Columns whose image leaves the truncated basis."""
        return list(range(self.size - self.band, self.size))

    @property
    def complete(self) -> np.ndarray:
        """The ``size x (size - band)`` block of fully represented columns."""
        return self.entries[:, : self.size - self.band]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["row", "col", "re", "im"])
        rows, cols = np.nonzero(self.entries)
        for j, n in sorted(zip(rows.tolist(), cols.tolist()), key=lambda t: (t[1], t[0])):
            v = self.entries[j, n]
            w.writerow([j, n, repr(float(v.real)), repr(float(v.imag))])
        return buf.getvalue()


def _check_p2(params: SpaceParams):
    if params.p != 2:
        raise PreconditionError("operator matrices need the Hilbert space p = 2")


def matrix(T: OperatorKind, params: SpaceParams, N: int) -> OperatorMatrix:
    """Exact banded matrix of ``T`` on the first ``N`` orthonormal monomials."""
    _check_p2(params)
    if N < 4:
        raise PreconditionError("N must be at least 4")
    band = T.band
    log_nu = np.array([log_monomial_norm(n, params) for n in range(N + band + 1)])
    A = np.zeros((N, N), dtype=complex)
    for k, factor in T.shifts:
        for n in range(max(0, -k), N):
            j = n + k
            if j >= N:
                break
            c = factor(n)
            if c != 0:
                A[j, n] = c * math.exp(log_nu[j] - log_nu[n])
    return OperatorMatrix(T, params, N, A, log_nu, band)


def column_norm(T: OperatorKind, params: SpaceParams, n: int) -> float:
    """``||T e_n||`` in the ``p = 2`` space, exact up to the ``nu`` quadrature."""
    _check_p2(params)
    lo = log_monomial_norm(n, params)
    s = 0.0
    for k, factor in T.shifts:
        if n + k < 0:
            continue
        c = factor(n)
        if c != 0:
            s += abs(c) ** 2 * math.exp(2.0 * (log_monomial_norm(n + k, params) - lo))
    return math.sqrt(s)


def singular_values(A: OperatorMatrix, k: Optional[int] = None) -> np.ndarray:
    """Top ``k`` singular values, descending, of the fully represented columns."""
    usable = A.size - A.band
    if k is None:
        k = usable
    if k > usable:
        raise PreconditionError(f"k={k} exceeds the {usable} untruncated columns")
    try:
        s = np.linalg.svd(A.complete, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    return np.sort(s)[::-1][:k]


# -- boundedness rules -----------------------------------------------------------

BOUNDED, COMPACT, UNBOUNDED = "Bounded", "Compact", "Unbounded"


def degree_verdict(T: OperatorKind, p: float, q: float) -> tuple:
    """``(verdict, rule)`` for ``T: F^p -> F^q`` from the degree of ``g``.

    ``Compact`` implies bounded. The rules do not depend on ``m``.
    """
    d = T.degree
    if T.tag == DIFFERENTIATION:
        return UNBOUNDED, "D is unbounded between any two of the spaces"
    if T.tag == VOLTERRA:
        if p <= q:
            rule = "V_g, p<=q: bounded iff deg g<=2, compact iff deg g<=1"
            if d <= 1:
                return COMPACT, rule
            return (BOUNDED if d == 2 else UNBOUNDED), rule
        rule = "V_g, q<p: bounded iff compact iff g=az+b with q/2>(p-q)/p, else g constant"
        if d <= 0 or (d == 1 and q / 2.0 > (p - q) / p):
            return COMPACT, rule
        return UNBOUNDED, rule
    name = "I_g" if T.tag == COMPANION else "M_g"
    if p <= q:
        rule = f"{name}, p<=q: bounded iff g constant, compact iff g=0"
        if T.g.is_zero:
            return COMPACT, rule
        return (BOUNDED if d == 0 else UNBOUNDED), rule
    rule = f"{name}, q<p: bounded iff compact iff g=0"
    return (COMPACT if T.g.is_zero else UNBOUNDED), rule


# -- Schatten diagnostics --------------------------------------------------------

CONVERGENT, DIVERGENT, INCONCLUSIVE = "Convergent", "Divergent", "Inconclusive"
SCHATTEN_RTOL = 0.01
LOG_GROWTH_RATIO = 0.9
# a tail is extrapolated only for clearly summable power laws
TAIL_EXPONENT_MAX = -1.05


def power_law_fit(s: np.ndarray, lo: int, hi: int) -> tuple:
    """Least-squares ``s_j ~ C j^alpha`` over ranks ``j = lo..hi`` (1-based)."""
    j = np.arange(lo, hi + 1)
    y = np.log(s[j - 1])
    alpha, logc = np.polyfit(np.log(j), y, 1)
    return float(alpha), float(math.exp(logc))


def schatten_diagnostic(T: OperatorKind, params: SpaceParams, p_list: Sequence[float],
                        N: int = 400) -> list:
    """Summability of ``sum s_n^p`` from the truncated matrix.

    For each exponent the record holds partial sums at ``N/4``, ``N/2`` and
    ``N``; ``tail_trend``, the ratio of the last two partial-sum increments
    (1 for logarithmic growth, below 1 for convergence); the tail-corrected
    totals using the fitted power law; and the verdict.

    Raises
    ------
    NotCompact
        If ``T`` is not compact on the ``p = 2`` space.
    """
    if not p_list:
        raise PreconditionError("p_list must be nonempty")
    hp = params.with_p(2.0)
    verdict, _ = degree_verdict(T, 2.0, 2.0)
    if verdict != COMPACT:
        raise NotCompact(f"{T.label()} is {verdict.lower()} on F^2, Schatten sums are meaningless")
    A = matrix(T, hp, N)
    s = singular_values(A)
    s = s[s > 0]
    if len(s) < N // 2:
        # finite rank
        return [{"p": float(p), "partial_sum": float(np.sum(s ** p)), "partial_sums": {},
                 "tail_trend": 0.0, "decay_exponent_fit": None, "verdict": CONVERGENT,
                 "finite_rank": True} for p in p_list]
    alpha, C = power_law_fit(s, N // 4, N // 2)
    out = []
    for p in p_list:
        sp = s ** p
        marks = (N // 4, N // 2, min(N, len(s)))
        S = {M: float(np.sum(sp[:M])) for M in marks}
        d1 = S[marks[1]] - S[marks[0]]
        d2 = S[marks[2]] - S[marks[1]]
        trend = d2 / d1 if d1 > 0 else 0.0
        e = p * alpha
        if e < TAIL_EXPONENT_MAX:
            def total(M):
                return S[M] + C ** p * (M + 0.5) ** (e + 1.0) / (-e - 1.0)
            t_half, t_full = total(marks[1]), total(marks[2])
            change = abs(t_full - t_half) / t_full
        else:
            t_half = t_full = math.inf
            change = math.inf
        if change < SCHATTEN_RTOL:
            v = CONVERGENT
        elif trend >= LOG_GROWTH_RATIO:
            v = DIVERGENT
        else:
            v = INCONCLUSIVE
        out.append({
            "p": float(p),
            "partial_sum": S[marks[2]],
            "partial_sums": {str(M): S[M] for M in marks},
            "tail_trend": trend,
            "log_fit_error": abs(trend - 1.0),
            "tail_corrected_change": change,
            "tail_corrected_total": t_full,
            "decay_exponent_fit": alpha,
            "decay_prefactor": C,
            "verdict": v,
            "finite_rank": False,
        })
    return out


# -- growth probe ----------------------------------------------------------------

def growth_probe(T: OperatorKind, params: SpaceParams, n_max: int,
                 target: Optional[SpaceParams] = None,
                 n_values: Optional[Iterable[int]] = None) -> list:
    """``(n, ||T e_n|| / ||e_n||)`` for normalised monomials ``e_n``.

    The source norm is that of ``params``; the target norm that of ``target``
    (default: the same space). Both are normalised by ``C_(p,m)`` so that
    ratios between different exponents are meaningful; for equal spaces the
    constant cancels. With ``p = 2`` on both sides the ratios come from the
    exact ``nu`` quotients, otherwise from plane quadrature.
    """
    target = params if target is None else target
    exact = params.p == 2 and target == params
    if n_values is None:
        if exact:
            n_values = range(0, n_max + 1)
        else:
            step = max(1, n_max // 10)
            n_values = sorted(set(range(step, n_max + 1, step)) | {n_max})
    out = []
    for n in n_values:
        if exact:
            out.append((n, column_norm(T, params, n)))
            continue
        img = apply_symbol(T, FunctionSymbol.monomial(n))
        if img.is_zero:
            out.append((n, 0.0))
            continue
        src = log_monomial_norm(n, params) + math.log(sobolev_constant(params.p, params.m)) / params.p
        dst = log_norm(img, target, normalized=True)
        out.append((n, math.exp(dst - src)))
    return out


def growth_exponent(seq: Sequence[tuple], lo_frac: float = 0.25) -> float:
    """Fitted ``beta`` in ``ratio(n) ~ c n^beta`` over the upper part of the probe."""
    n_max = max(n for n, _ in seq)
    pts = [(n, v) for n, v in seq if n >= lo_frac * n_max and n > 0 and v > 0]
    if len(pts) < 2:
        return -math.inf
    x = np.log([n for n, _ in pts])
    y = np.log([v for _, v in pts])
    return float(np.polyfit(x, y, 1)[0])
