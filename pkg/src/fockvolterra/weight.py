"""The weight ``psi_m``, norms, membership, monomial norms and reproducing kernels.

Norms are unnormalised, ``(int |f|^p e^{-p psi_m} dA)^{1/p}``, unless a
function says otherwise. The Hilbert-space objects (orthonormal basis,
reproducing kernel) use the normalised inner product
``C_(2,m) * int f conj(g) e^{-2 psi_m} dA`` so that for ``m = 0`` the kernel is
exactly ``exp(conj(w) z)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import PreconditionError, TailNotConverged, TruncationInsufficient
from .quadrature import QuadratureGrid, angles_for, auto_radius, gauss_legendre
from .symbols import FunctionSymbol, derivative

TAIL_RTOL = 1e-6
MEMBERSHIP_RADII = (4.0, 6.0, 8.0, 12.0, 16.0, 24.0)
MEMBERSHIP_RTOL = 1e-8
GROWTH_SLOPE_MIN = 0.01
KERNEL_TERM_RTOL = 1e-10


@dataclass(frozen=True)
class SpaceParams:
    """``(m, p, beta)`` identifying the space ``F^p_{psi_m}``."""

    m: int = 0
    p: float = 2.0
    beta: float = 1.0

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 0:
            raise ValueError(f"m must be a nonnegative integer, got {self.m}")
        if not self.p > 0:
            raise ValueError(f"p must be positive, got {self.p}")
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "beta", float(self.beta))

    def with_beta_above_m(self) -> "SpaceParams":
        """Same space with ``beta`` raised to ``m + 1`` when ``beta <= m``.

        The two-sided Laplacian bound needs ``beta > m``.
        """
        if self.beta > self.m:
            return self
        return SpaceParams(self.m, self.p, float(self.m + 1))

    def with_p(self, p: float) -> "SpaceParams":
        return SpaceParams(self.m, p, self.beta)

    def to_dict(self) -> dict:
        return {"m": self.m, "p": self.p, "beta": self.beta}

    @classmethod
    def from_dict(cls, d: dict) -> "SpaceParams":
        unknown = set(d) - {"m", "p", "beta"}
        if unknown:
            raise ValueError(f"unknown SpaceParams keys: {sorted(unknown)}")
        return cls(d.get("m", 0), d.get("p", 2.0), d.get("beta", 1.0))


def sobolev_constant(p: float, m: int) -> float:
    """``(p/2)^{mp/2+1} / (pi Gamma(mp/2+1))``, the norm normalisation."""
    s = m * p / 2.0
    return math.exp((s + 1.0) * math.log(p / 2.0) - math.log(math.pi) - math.lgamma(s + 1.0))


def psi(params: SpaceParams, z):
    """``|z|^2/2 - m log(beta + |z|)``."""
    r = np.abs(z)
    return r * r / 2.0 - params.m * np.log(params.beta + r)


def psi_prime(m: int, r):
    """Radial derivative ``(r^2 + r - m)/(1 + r)`` for ``beta = 1``."""
    r = np.asarray(r, dtype=float)
    return (r * r + r - m) / (1.0 + r)


def laplacian_psi(params: SpaceParams, z):
    """``2 - 2 m beta / (beta + |z|^2)^2`` for the ``log(beta + |z|^2)/2`` surrogate."""
    r2 = np.abs(z) ** 2
    return 2.0 - 2.0 * params.m * params.beta / (params.beta + r2) ** 2


def radius_threshold(m: int) -> float:
    """``(1 + sqrt(1 + 4m))/2``; ``psi_m'`` has no zero beyond it."""
    return (1.0 + math.sqrt(1.0 + 4.0 * m)) / 2.0


def lp_denominator(m: int, r):
    """``1 + r + |r^2 + r - m|``, positive for every ``r >= 0``."""
    r = np.asarray(r, dtype=float)
    return 1.0 + r + np.abs(r * r + r - m)


# -- plane integrals -----------------------------------------------------------

def _log_weight(params: SpaceParams, z):
    return -params.p * psi(params, z)


def _norm_log_integrand(f: FunctionSymbol, params: SpaceParams):
    p = params.p

    def log_f(z):
        with np.errstate(divide="ignore"):
            return p * f.log_abs(z) + _log_weight(params, z)
    return log_f


def _exponent_variation(f: FunctionSymbol, p: float, R: float) -> tuple:
    q = f.exponent
    if q.is_zero:
        return 0.0, 1
    var = p * sum(abs(c) * R ** k for k, c in enumerate(q.coeffs) if k > 0)
    return var, max(q.degree(), 1)


def auto_grid(f: FunctionSymbol, params: SpaceParams, n_angles: Optional[int] = None,
              extra_variation: float = 0.0) -> QuadratureGrid:
    """A grid whose radius captures the ``|f|^p e^{-p psi}`` mass to ~1e-20.

    Raises :class:`TailNotConverged` when the integrand is not decaying.
    """
    log_f = _norm_log_integrand(f, params)
    scan_angles = angles_for(_exponent_variation(f, params.p, 30.0)[0], cap=1024)
    R = auto_radius(log_f, n_angles=scan_angles)
    if not math.isfinite(R):
        raise TailNotConverged(f"integrand of {f} does not decay in F^{params.p}_{params.m}")
    R = max(R, 4.0)
    if n_angles is None:
        var, freq = _exponent_variation(f, params.p, R)
        n_angles = angles_for(var + extra_variation, frequency=freq)
    return QuadratureGrid(R, n_angles=n_angles)


def _tail_checked_log_integral(log_f, grid: QuadratureGrid) -> float:
    """Integral on ``grid`` plus a check that ``[R, 2R]`` adds < TAIL_RTOL."""
    body = grid.log_integrate(log_f)
    tail = grid.annulus(2.0 * grid.R).log_integrate(log_f)
    if body == -math.inf:
        if tail == -math.inf:
            return body
        raise TailNotConverged("all mass lies beyond the grid radius")
    rel = math.exp(min(tail - body, 50.0))
    if rel > TAIL_RTOL:
        raise TailNotConverged(
            f"doubling R={grid.R} changes the integral by {rel:.2e} (relative)")
    return float(np.logaddexp(body, tail))


def log_norm(f: FunctionSymbol, params: SpaceParams,
             grid: Optional[QuadratureGrid] = None, normalized: bool = False) -> float:
    """``log`` of :func:`norm`; never overflows."""
    if f.is_zero:
        return -math.inf
    if grid is None:
        grid = auto_grid(f, params)
    li = _tail_checked_log_integral(_norm_log_integrand(f, params), grid)
    if normalized:
        li += math.log(sobolev_constant(params.p, params.m))
    return li / params.p


def norm(f: FunctionSymbol, params: SpaceParams,
         grid: Optional[QuadratureGrid] = None, normalized: bool = False) -> float:
    """``(int |f|^p e^{-p psi_m} dA)^{1/p}``.

    Parameters
    ----------
    grid : QuadratureGrid, optional
        Chosen from the integrand when omitted.
    normalized : bool
        Multiply the integral by ``C_(p,m)`` first.

    Raises
    ------
    TailNotConverged
        If doubling the grid radius changes the integral by more than 1e-6.
    """
    return math.exp(log_norm(f, params, grid, normalized))


def littlewood_paley(f: FunctionSymbol, params: SpaceParams,
                     grid: Optional[QuadratureGrid] = None) -> float:
    """Derivative-side quantity equivalent to the norm.

    ``(|f(0)|^p + int |f'|^p (1+|z|)^p e^{-p psi} / (1+|z|+||z|^2+|z|-m|)^p dA)^{1/p}``
    """
    p, m = params.p, params.m
    f0 = abs(complex(f(0.0)))
    df = derivative(f)
    if df.is_zero:
        return f0
    if grid is None:
        grid = auto_grid(df, params)

    def log_f(z):
        r = np.abs(z)
        with np.errstate(divide="ignore"):
            return (p * df.log_abs(z) + p * np.log1p(r) - p * np.log(lp_denominator(m, r))
                    + _log_weight(params, z))

    li = _tail_checked_log_integral(log_f, grid)
    log_f0 = p * math.log(f0) if f0 > 0 else -math.inf
    return math.exp(float(np.logaddexp(li, log_f0)) / p)


# -- membership ----------------------------------------------------------------

@dataclass(frozen=True)
class MembershipVerdict:
    """Outcome of the truncated-integral membership test.

    ``status`` is ``"Member"``, ``"NonMember"`` or ``"Inconclusive"``. ``value``
    is the last truncated integral for members, ``growth_rate`` the fitted slope
    of ``log I(R)`` against ``R^2`` for non-members.
    """

    status: str
    trace: tuple
    log_trace: tuple
    value: Optional[float] = None
    growth_rate: Optional[float] = None
    directional_rate: Optional[float] = None
    exponent_above_quadratic: bool = False

    def to_dict(self) -> dict:
        def num(x):
            if x is None:
                return None
            return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")
        return {
            "status": self.status,
            "value": num(self.value),
            "growth_rate": num(self.growth_rate),
            "directional_rate": num(self.directional_rate),
            "exponent_above_quadratic": self.exponent_above_quadratic,
            "trace": [[R, num(v)] for R, v in self.trace],
            "log_trace": [[R, num(v)] for R, v in self.log_trace],
        }


def membership(f: FunctionSymbol, params: SpaceParams,
               radii: Sequence[float] = MEMBERSHIP_RADII) -> MembershipVerdict:
    """Decide whether ``f`` lies in ``F^p_{psi_m}`` from truncated integrals.

    One grid out to ``max(radii)`` with unit panels gives every truncation by
    cumulative panel sums. The angular resolution follows the largest
    oscillation of ``Re(exponent)`` on the outer circle, which is where a
    directional blow-up lives.
    """
    radii = tuple(float(R) for R in radii)
    if f.is_zero:
        return MembershipVerdict("Member", tuple((R, 0.0) for R in radii),
                                 tuple((R, -math.inf) for R in radii), value=0.0)
    R_out = max(radii)
    var, freq = _exponent_variation(f, params.p, R_out)
    grid = QuadratureGrid(R_out, n_angles=angles_for(var, frequency=freq))
    vals = _norm_log_integrand(f, params)(grid.points) + grid.log_weights
    per_panel = logsumexp(vals.reshape(-1, grid.nodes_per_panel * grid.n_angles), axis=1)
    cum = np.logaddexp.accumulate(per_panel)
    edges = grid.panel_edges[1:]
    log_trace = tuple((R, float(cum[int(np.argmin(np.abs(edges - R)))])) for R in radii)
    trace = tuple((R, math.exp(v) if v < 709 else math.inf) for R, v in log_trace)

    theta = grid.theta
    ring = R_out * np.exp(1j * theta)
    directional = float(np.max(_norm_log_integrand(f, params)(ring))) / R_out ** 2

    scope = f.exponent_above_quadratic
    l_prev, l_last = log_trace[-2][1], log_trace[-1][1]
    if l_last - l_prev < MEMBERSHIP_RTOL:
        return MembershipVerdict("Member", trace, log_trace, value=trace[-1][1],
                                 directional_rate=directional, exponent_above_quadratic=scope)
    xs = np.array([R * R for R, _ in log_trace[-3:]])
    ys = np.array([v for _, v in log_trace[-3:]])
    slope = float(np.polyfit(xs, ys, 1)[0])
    if slope > GROWTH_SLOPE_MIN:
        return MembershipVerdict("NonMember", trace, log_trace, growth_rate=slope,
                                 directional_rate=directional, exponent_above_quadratic=scope)
    return MembershipVerdict("Inconclusive", trace, log_trace, growth_rate=slope,
                             directional_rate=directional, exponent_above_quadratic=scope)


# -- monomial norms and kernels ------------------------------------------------

def _log_radial_moment(k: float, p: float, m: int, beta: float, width: float) -> float:
    """``log int_0^inf r^k (beta+r)^{pm} e^{-p r^2/2} dr`` by composite Gauss-Legendre."""
    r_star = math.sqrt((k + p * m) / p) if k + p * m > 0 else 0.0
    half = math.sqrt(2.0 * 60.0 / p) + 2.0
    lo, hi = max(0.0, r_star - half), r_star + half
    n_pan = max(4, math.ceil((hi - lo) / width))
    edges = np.linspace(lo, hi, n_pan + 1)
    t, w = gauss_legendre(32)
    h = np.diff(edges)
    r = (edges[:-1, None] + h[:, None] * t[None, :]).ravel()
    wr = (h[:, None] * w[None, :]).ravel()
    h_r = k * np.log(r) + p * m * np.log(beta + r) - p * r * r / 2.0
    peak = float(np.max(h_r))
    for edge in ((lo,) if lo > 0 else ()) + (hi,):
        h_e = k * math.log(edge) + p * m * math.log(beta + edge) - p * edge * edge / 2.0
        if h_e > peak - 40.0:
            raise TailNotConverged(f"radial moment k={k} not captured on [{lo:.2f}, {hi:.2f}]")
    return float(logsumexp(h_r, b=wr))


@lru_cache(maxsize=8192)
def log_monomial_norm(n: int, params: SpaceParams) -> float:
    """``log nu_n`` with ``nu_n^p = 2 pi int r^{pn+1} (beta+r)^{pm} e^{-p r^2/2} dr``.

    Two panel widths are compared as the adaptivity check.
    """
    if n < 0:
        raise PreconditionError("monomial degree must be nonnegative")
    p = params.p
    k = p * n + 1.0
    a = _log_radial_moment(k, p, params.m, params.beta, 0.5)
    b = _log_radial_moment(k, p, params.m, params.beta, 0.25)
    if abs(a - b) > 1e-12 * max(1.0, abs(b)):
        raise TailNotConverged(f"radial quadrature for n={n} unstable: {a} vs {b}")
    return (math.log(2.0 * math.pi) + b) / p


def monomial_norm(n: int, params: SpaceParams) -> float:
    """``nu_n``; ``z^n / nu_n`` is orthonormal for the unnormalised inner product."""
    return math.exp(log_monomial_norm(n, params))


def log_basis_norms(params: SpaceParams, n_max: int) -> np.ndarray:
    """``log nu_0 .. log nu_{n_max}`` as an array."""
    return np.array([log_monomial_norm(n, params) for n in range(n_max + 1)])


def _kernel_series(params: SpaceParams, w: complex, z: np.ndarray, N: int):
    """Terms ``z^n conj(w)^n / (C nu_n^2)`` for ``n < N``; shape ``z.shape + (N,)``."""
    if params.p != 2:
        raise PreconditionError("the reproducing kernel is defined for p = 2")
    log_c = math.log(sobolev_constant(2.0, params.m))
    log_nu = log_basis_norms(params, N - 1)
    n = np.arange(N)
    zw = np.asarray(z, dtype=complex)[..., None] * np.conj(w)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_zw = np.log(zw)
        log_t = n * log_zw - 2.0 * log_nu - log_c
    log_t = np.where(n == 0, -2.0 * log_nu[0] - log_c + 0j, log_t)
    log_t = np.where((zw == 0) & (n > 0), -np.inf + 0j, log_t)
    return np.exp(log_t)


def _default_truncation(w: complex, z) -> int:
    s = float(np.max(np.abs(np.asarray(z)))) * abs(w)
    return int(max(80, s + 10.0 * math.sqrt(s) + 40))


def _check_truncation(terms: np.ndarray) -> bool:
    mag = np.abs(terms)
    scale = np.sum(mag, axis=-1)
    return bool(np.all(mag[..., -1] <= KERNEL_TERM_RTOL * np.maximum(scale, 1e-300)))


def kernel(params: SpaceParams, w: complex, z, N: Optional[int] = None):
    """Truncated reproducing kernel ``K_w(z) = sum_{n<N} e_n(z) conj(e_n(w))``.

    With ``N`` omitted the truncation starts at the larger of 80 and a size
    suggested by ``|z w|`` and grows until the last term is below 1e-10 of the
    absolute partial sum. An explicit ``N`` failing that test raises
    :class:`TruncationInsufficient`.
    """
    scalar = np.ndim(z) == 0
    z = np.asarray(z, dtype=complex)
    if N is None:
        N = _default_truncation(w, z)
        while True:
            terms = _kernel_series(params, w, z, N)
            if _check_truncation(terms):
                break
            N = int(N * 1.5)
            if N > 5000:
                raise TruncationInsufficient("kernel series needs more than 5000 terms")
    else:
        if N < 1:
            raise PreconditionError("N must be at least 1")
        terms = _kernel_series(params, w, z, N)
        if not _check_truncation(terms):
            raise TruncationInsufficient(f"last kernel term too large at N={N}")
    out = np.sum(terms, axis=-1)
    return complex(out) if scalar else out


def log_kernel_norm_sq(params: SpaceParams, w: complex, N: Optional[int] = None) -> float:
    """``log sum_{n<N} |e_n(w)|^2``."""
    if params.p != 2:
        raise PreconditionError("the reproducing kernel is defined for p = 2")
    log_c = math.log(sobolev_constant(2.0, params.m))
    aw = abs(w)
    explicit = N is not None
    if N is None:
        N = _default_truncation(w, aw)
    while True:
        log_nu = log_basis_norms(params, N - 1)
        n = np.arange(N)
        with np.errstate(divide="ignore"):
            log_t = 2.0 * n * math.log(aw) - 2.0 * log_nu - log_c if aw > 0 else None
        if log_t is None:
            return float(-2.0 * log_nu[0] - log_c)
        total = float(logsumexp(log_t))
        if log_t[-1] - total <= math.log(KERNEL_TERM_RTOL):
            return total
        if explicit:
            raise TruncationInsufficient(f"last kernel term too large at N={N}")
        N = int(N * 1.5)


def kernel_norm_sq(params: SpaceParams, w: complex, N: Optional[int] = None) -> float:
    """``||K_w||^2 = K_w(w)``; equals ``exp(|w|^2)`` when ``m = 0``."""
    return math.exp(log_kernel_norm_sq(params, w, N))


def kernel_lower_bound_profile(params: SpaceParams, centers: Sequence[complex],
                               deltas: Sequence[float], n_samples: int = 24,
                               threshold: float = 0.1) -> dict:
    """Minimum of ``|K_w(z)| e^{-psi(z)-psi(w)}`` over ``z`` in ``D(w, delta)``.

    The radius of the disc on which the kernel stays comparable to
    ``e^{psi(z)+psi(w)}`` is not quantified in theory; this reports the minimum
    ratio per ``delta`` and the largest ``delta`` whose minimum clears
    ``threshold``. Uses ``beta > m``.
    """
    hp = params.with_p(2.0).with_beta_above_m()
    rng = np.random.default_rng(0)
    out = {}
    for d in deltas:
        worst = math.inf
        for w in centers:
            rad = d * np.sqrt(rng.random(n_samples))
            ang = 2.0 * np.pi * rng.random(n_samples)
            z = w + rad * np.exp(1j * ang)
            kv = np.abs(kernel(hp, w, z))
            ratio = kv * np.exp(-psi(hp, z) - psi(hp, w))
            worst = min(worst, float(np.min(ratio)))
        out[float(d)] = worst
    good = [d for d, v in out.items() if v >= threshold]
    return {"beta": hp.beta, "min_ratio": out, "threshold": threshold,
            "largest_delta": max(good) if good else None}


# -- weight regularity ---------------------------------------------------------

@dataclass(frozen=True)
class RegularityReport:
    """Large-``r`` behaviour of the weight.

    ``decay`` is ``r e^{-p psi(r)} / psi'(r)``. ``curvature`` is the exact
    ``(1/r)(r/psi')'``, which simplifies to ``-m(1+2r)/(r(r^2+r-m)^2)``;
    ``curvature_closed_form`` is ``(2r^2-2rm-m)/(r(r^2+r-m)^2)``, a different
    expression with the same limit 0.
    """

    params: SpaceParams
    radii: tuple
    decay: tuple
    curvature: tuple
    curvature_closed_form: tuple
    r0: float
    decay_to_zero: bool
    curvature_below_p: bool
    curvature_bounded_below: bool
    extras: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.decay_to_zero and self.curvature_below_p and self.curvature_bounded_below

    def to_dict(self) -> dict:
        return {"params": self.params.to_dict(), "radii": list(self.radii),
                "decay": list(self.decay), "curvature": list(self.curvature),
                "curvature_closed_form": list(self.curvature_closed_form),
                "r0": self.r0, "decay_to_zero": self.decay_to_zero,
                "curvature_below_p": self.curvature_below_p,
                "curvature_bounded_below": self.curvature_bounded_below, "ok": self.ok}


def curvature_exact(m: int, r):
    r = np.asarray(r, dtype=float)
    return -m * (1.0 + 2.0 * r) / (r * (r * r + r - m) ** 2)


def curvature_closed_form(m: int, r):
    r = np.asarray(r, dtype=float)
    return (2.0 * r * r - 2.0 * r * m - m) / (r * (r * r + r - m) ** 2)


def regularity_report(params: SpaceParams,
                      radii: Sequence[float] = (10.0, 20.0, 50.0, 100.0, 200.0),
                      lower_bound: float = -1.0) -> RegularityReport:
    """Evaluate the three large-``r`` limit conditions on the weight."""
    p, m = params.p, params.m
    r = np.asarray(radii, dtype=float)
    pp = psi_prime(m, r)
    psi_r = r * r / 2.0 - m * np.log1p(r)
    decay = r * np.exp(-p * psi_r) / pp
    curv = curvature_exact(m, r)
    closed = curvature_closed_form(m, r)
    decay_ok = bool(np.all(np.diff(decay) <= 0) and decay[-1] < 1e-10)
    below = bool(np.all(curv < p) and np.all(closed < p))
    bounded = bool(np.all(curv > lower_bound) and np.all(closed > lower_bound))
    return RegularityReport(params, tuple(r.tolist()), tuple(decay.tolist()), tuple(curv.tolist()),
                            tuple(closed.tolist()), radius_threshold(m), decay_ok, below, bounded)
