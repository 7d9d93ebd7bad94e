"""Fock-Carleson machinery for ``V_g`` and the boundedness classifier.

The measure ``dmu_(g,q) = |g'|^q (1+|z|)^{qm+q} / (1+|z|+||z|^2+|z|-m|)^q dA``
turns ``||V_g f||_q^q`` into an integral of ``|f|^q`` against it, so the
boundedness and compactness of ``V_g`` reduce to the size of the averaged
transform ``tilde_mu``. :func:`classify` combines the degree rules with a
numeric witness and refuses to return when the two disagree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate

from .errors import ModeMismatch, PreconditionError, WitnessDisagreement
from .operators import (BOUNDED, COMPACT, COMPANION, DIFFERENTIATION, MULTIPLIER, UNBOUNDED,
                        VOLTERRA, OperatorKind, growth_exponent, growth_probe, degree_verdict)
from .quadrature import QuadratureGrid
from .symbols import Polynomial, format_symbol, FunctionSymbol
from .weight import SpaceParams, kernel, log_kernel_norm_sq, lp_denominator, psi

SUP_GROWTH_FACTOR = 2.0
VANISHING_SLOPE = -0.5
INTEGRABLE_SIGMA = 2.0
GROWTH_EXPONENT_MIN = 0.04


@dataclass(frozen=True)
class CarlesonQuery:
    """Symbol and exponents for ``mu_(g,q)`` and ``tilde_mu_(t,mq)``; ``t`` defaults to ``q``."""

    g: Polynomial
    p: float = 2.0
    q: float = 2.0
    m: int = 0
    t: Optional[float] = None

    def __post_init__(self):
        if not isinstance(self.g, Polynomial):
            object.__setattr__(self, "g", Polynomial(self.g))
        if self.t is None:
            object.__setattr__(self, "t", float(self.q))
        if min(self.p, self.q, self.t) <= 0:
            raise ValueError("p, q and t must be positive")


def mu_density(query: CarlesonQuery, z):
    """Density of ``mu_(g,q)`` with respect to area measure."""
    r = np.abs(z)
    dg = np.abs(query.g.derivative()(z))
    q, m = query.q, query.m
    return dg ** q * (1.0 + r) ** (q * m + q) / lp_denominator(m, r) ** q


def _tilde_integrand(query: CarlesonQuery, z):
    # mu density divided by (1+|z|)^{mq}
    r = np.abs(z)
    dg = np.abs(query.g.derivative()(z))
    q = query.q
    return dg ** q * (1.0 + r) ** q / lp_denominator(query.m, r) ** q


def tilde_grid(query: CarlesonQuery, w: complex = 0j) -> QuadratureGrid:
    """Disc around ``w`` where the Gaussian factor drops below ``e^{-36}``."""
    rho = math.ceil(math.sqrt(2.0 * 36.0 / query.t)) + 1.0
    return QuadratureGrid(rho, n_angles=48, nodes_per_panel=16, center=complex(w))


def tilde_mu(query: CarlesonQuery, w: complex, grid: Optional[QuadratureGrid] = None) -> float:
    """``int e^{-t|z-w|^2/2} (1+|z|)^{-mq} dmu_(g,q)(z)``."""
    if query.g.derivative().is_zero:
        return 0.0
    if grid is None:
        grid = tilde_grid(query, w)
    elif grid.center != w:
        grid = QuadratureGrid(grid.R, grid.n_angles, grid.nodes_per_panel, grid.panel_width,
                              grid.r_min, complex(w))
    z = grid.points
    vals = np.exp(-query.t * np.abs(z - w) ** 2 / 2.0) * _tilde_integrand(query, z)
    return float(np.sum(vals * grid.weights))


def _ring_values(query: CarlesonQuery, radii, n_ring: int = 8) -> np.ndarray:
    """``tilde_mu`` on rings; shape ``(len(radii), n_ring)``."""
    th = 2.0 * np.pi * (np.arange(n_ring) + 0.5) / n_ring
    out = np.zeros((len(radii), n_ring))
    for i, r in enumerate(radii):
        for j, a in enumerate(th):
            out[i, j] = tilde_mu(query, r * np.exp(1j * a))
    return out


def carleson_scan(query: CarlesonQuery, mode: str, W: float = 10.0) -> dict:
    """Size of ``tilde_mu`` in one of three senses.

    ``sup``
        maximum over ``|w| <= W`` plus the ring maxima out to ``W + 2``;
        ``unbounded`` when the value at ``W + 2`` is at least twice that at
        ``W / 2 + 1`` and still increasing.
    ``vanishing``
        slope of ``log tilde_mu`` against ``log(1+|w|)`` along ``|w| = 4..10``.
    ``integrability``
        ``int tilde_mu^{p/(p-q)} dA`` over ``|w| <= W`` with the tail
        extrapolated from a fitted ``c (1+|w|)^{-sigma}`` profile; infinite
        unless ``sigma > 2``.
    """
    if mode == "sup":
        radii = np.arange(0.0, W + 2.0 + 1e-9, 1.0)
        ring = np.max(_ring_values(query, radii), axis=1)
        i_half = int(np.argmin(np.abs(radii - (W / 2.0 + 1.0))))
        sup_w = float(np.max(ring[radii <= W]))
        sup_ext = float(np.max(ring))
        increasing = bool(np.all(np.diff(ring[-4:]) > 0))
        unbounded = bool(ring[-1] >= SUP_GROWTH_FACTOR * ring[i_half] and increasing)
        return {"mode": mode, "W": W, "sup": sup_w, "sup_extended": sup_ext,
                "stable": bool(sup_ext <= 1.05 * sup_w), "unbounded": unbounded,
                "ring_max": ring.tolist(), "radii": radii.tolist()}
    if mode == "vanishing":
        radii = np.array([4.0, 6.0, 8.0, 10.0])
        ring = np.max(_ring_values(query, radii), axis=1)
        if np.all(ring == 0):
            return {"mode": mode, "slope": -math.inf, "vanishing": True, "expected": -query.q,
                    "values": ring.tolist(), "radii": radii.tolist()}
        slope = float(np.polyfit(np.log1p(radii), np.log(ring), 1)[0])
        return {"mode": mode, "slope": slope, "vanishing": bool(slope < VANISHING_SLOPE),
                "expected": -query.q, "values": ring.tolist(), "radii": radii.tolist()}
    if mode == "integrability":
        p, q = query.p, query.q
        if q >= p:
            raise ModeMismatch(f"integrability mode needs q < p, got p={p}, q={q}")
        s = p / (p - q)
        if query.g.derivative().is_zero:
            return {"mode": mode, "exponent": s, "integral": 0.0, "sigma": math.inf,
                    "tail": 0.0, "total": 0.0, "finite": True}
        wgrid = QuadratureGrid(W, n_angles=8, nodes_per_panel=4, panel_width=1.0)
        r_nodes, _ = wgrid.radial
        th = wgrid.theta + np.pi / 8.0
        vals = np.zeros((len(r_nodes), len(th)))
        for i, r in enumerate(r_nodes):
            for j, a in enumerate(th):
                vals[i, j] = tilde_mu(query, r * np.exp(1j * a)) ** s
        body = float(np.sum(vals * wgrid.weights))
        ring = np.mean(vals, axis=1)
        sel = r_nodes >= W / 2.0
        slope, logc = np.polyfit(np.log1p(r_nodes[sel]), np.log(ring[sel]), 1)
        sigma = float(-slope)
        if sigma > INTEGRABLE_SIGMA:
            c = math.exp(logc)
            tail, _ = integrate.quad(lambda r: 2.0 * math.pi * r * c * (1.0 + r) ** (-sigma),
                                     W, math.inf)
            total = body + tail
        else:
            tail = total = math.inf
        return {"mode": mode, "exponent": s, "integral": body, "sigma": sigma,
                "expected_sigma": s * q, "tail": tail, "total": total,
                "finite": bool(math.isfinite(total))}
    raise ValueError(f"unknown mode {mode!r}")


def berezin_Mg(g, q: float, m: int, w: complex, N: Optional[int] = None) -> float:
    """``int |k_w|^q |g|^q e^{-q psi_m} dA`` with the normalised kernel ``k_w``.

    ``k_w`` is exact for ``m = 0`` and the truncated series otherwise.
    """
    g = g if isinstance(g, Polynomial) else Polynomial(g)
    if g.is_zero:
        return 0.0
    params = SpaceParams(m, 2.0)
    rho = math.ceil(math.sqrt(2.0 * 40.0 / q)) + 2.0
    grid = QuadratureGrid(rho, n_angles=64, nodes_per_panel=16, center=complex(w))
    z = grid.points
    if m == 0:
        log_k = np.real(np.conj(w) * z) - abs(w) ** 2 / 2.0
    else:
        kv = kernel(params, w, z, N)
        with np.errstate(divide="ignore"):
            log_k = np.log(np.abs(kv)) - 0.5 * log_kernel_norm_sq(params, w)
    with np.errstate(divide="ignore"):
        log_int = q * log_k + q * np.log(np.abs(g(z))) - q * psi(params, z)
    return float(np.sum(np.exp(log_int) * grid.weights))


# -- classifier -------------------------------------------------------------------

@dataclass(frozen=True)
class Classification:
    """Verdict for ``T: F^p -> F^q`` with the rule it came from and its evidence."""

    operator: OperatorKind
    p: float
    q: float
    m: int
    verdict: str
    rule: str
    witness: dict = field(default_factory=dict)

    @property
    def bounded(self) -> bool:
        return self.verdict in (BOUNDED, COMPACT)

    @property
    def compact(self) -> bool:
        return self.verdict == COMPACT

    def to_dict(self) -> dict:
        g = None if self.operator.g is None else format_symbol(FunctionSymbol(self.operator.g))
        return {"operator": self.operator.tag, "g": g, "p": self.p, "q": self.q, "m": self.m,
                "verdict": self.verdict, "rule": self.rule,
                "witness_summary": _summary(self.witness)}


def _summary(witness: dict) -> dict:
    keep = ("kind", "growth_exponent", "ratio_at_n_max", "n_max", "sup", "stable", "unbounded",
            "slope", "vanishing", "sigma", "finite", "agrees")
    return {k: v for k, v in witness.items() if k in keep}


def _is_zero_operator(T: OperatorKind) -> bool:
    if T.tag == DIFFERENTIATION:
        return False
    if T.tag == VOLTERRA:
        return T.g.derivative().is_zero
    return T.g.is_zero


def _growth_witness(T: OperatorKind, p: float, q: float, m: int, n_max: int) -> dict:
    seq = growth_probe(T, SpaceParams(m, p), n_max, target=SpaceParams(m, q))
    beta = growth_exponent(seq)
    return {"kind": "growth_probe", "sequence": seq, "growth_exponent": beta,
            "ratio_at_n_max": seq[-1][1], "n_max": n_max,
            "grows": bool(beta > GROWTH_EXPONENT_MIN)}


def classify(T: OperatorKind, p: float, q: float, m: int = 0, n_max: int = 100) -> Classification:
    """Rule-based verdict with a numeric witness that must agree.

    Witnesses: ``tilde_mu`` sup / decay / integrability for ``V_g``; the
    monomial growth probe for ``I_g``, ``M_g`` and ``D`` (and, in addition, for
    unbounded ``V_g``). A zero operator is its own witness.

    Raises
    ------
    WitnessDisagreement
        When the evidence contradicts the rule.
    """
    if min(p, q) <= 0:
        raise PreconditionError("p and q must be positive")
    verdict, rule = degree_verdict(T, p, q)

    if _is_zero_operator(T):
        witness = {"kind": "zero_operator", "agrees": verdict == COMPACT}
    elif T.tag == VOLTERRA:
        query = CarlesonQuery(T.g, p, q, m)
        if p <= q:
            sup = carleson_scan(query, "sup")
            van = carleson_scan(query, "vanishing")
            witness = {"kind": "tilde_mu", "sup": sup["sup"], "stable": sup["stable"],
                       "unbounded": sup["unbounded"], "slope": van["slope"],
                       "vanishing": van["vanishing"]}
            if verdict == COMPACT:
                agrees = van["vanishing"] and not sup["unbounded"]
            elif verdict == BOUNDED:
                agrees = not van["vanishing"] and not sup["unbounded"]
            else:
                gw = _growth_witness(T, p, q, m, n_max)
                witness.update({k: v for k, v in gw.items() if k != "kind"})
                agrees = sup["unbounded"] and gw["grows"]
        else:
            integ = carleson_scan(query, "integrability")
            witness = {"kind": "tilde_mu_integrability", "sigma": integ["sigma"],
                       "finite": integ["finite"], "total": integ["total"]}
            if verdict == COMPACT:
                agrees = integ["finite"]
            else:
                gw = _growth_witness(T, p, q, m, n_max)
                witness.update({k: v for k, v in gw.items() if k != "kind"})
                agrees = not integ["finite"]
        witness["agrees"] = bool(agrees)
    else:
        witness = _growth_witness(T, p, q, m, n_max)
        if verdict == UNBOUNDED:
            agrees = witness["grows"]
        else:
            agrees = not witness["grows"]
        witness["agrees"] = bool(agrees)

    if not witness["agrees"]:
        raise WitnessDisagreement(
            f"{T.label()} on (p={p}, q={q}, m={m}): rule says {verdict}, witness {_summary(witness)}")
    return Classification(T, float(p), float(q), int(m), verdict, rule, witness)
