"""Polar product quadrature over discs and annuli in the complex plane.

Radial direction: composite Gauss-Legendre, one panel per unit of radius.
Angular direction: the trapezoid rule, which is spectrally accurate for the
smooth periodic integrands that show up here.

Integrals are accumulated in log space (``logsumexp``) because the integrands
routinely span hundreds of orders of magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable

import numpy as np
from scipy.special import logsumexp


@lru_cache(maxsize=16)
def gauss_legendre(n: int):
    """Nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1.0) / 2.0, w / 2.0


@dataclass(frozen=True)
class QuadratureGrid:
    """Polar grid on the annulus ``r_min <= |z - center| <= R``.

    Points and weights are 2-D arrays of shape ``(n_radial, n_angles)``;
    ``weights`` already include the Jacobian ``r``.
    """

    R: float
    n_angles: int = 64
    nodes_per_panel: int = 32
    panel_width: float = 1.0
    r_min: float = 0.0
    center: complex = 0j

    def __post_init__(self):
        if not self.R > self.r_min >= 0:
            raise ValueError(f"need R > r_min >= 0, got R={self.R}, r_min={self.r_min}")
        if self.n_angles < 8 or self.n_angles % 2:
            raise ValueError("n_angles must be even and at least 8")

    @cached_property
    def panel_edges(self) -> np.ndarray:
        n = max(1, math.ceil((self.R - self.r_min) / self.panel_width - 1e-12))
        return np.linspace(self.r_min, self.R, n + 1)

    @cached_property
    def radial(self):
        t, w = gauss_legendre(self.nodes_per_panel)
        edges = self.panel_edges
        h = np.diff(edges)
        r = (edges[:-1, None] + h[:, None] * t[None, :]).ravel()
        wr = (h[:, None] * w[None, :]).ravel()
        return r, wr

    @cached_property
    def theta(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_angles) / self.n_angles

    @cached_property
    def points(self) -> np.ndarray:
        r, _ = self.radial
        return self.center + r[:, None] * np.exp(1j * self.theta)[None, :]

    @cached_property
    def weights(self) -> np.ndarray:
        r, wr = self.radial
        return np.repeat((wr * r * (2.0 * np.pi / self.n_angles))[:, None], self.n_angles, axis=1)

    @cached_property
    def log_weights(self) -> np.ndarray:
        return np.log(self.weights)

    @property
    def panel_index(self) -> np.ndarray:
        """Panel number of every radial node (for cumulative truncations)."""
        return np.repeat(np.arange(len(self.panel_edges) - 1), self.nodes_per_panel)

    def annulus(self, R_outer: float) -> "QuadratureGrid":
        """Grid with the same density covering ``R <= r <= R_outer``."""
        return QuadratureGrid(R_outer, self.n_angles, self.nodes_per_panel,
                              self.panel_width, self.R, self.center)

    def log_integrate(self, log_f: Callable) -> float:
        """``log`` of the integral of ``exp(log_f(z))`` over the grid."""
        vals = np.asarray(log_f(self.points), dtype=float)
        return float(logsumexp(vals + self.log_weights))

    def integrate(self, f: Callable) -> complex:
        return complex(np.sum(np.asarray(f(self.points)) * self.weights))

    def settings(self) -> dict:
        return {"R": self.R, "n_angles": self.n_angles, "nodes_per_panel": self.nodes_per_panel,
                "panel_width": self.panel_width, "r_min": self.r_min,
                "center": [self.center.real, self.center.imag]}


def angles_for(variation: float, frequency: int = 2, minimum: int = 64, cap: int = 4096) -> int:
    """Trapezoid size resolving ``exp(variation * cos(frequency * theta))``.

    With ``M`` points per period the trapezoid error behaves like
    ``I_M(k)/I_0(k) ~ exp(-M**2 / 2k)``, so ``M ~ 8 sqrt(k)`` is enough for
    double precision.
    """
    k = max(float(variation), 0.0)
    per_period = min(8.0 * math.sqrt(k), 1.5 * k) + 16
    n = int(math.ceil(max(frequency, 1) * per_period))
    n = max(minimum, min(cap, n))
    return n + (n % 2)


def auto_radius(log_f: Callable, decay: float = 46.0, r_max: float = 80.0,
                n_angles: int = 64, center: complex = 0j) -> float:
    """Smallest radius beyond which ``log_f + log r`` stays ``decay`` below its peak.

    Returns ``inf`` when the integrand has not decayed by ``r_max``.
    """
    r = np.arange(0.25, r_max + 1e-9, 0.25)
    th = 2.0 * np.pi * np.arange(n_angles) / n_angles
    z = center + r[:, None] * np.exp(1j * th)[None, :]
    with np.errstate(over="ignore", invalid="ignore"):
        prof = np.max(np.asarray(log_f(z), dtype=float), axis=1) + np.log(r)
    prof = np.where(np.isnan(prof), -np.inf, prof)
    peak = int(np.argmax(prof))
    above = np.nonzero(prof >= prof[peak] - decay)[0]
    last = int(above[-1])
    if last >= len(r) - 1:
        return math.inf
    return float(math.ceil(r[last]) + 1.0)
