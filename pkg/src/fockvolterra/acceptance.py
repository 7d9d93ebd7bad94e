"""The nine acceptance criteria as callable checks.

Each check returns a :class:`CriterionResult` with the measured quantities
next to the thresholds they were compared with. ``tolerance_scale`` multiplies
every upper-bound tolerance (residuals, variation and ratio bounds); growth
thresholds are left alone. ``m`` overrides the ``m`` sets of the weight checks
(criteria 5 and 8).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .carleson import classify
from .errors import FockError, WitnessDisagreement
from .operators import (UNBOUNDED, OperatorKind, apply, growth_probe, matrix,
                        schatten_diagnostic, singular_values, degree_verdict)
from .quadrature import QuadratureGrid
from .spectral import ResolventSpec, resolvent_residual, truncated_resolvent_norm
from .symbols import FunctionSymbol, Polynomial, derivative, line_integral
from .weight import (SpaceParams, auto_grid, kernel_norm_sq, laplacian_psi, littlewood_paley,
                     log_kernel_norm_sq, membership, norm, psi, radius_threshold,
                     regularity_report)


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    checks: dict
    metrics: dict = field(default_factory=dict)
    runtime: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        failed = [k for k, v in self.checks.items() if not v]
        extra = "" if not failed else "  failed: " + ", ".join(failed)
        return f"[{tag}] criterion {self.number}: {self.name} ({self.runtime:.1f}s){extra}"

    def to_dict(self) -> dict:
        return {"number": self.number, "name": self.name, "passed": self.passed,
                "checks": self.checks, "metrics": _jsonable(self.metrics),
                "runtime": self.runtime}


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, (np.floating, np.integer)):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _timed(number: int, name: str, body: Callable[[], tuple]) -> CriterionResult:
    t0 = time.perf_counter()
    checks, metrics = body()
    checks = {k: bool(v) for k, v in checks.items()}
    return CriterionResult(number, name, all(checks.values()), checks, metrics,
                           time.perf_counter() - t0)


# -- 1 ------------------------------------------------------------------------------

def spectrum_disk(scale: float = 1.0) -> CriterionResult:
    inside, outside = (1.0, 1.5, 1.9), (2.5, 3.0, 5.0)

    def body():
        checks, metrics = {}, {}
        t0 = time.perf_counter()
        for m in (0, 1, 2):
            params = SpaceParams(m)
            for lam in inside + outside:
                f = FunctionSymbol(Polynomial([1.0]), Polynomial([0.0, 0.0, 1.0 / lam]))
                v = membership(f, params)
                want = "NonMember" if lam in inside else "Member"
                checks[f"m={m} |lambda|={lam} {want}"] = v.status == want
                metrics[f"m={m} lambda={lam}"] = {"status": v.status,
                                                  "growth_rate": v.growth_rate}
        elapsed = time.perf_counter() - t0
        checks["membership runtime < 10 s"] = elapsed < 10.0
        metrics["membership_seconds"] = elapsed
        T = OperatorKind.volterra([0.0, 0.0, 1.0])
        for m in (0, 1, 2):
            params = SpaceParams(m)
            r1 = [truncated_resolvent_norm(T, params, 1.0, N) for N in (50, 200)]
            r3 = [truncated_resolvent_norm(T, params, 3.0, N) for N in (50, 100, 200)]
            checks[f"m={m} resolvent growth at lambda=1 >= 10x"] = r1[1] >= 10.0 * r1[0]
            checks[f"m={m} resolvent variation at lambda=3 < 50%"] = (
                max(r3) / min(r3) - 1.0 < 0.5 * scale)
            metrics[f"m={m} resolvent_norms"] = {"lambda=1": r1, "lambda=3": r3}
        return checks, metrics

    return _timed(1, "spectrum disk of radius 2|a|", body)


# -- 2 ------------------------------------------------------------------------------

def schatten_dichotomy(scale: float = 1.0, N: int = 400) -> CriterionResult:
    def body():
        checks, metrics = {}, {}
        T = OperatorKind.volterra([0.0, 1.0])
        s = singular_values(matrix(T, SpaceParams(0), N))
        exact = 1.0 / np.sqrt(np.arange(1, len(s) + 1))
        err = float(np.max(np.abs(s - exact)))
        checks["m=0 singular values match 1/sqrt(n+1) to 1e-9"] = err <= 1e-9 * scale
        metrics["max_singular_value_error"] = err
        for m, tol in ((0, 0.05), (1, 0.1)):
            rows = schatten_diagnostic(T, SpaceParams(m), [2.0, 2.5], N=N)
            by_p = {r["p"]: r for r in rows}
            alpha = by_p[2.0]["decay_exponent_fit"]
            checks[f"m={m} decay exponent -0.5 +- {tol}"] = abs(alpha + 0.5) <= tol * scale
            checks[f"m={m} p=2 Divergent"] = by_p[2.0]["verdict"] == "Divergent"
            checks[f"m={m} p=2 partial sums fit log N within 10%"] = (
                by_p[2.0]["log_fit_error"] <= 0.1 * scale)
            checks[f"m={m} p=2.5 Convergent"] = by_p[2.5]["verdict"] == "Convergent"
            checks[f"m={m} p=2.5 tail change < 1%"] = (
                by_p[2.5]["tail_corrected_change"] < 0.01 * scale)
            metrics[f"m={m}"] = {str(p): {k: r[k] for k in ("verdict", "decay_exponent_fit",
                                                           "tail_trend", "log_fit_error",
                                                           "tail_corrected_change")}
                                 for p, r in by_p.items()}
        return checks, metrics

    return _timed(2, "Schatten dichotomy for V_z", body)


# -- 3 ------------------------------------------------------------------------------

TABLE_SYMBOLS = {"1": [1.0], "z": [0.0, 1.0], "z^2": [0.0, 0.0, 1.0], "z^3": [0.0, 0.0, 0.0, 1.0],
                 "z^2+z": [0.0, 1.0, 1.0]}
TABLE_EXPONENTS = ((2.0, 2.0), (2.0, 3.0), (2.0, 1.5), (2.0, 0.8))
TABLE_OPERATORS = (("V", OperatorKind.volterra), ("I", OperatorKind.companion),
                   ("M", OperatorKind.multiplier))


def boundedness_table(scale: float = 1.0, n_max: int = 100) -> CriterionResult:
    def body():
        rows, disagreements, weak = [], [], []
        t0 = time.perf_counter()
        for m in (0, 1):
            for p, q in TABLE_EXPONENTS:
                for op, make in TABLE_OPERATORS:
                    for gname, coeffs in TABLE_SYMBOLS.items():
                        T = make(coeffs)
                        label = f"{op}[{gname}] p={p} q={q} m={m}"
                        expected, _ = degree_verdict(T, p, q)
                        try:
                            c = classify(T, p, q, m, n_max=n_max)
                        except WitnessDisagreement as exc:
                            disagreements.append(f"{label}: {exc}")
                            continue
                        row = {"case": label, "verdict": c.verdict, "expected": expected}
                        if c.verdict == UNBOUNDED:
                            seq = growth_probe(T, SpaceParams(m, p), n_max,
                                               target=SpaceParams(m, q), n_values=[n_max])
                            row["growth_ratio"] = seq[-1][1]
                            if seq[-1][1] < 5.0:
                                weak.append(label)
                        rows.append(row)
        elapsed = time.perf_counter() - t0
        exact = all(r["verdict"] == r["expected"] for r in rows)
        checks = {
            "classification matches the degree rules": exact and not disagreements,
            "zero witness disagreements": not disagreements,
            "growth ratio at n=100 >= 5 for every Unbounded case": not weak,
            "runtime < 60 s": elapsed < 60.0,
        }
        metrics = {"cases": len(rows) + len(disagreements), "seconds": elapsed,
                   "disagreements": disagreements, "weak_growth_cases": weak,
                   "weak_growth_ratios": {r["case"]: r["growth_ratio"] for r in rows
                                          if r["case"] in weak}}
        return checks, metrics

    return _timed(3, "boundedness table", body)


# -- 4 ------------------------------------------------------------------------------

def lp_family() -> list:
    fam = [FunctionSymbol.monomial(n) for n in range(11)]
    for b in (0.25, 0.5, 1.0, 1j, -0.7 + 0.7j):
        fam.append(FunctionSymbol.exppoly([1.0], [0.0, b]))
    for c in ([1, 1, 1], [0, 2, -1], [3, 0, 1j], [1, -2, 0.5]):
        fam.append(FunctionSymbol.poly(c))
    return fam


def _refined(grid: QuadratureGrid) -> QuadratureGrid:
    return QuadratureGrid(grid.R + 2.0, n_angles=2 * grid.n_angles,
                          nodes_per_panel=2 * grid.nodes_per_panel)


def _lp_interval(fam, params, refine: bool) -> tuple:
    ratios = []
    for f in fam:
        g_norm = auto_grid(f, params)
        df = derivative(f)
        g_lp = None if df.is_zero else auto_grid(df, params)
        if refine:
            g_norm = _refined(g_norm)
            g_lp = None if g_lp is None else _refined(g_lp)
        ratios.append(littlewood_paley(f, params, g_lp) / norm(f, params, g_norm))
    return min(ratios), max(ratios)


def littlewood_paley_equivalence(scale: float = 1.0) -> CriterionResult:
    def body():
        checks, metrics = {}, {}
        fam = lp_family()
        for m in (0, 1, 2):
            for p in (1.0, 2.0):
                params = SpaceParams(m, p)
                lo, hi = _lp_interval(fam, params, refine=False)
                lo2, hi2 = _lp_interval(fam, params, refine=True)
                spread = hi / lo
                drift = max(abs(lo2 / lo - 1.0), abs(hi2 / hi - 1.0))
                checks[f"m={m} p={p} max/min <= 50"] = spread <= 50.0 * scale
                checks[f"m={m} p={p} stable within 2%"] = drift <= 0.02 * scale
                metrics[f"m={m} p={p}"] = {"interval": [lo, hi], "spread": spread,
                                           "refinement_drift": drift}
        return checks, metrics

    return _timed(4, "Littlewood-Paley equivalence", body)


# -- 5 ------------------------------------------------------------------------------

def kernel_asymptotics(scale: float = 1.0, m_values: Sequence[int] = (0, 1, 2, 3)) -> CriterionResult:
    radii = np.linspace(0.0, 6.0, 25)

    def variation(params):
        vals = [log_kernel_norm_sq(params, complex(r)) - 2.0 * float(psi(params, r)) for r in radii]
        return max(vals) - min(vals)

    def body():
        checks, metrics = {}, {}
        for m in m_values:
            params = SpaceParams(m)
            v = variation(params)
            checks[f"m={m} variation <= 3"] = v <= 3.0 * scale
            metrics[f"m={m}"] = {"beta": params.beta, "variation": v,
                                 "variation_beta_m_plus_1": variation(SpaceParams(m, 2.0, m + 1.0))}
        worst = 0.0
        for r in radii:
            k = kernel_norm_sq(SpaceParams(0), complex(r))
            worst = max(worst, abs(k - math.exp(r * r)) / math.exp(r * r))
        checks["m=0 kernel_norm_sq matches e^{|w|^2} to 1e-8"] = worst <= 1e-8 * scale
        metrics["m=0 relative error"] = worst
        return checks, metrics

    return _timed(5, "kernel asymptotics", body)


# -- 6 ------------------------------------------------------------------------------

def resolvent_identity(scale: float = 1.0) -> CriterionResult:
    rng = np.random.default_rng(6)
    z = 2.0 * np.sqrt(rng.uniform(0, 1, 20)) * np.exp(2j * np.pi * rng.uniform(0, 1, 20))

    def body():
        checks, metrics = {}, {}
        for a, lam in ((1.0, 3.0), (1 + 1j, 4.0), (2.0, 5.0)):
            for hname, h in (("1", [1.0]), ("z", [0.0, 1.0]), ("z^2+1", [1.0, 0.0, 1.0])):
                res = float(np.max(resolvent_residual(ResolventSpec(a, lam),
                                                      FunctionSymbol.poly(h), z)))
                key = f"a={a} lambda={lam} h={hname}"
                checks[key + " residual <= 1e-8"] = res <= 1e-8 * scale
                metrics[key] = res
        return checks, metrics

    return _timed(6, "resolvent identity", body)


# -- 7 ------------------------------------------------------------------------------

def parts_identity(scale: float = 1.0, n_triples: int = 50) -> CriterionResult:
    """``V_g f + I_g f = M_g f - f(0) g(0)`` with both integrals done by quadrature."""
    rng = np.random.default_rng(7)

    def rand_poly():
        d = int(rng.integers(0, 5))
        return Polynomial(rng.normal(size=d + 1) + 1j * rng.normal(size=d + 1))

    def body():
        worst = 0.0
        for _ in range(n_triples):
            f, g = rand_poly(), rand_poly()
            z = complex(*rng.uniform(-1.5, 1.5, 2))
            v = line_integral(lambda w: f(w) * g.derivative()(w), z)
            i = line_integral(lambda w: f.derivative()(w) * g(w), z)
            rhs = complex(f(z) * g(z)) - complex(f(0.0)) * complex(g(0.0))
            worst = max(worst, abs(v + i - rhs))
            closed = (apply(OperatorKind.volterra(g), FunctionSymbol(f), z)
                      + apply(OperatorKind.companion(g), FunctionSymbol(f), z))
            worst = max(worst, abs(closed - rhs))
        return {"max residual <= 1e-10": worst <= 1e-10 * scale}, {"max_residual": worst}

    return _timed(7, "integration by parts identity", body)


# -- 8 ------------------------------------------------------------------------------

def _laplacian_oracle(m, beta, r):
    # phi = r^2/2 - (m/2) log(beta + r^2); Laplacian = phi'' + phi'/r
    d1 = r - m * r / (beta + r * r)
    d2 = 1.0 - m * (beta - r * r) / (beta + r * r) ** 2
    return d2 + np.divide(d1, r, out=np.full_like(r, 1.0 - m / beta), where=r > 0)


def weight_regularity(scale: float = 1.0, m_values: Sequence[int] = (0, 1, 2, 3)) -> CriterionResult:
    rng = np.random.default_rng(8)
    z = rng.uniform(0, 10, 1000) * np.exp(2j * np.pi * rng.uniform(0, 1, 1000))

    def body():
        checks, metrics = {}, {}
        for m in m_values:
            for p in (1.0, 2.0):
                rep = regularity_report(SpaceParams(m, p))
                checks[f"m={m} p={p} limit diagnostics"] = rep.ok
                metrics[f"m={m} p={p}"] = {"decay": rep.decay, "curvature": rep.curvature}
            rep2 = regularity_report(SpaceParams(m, 2.0))
            checks[f"m={m} decay at r=20 < 1e-10"] = rep2.decay[1] < 1e-10 * scale
            if m == 0:
                checks["m=0 curvature at r=100 within 1e-3 of 0"] = (
                    abs(rep2.curvature[3]) <= 1e-3 * scale)
            if m == 2:
                checks["m=2 threshold radius = 2"] = abs(radius_threshold(2) - 2.0) <= 1e-12
            hp = SpaceParams(m).with_beta_above_m()
            lap = laplacian_psi(hp, z)
            oracle = _laplacian_oracle(m, hp.beta, np.abs(z))
            err = float(np.max(np.abs(lap - oracle)))
            lo = 2.0 * (1.0 - m / hp.beta)
            inside = bool(np.all(lap >= lo - 1e-9) and np.all(lap <= 2.0 + 1e-9))
            checks[f"m={m} Laplacian exact to 1e-9 (beta={hp.beta:g})"] = err <= 1e-9 * scale
            checks[f"m={m} Laplacian pinched in [2(1-m/beta), 2]"] = inside
            metrics[f"m={m} laplacian"] = {"beta": hp.beta, "max_error": err, "lower": lo,
                                           "min": float(lap.min()), "max": float(lap.max())}
        return checks, metrics

    return _timed(8, "weight regularity and Laplacian pinch", body)


# -- 9 ------------------------------------------------------------------------------

def differentiation_growth(scale: float = 1.0) -> CriterionResult:
    def body():
        D = OperatorKind.differentiation()
        checks, metrics = {}, {}
        for m in (0, 1, 2):
            r = growth_probe(D, SpaceParams(m), 100, n_values=[100])[0][1]
            metrics[f"m={m}"] = r
            if m == 0:
                checks["m=0 ratio = 10 to 1e-9"] = abs(r - 10.0) <= 1e-9 * scale
            else:
                checks[f"m={m} ratio >= 5"] = r >= 5.0
        return checks, metrics

    return _timed(9, "differentiation is unbounded", body)


CRITERIA = (spectrum_disk, schatten_dichotomy, boundedness_table, littlewood_paley_equivalence,
            kernel_asymptotics, resolvent_identity, parts_identity, weight_regularity,
            differentiation_growth)


def run_criterion(number: int, scale: float = 1.0, m: Optional[int] = None) -> CriterionResult:
    """Run one criterion, turning unexpected package errors into a failure."""
    fn = CRITERIA[number - 1]
    kwargs = {"scale": scale}
    if m is not None and fn in (kernel_asymptotics, weight_regularity):
        kwargs["m_values"] = (int(m),)
    try:
        return fn(**kwargs)
    except FockError as exc:
        return CriterionResult(number, fn.__name__.replace("_", " "), False,
                               {f"raised {type(exc).__name__}": False}, {"error": str(exc)})


def verify_all(scale: float = 1.0, m: Optional[int] = None) -> list:
    return [run_criterion(k, scale, m) for k in range(1, len(CRITERIA) + 1)]
