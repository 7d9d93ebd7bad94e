"""Batch runner: JSON scenarios in, ``<out>/<scenario>/report.json`` and ``data.csv`` out.

Usage::

    fockvolterra run config.json [--out DIR] [--jobs N] [--filter NAME]
    fockvolterra verify-all [--out DIR] [--m M] [--tolerance-scale S]

The exit code is 0 iff no scenario failed (``inconclusive`` does not count as
a failure), 2 for an invalid configuration.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import platform
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib import metadata
from pathlib import Path
from typing import Optional, Sequence

import jsonschema
import numpy as np
import scipy

from . import acceptance
from .carleson import CarlesonQuery, carleson_scan, classify
from .errors import ConfigError, FockError
from .operators import (OperatorKind, matrix, schatten_diagnostic, singular_values)
from .spectral import BOUNDARY, RESOLVENT, SPECTRUM, circle, spectrum_scan
from .symbols import FunctionSymbol, format_symbol, parse_complex, parse_symbol
from .weight import (MEMBERSHIP_RADII, SpaceParams, littlewood_paley, membership, norm,
                     regularity_report)

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"
KINDS = ("norm", "membership", "matrix", "schatten", "spectrum-scan", "carleson", "regularity",
         "verify-all")

# -- schemas --------------------------------------------------------------------------

_COMPLEX = {"oneOf": [{"type": "number"}, {"type": "string"},
                      {"type": "array", "items": {"type": "number"}, "minItems": 2,
                       "maxItems": 2}]}
_SPACE = {"type": "object", "additionalProperties": False,
          "properties": {"m": {"type": "integer", "minimum": 0},
                         "p": {"type": "number", "exclusiveMinimum": 0},
                         "beta": {"type": "number", "exclusiveMinimum": 0}}}
_SYMBOL = {"oneOf": [{"type": "string"}, {"type": "array", "items": _COMPLEX}]}
_OPERATOR = {"type": "object", "additionalProperties": False, "required": ["kind"],
             "properties": {"kind": {"enum": ["volterra", "companion", "multiplier",
                                              "differentiation"]},
                            "g": _SYMBOL}}


def _obj(required: Sequence[str], **props) -> dict:
    return {"type": "object", "additionalProperties": False, "required": list(required),
            "properties": props}


PARAM_SCHEMAS = {
    "norm": _obj(["f"], space=_SPACE, f=_SYMBOL, expected={"type": "number"},
                 rtol={"type": "number", "exclusiveMinimum": 0}),
    "membership": _obj(["f"], space=_SPACE, f=_SYMBOL,
                       expected={"enum": ["Member", "NonMember", "Inconclusive"]},
                       radii={"type": "array", "items": {"type": "number"}, "minItems": 3}),
    "matrix": _obj(["operator", "N"], space=_SPACE, operator=_OPERATOR,
                   N={"type": "integer", "minimum": 4}),
    "schatten": _obj(["operator", "p_list"], space=_SPACE, operator=_OPERATOR,
                     p_list={"type": "array", "items": {"type": "number"}, "minItems": 1},
                     N={"type": "integer", "minimum": 16},
                     expected={"type": "object",
                               "additionalProperties": {"enum": ["Convergent", "Divergent",
                                                                 "Inconclusive"]}}),
    "spectrum-scan": _obj(["a"], space=_SPACE, a=_COMPLEX, b=_COMPLEX,
                          lambdas={"type": "array", "items": _COMPLEX},
                          circles={"type": "object", "additionalProperties": False,
                                   "required": ["radii"],
                                   "properties": {"radii": {"type": "array",
                                                            "items": {"type": "number"}},
                                                  "n": {"type": "integer", "minimum": 1},
                                                  "relative": {"type": "boolean"}}},
                          N_list={"type": "array", "items": {"type": "integer", "minimum": 4},
                                  "minItems": 1}),
    "carleson": _obj([], cases={"type": "array", "items": _obj(
                          ["operator", "p", "q"], operator=_OPERATOR,
                          p={"type": "number", "exclusiveMinimum": 0},
                          q={"type": "number", "exclusiveMinimum": 0},
                          m={"type": "integer", "minimum": 0},
                          expected={"enum": ["Bounded", "Compact", "Unbounded"]})},
                     scans={"type": "array", "items": _obj(
                          ["g", "mode"], g=_SYMBOL, mode={"enum": ["sup", "vanishing",
                                                                   "integrability"]},
                          p={"type": "number", "exclusiveMinimum": 0},
                          q={"type": "number", "exclusiveMinimum": 0},
                          m={"type": "integer", "minimum": 0})}),
    "regularity": _obj([], space=_SPACE,
                       radii={"type": "array", "items": {"type": "number",
                                                         "exclusiveMinimum": 0}}),
    "verify-all": _obj([], m={"type": "integer", "minimum": 0},
                       tolerance_scale={"type": "number", "minimum": 0},
                       criteria={"type": "array", "items": {"type": "integer", "minimum": 1,
                                                            "maximum": 9}}),
}

CONFIG_SCHEMA = {
    "type": "object", "required": ["scenarios"],
    "properties": {"scenarios": {"type": "array", "items": {
        "type": "object", "additionalProperties": False, "required": ["name", "kind"],
        "properties": {"name": {"type": "string", "pattern": r"^[A-Za-z0-9._-]+$"},
                       "kind": {"enum": list(KINDS)},
                       "params": {"type": "object"}}}}},
}


@dataclass(frozen=True)
class Scenario:
    name: str
    kind: str
    params: dict

    @property
    def digest(self) -> str:
        blob = json.dumps({"name": self.name, "kind": self.kind, "params": self.params},
                          sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(frozen=True)
class Report:
    scenario: str
    kind: str
    status: str
    records: list
    provenance: dict
    csv_text: Optional[str] = None
    error: Optional[str] = None

    def to_dict(self) -> dict:
        d = {"scenario": self.scenario, "kind": self.kind, "status": self.status,
             "records": self.records, "provenance": self.provenance}
        if self.error is not None:
            d["error"] = self.error
        return d


def load_config(path) -> list:
    """Parse and validate a configuration file into scenarios.

    Raises
    ------
    ConfigError
        On unreadable JSON, schema violations or duplicate names.
    """
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return parse_config(doc)


def parse_config(doc) -> list:
    try:
        jsonschema.validate(doc, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config: {exc.message}") from exc
    out, seen = [], set()
    for item in doc["scenarios"]:
        name, kind, params = item["name"], item["kind"], item.get("params", {})
        if name in seen:
            raise ConfigError(f"duplicate scenario name {name!r}")
        seen.add(name)
        try:
            jsonschema.validate(params, PARAM_SCHEMAS[kind])
        except jsonschema.ValidationError as exc:
            raise ConfigError(f"scenario {name!r} ({kind}): {exc.message}") from exc
        try:
            _check_symbols(params)
        except ValueError as exc:
            raise ConfigError(f"scenario {name!r}: {exc}") from exc
        out.append(Scenario(name, kind, params))
    return out


def _check_symbols(params: dict):
    for key in ("f",):
        if key in params:
            _symbol(params[key])
    if "operator" in params:
        _operator(params["operator"])
    for case in params.get("cases", ()):
        _operator(case["operator"])
    for scan in params.get("scans", ()):
        _symbol(scan["g"])
    for key in ("a", "b"):
        if key in params:
            _complex(params[key])
    for lam in params.get("lambdas", ()):
        _complex(lam)


# -- value coercion ---------------------------------------------------------------------

def _complex(x) -> complex:
    if isinstance(x, str):
        return parse_complex(x)
    if isinstance(x, list):
        return complex(x[0], x[1])
    return complex(x)


def _symbol(x) -> FunctionSymbol:
    if isinstance(x, str):
        return parse_symbol(x)
    return FunctionSymbol.poly([_complex(c) for c in x])


def _operator(spec: dict) -> OperatorKind:
    kind = spec["kind"]
    if kind == "differentiation":
        return OperatorKind.differentiation()
    if "g" not in spec:
        raise ValueError(f"{kind} operator needs a symbol g")
    g = _symbol(spec["g"])
    if not g.is_poly:
        raise ValueError("operator symbols must be polynomials")
    return getattr(OperatorKind, kind)(g.prefactor)


def _space(params: dict) -> SpaceParams:
    return SpaceParams.from_dict(params.get("space", {}))


def _num(x):
    if isinstance(x, (np.floating, np.integer)):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    return x


def _csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


# -- scenario kinds -----------------------------------------------------------------------

def _run_norm(p: dict):
    space, f = _space(p), _symbol(p["f"])
    val = norm(f, space)
    rec = {**space.to_dict(), "f": format_symbol(f), "norm": val,
           "normalized_norm": norm(f, space, normalized=True),
           "littlewood_paley": littlewood_paley(f, space)}
    status = PASS
    if "expected" in p:
        rtol = p.get("rtol", 1e-9)
        rec["expected"] = p["expected"]
        status = PASS if abs(val - p["expected"]) <= rtol * abs(p["expected"]) else FAIL
    return status, [rec], None


def _run_membership(p: dict):
    space, f = _space(p), _symbol(p["f"])
    v = membership(f, space, p.get("radii", MEMBERSHIP_RADII))
    rec = {**space.to_dict(), "f": format_symbol(f), **v.to_dict()}
    text = _csv(["R", "truncated_integral", "log_truncated_integral"],
                [(R, _num(val), _num(lv)) for (R, val), (_, lv) in zip(v.trace, v.log_trace)])
    if "expected" in p:
        status = PASS if v.status == p["expected"] else FAIL
    else:
        status = INCONCLUSIVE if v.status == "Inconclusive" else PASS
    return status, [rec], text


def _run_matrix(p: dict):
    space, T = _space(p), _operator(p["operator"])
    A = matrix(T, space, p["N"])
    s = singular_values(A)
    rec = {**space.to_dict(), "operator": T.label(), "N": A.size, "band": A.band,
           "truncated_columns": A.truncated_columns,
           "top_singular_values": [float(x) for x in s[:10]]}
    return PASS, [rec], A.to_csv()


def _run_schatten(p: dict):
    space, T = _space(p), _operator(p["operator"])
    rows = schatten_diagnostic(T, space, p["p_list"], N=p.get("N", 400))
    expected = p.get("expected", {})
    status = PASS
    recs = []
    for r in rows:
        rec = {**space.to_dict(), "operator": T.label(),
               **{k: (_num(v) if not isinstance(v, dict) else v) for k, v in r.items()}}
        key = next((k for k in expected if float(k) == r["p"]), None)
        if key is not None:
            rec["expected"] = expected[key]
            if r["verdict"] != expected[key]:
                status = FAIL
        elif r["verdict"] == "Inconclusive" and status == PASS:
            status = INCONCLUSIVE
        recs.append(rec)
    text = _csv(["p", "verdict", "partial_sum", "tail_trend", "decay_exponent_fit"],
                [(r["p"], r["verdict"], r["partial_sum"], r["tail_trend"],
                  _num(r["decay_exponent_fit"]) if r["decay_exponent_fit"] is not None else "")
                 for r in rows])
    return status, recs, text


def _run_spectrum(p: dict):
    space = _space(p)
    a, b = _complex(p["a"]), _complex(p.get("b", 0.0))
    lambdas = [_complex(x) for x in p.get("lambdas", [])]
    if "circles" in p:
        c = p["circles"]
        scale = 2.0 * abs(a) if c.get("relative", True) else 1.0
        for r in c["radii"]:
            lambdas.extend(circle(r * scale, c.get("n", 24)))
    scan = spectrum_scan(a, space, lambdas, tuple(p.get("N_list", (50, 100, 200))), b=b)
    status = PASS
    for rec in scan.records:
        # the degree rule predicts every point off the boundary band
        predicted = SPECTRUM if abs(rec.lam) <= scan.radius else RESOLVENT
        if rec.classification in (BOUNDARY, predicted):
            continue
        if rec.classification in (SPECTRUM, RESOLVENT):
            status = FAIL
        elif status == PASS:
            status = INCONCLUSIVE
    records = [{**space.to_dict(), "a": [a.real, a.imag], "b": [b.real, b.imag], **r.to_dict()}
               for r in scan.records]
    return status, records, scan.to_csv()


def _run_carleson(p: dict):
    records, rows, status = [], [], PASS
    for case in p.get("cases", []):
        T = _operator(case["operator"])
        c = classify(T, case["p"], case["q"], case.get("m", 0))
        rec = c.to_dict()
        if "expected" in case:
            rec["expected"] = case["expected"]
            if c.verdict != case["expected"]:
                status = FAIL
        records.append(rec)
        rows.append(("classify", T.label(), case["p"], case["q"], case.get("m", 0), c.verdict))
    for scan in p.get("scans", []):
        g = _symbol(scan["g"]).prefactor
        q = CarlesonQuery(g, scan.get("p", 2.0), scan.get("q", 2.0), scan.get("m", 0))
        out = carleson_scan(q, scan["mode"])
        records.append({"g": format_symbol(FunctionSymbol(g)), "p": q.p, "q": q.q, "m": q.m,
                        **{k: (_num(v) if not isinstance(v, list) else v)
                           for k, v in out.items()}})
        summary = {"sup": "stable" if out.get("stable") else "unstable",
                   "vanishing": "vanishing" if out.get("vanishing") else "not vanishing",
                   "integrability": "finite" if out.get("finite") else "infinite"}[scan["mode"]]
        rows.append((scan["mode"], format_symbol(FunctionSymbol(g)), q.p, q.q, q.m, summary))
    text = _csv(["task", "subject", "p", "q", "m", "outcome"], rows)
    return status, records, text


def _run_regularity(p: dict):
    space = _space(p)
    kwargs = {"radii": tuple(p["radii"])} if "radii" in p else {}
    rep = regularity_report(space, **kwargs)
    text = _csv(["r", "decay", "curvature", "curvature_closed_form"],
                list(zip(rep.radii, rep.decay, rep.curvature, rep.curvature_closed_form)))
    return (PASS if rep.ok else FAIL), [rep.to_dict()], text


def _run_verify(p: dict):
    scale = p.get("tolerance_scale", 1.0)
    numbers = p.get("criteria", list(range(1, len(acceptance.CRITERIA) + 1)))
    results = [acceptance.run_criterion(k, scale, p.get("m")) for k in numbers]
    records = []
    for r in results:
        d = r.to_dict()
        d.pop("runtime")
        records.append(d)
    text = _csv(["criterion", "name", "passed", "failed_checks"],
                [(r.number, r.name, r.passed,
                  "; ".join(k for k, v in r.checks.items() if not v)) for r in results])
    return (PASS if all(r.passed for r in results) else FAIL), records, text


RUNNERS = {"norm": _run_norm, "membership": _run_membership, "matrix": _run_matrix,
           "schatten": _run_schatten, "spectrum-scan": _run_spectrum,
           "carleson": _run_carleson, "regularity": _run_regularity, "verify-all": _run_verify}


def _versions() -> dict:
    try:
        pkg = metadata.version("fockvolterra")
    except metadata.PackageNotFoundError:
        pkg = "unknown"
    return {"fockvolterra": pkg, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


GRID_SETTINGS = {"radial_nodes_per_panel": 32, "panel_width": 1.0, "min_angles": 64,
                 "membership_radii": list(MEMBERSHIP_RADII)}


def execute(scenario: Scenario, config_hash: str = "") -> Report:
    """Run one scenario; module errors become a ``fail`` report with the message."""
    prov = {"config_hash": config_hash, "scenario_hash": scenario.digest,
            "params": scenario.params, "grid": GRID_SETTINGS, "versions": _versions()}
    try:
        status, records, text = RUNNERS[scenario.kind](scenario.params)
    except (FockError, ValueError, OverflowError) as exc:
        return Report(scenario.name, scenario.kind, FAIL, [], prov,
                      error=f"{type(exc).__name__}: {exc}")
    return Report(scenario.name, scenario.kind, status, records, prov, text)


def write_report(report: Report, out: Path) -> Path:
    d = out / report.scenario
    d.mkdir(parents=True, exist_ok=True)
    (d / "report.json").write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True,
                                              default=_json_default) + "\n")
    if report.csv_text is not None:
        (d / "data.csv").write_text(report.csv_text)
    return d


def _json_default(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, tuple):
        return list(x)
    raise TypeError(f"cannot serialise {type(x).__name__}")


def run(scenarios: Sequence[Scenario], out: Path, jobs: int = 1, config_hash: str = "") -> list:
    """Execute scenarios (in parallel when ``jobs > 1``) and write their reports."""
    out.mkdir(parents=True, exist_ok=True)
    if jobs > 1 and len(scenarios) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(execute, scenarios, [config_hash] * len(scenarios)))
    else:
        reports = [execute(s, config_hash) for s in scenarios]
    for r in reports:
        write_report(r, out)
    return reports


def _summary(reports: Sequence[Report]) -> int:
    for r in reports:
        tail = f"  ({r.error})" if r.error else ""
        print(f"{r.status:>12}  {r.scenario} [{r.kind}]{tail}")
    failed = sum(r.status == FAIL for r in reports)
    flagged = sum(r.status == INCONCLUSIVE for r in reports)
    print(f"{len(reports)} scenarios, {failed} failed, {flagged} inconclusive")
    return 1 if failed else 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = argparse.ArgumentParser(prog="fockvolterra",
                                 description="Volterra-type operators on Fock-Sobolev spaces")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="execute the scenarios of a JSON config")
    r.add_argument("config")
    r.add_argument("--out", default="out")
    r.add_argument("--jobs", type=int, default=1)
    r.add_argument("--filter", default=None, help="only scenarios whose name contains this")
    v = sub.add_parser("verify-all", help="run the acceptance criteria")
    v.add_argument("--out", default="out")
    v.add_argument("--m", type=int, default=None, help="override m in the weight criteria")
    v.add_argument("--tolerance-scale", type=float, default=1.0)
    args = ap.parse_args(argv)

    if args.command == "run":
        try:
            scenarios = load_config(args.config)
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 2
        config_hash = hashlib.sha256(Path(args.config).read_bytes()).hexdigest()
        if args.filter:
            scenarios = [s for s in scenarios if args.filter in s.name]
        return _summary(run(scenarios, Path(args.out), max(1, args.jobs), config_hash))

    params = {"tolerance_scale": args.tolerance_scale}
    if args.m is not None:
        params["m"] = args.m
    scenario = Scenario("verify-all", "verify-all", params)
    report = execute(scenario, hashlib.sha256(json.dumps(params, sort_keys=True).encode())
                     .hexdigest())
    write_report(report, Path(args.out))
    for rec in report.records:
        failed = [k for k, ok in rec["checks"].items() if not ok]
        tag = "PASS" if rec["passed"] else "FAIL"
        print(f"[{tag}] criterion {rec['number']}: {rec['name']}"
              + ("" if not failed else "  failed: " + ", ".join(failed)))
    if report.error:
        print(report.error, file=sys.stderr)
    return 0 if report.status == PASS else 1


if __name__ == "__main__":
    sys.exit(main())
