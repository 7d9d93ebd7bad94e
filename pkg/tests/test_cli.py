import json

import pytest

from fockvolterra.cli import main, parse_config
from fockvolterra.errors import ConfigError

CONFIG = {"scenarios": [
    {"name": "member", "kind": "membership",
     "params": {"space": {"m": 0, "p": 2}, "f": "exppoly:[1]|[0,0,0.3333333333333333]"}},
    {"name": "vz-schatten", "kind": "schatten",
     "params": {"operator": {"kind": "volterra", "g": "poly:[0,1]"}, "p_list": [2, 2.5]}},
    {"name": "disk", "kind": "spectrum-scan",
     "params": {"a": 1, "lambdas": [0, 1, "1.5i", 3, [0, 5]]}},
    {"name": "vz2", "kind": "matrix",
     "params": {"operator": {"kind": "volterra", "g": [0, 0, 1]}, "N": 8}},
    {"name": "table", "kind": "carleson",
     "params": {"cases": [{"operator": {"kind": "companion", "g": "poly:[0,1]"}, "p": 2, "q": 2,
                           "expected": "Unbounded"}]}},
    {"name": "reg", "kind": "regularity", "params": {"space": {"m": 1}}},
    {"name": "one", "kind": "norm", "params": {"f": [1], "expected": 1.7724538509055159}},
]}


def _write(tmp_path, doc):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(doc))
    return path


def test_run_writes_reports(tmp_path):
    out = tmp_path / "out"
    assert main(["run", str(_write(tmp_path, CONFIG)), "--out", str(out)]) == 0
    rep = json.loads((out / "member" / "report.json").read_text())
    assert rep["status"] == "pass"
    assert rep["records"][0]["status"] == "Member"
    assert len(rep["provenance"]["config_hash"]) == 64
    rows = {r["p"]: r["verdict"] for r in
            json.loads((out / "vz-schatten" / "report.json").read_text())["records"]}
    assert rows == {2.0: "Divergent", 2.5: "Convergent"}
    header = (out / "disk" / "data.csv").read_text().splitlines()[0]
    assert header.split(",")[-1] == "classification"


def test_parallel_and_serial_runs_are_identical(tmp_path):
    cfg = _write(tmp_path, CONFIG)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", str(cfg), "--out", str(a), "--jobs", "3"]) == 0
    assert main(["run", str(cfg), "--out", str(b)]) == 0
    for d in sorted(a.iterdir()):
        for name in ("report.json", "data.csv"):
            fa, fb = d / name, b / d.name / name
            if fa.exists():
                assert fa.read_bytes() == fb.read_bytes()


def test_filter(tmp_path):
    out = tmp_path / "out"
    main(["run", str(_write(tmp_path, CONFIG)), "--out", str(out), "--filter", "vz"])
    assert sorted(p.name for p in out.iterdir()) == ["vz-schatten", "vz2"]


def test_empty_config(tmp_path):
    out = tmp_path / "out"
    assert main(["run", str(_write(tmp_path, {"scenarios": []})), "--out", str(out)]) == 0
    assert list(out.iterdir()) == []


@pytest.mark.parametrize("doc", [
    {},
    {"scenarios": [{"name": "x", "kind": "nope"}]},
    {"scenarios": [{"name": "x", "kind": "norm", "params": {}}]},
    {"scenarios": [{"name": "x", "kind": "norm", "params": {"f": "poly:[1]", "extra": 1}}]},
    {"scenarios": [{"name": "x", "kind": "norm", "params": {"f": "poly:1"}}]},
    {"scenarios": [{"name": "x", "kind": "regularity"}, {"name": "x", "kind": "regularity"}]},
])
def test_config_errors(doc):
    with pytest.raises(ConfigError):
        parse_config(doc)


def test_config_error_exit_code(tmp_path):
    assert main(["run", str(_write(tmp_path, {"scenarios": [{"name": 1}]})),
                 "--out", str(tmp_path / "o")]) == 2


def test_failing_scenario_sets_exit_code_and_still_writes(tmp_path):
    doc = {"scenarios": [
        {"name": "wrong", "kind": "membership", "params": {"f": "poly:[1]", "expected": "NonMember"}},
        {"name": "boom", "kind": "matrix",
         "params": {"space": {"p": 1.5}, "operator": {"kind": "volterra", "g": [0, 1]}, "N": 8}},
        {"name": "fine", "kind": "regularity"},
    ]}
    out = tmp_path / "out"
    assert main(["run", str(_write(tmp_path, doc)), "--out", str(out)]) == 1
    boom = json.loads((out / "boom" / "report.json").read_text())
    assert boom["status"] == "fail" and "PreconditionError" in boom["error"]
    assert json.loads((out / "fine" / "report.json").read_text())["status"] == "pass"


def test_inconclusive_is_not_a_failure(tmp_path):
    doc = {"scenarios": [{"name": "edge", "kind": "membership",
                          "params": {"f": "exppoly:[1]|[0,0,0.5]"}}]}
    out = tmp_path / "out"
    assert main(["run", str(_write(tmp_path, doc)), "--out", str(out)]) == 0
    assert json.loads((out / "edge" / "report.json").read_text())["status"] == "inconclusive"


def test_verify_all_forced_failure(tmp_path):
    doc = {"scenarios": [{"name": "va", "kind": "verify-all",
                          "params": {"criteria": [6], "tolerance_scale": 0}}]}
    assert main(["run", str(_write(tmp_path, doc)), "--out", str(tmp_path / "o")]) == 1


def test_verify_all_m_override_raises_beta(tmp_path):
    doc = {"scenarios": [{"name": "va", "kind": "verify-all", "params": {"criteria": [8], "m": 5}}]}
    out = tmp_path / "o"
    assert main(["run", str(_write(tmp_path, doc)), "--out", str(out)]) == 0
    rec = json.loads((out / "va" / "report.json").read_text())["records"][0]
    assert rec["metrics"]["m=5 laplacian"]["beta"] == 6.0
