"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

Run ``python3 tests/test_acceptance.py`` for the bare table.
"""

import sys

import pytest

from fockvolterra.acceptance import CRITERIA, run_criterion


@pytest.mark.parametrize("number", range(1, len(CRITERIA) + 1))
def test_criterion(number, capsys):
    result = run_criterion(number)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.metrics


if __name__ == "__main__":
    results = [run_criterion(k) for k in range(1, len(CRITERIA) + 1)]
    for r in results:
        print(r.line())
    sys.exit(0 if all(r.passed for r in results) else 1)
