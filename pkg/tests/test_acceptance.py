"""Acceptance criteria 1-9 at full sample counts and stated tolerances.

Each test prints one PASS/FAIL line with the measured numbers, whether or
not it passes.  The full run takes around ten minutes; the 10^6-sample
torus average dominates.
"""
import pytest

from bkklab.selftest import CHECKS


@pytest.mark.slow
@pytest.mark.parametrize("check", CHECKS, ids=[f"criterion-{i + 1}" for i in range(len(CHECKS))])
def test_acceptance(check, capsys):
    result = check(1.0)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.line()
