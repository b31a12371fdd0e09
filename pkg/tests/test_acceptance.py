"""Acceptance criteria 1-11; each prints one PASS/FAIL line (also listed in the terminal summary)."""
import pytest

from janossy.selftest import CHECKS

from conftest import ACCEPTANCE_LINES


@pytest.mark.acceptance
@pytest.mark.parametrize("number", sorted(CHECKS))
def test_criterion(number):
    res = CHECKS[number]()
    line = res.line()
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert res.passed, line
