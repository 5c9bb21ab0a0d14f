"""Acceptance criteria at their stated tolerances, one test per criterion.

Each test prints a single ``[PASS]``/``[FAIL]`` line (shown even under
output capture) and then asserts the criterion.
"""
import pytest

from painleve_lab.acceptance import CRITERIA


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"{c.number:02d}-{c.title.replace(' ', '_')}" for c in CRITERIA])
def test_criterion(criterion, capsys):
    result = criterion()
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.detail
