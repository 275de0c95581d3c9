"""Desk-scale acceptance suite; one verdict line per criterion."""

import pytest

from affine2f import acceptance

RESULTS = []  # collected for the terminal summary in conftest


@pytest.mark.parametrize("check", acceptance.CRITERIA, ids=lambda c: c.__name__)
def test_criterion(check):
    res = acceptance.timed(check)
    RESULTS.append(res)
    print(res.line())
    assert res.passed, res.line()
