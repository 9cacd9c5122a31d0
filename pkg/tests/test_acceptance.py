"""Acceptance criteria, one test each, run at their own tolerance and time limit.

Each test prints a PASS/FAIL line; use `pytest -s tests/test_acceptance.py` to see them.
"""
import pytest

from elladic.verify import CRITERIA, run_criterion

BY_NUMBER = {c.number: c for c in CRITERIA}


def test_numbering_is_complete():
    assert sorted(BY_NUMBER) == list(range(1, 15))


@pytest.mark.parametrize("number", range(1, 15))
def test_criterion(number):
    outcome = run_criterion(BY_NUMBER[number], seed=0)
    print(outcome.line(record_time=True))
    assert outcome.seconds <= outcome.criterion.limit
    assert outcome.status == "PASS", outcome.detail
