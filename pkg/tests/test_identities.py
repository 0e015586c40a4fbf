import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from corrgap.clock import psi_eval, psi_integral_closed
from corrgap.identities import binom, check_binom_single, check_binom_suite, check_sign_claims


def test_binom_convention():
    assert binom(5, 2) == 10
    assert binom(2, 5) == 0
    assert binom(-1, 0) == 0
    assert binom(4, -1) == 0


def test_all_integer_identities_exact():
    reports = [check_binom_single()] + check_binom_suite()
    assert [r.claim for r in reports] == ["binom-single", "binomial", "binom0", "binomk", "binom1", "binom2"]
    for r in reports:
        assert r.passed and r.violation == 0, r.line()


def test_sign_claims():
    for r in check_sign_claims():
        assert r.passed, r.line()


def test_report_line_format():
    line = check_binom_single(5).line()
    assert line.startswith("PASS binom-single [")


@given(st.integers(1, 60), st.data())
def test_partial_alternating_sum(n, data):
    ell = data.draw(st.integers(0, n))
    lhs = sum((-1) ** k * math.comb(n, k) for k in range(ell + 1))
    assert lhs == (-1) ** ell * binom(n - 1, ell)


def test_rounded_point_chain():
    # psi at a 0/1 point with lam ones among n coordinates equals the closed summation
    worst = 0.0
    for n in range(2, 15):
        for lam in range(2, min(n, 12) + 1):
            for ell in range(1, lam):
                x = np.zeros(n)
                x[:lam] = 1.0
                worst = max(worst, abs(psi_eval(x, ell) - psi_integral_closed(lam, ell)))
    assert worst <= 1e-8
