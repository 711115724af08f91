import dataclasses
import random
from fractions import Fraction

import pytest

from gyni.exact import ExactMatrix
from gyni.lp import InfeasibleError, LinearProgram, UnboundedError, check_certificate, lp_maximize


def _lp(c, rows, b, **kw):
    return LinearProgram(tuple(c), ExactMatrix.from_dense(rows), tuple(b), **kw)


def test_textbook_optimum():
    # max x + y with x + 2y <= 4, 3x + y <= 6 (slacks s1, s2)
    lp = _lp([1, 1, 0, 0], [[1, 2, 1, 0], [3, 1, 0, 1]], [4, 6])
    res = lp_maximize(lp)
    assert res.value == Fraction(14, 5)
    assert tuple(res.x[:2]) == (Fraction(8, 5), Fraction(6, 5))
    assert check_certificate(lp, res) == []


def test_infeasible():
    with pytest.raises(InfeasibleError):
        lp_maximize(_lp([1, 1], [[1, 1]], [-1]))


def test_unbounded():
    with pytest.raises(UnboundedError):
        lp_maximize(_lp([1, 0], [[1, -1]], [0]))


def test_upper_bounds_and_free_variables():
    lp = _lp([1, 0], [[1, 1]], [5], upper=(Fraction(3, 2), None))
    assert lp_maximize(lp).value == Fraction(3, 2)
    # y free: max -y = 2 - x subject to x - y = 2, 0 <= x <= 1, attained at x = 0
    lp = _lp([0, -1], [[1, -1]], [2], nonneg=(True, False), upper=(1, None))
    res = lp_maximize(lp)
    assert res.value == 2 and res.x[1] == -2


def test_tampered_certificate_is_rejected():
    lp = _lp([1, 1, 0, 0], [[1, 2, 1, 0], [3, 1, 0, 1]], [4, 6])
    res = lp_maximize(lp)
    y = list(res.y)
    y[0] += 1
    assert check_certificate(lp, dataclasses.replace(res, y=tuple(y)))


def test_pivot_rules_agree():
    rng = random.Random(7)
    for _ in range(25):
        m, n = rng.randint(1, 4), rng.randint(2, 6)
        rows = [[rng.randint(0, 4) for _ in range(n)] + [int(i == j) for j in range(m)] for i in range(m)]
        b = [rng.randint(1, 9) for _ in range(m)]
        c = [rng.randint(-3, 5) for _ in range(n)] + [0] * m
        lp = _lp(c, rows, b, upper=tuple([10] * n + [None] * m))
        r1 = lp_maximize(lp, pivot_rule="bland")
        r2 = lp_maximize(lp, pivot_rule="steepest")
        assert r1.value == r2.value
        assert check_certificate(lp, r1) == [] and check_certificate(lp, r2) == []
