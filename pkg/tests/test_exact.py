import random
from fractions import Fraction

import numpy as np
import pytest

from gyni.exact import (
    ExactMathError,
    ExactMatrix,
    affine_rank,
    affine_rank_bounded,
    affine_rank_reference,
    decimal_string,
    format_rational,
    integer_rank,
    modular_rank,
    parse_rational,
    solve_rank_and_basis,
    to_rational,
)


def test_rational_round_trip():
    for v in (Fraction(0), Fraction(-7, 3), Fraction(16, 11), Fraction(5)):
        assert parse_rational(format_rational(v)) == v
    assert format_rational(Fraction(0)) == "0/1"
    assert parse_rational(" 3 ") == 3


def test_floats_refused():
    with pytest.raises(TypeError):
        to_rational(0.5)
    with pytest.raises(TypeError):
        to_rational(True)


def test_bad_denominator():
    with pytest.raises(ExactMathError):
        parse_rational("1/0")
    with pytest.raises(ExactMathError):
        parse_rational("1/-2")


def test_decimal_string():
    assert decimal_string(Fraction(1, 3)) == "0.333333333333"
    assert decimal_string(Fraction(0)) == "0"


def test_rank_and_pivots():
    m = ExactMatrix.from_dense([[1, 2, 3], [2, 4, 6], [0, 0, 1]])
    assert solve_rank_and_basis(m) == (2, [0, 2])
    assert solve_rank_and_basis(ExactMatrix.identity(4)) == (4, [0, 1, 2, 3])
    assert solve_rank_and_basis(ExactMatrix.zeros(3, 2))[0] == 0


def test_matvec_transpose():
    m = ExactMatrix.from_dense([[1, Fraction(1, 2)], [0, -3]])
    assert m.matvec([2, 4]) == [4, -12]
    assert m.rmatvec([1, 1]) == m.transpose().matvec([1, 1])


def test_affine_rank_small_cases():
    assert affine_rank([[0, 0], [1, 1], [2, 2]]) == 1
    assert affine_rank([[1, 0, 0], [0, 1, 0], [0, 0, 1]]) == 2
    assert affine_rank([[5, 5]]) == 0
    simplex = [[0] * 5] + [[int(i == j) for j in range(5)] for i in range(5)]
    assert affine_rank(simplex) == 5
    assert affine_rank(np.array(simplex, dtype=np.int8)) == 5


def test_affine_rank_rational_points():
    pts = [[Fraction(1, 3), 0], [Fraction(2, 3), Fraction(1, 2)], [1, 1]]
    assert affine_rank(pts) == affine_rank_reference(pts) == 1


def test_affine_rank_matches_reference():
    rng = random.Random(3)
    for _ in range(30):
        k, dim = rng.randint(1, 8), rng.randint(1, 6)
        pts = [[rng.randint(-2, 2) for _ in range(dim)] for _ in range(k)]
        assert affine_rank(pts) == affine_rank_reference(pts)


def test_empty_point_set():
    with pytest.raises(ExactMathError):
        affine_rank([])


def test_modular_rank_agrees_on_small_integers():
    rng = np.random.default_rng(1)
    for _ in range(10):
        m = rng.integers(-3, 4, size=(6, 9))
        assert modular_rank(m) == integer_rank(m)


def test_bounded_rank():
    pts = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]], dtype=np.int64)
    assert affine_rank_bounded(pts, 2) == 2
    assert affine_rank_bounded(pts, 3) == 2  # bound not reached: exact fallback
    with pytest.raises(ExactMathError):
        affine_rank_bounded(pts, 1)
