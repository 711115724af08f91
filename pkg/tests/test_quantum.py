import math
import random
from fractions import Fraction

import pytest

from conftest import chsh_inequality
from gyni.game import (
    GyniInstance,
    classical_bound,
    complement,
    concentrated_distribution,
    instance,
    random_distribution,
)
from gyni.quantum import (
    AlgebraElement,
    AlgebraError,
    Surd,
    algebra_multiply,
    reduce_word,
    seesaw_search,
    sos_sides,
    square_linear,
    tighten_distribution,
    verify_sos_identity,
)


def test_word_rules():
    n = 3
    assert reduce_word((5, 5, 5), n) == (5,)
    assert reduce_word((5, complement(5, n)), n) == (5, 2)
    assert reduce_word((5, 1), n) is None
    with pytest.raises(AlgebraError):
        reduce_word((5, 2, 5), n)


def test_surd_products():
    assert Surd(2, 3).times(Surd(Fraction(1, 2), 12)) == 6
    assert Surd(0, 2).times(Surd(1, 3)) == 0
    with pytest.raises(AlgebraError):
        Surd(1, 2).times(Surd(1, 3))
    with pytest.raises(AlgebraError):
        Surd(1, -1)


def test_square_linear_matches_multiplication():
    n = 2
    terms = {0: Surd(Fraction(1, 2), 1), 3: Surd(-2, 1)}
    lin = AlgebraElement.unit(n, 3) + AlgebraElement.generator(n, 0, Fraction(1, 2)) + AlgebraElement.generator(n, 3, -2)
    assert square_linear(n, Surd(3, 1), terms) == algebra_multiply(lin, lin)


def test_orthogonal_generators_annihilate():
    a, b = AlgebraElement.generator(2, 0), AlgebraElement.generator(2, 1)
    assert (a * b).coeffs == {}


def test_tightening_pairs():
    q = concentrated_distribution(3, 6)
    t = tighten_distribution(q)
    wc = classical_bound(GyniInstance(3, q))
    assert all(t[x] + t[complement(x, 3)] == wc for x in range(8))
    # already-tight priors are unchanged
    assert tighten_distribution(instance(3).prior) == instance(3).prior.weights


def test_identity_holds():
    rng = random.Random(1)
    priors = [instance(3).prior, instance(4, "uniform").prior, instance(4, "cubic4").prior]
    priors += [random_distribution(3, rng) for _ in range(10)]
    for q in priors:
        assert verify_sos_identity(q)


def test_wrong_bound_breaks_identity():
    q = instance(3).prior
    lhs, rhs = sos_sides(tighten_distribution(q), 3, Fraction(1, 3))
    assert lhs != rhs


def test_seesaw_reaches_tsirelson():
    res = seesaw_search(chsh_inequality(), 2, restarts=10, seed=1)
    assert abs(res.best - (2 + math.sqrt(2)) / 4) < 1e-6


def test_seesaw_respects_classical_bound():
    g = instance(3)
    res = seesaw_search(g, 2, restarts=10, seed=0)
    assert res.best <= float(classical_bound(g)) + 1e-6
    assert res.best > float(classical_bound(g)) - 1e-3


def test_seesaw_is_deterministic():
    a = seesaw_search(instance(3, "uniform"), 2, restarts=3, seed=5)
    b = seesaw_search(instance(3, "uniform"), 2, restarts=3, seed=5)
    assert a.values == b.values


def test_seesaw_histories_monotone():
    res = seesaw_search(instance(3), 3, restarts=3, seed=2)
    for h in res.histories:
        assert all(b >= a - 1e-9 for a, b in zip(h, h[1:]))


def test_seesaw_limits():
    with pytest.raises(ValueError):
        seesaw_search(instance(3), 4)
    with pytest.raises(ValueError):
        seesaw_search(instance(5), 2)
