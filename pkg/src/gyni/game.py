"""The guess-your-neighbour's-input game on a ring of N players.

Player ``i`` receives bit ``x_i`` and wins jointly with the others iff every
player outputs its right neighbour's input, ``a_i = x_{i+1}`` (indices mod
N).  For a prior ``q`` the figure of merit is ``sum_x q(x) P(a=w(x)|x)``
where ``w(x)`` is the cyclic left shift of ``x``.
"""
from __future__ import annotations

import itertools
import random
from math import lcm
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .scenario import (
    DEFAULT_ENUMERATION_CAP,
    BellInequality,
    DeterministicStrategy,
    EnumerationCapError,
    PriorDistribution,
    Scenario,
    ScenarioError,
    deterministic_output_matrix,
    enumerate_deterministic,
)


def binary_scenario(n: int) -> Scenario:
    return Scenario(n, 2, 2)


@dataclass(frozen=True)
class GyniInstance:
    parties: int
    prior: PriorDistribution

    def __post_init__(self):
        if self.parties < 2:
            raise ScenarioError("the game needs at least two players")
        if self.prior.scenario != binary_scenario(self.parties):
            raise ScenarioError("prior must live on {0,1}^N")

    @property
    def scenario(self) -> Scenario:
        return self.prior.scenario


def winning_output(x: int, n: int) -> int:
    """Output index with ``a_i = x_{i+1}``: a cyclic right shift of the bit index."""
    return (x >> 1) | ((x & 1) << (n - 1))


def complement(x: int, n: int) -> int:
    return x ^ ((1 << n) - 1)


def winning_cells(n: int) -> list[int]:
    """Cell index of the winning entry for each input ``x`` (in input order)."""
    return [x * 2**n + winning_output(x, n) for x in range(2**n)]


# -- priors ---------------------------------------------------------------

def promise_distribution(n: int) -> PriorDistribution:
    """Uniform on strings whose first ``N^`` bits have even parity.

    ``N^ = N`` for odd N and ``N - 1`` for even N.
    """
    if n < 2:
        raise ScenarioError("promise distribution needs N >= 2")
    nh = n if n % 2 else n - 1
    mask = (1 << nh) - 1
    w = Fraction(1, 2 ** (n - 1))
    weights = tuple(w if bin(x & mask).count("1") % 2 == 0 else Fraction(0) for x in range(2**n))
    return PriorDistribution(binary_scenario(n), weights)


def uniform_distribution(n: int) -> PriorDistribution:
    return PriorDistribution(binary_scenario(n), (Fraction(1, 2**n),) * 2**n)


def cubic_four_party_distribution() -> PriorDistribution:
    """Four players, uniform on ``x1 ^ x2 ^ x3 ^ x1 x2 x3 = 0`` with ``x4`` free."""
    support = []
    for x in range(16):
        x1, x2, x3 = x & 1, (x >> 1) & 1, (x >> 2) & 1
        if (x1 ^ x2 ^ x3 ^ (x1 & x2 & x3)) == 0:
            support.append(x)
    w = Fraction(1, len(support))
    return PriorDistribution(binary_scenario(4), tuple(w if x in support else Fraction(0) for x in range(16)))


def random_distribution(n: int, rng: random.Random, high: int = 100) -> PriorDistribution:
    """Integer weights in ``[0, high]``, normalized; redrawn if all zero."""
    while True:
        raw = [rng.randint(0, high) for _ in range(2**n)]
        total = sum(raw)
        if total:
            return PriorDistribution(binary_scenario(n), tuple(Fraction(v, total) for v in raw))


def concentrated_distribution(n: int, x0: int) -> PriorDistribution:
    return PriorDistribution(binary_scenario(n), tuple(Fraction(int(x == x0)) for x in range(2**n)))


def instance(n: int, prior: PriorDistribution | str = "promise") -> GyniInstance:
    if isinstance(prior, str):
        named = {"promise": promise_distribution, "uniform": uniform_distribution}
        if prior == "cubic4":
            if n != 4:
                raise ScenarioError("the cubic distribution is defined for four players only")
            prior = cubic_four_party_distribution()
        elif prior in named:
            prior = named[prior](n)
        else:
            raise ScenarioError(f"unknown distribution {prior!r}")
    return GyniInstance(n, prior)


# -- inequality and bounds -----------------------------------------------

def build_inequality(g: GyniInstance) -> BellInequality:
    sc = g.scenario
    coeffs = [Fraction(0)] * sc.num_cells
    for x, cell in enumerate(winning_cells(g.parties)):
        coeffs[cell] = g.prior.weights[x]
    return BellInequality(sc, tuple(coeffs), classical_bound(g), "classical")


def classical_bound_with_witness(g: GyniInstance) -> tuple[Fraction, int]:
    """``max_x q(x) + q(~x)`` and the maximizing ``x`` whose printed string is smallest."""
    n, q = g.parties, g.prior.weights
    best, arg = None, None
    for x in sorted(range(2**n), key=g.scenario.format_input):
        v = q[x] + q[complement(x, n)]
        if best is None or v > best:
            best, arg = v, x
    return best, arg


def classical_bound(g: GyniInstance) -> Fraction:
    return classical_bound_with_witness(g)[0]


def strategy_from_string(y, n: int | None = None) -> DeterministicStrategy:
    """Player i maps ``y_i -> y_{i+1}`` and ``~y_i -> ~y_{i+1}``."""
    if isinstance(y, str):
        n = len(y)
    if n is None:
        raise ScenarioError("number of players required for an integer input string")
    sc = binary_scenario(n)
    digits = sc.input_digits(sc.input_index(y))
    fs = tuple(tuple(s ^ digits[i] ^ digits[(i + 1) % n] for s in (0, 1)) for i in range(n))
    return DeterministicStrategy(sc, fs)


def strategy_value(g: GyniInstance, s: DeterministicStrategy) -> Fraction:
    n = g.parties
    return sum((q for x, q in enumerate(g.prior.weights) if q and s.output_for(x) == winning_output(x, n)), Fraction(0))


def classical_bound_bruteforce(
    g: GyniInstance, cap: int = 4**7
) -> tuple[Fraction, DeterministicStrategy]:
    """Maximize over all ``4^N`` deterministic strategies (first maximizer wins ties)."""
    n = g.parties
    if 4**n > cap:
        raise EnumerationCapError(4**n, cap)
    sc = g.scenario
    out = deterministic_output_matrix(sc, DEFAULT_ENUMERATION_CAP)
    wins = out == np.array([winning_output(x, n) for x in range(2**n)])[None, :]
    # Exact: integer weights over a common denominator.
    den = lcm(*(q.denominator for q in g.prior.weights))
    iw = [int(q * den) for q in g.prior.weights]
    if max(iw) * 2**n < 2**62:
        scores = wins.astype(np.int64) @ np.array(iw, dtype=np.int64)
    else:
        scores = wins.astype(object) @ np.array(iw, dtype=object)
    k = int(np.argmax(scores))
    strategies = enumerate_deterministic(sc)
    return Fraction(int(scores[k]), den), strategies[k]


def check_pair_formula(n: int) -> bool:
    """For every ``x`` not in ``{y, ~y}`` some ``i`` has ``x_i = y_i`` and ``x_{i+1} != y_{i+1}``."""
    if n > 12:
        raise ScenarioError("exhaustive check limited to N <= 12")
    full = (1 << n) - 1
    xs = np.arange(2**n, dtype=np.int64)
    ok = True
    for y in range(2**n):
        eq = ~(xs ^ y) & full  # bit i set iff x_i == y_i
        ne = (xs ^ y) & full
        ne_next = (ne >> 1) | ((ne & 1) << (n - 1))  # bit i = [x_{i+1} != y_{i+1}]
        found = (eq & ne_next) != 0
        excluded = (xs == y) | (xs == (y ^ full))
        if not np.all(found | excluded):
            ok = False
            break
    return ok


def rotate_prior(prior: PriorDistribution, shift: int = 1) -> PriorDistribution:
    """Relabel player ``i`` as ``i + shift``."""
    n = prior.scenario.parties
    shift %= n
    w = [Fraction(0)] * 2**n
    for x, q in enumerate(prior.weights):
        y = ((x << shift) | (x >> (n - shift))) & ((1 << n) - 1)
        w[y] = q
    return PriorDistribution(prior.scenario, tuple(w))


def all_input_strings(n: int) -> list[str]:
    return ["".join(map(str, t)) for t in itertools.product((0, 1), repeat=n)]


__all__ = [
    "GyniInstance",
    "binary_scenario",
    "build_inequality",
    "check_pair_formula",
    "classical_bound",
    "classical_bound_bruteforce",
    "classical_bound_with_witness",
    "complement",
    "concentrated_distribution",
    "cubic_four_party_distribution",
    "instance",
    "promise_distribution",
    "random_distribution",
    "rotate_prior",
    "strategy_from_string",
    "strategy_value",
    "uniform_distribution",
    "winning_cells",
    "winning_output",
]
