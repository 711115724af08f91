from fractions import Fraction

import pytest

from gyni.scenario import Behavior, BellInequality, Scenario

CHSH = Scenario(2, 2, 2)


def chsh_inequality() -> BellInequality:
    """Winning probability of CHSH (a xor b = x y) under uniform inputs."""
    coeffs = [Fraction(0)] * CHSH.num_cells
    for x in range(4):
        x1, x2 = x & 1, x >> 1
        for a in range(4):
            if (a & 1) ^ (a >> 1) == x1 & x2:
                coeffs[CHSH.cell(a, x)] = Fraction(1, 4)
    return BellInequality(CHSH, tuple(coeffs), Fraction(3, 4))


def pr_box() -> Behavior:
    table = [Fraction(0)] * CHSH.num_cells
    for x in range(4):
        for a in range(4):
            if (a & 1) ^ (a >> 1) == (x & 1) & (x >> 1):
                table[CHSH.cell(a, x)] = Fraction(1, 2)
    return Behavior(CHSH, tuple(table))


def signalling_box() -> Behavior:
    """Party 2 outputs party 1's input."""
    table = [Fraction(0)] * CHSH.num_cells
    for x in range(4):
        table[CHSH.cell(2 * (x & 1), x)] = Fraction(1)
    return Behavior(CHSH, tuple(table))


@pytest.fixture
def chsh():
    return chsh_inequality()


@pytest.fixture
def pr():
    return pr_box()
