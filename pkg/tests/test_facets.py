from fractions import Fraction

import pytest

from conftest import CHSH, chsh_inequality
from gyni.facets import LocalPolytope, facet_check, local_dimension, marginal_vertex_matrix
from gyni.game import binary_scenario, build_inequality, instance
from gyni.scenario import BellInequality, Scenario


def _single(sc, cell, coeff=-1, bound=0):
    c = [Fraction(0)] * sc.num_cells
    c[cell] = Fraction(coeff)
    return BellInequality(sc, tuple(c), Fraction(bound))


def test_local_dimensions():
    assert local_dimension(CHSH) == 8
    assert local_dimension(binary_scenario(3)) == 26
    assert local_dimension(Scenario(2, 3, 2)) == 15
    assert local_dimension(Scenario(2, 2, 3)) == 24


def test_embeddings_agree():
    for sc in (CHSH, binary_scenario(3), Scenario(2, 3, 3)):
        assert local_dimension(sc, "full") == local_dimension(sc, "marginal")
    r_full = facet_check(build_inequality(instance(3)), "full")
    r_marg = facet_check(build_inequality(instance(3)), "marginal")
    assert (r_full.saturating_dimension, r_full.is_facet) == (r_marg.saturating_dimension, r_marg.is_facet)


def test_marginal_width():
    assert marginal_vertex_matrix(binary_scenario(3)).shape == (64, 26)


def test_chsh_is_facet(chsh):
    rep = facet_check(chsh)
    assert rep.is_valid and rep.is_facet and rep.gap == 0
    assert rep.max_value == Fraction(3, 4)


def test_positivity_is_facet_normalization_is_not():
    assert facet_check(_single(CHSH, 0)).is_facet
    c = [Fraction(0)] * CHSH.num_cells
    for a in range(4):
        c[CHSH.cell(a, 0)] = Fraction(1)
    rep = facet_check(BellInequality(CHSH, tuple(c), Fraction(1)))
    assert rep.saturating_count == 16 and not rep.is_facet


def test_invalid_and_loose():
    loose = facet_check(BellInequality(CHSH, chsh_inequality().coefficients, Fraction(7, 8)))
    assert loose.is_valid and loose.saturating_count == 0 and not loose.is_facet
    tight = facet_check(BellInequality(CHSH, chsh_inequality().coefficients, Fraction(1, 2)))
    assert not tight.is_valid and not tight.is_facet


def test_shared_polytope_reuse(chsh):
    poly = LocalPolytope(CHSH)
    values, den = poly.values(chsh)
    assert den == 4 and max(values.tolist()) == 3
    assert facet_check(chsh, polytope=poly).is_facet


def test_no_signalling_bound_rejected(chsh):
    with pytest.raises(ValueError):
        facet_check(BellInequality(CHSH, chsh.coefficients, Fraction(1), "no-signalling"))
