from fractions import Fraction

import pytest

from gyni.facets import LocalPolytope
from gyni.nlc import (
    CorrelationInequality,
    NlcError,
    NlcInstance,
    audit_nlc_facets,
    build_nlc_bell_inequality,
    check_linear_correspondence,
    correlation_bruteforce_max,
    correlation_facet_dimension,
    correlation_from_nlc,
    correlation_points,
    inverse_transform,
    nlc_bruteforce_bound,
    nlc_classical_bound,
    nlc_from_correlation,
    nlc_scenario,
    werner_wolf_inequalities,
)


def test_candidate_counts():
    assert len(werner_wolf_inequalities(1)) == 4
    assert len(werner_wolf_inequalities(2)) == 16
    with pytest.raises(NlcError):
        werner_wolf_inequalities(5)


def test_inverse_transform_recovers_signs():
    for ci in werner_wolf_inequalities(2):
        s = inverse_transform(ci)
        assert s == tuple(Fraction(-1 if (ci.label >> r) & 1 else 1) for r in range(4))


def test_candidates_are_valid():
    for ci in werner_wolf_inequalities(2):
        assert correlation_bruteforce_max(ci) == 1


def test_correlation_points():
    for n in (1, 2, 3):
        assert len(correlation_points(n)) == 2 ** (n + 1)


def test_correlation_facets_n2():
    # the 8 points +-h_u span R^4 and contain the origin in their hull
    for ci in werner_wolf_inequalities(2):
        D, sat = correlation_facet_dimension(ci)
        assert D == 4
        assert sat == 3


def test_round_trip():
    ci = werner_wolf_inequalities(2)[3]
    inst = nlc_from_correlation(ci)
    back = correlation_from_nlc(inst)
    total = sum(abs(c) for c in ci.coefficients)
    assert tuple(c * total for c in back.coefficients) == ci.coefficients


def test_instance_validation():
    with pytest.raises(NlcError):
        NlcInstance(1, (0, 1), (Fraction(1, 2), Fraction(1, 3)))
    with pytest.raises(NlcError):
        NlcInstance(1, (0, 2), (Fraction(1, 2), Fraction(1, 2)))
    with pytest.raises(NlcError):
        CorrelationInequality(2, (Fraction(1),))


def test_linear_correspondence():
    for n in (1, 2, 3):
        assert check_linear_correspondence(n).ok


def test_linear_bound_is_optimal_n2():
    poly = LocalPolytope(nlc_scenario(2))
    for ci in werner_wolf_inequalities(2):
        inst = nlc_from_correlation(ci)
        assert nlc_classical_bound(inst)[0] == nlc_bruteforce_bound(inst, poly)


def test_bell_inequality_layout():
    inst = NlcInstance(1, (0, 1), (Fraction(1, 2), Fraction(1, 2)))
    ineq = build_nlc_bell_inequality(inst)
    sc = ineq.scenario
    # x = y = 0, a = b = 0: coefficient c(0) = 1/2; x = 1, y = 0, a = 1, b = 0: -c(1) * -1
    assert ineq.coefficients[sc.cell(0, 0)] == Fraction(1, 2)
    assert ineq.coefficients[sc.cell(1, 1)] == Fraction(1, 2)
    assert ineq.coefficients[sc.cell(0, 1)] == Fraction(-1, 2)


def test_audit_n2():
    audit = audit_nlc_facets(2)
    assert audit.dimension == 24
    assert audit.all_valid and audit.all_linear_optimal
    assert audit.facets == 0
