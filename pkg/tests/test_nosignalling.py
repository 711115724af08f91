import random
from fractions import Fraction

import pytest

from conftest import CHSH, chsh_inequality, signalling_box
from gyni.game import GyniInstance, binary_scenario, build_inequality, classical_bound, instance, random_distribution
from gyni.lp import LinearProgram, check_certificate, lp_maximize
from gyni.nosignalling import (
    NotNoSignalling,
    box_p1,
    box_p2,
    build_ns_polytope,
    check_factor_two,
    extend_with_copier,
    extremality_check,
    ns_bound,
    random_ns_behaviors,
    sum_over_inputs_bound,
    symmetry_group,
)
from gyni.scenario import Scenario, evaluate, is_no_signalling, uniform_behavior


def test_polytope_dimension():
    # (m(d-1)+1)^N - 1
    assert build_ns_polytope(CHSH).dimension == 8
    assert build_ns_polytope(binary_scenario(3)).dimension == 26
    assert build_ns_polytope(Scenario(2, 3, 2)).dimension == 15


def test_membership(pr):
    poly = build_ns_polytope(CHSH)
    assert poly.satisfied_by(pr.table)
    assert not poly.satisfied_by(signalling_box().table)


def test_chsh_no_signalling_optimum():
    poly = build_ns_polytope(CHSH)
    lp = LinearProgram(chsh_inequality().coefficients, poly.matrix, poly.rhs)
    res = lp_maximize(lp)
    assert res.value == 1
    assert check_certificate(lp, res) == []


def test_balanced_priors_have_no_gap():
    for n in (2, 3):
        assert ns_bound(instance(n, "uniform")).value == classical_bound(instance(n, "uniform"))


def test_routes_agree():
    rng = random.Random(4)
    games = [instance(3), instance(4), instance(4, "uniform")]
    games += [GyniInstance(3, random_distribution(3, rng)) for _ in range(4)]
    for g in games:
        full = ns_bound(g, "full")
        sym = ns_bound(g, "symmetric")
        assert full.value == sym.value
        assert full.certified and sym.certified


def test_witness_is_feasible():
    nb = ns_bound(instance(4))
    assert is_no_signalling(nb.witness)
    assert evaluate(build_inequality(instance(4)), nb.witness) == nb.value


def test_symmetry_group_contains_rotations():
    group = symmetry_group(instance(4))
    assert len(group) >= 4
    assert len(symmetry_group(instance(4, "cubic4"))) < len(group)


def test_sum_over_inputs(pr):
    assert sum_over_inputs_bound(uniform_behavior(binary_scenario(3))) == Fraction(8, 8)
    with pytest.raises(NotNoSignalling):
        sum_over_inputs_bound(signalling_box())


def test_boxes_are_vertices():
    for b in (box_p1(), box_p2()):
        assert is_no_signalling(b)
        assert extremality_check(b).is_vertex
    mixed = box_p1().mix(box_p2(), Fraction(1, 2))
    assert not extremality_check(mixed).is_vertex
    assert not extremality_check(uniform_behavior(binary_scenario(3))).is_vertex


def test_pr_box_is_vertex(pr):
    assert extremality_check(pr).is_vertex


def test_random_behaviors_are_seeded():
    a = random_ns_behaviors(20, seed=9)
    assert a == random_ns_behaviors(20, seed=9)
    assert a != random_ns_behaviors(20, seed=10)
    assert all(is_no_signalling(b) for b in a[:5])


def test_copier_extension():
    ext = extend_with_copier(ns_bound(instance(3)).witness)
    assert ext.scenario == binary_scenario(4)
    assert is_no_signalling(ext)


def test_factor_two_report_for_random_prior():
    rep = check_factor_two(GyniInstance(3, random_distribution(3, random.Random(0))))
    assert rep.ok and rep.omega_ns <= 2 * rep.omega_c
