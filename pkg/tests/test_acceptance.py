"""Acceptance criteria 1-9, one test each, each printing a PASS/FAIL line.

Run alone with ``pytest -v -s tests/test_acceptance.py`` or as a script.
"""
import random
import subprocess
import sys
import time
from contextlib import contextmanager
from fractions import Fraction

import pytest

from gyni.facets import facet_check
from gyni.game import GyniInstance, build_inequality, classical_bound, classical_bound_bruteforce, instance, random_distribution
from gyni.nlc import audit_nlc_facets, check_linear_correspondence
from gyni.nosignalling import (
    box_p1,
    box_p2,
    check_factor_two,
    check_odd_even,
    extremality_check,
    ns_bound,
    orbit_max_violators,
    random_ns_behaviors,
    sum_over_inputs_bound,
)
from gyni.quantum import seesaw_search, verify_sos_identity
from gyni.scenario import evaluate, is_no_signalling

RATIOS = {3: Fraction(4, 3), 4: Fraction(4, 3), 5: Fraction(16, 11), 6: Fraction(16, 11), 7: Fraction(64, 42)}


@contextmanager
def criterion(label, capsys=None):
    t0 = time.perf_counter()
    status = "FAIL"
    try:
        yield
        status = "PASS"
    finally:
        line = f"criterion {label}: {status} ({time.perf_counter() - t0:.1f}s)"
        if capsys is not None:
            with capsys.disabled():
                print("\n" + line)
        else:
            print(line)


def _elapsed_under(t0, limit):
    dt = time.perf_counter() - t0
    assert dt < limit, f"took {dt:.1f}s, limit {limit}s"


def test_criterion_1_classical_bounds(capsys):
    with criterion("1 classical bounds", capsys):
        t0 = time.perf_counter()
        for n in range(3, 8):
            assert classical_bound(instance(n)) == Fraction(1, 2 ** (n - 1))
        for n in range(3, 6):
            assert classical_bound_bruteforce(instance(n))[0] == Fraction(1, 2 ** (n - 1))
        _elapsed_under(t0, 10)


@pytest.mark.parametrize("n,limit", [(3, 5), (4, 120), (5, 1800)])
def test_criterion_2_ns_ratio(capsys, n, limit):
    with criterion(f"2 ns ratio N={n}", capsys):
        t0 = time.perf_counter()
        nb = ns_bound(instance(n))
        assert nb.certified
        assert nb.value / classical_bound(instance(n)) == RATIOS[n]
        _elapsed_under(t0, limit)


@pytest.mark.parametrize("n", [6, 7])
def test_criterion_2_extended(capsys, n):
    with criterion(f"2 ns ratio N={n} (extended)", capsys):
        nb = ns_bound(instance(n))
        assert nb.certified
        assert nb.value / classical_bound(instance(n)) == RATIOS[n]


def test_criterion_3_two_classical(capsys):
    with criterion("3 uniform equality and factor-two bound", capsys):
        for n in (3, 4):
            rep = check_factor_two(instance(n, "uniform"))
            assert rep.omega_ns == rep.omega_c and rep.certified
        rng = random.Random(0)
        for _ in range(100):
            rep = check_factor_two(GyniInstance(3, random_distribution(3, rng)))
            assert rep.certified and rep.omega_ns <= 2 * rep.omega_c
        for b in random_ns_behaviors(1000, seed=0):
            assert sum_over_inputs_bound(b) <= 2


def test_criterion_4_boxes(capsys):
    with criterion("4 extremal boxes", capsys):
        t0 = time.perf_counter()
        ineq = build_inequality(instance(3))
        for b in (box_p1(), box_p2()):
            assert is_no_signalling(b)
            assert evaluate(ineq, b) == Fraction(1, 3)
            assert extremality_check(b).is_vertex
        orb = orbit_max_violators()
        assert (orb.p1_maximal, orb.p2_maximal, orb.union) == (24, 8, 32)
        _elapsed_under(t0, 120)


def test_criterion_5_odd_even(capsys):
    with criterion("5 odd to even extension", capsys):
        rep = check_odd_even(3)
        assert rep.ratios == (Fraction(4, 3), Fraction(4, 3))
        assert rep.extension_attains_optimum and rep.certified


@pytest.mark.parametrize("n", [3, 4, 5])
def test_criterion_6_facets(capsys, n):
    with criterion(f"6 facet N={n}", capsys):
        rep = facet_check(build_inequality(instance(n)))
        assert rep.dimension == 3**n - 1
        assert rep.is_valid and rep.saturating_dimension == rep.dimension - 1 and rep.is_facet


def test_criterion_6_cubic(capsys):
    with criterion("6 cubic four-party inequality", capsys):
        rep = facet_check(build_inequality(instance(4, "cubic4")))
        assert rep.is_valid and not rep.is_facet


@pytest.mark.parametrize("n", [6, 7])
def test_criterion_6_extended(capsys, n):
    with criterion(f"6 facet N={n} (extended)", capsys):
        assert facet_check(build_inequality(instance(n))).is_facet


def test_criterion_7_quantum(capsys):
    with criterion("7 quantum certificate and see-saw", capsys):
        for n in range(3, 6):
            assert verify_sos_identity(instance(n).prior)
        for n in range(2, 6):
            assert verify_sos_identity(instance(n, "uniform").prior)
        rng = random.Random(0)
        for _ in range(100):
            assert verify_sos_identity(random_distribution(3, rng))
        t0 = time.perf_counter()
        g = instance(3)
        for dim in (2, 3):
            assert seesaw_search(g, dim, restarts=50, seed=0).best <= float(classical_bound(g)) + 1e-6
        _elapsed_under(t0, 300)


@pytest.mark.parametrize("n,limit", [(2, 10), (3, 1800)])
def test_criterion_8_nlc(capsys, n, limit):
    with criterion(f"8 nlc audit n={n}", capsys):
        t0 = time.perf_counter()
        assert check_linear_correspondence(n).ok
        audit = audit_nlc_facets(n)
        assert audit.all_linear_optimal
        assert audit.facets == 0
        _elapsed_under(t0, limit)


def test_criterion_9_determinism(capsys):
    with criterion("9 byte-stable core report", capsys):
        cmd = [sys.executable, "-m", "gyni.cli", "reproduce-all", "--profile", "core"]
        first = subprocess.run(cmd, capture_output=True, check=True).stdout
        second = subprocess.run(cmd, capture_output=True, check=True).stdout
        assert first and first == second


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
