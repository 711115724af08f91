"""Nonlocal computation (NLC) inequalities and their facet audit.

A correlation inequality ``sum_z c(z) <C_z1 ... C_zn> <= 1`` in the
``(n, 2, 2)`` full-correlation space is mapped to the bipartite inequality

    sum_z c(z) sum_{x ^ y = z} <A_x B_y>  <=  k

in the ``(2, 2^n, 2)`` scenario, where Alice gets ``x``, Bob gets ``y`` and
both output one bit.  Bit strings are integers with bit ``i - 1`` holding
``z_i``.  In the probability table Alice is party 1, so the cell of
``(a, b | x, y)`` has input index ``x + 2^n y`` and output index ``a + 2 b``.

Every Werner-Wolf facet ``c(z) = 2^-n sum_r s(r) (-1)^(r.z)`` (one for each
sign function ``s``) is a candidate.  A facet of the bipartite polytope must
come from a full-correlation facet, so auditing these candidates settles
the question for a given ``n``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .exact import affine_rank, format_rational
from .facets import FacetReport, LocalPolytope, facet_check
from .scenario import BellInequality, Scenario

MAX_WW_BITS = 4


class NlcError(ValueError):
    pass


def _dot(u: int, z: int) -> int:
    return bin(u & z).count("1") & 1


@dataclass(frozen=True)
class CorrelationInequality:
    n: int
    coefficients: tuple[Fraction, ...]
    bound: Fraction = Fraction(1)
    #: sign function bits the inequality was generated from (bit r set: s(r) = -1)
    label: int | None = None

    def __post_init__(self):
        if len(self.coefficients) != 2**self.n:
            raise NlcError(f"expected {2**self.n} coefficients")

    @property
    def trivial(self) -> bool:
        """Only one correlator appears."""
        return sum(1 for c in self.coefficients if c) == 1

    def value(self, u: int, delta: int) -> Fraction:
        """Value on the deterministic point ``<C_z> = (-1)^(u.z + delta)``."""
        s = sum((c if _dot(u, z) == 0 else -c for z, c in enumerate(self.coefficients)), Fraction(0))
        return -s if delta else s


@dataclass(frozen=True)
class NlcInstance:
    n: int
    f: tuple[int, ...]
    p: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.f) != 2**self.n or len(self.p) != 2**self.n:
            raise NlcError("f and p need one entry per n-bit string")
        if any(v < 0 for v in self.p) or sum(self.p) != 1:
            raise NlcError("p must be a probability distribution")
        if any(b not in (0, 1) for b in self.f):
            raise NlcError("f must be boolean")

    def c(self, z: int) -> Fraction:
        return -self.p[z] if self.f[z] else self.p[z]


@dataclass(frozen=True)
class LinearStrategy:
    u: int
    delta: int

    def alice(self, x: int) -> int:
        return _dot(self.u, x)

    def bob(self, y: int) -> int:
        return _dot(self.u, y) ^ self.delta


def werner_wolf_inequalities(n: int) -> list[CorrelationInequality]:
    """All ``2^(2^n)`` sign-function inequalities, in order of the sign bits."""
    if not 1 <= n <= MAX_WW_BITS:
        raise NlcError(f"n must lie in 1..{MAX_WW_BITS}")
    size = 2**n
    # H[z, r] = (-1)^(r.z)
    h = np.array([[1 - 2 * _dot(r, z) for r in range(size)] for z in range(size)], dtype=np.int64)
    out = []
    for label in range(2**size):
        s = np.array([-1 if (label >> r) & 1 else 1 for r in range(size)], dtype=np.int64)
        c = h @ s
        out.append(CorrelationInequality(n, tuple(Fraction(int(v), size) for v in c), Fraction(1), label))
    return out


def inverse_transform(ci: CorrelationInequality) -> tuple[Fraction, ...]:
    """``s(r) = sum_z c(z) (-1)^(r.z)``; recovers the sign function."""
    size = 2**ci.n
    return tuple(
        sum((c if _dot(r, z) == 0 else -c for z, c in enumerate(ci.coefficients)), Fraction(0)) for r in range(size)
    )


def correlation_points(n: int) -> set[tuple[int, ...]]:
    """Distinct deterministic full-correlation vectors, from all local sign choices."""
    pts = set()
    for signs in itertools.product(itertools.product((1, -1), repeat=2), repeat=n):
        pts.add(tuple(int(np.prod([signs[i][(z >> i) & 1] for i in range(n)])) for z in range(2**n)))
    return pts


def correlation_bruteforce_max(ci: CorrelationInequality) -> Fraction:
    return max(sum((c * v for c, v in zip(ci.coefficients, p)), Fraction(0)) for p in correlation_points(ci.n))


def correlation_facet_dimension(ci: CorrelationInequality) -> tuple[int, int]:
    """``(D, saturating dimension)`` in the full-correlation polytope."""
    pts = sorted(correlation_points(ci.n))
    D = affine_rank(pts)
    sat = [p for p in pts if sum((c * v for c, v in zip(ci.coefficients, p)), Fraction(0)) == ci.bound]
    return D, (affine_rank(sat) if sat else -1)


def nlc_from_correlation(ci: CorrelationInequality) -> NlcInstance:
    total = sum(abs(c) for c in ci.coefficients)
    if total == 0:
        raise NlcError("all coefficients are zero")
    f = tuple(1 if c < 0 else 0 for c in ci.coefficients)
    p = tuple(abs(c) / total for c in ci.coefficients)
    return NlcInstance(ci.n, f, p)


def correlation_from_nlc(inst: NlcInstance, bound: Fraction | None = None) -> CorrelationInequality:
    coeffs = tuple(inst.c(z) for z in range(2**inst.n))
    if bound is None:
        bound = nlc_classical_bound(inst)[0] / 2**inst.n
    return CorrelationInequality(inst.n, coeffs, bound)


def nlc_scenario(n: int) -> Scenario:
    return Scenario(2, 2**n, 2)


def linear_value(inst: NlcInstance, s: LinearStrategy) -> Fraction:
    """Value of the correlator expression on a linear strategy."""
    size = 2**inst.n
    total = Fraction(0)
    for x in range(size):
        for y in range(size):
            sign = 1 - 2 * (s.alice(x) ^ s.bob(y))
            total += sign * inst.c(x ^ y)
    return total


def nlc_classical_bound(inst: NlcInstance) -> tuple[Fraction, LinearStrategy]:
    """Best linear strategy (first in ``(u, delta)`` order on ties)."""
    best = None
    for u in range(2**inst.n):
        for delta in (0, 1):
            s = LinearStrategy(u, delta)
            v = linear_value(inst, s)
            if best is None or v > best[0]:
                best = (v, s)
    return best


def build_nlc_bell_inequality(inst: NlcInstance, bound: Fraction | None = None) -> BellInequality:
    """Coefficient ``(-1)^(a+b) c(x ^ y)`` on ``P(a, b | x, y)``."""
    if inst.n > 3:
        raise NlcError("bipartite NLC inequalities are built for n <= 3 only")
    sc = nlc_scenario(inst.n)
    size = 2**inst.n
    coeffs = [Fraction(0)] * sc.num_cells
    for x in range(size):
        for y in range(size):
            c = inst.c(x ^ y)
            if not c:
                continue
            for a in (0, 1):
                for b in (0, 1):
                    coeffs[sc.cell(a + 2 * b, x + size * y)] = c if a == b else -c
    if bound is None:
        bound = nlc_classical_bound(inst)[0]
    return BellInequality(sc, tuple(coeffs), bound, "classical")


def nlc_bruteforce_bound(inst: NlcInstance, polytope: LocalPolytope | None = None) -> Fraction:
    """Maximum over every deterministic strategy of the bipartite scenario."""
    ineq = build_nlc_bell_inequality(inst, Fraction(0))
    poly = polytope or LocalPolytope(ineq.scenario)
    values, den = poly.values(ineq)
    return Fraction(int(max(values.tolist())), den)


@dataclass(frozen=True)
class LinearCorrespondenceReport:
    n: int
    identity_holds: bool
    failures: tuple[tuple[int, int, int], ...]
    points_match_linear: bool
    point_count: int

    @property
    def ok(self) -> bool:
        return self.identity_holds and self.points_match_linear


def check_linear_correspondence(n: int) -> LinearCorrespondenceReport:
    """``sum_{x^y=z} <A_x B_y> = 2^n (-1)^(u.z + delta)`` for every linear strategy."""
    if n > 3:
        raise NlcError("exhaustive check limited to n <= 3")
    size = 2**n
    failures = []
    linear_points = set()
    for u in range(size):
        for delta in (0, 1):
            s = LinearStrategy(u, delta)
            for z in range(size):
                lhs = sum(1 - 2 * (s.alice(x) ^ s.bob(x ^ z)) for x in range(size))
                if lhs != size * (1 - 2 * (_dot(u, z) ^ delta)):
                    failures.append((u, delta, z))
            linear_points.add(tuple(1 - 2 * (_dot(u, z) ^ delta) for z in range(size)))
    pts = correlation_points(n)
    return LinearCorrespondenceReport(n, not failures, tuple(failures), pts == linear_points and len(pts) == 2 * size, len(pts))


@dataclass(frozen=True)
class NlcAuditEntry:
    label: int
    coefficients: tuple[Fraction, ...]
    trivial: bool
    correlation_facet: bool | None
    k: Fraction
    bruteforce_k: Fraction
    report: FacetReport = field(repr=False)

    @property
    def linear_is_optimal(self) -> bool:
        return self.k == self.bruteforce_k

    def to_json(self) -> dict:
        return {
            "sign_bits": self.label,
            "c": [format_rational(c) for c in self.coefficients],
            "trivial": self.trivial,
            "correlation_facet": self.correlation_facet,
            "k": format_rational(self.k),
            "k_bruteforce": format_rational(self.bruteforce_k),
            "saturating_count": self.report.saturating_count,
            "saturating_dimension": self.report.saturating_dimension,
            "dimension_gap": self.report.gap,
            "is_facet": self.report.is_facet,
        }


@dataclass(frozen=True)
class NlcAudit:
    n: int
    dimension: int
    entries: tuple[NlcAuditEntry, ...]

    @property
    def facets(self) -> int:
        return sum(e.report.is_facet for e in self.entries)

    @property
    def all_linear_optimal(self) -> bool:
        return all(e.linear_is_optimal for e in self.entries)

    @property
    def all_valid(self) -> bool:
        return all(e.report.is_valid for e in self.entries)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "D": self.dimension,
            "candidates": len(self.entries),
            "facets": self.facets,
            "linear_strategies_optimal": self.all_linear_optimal,
            "candidates_from_correlation_facets_only": True,
            "sum_of_chsh_decomposition": "not checked",
            "entries": [e.to_json() for e in self.entries],
        }


def audit_nlc_facets(n: int, check_correlation_facets: bool = True) -> NlcAudit:
    """Facet test in the bipartite scenario for every Werner-Wolf candidate."""
    if n not in (2, 3):
        raise NlcError("the audit covers n = 2 and n = 3")
    poly = LocalPolytope(nlc_scenario(n))
    entries = []
    for ci in werner_wolf_inequalities(n):
        inst = nlc_from_correlation(ci)
        k, _ = nlc_classical_bound(inst)
        ineq = build_nlc_bell_inequality(inst, k)
        report = facet_check(ineq, polytope=poly)
        corr = None
        if check_correlation_facets:
            D, sat = correlation_facet_dimension(ci)
            corr = sat == D - 1
        entries.append(
            NlcAuditEntry(ci.label, ci.coefficients, ci.trivial, corr, k, report.max_value, report)
        )
    return NlcAudit(n, poly.dimension, tuple(entries))
