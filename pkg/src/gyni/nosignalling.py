"""No-signalling polytope: constraint system, exact LP bounds, boxes and orbits.

Two LP routes compute the same optimum:

* ``full``: the simplex runs on the complete probability table.  It is
  warm-started from the vertex where every player always outputs 1, which
  is a feasible basis for any objective, so phase 1 is never needed.
* ``symmetric``: the table is collapsed onto orbits of the symmetry group of
  the game (cyclic shifts of the players and simultaneous flips of ``x_j``
  and ``a_{j-1}`` that leave ``q`` unchanged).  The orbit optimum is lifted
  back to a full table, the orbit dual is averaged over the group into a
  full dual vector, and both are checked exactly against the full system.

So every reported value carries a certificate on the unreduced formulation.
"""
from __future__ import annotations

import itertools
import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .exact import ExactMathError, ExactMatrix, sparse_rref
from .game import (
    GyniInstance,
    binary_scenario,
    build_inequality,
    classical_bound,
    complement,
    instance,
    winning_cells,
    winning_output,
)
from .lp import LinearProgram, LPResult, check_certificate, lp_maximize
from .scenario import (
    Behavior,
    EnumerationCapError,
    Scenario,
    ScenarioError,
    behavior_from_strategy,
    convex_combination,
    enumerate_deterministic,
    evaluate,
    is_no_signalling,
    relabeling_group,
)

log = logging.getLogger(__name__)

NS_CELL_CAP = 2**16


class NotNoSignalling(ValueError):
    pass


# -- constraint system -----------------------------------------------------

@dataclass(frozen=True)
class NsPolytope:
    scenario: Scenario
    matrix: ExactMatrix
    rhs: tuple[Fraction, ...]

    @property
    def num_vars(self) -> int:
        return self.matrix.cols

    def variable(self, k: int) -> str:
        return self.scenario.cell_key(k)

    @cached_property
    def rank(self) -> int:
        pivots, _ = sparse_rref(self.matrix.sparse_rows(), self.rhs, ncols=self.num_vars)
        return len(pivots)

    @property
    def dimension(self) -> int:
        """Affine dimension of the solution space of the equalities."""
        return self.num_vars - self.rank

    def satisfied_by(self, table) -> bool:
        return list(self.matrix.matvec(list(table))) == list(self.rhs)


def build_ns_polytope(scenario: Scenario, cap: int = NS_CELL_CAP) -> NsPolytope:
    """Normalization per input, then single-party removal identities, party by party.

    For party ``i``, every input ``s != 0`` and every context (other inputs,
    other outputs) the row states that the marginal of the other parties is
    the same under ``x_i = 0`` and ``x_i = s``.
    """
    if scenario.num_cells > cap:
        raise EnumerationCapError(scenario.num_cells, cap)
    n, m, d = scenario.parties, scenario.inputs, scenario.outputs
    nx, na = scenario.num_inputs, scenario.num_outputs
    rows: list[dict[int, int]] = []
    rhs: list[Fraction] = []
    for x in range(nx):
        rows.append({x * na + a: 1 for a in range(na)})
        rhs.append(Fraction(1))
    for i in range(n):
        xi, ai = m**i, d**i
        for x in range(nx):
            if (x // xi) % m:
                continue
            for a in range(na):
                if (a // ai) % d:
                    continue
                for s in range(1, m):
                    row = {}
                    for t in range(d):
                        row[x * na + a + t * ai] = 1
                        row[(x + s * xi) * na + a + t * ai] = -1
                    rows.append(row)
                    rhs.append(Fraction(0))
    return NsPolytope(scenario, ExactMatrix(len(rows), scenario.num_cells, rows), tuple(rhs))


def warm_start_order(n: int) -> list[int]:
    """Variable priority making ``a = 1...1`` on every input the initial vertex.

    Cells where some party has ``a_i = x_i = 1`` come first, then the cell
    ``(1...1|0...0)``; the remaining "coordinate" cells stay nonbasic at 0.
    """
    size = 2**n
    coord, other = [], []
    for x in range(size):
        for a in range(size):
            (other if a & x else coord).append(x * size + a)
    allone = size - 1
    coord.remove(allone)
    return other + [allone] + coord


def ns_linear_program(g: GyniInstance, polytope: NsPolytope | None = None) -> LinearProgram:
    poly = polytope or build_ns_polytope(g.scenario)
    return LinearProgram(build_inequality(g).coefficients, poly.matrix, poly.rhs)


# -- symmetry reduction ----------------------------------------------------

def _rotate_bits(v: np.ndarray | int, r: int, n: int):
    full = (1 << n) - 1
    return ((v << r) | (v >> (n - r))) & full if r else v


def symmetry_group(g: GyniInstance) -> list[tuple[int, int]]:
    """Elements ``(r, F)`` of the game's symmetry group fixing the prior.

    ``(r, F)`` first flips input bits ``F`` together with output bits
    ``a_{j-1}`` for each flipped ``x_j``, then moves player ``i`` to ``i + r``.
    Both steps map winning cells to winning cells.
    """
    n = g.parties
    q = g.prior.weights
    xs = np.arange(2**n)
    qa = np.array(q, dtype=object)
    out = []
    for r in range(n):
        for flips in range(2**n):
            image = _rotate_bits(xs ^ flips, r, n)
            if all(qa[image] == qa):
                out.append((r, flips))
    return out


def cell_permutations(n: int, group: list[tuple[int, int]]) -> np.ndarray:
    """Row ``t`` gives the image of every cell under ``group[t]``."""
    size = 2**n
    cells = np.arange(size * size)
    x, a = cells // size, cells % size
    perms = np.empty((len(group), size * size), dtype=np.int64)
    for t, (r, flips) in enumerate(group):
        aflip = winning_output(flips, n)
        x2 = _rotate_bits(x ^ flips, r, n)
        a2 = _rotate_bits(a ^ aflip, r, n)
        perms[t] = x2 * size + a2
    return perms


@dataclass(frozen=True)
class OrbitReduction:
    orbit_of: np.ndarray  # cell -> orbit id
    rows: tuple[dict[int, Fraction], ...]
    rhs: tuple[Fraction, ...]
    representative_row: tuple[int, ...]  # full row each reduced row came from
    objective: tuple[Fraction, ...]

    @property
    def num_orbits(self) -> int:
        return len(self.objective)


def reduce_by_orbits(lp: LinearProgram, perms: np.ndarray) -> OrbitReduction:
    """Substitute ``p_k = z_orbit(k)`` and drop duplicate or empty rows."""
    reps = perms.min(axis=0)
    ids: dict[int, int] = {}
    orbit_of = np.empty(len(reps), dtype=np.int64)
    for k, r in enumerate(reps.tolist()):
        orbit_of[k] = ids.setdefault(r, len(ids))
    norb = len(ids)
    seen = set()
    rows, rhs, rep = [], [], []
    orb = orbit_of.tolist()
    for i, (row, b) in enumerate(zip(lp.a_eq.sparse_rows(), lp.b_eq)):
        red: dict[int, Fraction] = {}
        for k, v in row.items():
            o = orb[k]
            red[o] = red.get(o, 0) + v
        red = {o: v for o, v in red.items() if v}
        if not red:
            if b:
                raise ExactMathError("orbit reduction produced an inconsistent row")
            continue
        key = (tuple(sorted(red.items())), b)
        if key in seen:
            continue
        seen.add(key)
        rows.append(red)
        rhs.append(b)
        rep.append(i)
    obj = [Fraction(0)] * norb
    for k, c in enumerate(lp.objective):
        if c:
            obj[orb[k]] += c
    return OrbitReduction(orbit_of, tuple(rows), tuple(rhs), tuple(rep), tuple(obj))


def symmetrize_dual(lp: LinearProgram, perms: np.ndarray, partial: dict[int, Fraction]) -> list[Fraction]:
    """Group average of a dual vector given on a few full rows.

    Each group element maps a constraint row onto plus or minus another row
    of the system, which defines the (signed) action on dual vectors.
    """
    index = {}
    for i, row in enumerate(lp.a_eq.sparse_rows()):
        index[frozenset(row.items())] = i
    y = [Fraction(0)] * lp.a_eq.rows
    order = len(perms)
    rows = lp.a_eq.sparse_rows()
    for t in range(order):
        p = perms[t]
        for i, val in partial.items():
            if not val:
                continue
            image = {int(p[k]): v for k, v in rows[i].items()}
            j = index.get(frozenset(image.items()))
            sign = 1
            if j is None:
                j = index.get(frozenset((k, -v) for k, v in image.items()))
                sign = -1
            if j is None:
                raise ExactMathError("group element does not permute the constraint rows")
            if sign < 0 and lp.b_eq[i] != -lp.b_eq[j] or sign > 0 and lp.b_eq[i] != lp.b_eq[j]:
                raise ExactMathError("group element does not preserve the right-hand side")
            y[j] += sign * val
    return [v / order for v in y]


# -- bounds -------------------------------------------------------------------

@dataclass(frozen=True)
class NsBound:
    value: Fraction
    witness: Behavior
    method: str
    certificate_problems: tuple[str, ...]
    stats: dict = field(default_factory=dict, compare=False)

    @property
    def certified(self) -> bool:
        return not self.certificate_problems

    def __iter__(self):
        yield self.value
        yield self.witness


def _solve_full(g: GyniInstance, lp: LinearProgram) -> tuple[LPResult, dict]:
    res = lp_maximize(lp, basis_hint=warm_start_order(g.parties))
    return res, {"pivots": res.pivots, "phase1_pivots": res.stats["phase1_pivots"]}


def _solve_symmetric(g: GyniInstance, lp: LinearProgram) -> tuple[LPResult, dict]:
    group = symmetry_group(g)
    perms = cell_permutations(g.parties, group)
    red = reduce_by_orbits(lp, perms)
    rlp = LinearProgram(red.objective, ExactMatrix(len(red.rows), red.num_orbits, red.rows), red.rhs)
    rres = lp_maximize(rlp)
    orb = red.orbit_of.tolist()
    x = tuple(rres.x[o] for o in orb)
    y = symmetrize_dual(lp, perms, dict(zip(red.representative_row, rres.y)))
    res = LPResult(rres.value, x, tuple(y), (Fraction(0),) * lp.num_vars, rres.pivots)
    stats = {"group_order": len(group), "orbits": red.num_orbits, "reduced_rows": len(red.rows), "pivots": rres.pivots}
    return res, stats


def ns_bound(g: GyniInstance, method: str = "auto") -> NsBound:
    """Exact maximum of the game value over the no-signalling polytope.

    ``method`` is ``full``, ``symmetric`` or ``auto`` (full up to four
    players, symmetric beyond).  Either way the returned optimum is checked
    against a dual certificate on the full constraint system.
    """
    if method == "auto":
        method = "full" if g.parties <= 4 else "symmetric"
    if method not in ("full", "symmetric"):
        raise ValueError(f"unknown method {method!r}")
    lp = ns_linear_program(g)
    solve = _solve_full if method == "full" else _solve_symmetric
    res, stats = solve(g, lp)
    problems = tuple(check_certificate(lp, res))
    witness = Behavior(g.scenario, res.x)
    return NsBound(res.value, witness, method, problems, stats)


# -- factor-two bound ------------------------------------------------------

def balanced_dominated(g: GyniInstance) -> bool:
    """True iff some ``y`` has ``q(y) = q(~y) >= q(x)`` for every ``x``."""
    q, n = g.prior.weights, g.parties
    top = max(q)
    return any(q[y] == top and q[complement(y, n)] == top for y in range(2**n))


@dataclass(frozen=True)
class FactorTwoReport:
    omega_c: Fraction
    omega_ns: Fraction
    within_twice_classical: bool
    balanced_dominated: bool
    equal_when_balanced: bool | None
    certified: bool

    @property
    def ok(self) -> bool:
        return self.within_twice_classical and self.certified and self.equal_when_balanced is not False


def check_factor_two(g: GyniInstance, method: str = "auto") -> FactorTwoReport:
    wc = classical_bound(g)
    nb = ns_bound(g, method)
    bal = balanced_dominated(g)
    return FactorTwoReport(
        wc,
        nb.value,
        wc <= nb.value <= 2 * wc,
        bal,
        (nb.value == wc) if bal else None,
        nb.certified,
    )


def sum_over_inputs_bound(b: Behavior, n: int | None = None) -> Fraction:
    """``sum_x P(a_i = x_{i+1} for all i | x)``; at most 2 for no-signalling boxes."""
    n = b.scenario.parties if n is None else n
    if b.scenario != binary_scenario(n):
        raise ScenarioError("behaviour must live in the binary scenario with N players")
    if not is_no_signalling(b, max_violations=1):
        raise NotNoSignalling("the bound only holds for no-signalling behaviours")
    return sum((b.table[c] for c in winning_cells(n)), Fraction(0))


# -- the boxes P1 and P2 -------------------------------------------------

def _box(formula) -> Behavior:
    sc = binary_scenario(3)
    table = [Fraction(0)] * 64
    for x, y, z, a, b, c in itertools.product((0, 1), repeat=6):
        table[sc.cell(a | b << 1 | c << 2, x | y << 1 | z << 2)] = formula(a, b, c, x, y, z)
    return Behavior(sc, tuple(table))


def box_p1() -> Behavior:
    def f(a, b, c, x, y, z):
        v = ((1 ^ b ^ x ^ y ^ (x & y)) & (1 ^ c ^ z)) ^ (a & (1 ^ y ^ (c & y) ^ (b & (c ^ z))))
        return Fraction(v, 3)

    return _box(f)


def box_p2() -> Behavior:
    def f(a, b, c, x, y, z):
        g = a & b & c & (1 ^ x) & (1 ^ y) & (1 ^ z)
        gp = ((1 ^ a) & (1 ^ b) & (1 ^ c)) ^ (x & b & c) ^ (a & y & c) ^ (a & b & z) ^ (x & y & z)
        return Fraction(2 * g, 3) + Fraction(gp, 3)

    return _box(f)


@dataclass(frozen=True)
class ExtremalityReport:
    behavior: Behavior = field(repr=False)
    is_vertex: bool
    tight_constraints: int
    solution_dimension: int


def extremality_check(b: Behavior, polytope: NsPolytope | None = None) -> ExtremalityReport:
    """Vertex test: the equalities plus ``p_k = 0`` on the zero entries pin ``b`` down."""
    if not is_no_signalling(b, max_violations=1):
        raise NotNoSignalling("extremality is only defined inside the no-signalling polytope")
    poly = polytope or build_ns_polytope(b.scenario)
    support = [k for k, v in enumerate(b.table) if v]
    keep = set(support)
    rows = [{k: v for k, v in r.items() if k in keep} for r in poly.matrix.sparse_rows()]
    pivots, _ = sparse_rref(rows, priority=support)
    dim = len(support) - len(pivots)
    return ExtremalityReport(b, dim == 0, b.scenario.num_cells - len(support), dim)


@dataclass(frozen=True)
class OrbitReport:
    p1_maximal: int
    p2_maximal: int
    union: int
    p1_orbit: int
    p2_orbit: int
    disjoint: bool

    @property
    def ok(self) -> bool:
        return self.disjoint and self.union == self.p1_maximal + self.p2_maximal


def _orbit(b: Behavior, maps: list[np.ndarray]) -> set[tuple]:
    out = set()
    for cmap in maps:
        new = [None] * len(b.table)
        for old, nc in enumerate(cmap.tolist()):
            new[nc] = b.table[old]
        out.add(tuple(new))
    return out


def orbit_max_violators(p1: Behavior | None = None, p2: Behavior | None = None) -> OrbitReport:
    """Distinct relabelings of P1 and P2 reaching the no-signalling optimum 1/3."""
    sc = binary_scenario(3)
    p1 = p1 or box_p1()
    p2 = p2 or box_p2()
    coeffs = build_inequality(instance(3)).coefficients
    target = Fraction(1, 3)
    maps = [r.cell_map(sc) for r in relabeling_group(sc)]

    def maximal(orbit):
        return {t for t in orbit if sum(c * v for c, v in zip(coeffs, t) if c) == target}

    o1, o2 = _orbit(p1, maps), _orbit(p2, maps)
    m1, m2 = maximal(o1), maximal(o2)
    return OrbitReport(len(m1), len(m2), len(m1 | m2), len(o1), len(o2), not (o1 & o2))


# -- odd to even extension -------------------------------------------------

def extend_with_copier(b: Behavior) -> Behavior:
    """Add a player who outputs its own input bit."""
    sc = b.scenario
    n = sc.parties
    new = binary_scenario(n + 1)
    table = [Fraction(0)] * new.num_cells
    for cell, v in enumerate(b.table):
        if v:
            a, x = sc.split_cell(cell)
            for s in (0, 1):
                table[new.cell(a | s << n, x | s << n)] = v
    return Behavior(new, tuple(table))


@dataclass(frozen=True)
class OddEvenReport:
    odd_n: int
    omega_ns: tuple[Fraction, Fraction]
    omega_c: tuple[Fraction, Fraction]
    ratios: tuple[Fraction, Fraction]
    extension_value: Fraction
    extension_no_signalling: bool
    certified: bool

    @property
    def ratios_equal(self) -> bool:
        return self.ratios[0] == self.ratios[1]

    @property
    def extension_attains_optimum(self) -> bool:
        return self.extension_no_signalling and self.extension_value == self.omega_ns[1]

    @property
    def ok(self) -> bool:
        return self.ratios_equal and self.extension_attains_optimum and self.certified


def check_odd_even(odd_n: int, method: str = "auto") -> OddEvenReport:
    if odd_n % 2 == 0 or odd_n < 3:
        raise ValueError("odd_n must be an odd number >= 3")
    small, big = instance(odd_n), instance(odd_n + 1)
    nb_small = ns_bound(small, method)
    ext = extend_with_copier(nb_small.witness)
    ext_value = evaluate(build_inequality(big), ext)
    ext_ns = bool(is_no_signalling(ext, max_violations=1))
    # The extension is only a lower bound; the LP for N+1 runs afterwards.
    nb_big = ns_bound(big, method)
    wc = (classical_bound(small), classical_bound(big))
    ns = (nb_small.value, nb_big.value)
    return OddEvenReport(
        odd_n, ns, wc, (ns[0] / wc[0], ns[1] / wc[1]), ext_value, ext_ns, nb_small.certified and nb_big.certified
    )


# -- random no-signalling behaviours ------------------------------------------

def _component_pool(rng: random.Random) -> list[Behavior]:
    sc = binary_scenario(3)
    pool = [behavior_from_strategy(s) for s in enumerate_deterministic(sc)]
    group = list(relabeling_group(sc))
    for box in (box_p1(), box_p2()):
        for r in rng.sample(group, 32):
            new = [None] * 64
            for old, nc in enumerate(r.cell_map(sc).tolist()):
                new[nc] = box.table[old]
            pool.append(Behavior(sc, tuple(new)))
    return pool


def random_ns_behaviors(count: int, seed: int = 0, components: int = 3) -> list[Behavior]:
    """Seeded convex mixtures of deterministic boxes and relabeled P1/P2 boxes (N = 3)."""
    rng = random.Random(seed)
    pool = _component_pool(rng)
    out = []
    for _ in range(count):
        picks = [rng.choice(pool) for _ in range(components)]
        raw = [rng.randint(1, 100) for _ in picks]
        total = sum(raw)
        out.append(convex_combination(picks, [Fraction(w, total) for w in raw]))
    return out
