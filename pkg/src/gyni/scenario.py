"""Scenarios, behaviours, priors, deterministic strategies and relabelings.

Indexing convention (used everywhere in the package): an input string
``x = (x_1, ..., x_N)`` is stored as the integer ``sum_i x_i * m**(i-1)``,
i.e. party 1 is the least significant digit.  Output strings use the same
rule with base ``d``.  A behaviour table is flat, with cell
``x * d**N + a`` holding ``P(a|x)``.  Printed strings put party 1 leftmost,
so the internal index of ``"011"`` is ``0 + 1*2 + 1*4 = 6``.
"""
from __future__ import annotations

import itertools
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

import numpy as np

from .exact import format_rational, to_rational

StringLike = Union[int, str, Sequence[int]]

INDEXING_NOTE = (
    "digit strings are printed with party 1 leftmost; internal indices are "
    "little-endian (party 1 is the least significant digit)"
)


class ScenarioError(ValueError):
    pass


class EnumerationCapError(ScenarioError):
    def __init__(self, required: int, cap: int):
        super().__init__(f"enumeration needs a per-party cap of at least {required} (current cap {cap})")
        self.required = required
        self.cap = cap


@dataclass(frozen=True)
class Scenario:
    parties: int
    inputs: int
    outputs: int

    def __post_init__(self):
        if self.parties < 1 or self.inputs < 2 or self.outputs < 2:
            raise ScenarioError(f"invalid scenario {self}: need N>=1, m>=2, d>=2")

    @property
    def num_inputs(self) -> int:
        return self.inputs**self.parties

    @property
    def num_outputs(self) -> int:
        return self.outputs**self.parties

    @property
    def num_cells(self) -> int:
        return self.num_inputs * self.num_outputs

    def cell(self, a: int, x: int) -> int:
        return x * self.num_outputs + a

    def split_cell(self, cell: int) -> tuple[int, int]:
        x, a = divmod(cell, self.num_outputs)
        return a, x

    def input_digits(self, x: int) -> tuple[int, ...]:
        return _digits(x, self.inputs, self.parties)

    def output_digits(self, a: int) -> tuple[int, ...]:
        return _digits(a, self.outputs, self.parties)

    def input_index(self, x: StringLike) -> int:
        return _index(x, self.inputs, self.parties)

    def output_index(self, a: StringLike) -> int:
        return _index(a, self.outputs, self.parties)

    def format_input(self, x: int) -> str:
        return "".join(str(v) for v in self.input_digits(x))

    def format_output(self, a: int) -> str:
        return "".join(str(v) for v in self.output_digits(a))

    def cell_key(self, cell: int) -> str:
        a, x = self.split_cell(cell)
        return f"{self.format_output(a)}|{self.format_input(x)}"

    def parse_cell_key(self, key: str) -> int:
        a, _, x = key.partition("|")
        return self.cell(self.output_index(a), self.input_index(x))

    def to_json(self) -> dict:
        return {"parties": self.parties, "inputs": self.inputs, "outputs": self.outputs}


def _digits(value: int, base: int, n: int) -> tuple[int, ...]:
    out = []
    for _ in range(n):
        value, r = divmod(value, base)
        out.append(r)
    return tuple(out)


def _index(s: StringLike, base: int, n: int) -> int:
    if isinstance(s, (int, np.integer)):
        if not 0 <= s < base**n:
            raise ScenarioError(f"index {s} out of range")
        return int(s)
    if isinstance(s, str):
        digits = [int(ch) for ch in s]
    else:
        digits = list(s)
    if len(digits) != n or any(not 0 <= v < base for v in digits):
        raise ScenarioError(f"bad digit string {s!r} for {n} parties, base {base}")
    return sum(v * base**i for i, v in enumerate(digits))


def _tensor(scenario: Scenario, values) -> np.ndarray:
    """View a flat table as an array with axes ``(x_1..x_N, a_1..a_N)``."""
    n = scenario.parties
    arr = np.asarray(values, dtype=object).reshape((scenario.inputs,) * n + (scenario.outputs,) * n)
    return arr.transpose(list(range(n - 1, -1, -1)) + list(range(2 * n - 1, n - 1, -1)))


def _flatten(scenario: Scenario, tensor: np.ndarray) -> tuple:
    n = scenario.parties
    arr = tensor.transpose(list(range(n - 1, -1, -1)) + list(range(2 * n - 1, n - 1, -1)))
    return tuple(arr.reshape(-1))


@dataclass(frozen=True)
class PriorDistribution:
    scenario: Scenario
    weights: tuple[Fraction, ...]

    def __post_init__(self):
        w = tuple(to_rational(v) for v in self.weights)
        object.__setattr__(self, "weights", w)
        if len(w) != self.scenario.num_inputs:
            raise ScenarioError(f"{len(w)} weights for {self.scenario.num_inputs} input strings")
        if any(v < 0 for v in w):
            raise ScenarioError("prior weights must be non-negative")
        if sum(w) != 1:
            raise ScenarioError(f"prior weights sum to {sum(w)}, not 1")

    def weight(self, x: StringLike) -> Fraction:
        return self.weights[self.scenario.input_index(x)]

    def support(self) -> list[int]:
        return [x for x, w in enumerate(self.weights) if w]

    def to_json(self) -> dict:
        sc = self.scenario
        return {
            "scenario": sc.to_json(),
            "indexing": INDEXING_NOTE,
            "weights": {sc.format_input(x): format_rational(w) for x, w in enumerate(self.weights)},
        }


@dataclass(frozen=True)
class Behavior:
    """A conditional probability table ``P(a|x)``."""

    scenario: Scenario
    table: tuple[Fraction, ...]

    def __post_init__(self):
        t = tuple(to_rational(v) for v in self.table)
        object.__setattr__(self, "table", t)
        sc = self.scenario
        if len(t) != sc.num_cells:
            raise ScenarioError(f"table has {len(t)} entries, scenario needs {sc.num_cells}")
        if any(v < 0 for v in t):
            raise ScenarioError("behaviour has a negative entry")
        d = sc.num_outputs
        for x in range(sc.num_inputs):
            s = sum(t[x * d : (x + 1) * d])
            if s != 1:
                raise ScenarioError(f"P(.|{sc.format_input(x)}) sums to {s}")

    def prob(self, a: StringLike, x: StringLike) -> Fraction:
        sc = self.scenario
        return self.table[sc.cell(sc.output_index(a), sc.input_index(x))]

    def mix(self, other: "Behavior", lam) -> "Behavior":
        """``lam * self + (1 - lam) * other``."""
        lam = to_rational(lam)
        if other.scenario != self.scenario:
            raise ScenarioError("cannot mix behaviours from different scenarios")
        return Behavior(self.scenario, tuple(lam * p + (1 - lam) * q for p, q in zip(self.table, other.table)))

    def to_json(self) -> dict:
        sc = self.scenario
        return {
            "scenario": sc.to_json(),
            "indexing": INDEXING_NOTE,
            "table": {sc.cell_key(c): format_rational(v) for c, v in enumerate(self.table)},
        }


def uniform_behavior(scenario: Scenario) -> Behavior:
    p = Fraction(1, scenario.num_outputs)
    return Behavior(scenario, (p,) * scenario.num_cells)


def convex_combination(behaviors: Sequence[Behavior], weights: Sequence) -> Behavior:
    weights = [to_rational(w) for w in weights]
    if len(weights) != len(behaviors) or sum(weights) != 1 or any(w < 0 for w in weights):
        raise ScenarioError("convex weights must be non-negative and sum to 1")
    sc = behaviors[0].scenario
    table = [Fraction(0)] * sc.num_cells
    for b, w in zip(behaviors, weights):
        if b.scenario != sc:
            raise ScenarioError("scenario mismatch in convex combination")
        if w:
            for c, v in enumerate(b.table):
                if v:
                    table[c] += w * v
    return Behavior(sc, tuple(table))


@dataclass(frozen=True)
class DeterministicStrategy:
    scenario: Scenario
    #: ``functions[i][s]`` is party i's output on input s.
    functions: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        sc = self.scenario
        fs = tuple(tuple(int(v) for v in f) for f in self.functions)
        object.__setattr__(self, "functions", fs)
        if len(fs) != sc.parties or any(len(f) != sc.inputs for f in fs):
            raise ScenarioError("one total output function per party is required")
        if any(not 0 <= v < sc.outputs for f in fs for v in f):
            raise ScenarioError("strategy output out of range")

    def output_for(self, x: StringLike) -> int:
        sc = self.scenario
        digits = sc.input_digits(sc.input_index(x))
        return sum(f[s] * sc.outputs**i for i, (f, s) in enumerate(zip(self.functions, digits)))


def behavior_from_strategy(s: DeterministicStrategy) -> Behavior:
    sc = s.scenario
    table = [Fraction(0)] * sc.num_cells
    for x in range(sc.num_inputs):
        table[sc.cell(s.output_for(x), x)] = Fraction(1)
    return Behavior(sc, tuple(table))


DEFAULT_ENUMERATION_CAP = 256


def local_functions(scenario: Scenario, cap: int) -> list[tuple[int, ...]]:
    count = scenario.outputs**scenario.inputs
    if count > cap:
        raise EnumerationCapError(count, cap)
    return list(itertools.product(range(scenario.outputs), repeat=scenario.inputs))


def enumerate_deterministic(scenario: Scenario, cap: int = DEFAULT_ENUMERATION_CAP) -> list[DeterministicStrategy]:
    """All ``(d^m)^N`` deterministic strategies, party 1's function varying slowest."""
    local = local_functions(scenario, cap)
    return [DeterministicStrategy(scenario, fs) for fs in itertools.product(local, repeat=scenario.parties)]


def deterministic_vertex_matrix(scenario: Scenario, cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """0/1 matrix whose rows are the behaviour tables of :func:`enumerate_deterministic`."""
    local = np.array(local_functions(scenario, cap))  # (F, m)
    n, m, d = scenario.parties, scenario.inputs, scenario.outputs
    ind = (local[:, :, None] == np.arange(d)[None, None, :]).astype(np.uint8)  # (F, m, d)
    # Outer product over parties: axes (f_1..f_N, x_1..x_N, a_1..a_N).
    letters = "abcdefghijklmnopqrstuvwxyz"
    f_ax, x_ax, a_ax = letters[:n], letters[n : 2 * n], letters[2 * n : 3 * n]
    spec = ",".join(f"{f_ax[i]}{x_ax[i]}{a_ax[i]}" for i in range(n)) + "->" + f_ax + x_ax + a_ax
    tensor = np.einsum(spec, *([ind] * n))
    order = list(range(n)) + [n + i for i in range(n - 1, -1, -1)] + [2 * n + i for i in range(n - 1, -1, -1)]
    return np.ascontiguousarray(tensor.transpose(order)).reshape(len(local) ** n, m**n * d**n)


def deterministic_output_matrix(scenario: Scenario, cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """``out[s, x]`` = output index produced by strategy ``s`` on input ``x``."""
    local = np.array(local_functions(scenario, cap))
    n, d = scenario.parties, scenario.outputs
    xs = np.array([scenario.input_digits(x) for x in range(scenario.num_inputs)])  # (X, N)
    out = np.zeros((1, scenario.num_inputs), dtype=np.int64)
    for i in range(n):
        part = local[:, xs[:, i]] * d**i  # (F, X)
        out = (out[:, None, :] + part[None, :, :]).reshape(-1, scenario.num_inputs)
    return out


@dataclass(frozen=True)
class BellInequality:
    """``sum coeff(a,x) P(a|x) <= bound``, with a dense coefficient table."""

    scenario: Scenario
    coefficients: tuple[Fraction, ...]
    bound: Fraction
    bound_kind: str = "classical"

    def __post_init__(self):
        c = tuple(to_rational(v) for v in self.coefficients)
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "bound", to_rational(self.bound))
        if len(c) != self.scenario.num_cells:
            raise ScenarioError(f"{len(c)} coefficients for {self.scenario.num_cells} cells")
        if self.bound_kind not in ("classical", "no-signalling"):
            raise ScenarioError(f"unknown bound kind {self.bound_kind!r}")

    def nonzero(self) -> dict[int, Fraction]:
        return {c: v for c, v in enumerate(self.coefficients) if v}

    def to_json(self) -> dict:
        sc = self.scenario
        return {
            "scenario": sc.to_json(),
            "indexing": INDEXING_NOTE,
            "coefficients": {sc.cell_key(c): format_rational(v) for c, v in self.nonzero().items()},
            "bound": format_rational(self.bound),
            "bound_kind": self.bound_kind,
        }


def evaluate(ineq: BellInequality, b: Behavior) -> Fraction:
    if ineq.scenario != b.scenario:
        raise ScenarioError("inequality and behaviour live in different scenarios")
    return sum((c * b.table[k] for k, c in enumerate(ineq.coefficients) if c), Fraction(0))


@dataclass(frozen=True)
class Violation:
    parties: tuple[int, ...]  # 1-based
    outputs: str
    inputs: tuple[str, str]
    values: tuple[Fraction, Fraction]


@dataclass(frozen=True)
class NoSignallingVerdict:
    ok: bool
    violations: tuple[Violation, ...] = field(default=())

    def __bool__(self) -> bool:
        return self.ok


def is_no_signalling(b: Behavior, max_violations: int | None = None) -> NoSignallingVerdict:
    """Check every proper subset marginal for independence of the other inputs."""
    sc = b.scenario
    n = sc.parties
    t = _tensor(sc, b.table)
    violations: list[Violation] = []
    for size in range(1, n):
        for subset in itertools.combinations(range(n), size):
            drop = tuple(n + i for i in range(n) if i not in subset)
            marg = t.sum(axis=drop) if drop else t  # axes: x_1..x_N, a_subset
            for j in range(n):
                if j in subset:
                    continue
                ref = np.take(marg, [0], axis=j)
                diff = marg != ref
                if not diff.any():
                    continue
                for idx in zip(*np.nonzero(diff)):
                    xs = list(idx[:n])
                    x0 = list(xs)
                    x0[j] = 0
                    violations.append(
                        Violation(
                            tuple(i + 1 for i in subset),
                            "".join(str(v) for v in idx[n:]),
                            ("".join(map(str, x0)), "".join(map(str, xs))),
                            (marg[tuple(x0) + tuple(idx[n:])], marg[idx]),
                        )
                    )
                    if max_violations is not None and len(violations) >= max_violations:
                        return NoSignallingVerdict(False, tuple(violations))
    return NoSignallingVerdict(not violations, tuple(violations))


@dataclass(frozen=True)
class Relabeling:
    """Relabel parties, inputs and outputs.

    Old party ``i`` becomes party ``party_perm[i]``; its input ``s`` becomes
    ``input_perms[i][s]`` and, given input ``s``, its output ``a`` becomes
    ``output_perms[i][s][a]``.  The image behaviour satisfies
    ``P'(a'|x') = P(a|x)``.
    """

    party_perm: tuple[int, ...]
    input_perms: tuple[tuple[int, ...], ...]
    output_perms: tuple[tuple[tuple[int, ...], ...], ...]

    def __post_init__(self):
        n = len(self.party_perm)
        if sorted(self.party_perm) != list(range(n)):
            raise ScenarioError("party permutation is not a bijection")
        if len(self.input_perms) != n or len(self.output_perms) != n:
            raise ScenarioError("one input/output permutation per party required")
        for p in self.input_perms:
            if sorted(p) != list(range(len(p))):
                raise ScenarioError("input permutation is not a bijection")
        for per_party in self.output_perms:
            for p in per_party:
                if sorted(p) != list(range(len(p))):
                    raise ScenarioError("output permutation is not a bijection")

    @classmethod
    def identity(cls, scenario: Scenario) -> "Relabeling":
        n, m, d = scenario.parties, scenario.inputs, scenario.outputs
        return cls(tuple(range(n)), (tuple(range(m)),) * n, ((tuple(range(d)),) * m,) * n)

    def inverse(self) -> "Relabeling":
        n = len(self.party_perm)
        inv_party = [0] * n
        for i, j in enumerate(self.party_perm):
            inv_party[j] = i
        inputs, outputs = [None] * n, [None] * n
        for i, j in enumerate(self.party_perm):
            sigma = self.input_perms[i]
            sigma_inv = _invert(sigma)
            inputs[j] = sigma_inv
            outputs[j] = tuple(_invert(self.output_perms[i][sigma_inv[s]]) for s in range(len(sigma)))
        return Relabeling(tuple(inv_party), tuple(inputs), tuple(outputs))

    def cell_map(self, scenario: Scenario) -> np.ndarray:
        """``new_cell[old_cell]`` as an integer array."""
        n, m, d = scenario.parties, scenario.inputs, scenario.outputs
        if len(self.party_perm) != n:
            raise ScenarioError("relabeling does not match the scenario")
        xs = np.array(list(itertools.product(range(m), repeat=n)))[:, ::-1]  # rows: x index order
        as_ = np.array(list(itertools.product(range(d), repeat=n)))[:, ::-1]
        nx, na = len(xs), len(as_)
        new_x = np.zeros(nx, dtype=np.int64)
        new_a = np.zeros((nx, na), dtype=np.int64)
        for i in range(n):
            j = self.party_perm[i]
            sig = np.array(self.input_perms[i])
            tau = np.array(self.output_perms[i])  # (m, d)
            new_x += sig[xs[:, i]] * m**j
            new_a += tau[xs[:, i][:, None], as_[:, i][None, :]] * d**j
        return (new_x[:, None] * na + new_a).reshape(-1)


def _invert(p: Sequence[int]) -> tuple[int, ...]:
    out = [0] * len(p)
    for i, v in enumerate(p):
        out[v] = i
    return tuple(out)


def permute_table(r: Relabeling, scenario: Scenario, values: Sequence) -> tuple:
    new = [None] * scenario.num_cells
    for old, nc in enumerate(r.cell_map(scenario)):
        new[nc] = values[old]
    return tuple(new)


def apply_relabeling(r: Relabeling, b: Behavior) -> Behavior:
    return Behavior(b.scenario, permute_table(r, b.scenario, b.table))


def relabel_inequality(r: Relabeling, ineq: BellInequality) -> BellInequality:
    return BellInequality(ineq.scenario, permute_table(r, ineq.scenario, ineq.coefficients), ineq.bound, ineq.bound_kind)


def relabeling_group(scenario: Scenario) -> Iterator[Relabeling]:
    """Lazily enumerate every relabeling (``N! * (m!)^N * (d!)^(mN)`` elements)."""
    n, m, d = scenario.parties, scenario.inputs, scenario.outputs
    in_perms = list(itertools.permutations(range(m)))
    out_perms = list(itertools.permutations(range(d)))
    per_party_out = list(itertools.product(out_perms, repeat=m))
    for pp in itertools.permutations(range(n)):
        for ins in itertools.product(in_perms, repeat=n):
            for outs in itertools.product(per_party_out, repeat=n):
                yield Relabeling(pp, ins, outs)


def relabeling_group_order(scenario: Scenario) -> int:
    from math import factorial

    n, m, d = scenario.parties, scenario.inputs, scenario.outputs
    return factorial(n) * factorial(m) ** n * factorial(d) ** (m * n)
