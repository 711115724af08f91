"""Quantum side of the game: an exact sum-of-squares check and a see-saw search.

The winning projector for input ``x`` is ``M_x``.  Since every ``M_x`` is a
projector and ``M_x M_y = 0`` unless ``y`` is ``x`` or its complement, the
operators generate a small quotient algebra whose words are the unit, single
letters ``M_x`` and the pairs ``M_x M_~x``.  Within that algebra

    w - sum_x q(x) M_x = L^2 + 1/2 sum_x (b_x M_x - b_~x M_~x)^2

with ``L = sqrt(w) - sum_x a_x M_x``.  The coefficients ``a_x`` and ``b_x``
are square roots; they are carried as :class:`Surd` values whose pairwise
products are checked to be rational, so the identity is verified with
Fractions only.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

import numpy as np

from .exact import ExactMathError, to_rational
from .game import GyniInstance, build_inequality, classical_bound, complement
from .scenario import BellInequality, PriorDistribution

Word = tuple[int, ...]


class AlgebraError(ExactMathError):
    pass


def _rational_sqrt(r: Fraction) -> Fraction | None:
    if r < 0:
        return None
    n, d = isqrt(r.numerator), isqrt(r.denominator)
    if n * n == r.numerator and d * d == r.denominator:
        return Fraction(n, d)
    return None


@dataclass(frozen=True)
class Surd:
    """``coef * sqrt(radicand)`` with rational ``coef`` and ``radicand >= 0``."""

    coef: Fraction
    radicand: Fraction

    def __post_init__(self):
        object.__setattr__(self, "coef", to_rational(self.coef))
        object.__setattr__(self, "radicand", to_rational(self.radicand))
        if self.radicand < 0:
            raise AlgebraError("negative radicand")

    @classmethod
    def rational(cls, value) -> "Surd":
        return cls(value, Fraction(1))

    def __neg__(self) -> "Surd":
        return Surd(-self.coef, self.radicand)

    def scale(self, c) -> "Surd":
        return Surd(self.coef * to_rational(c), self.radicand)

    def times(self, other: "Surd") -> Fraction:
        """The product, which must be rational."""
        if not self.coef or not other.coef:
            return Fraction(0)
        root = _rational_sqrt(self.radicand * other.radicand)
        if root is None:
            raise AlgebraError(f"product of sqrt({self.radicand}) and sqrt({other.radicand}) is irrational")
        return self.coef * other.coef * root

    def __float__(self) -> float:
        return float(self.coef) * float(self.radicand) ** 0.5


class AlgebraElement:
    """Rational combination of the words ``()``, ``(x,)`` and ``(x, ~x)``."""

    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs: dict[Word, Fraction] | None = None):
        self.n = n
        clean = {}
        for w, c in (coeffs or {}).items():
            w = tuple(w)
            _check_word(w, n)
            c = to_rational(c)
            if c:
                clean[w] = clean.get(w, 0) + c
        self.coeffs = {w: c for w, c in clean.items() if c}

    @classmethod
    def unit(cls, n: int, c=1) -> "AlgebraElement":
        return cls(n, {(): c})

    @classmethod
    def generator(cls, n: int, x: int, c=1) -> "AlgebraElement":
        return cls(n, {(x,): c})

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        out = dict(self.coeffs)
        for w, c in other.coeffs.items():
            out[w] = out.get(w, 0) + c
        return AlgebraElement(self.n, out)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        return self + other.scale(-1)

    def scale(self, c) -> "AlgebraElement":
        c = to_rational(c)
        return AlgebraElement(self.n, {w: v * c for w, v in self.coeffs.items()})

    def __mul__(self, other: "AlgebraElement") -> "AlgebraElement":
        return algebra_multiply(self, other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return self.n == other.n and self.coeffs == other.coeffs

    def __repr__(self) -> str:
        terms = [f"{c}*{format_word(w, self.n)}" for w, c in sorted(self.coeffs.items())]
        return " + ".join(terms) or "0"


def _check_word(w: Word, n: int):
    if len(w) > 2 or any(not 0 <= x < 2**n for x in w):
        raise AlgebraError(f"inadmissible word {w}")
    if len(w) == 2 and w[1] != complement(w[0], n):
        raise AlgebraError(f"inadmissible word {w}")


def format_word(w: Word, n: int) -> str:
    if not w:
        return "1"
    return "".join(f"M[{format(x, f'0{n}b')[::-1]}]" for x in w)


def reduce_word(word: Word, n: int) -> Word | None:
    """Normal form of a product of generators, or ``None`` if it vanishes."""
    out: list[int] = []
    for x in word:
        if out and out[-1] == x:
            continue  # idempotent
        if out and x != complement(out[-1], n):
            return None  # orthogonal
        out.append(x)
    if len(out) > 2:
        raise AlgebraError(f"product {tuple(out)} leaves the verified fragment")
    return tuple(out)


def algebra_multiply(u: AlgebraElement, v: AlgebraElement) -> AlgebraElement:
    if u.n != v.n:
        raise AlgebraError("elements over different numbers of players")
    out: dict[Word, Fraction] = {}
    for w1, c1 in u.coeffs.items():
        for w2, c2 in v.coeffs.items():
            w = reduce_word(w1 + w2, u.n)
            if w is not None:
                out[w] = out.get(w, 0) + c1 * c2
    return AlgebraElement(u.n, out)


def square_linear(n: int, constant: Surd, terms: dict[int, Surd]) -> AlgebraElement:
    """``(constant + sum_x terms[x] M_x)^2`` with only surd products formed."""
    items: list[tuple[Word, Surd]] = [((), constant)] + [((x,), s) for x, s in terms.items()]
    out: dict[Word, Fraction] = {}
    for w1, s1 in items:
        for w2, s2 in items:
            w = reduce_word(w1 + w2, n)
            if w is not None:
                c = s1.times(s2)
                if c:
                    out[w] = out.get(w, 0) + c
    return AlgebraElement(n, out)


# -- tightening and the identity ---------------------------------------------

def tighten_distribution(q: PriorDistribution) -> tuple[Fraction, ...]:
    """``q'(x) = q(x) + (w - q(x) - q(~x)) / 2`` so that every pair sums to ``w``."""
    n = q.scenario.parties
    wc = classical_bound(GyniInstance(n, q))
    w = q.weights
    return tuple(w[x] + (wc - w[x] - w[complement(x, n)]) / 2 for x in range(2**n))


@dataclass(frozen=True)
class SosVerdict:
    ok: bool
    omega_c: Fraction
    mismatches: tuple[tuple[str, Fraction, Fraction], ...]

    def __bool__(self) -> bool:
        return self.ok


def sos_sides(weights: tuple[Fraction, ...], n: int, wc: Fraction) -> tuple[AlgebraElement, AlgebraElement]:
    """Both sides of the identity for pair-tight weights."""
    lhs = AlgebraElement.unit(n, wc) - AlgebraElement(n, {(x,): q for x, q in enumerate(weights)})
    alpha = {x: Surd(1 - weights[complement(x, n)] / wc, wc) for x in range(2**n)}
    rhs = square_linear(n, Surd(1, wc), {x: -a for x, a in alpha.items()})
    half = Fraction(1, 2)
    for x in range(2**n):
        xb = complement(x, n)
        beta = Surd(1, weights[x] * weights[xb] / wc)  # b_x = b_~x
        rhs = rhs + square_linear(n, Surd(0, 1), {x: beta, xb: -beta}).scale(half)
    return lhs, rhs


def verify_sos_identity(q: PriorDistribution) -> SosVerdict:
    n = q.scenario.parties
    wc = classical_bound(GyniInstance(n, q))
    tight = tighten_distribution(q)
    lhs, rhs = sos_sides(tight, n, wc)
    bad = []
    for w in sorted(set(lhs.coeffs) | set(rhs.coeffs)):
        a, b = lhs.coeffs.get(w, Fraction(0)), rhs.coeffs.get(w, Fraction(0))
        if a != b:
            bad.append((format_word(w, n), a, b))
    return SosVerdict(not bad, wc, tuple(bad))


# -- see-saw -------------------------------------------------------------------

@dataclass
class QuantumStrategy:
    """State on ``(C^dim)^N`` (party 1 is the first tensor factor) and
    projectors ``proj[i][s]`` onto party i's outcome 0 for input ``s``."""

    state: np.ndarray
    proj: list[list[np.ndarray]]
    dim: int

    def validate(self, tol: float = 1e-10):
        if abs(np.linalg.norm(self.state) - 1) > 1e-12:
            raise ValueError("state is not normalized")
        for per in self.proj:
            for p in per:
                if np.linalg.norm(p @ p - p) > tol or np.linalg.norm(p - p.conj().T) > tol:
                    raise ValueError("measurement operator is not a projector")


def _outcome_op(p: np.ndarray, a: int) -> np.ndarray:
    return p if a == 0 else np.eye(len(p)) - p


def _apply_local(psi: np.ndarray, op: np.ndarray, i: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(op, psi, axes=([1], [i])), 0, i)


class _Game:
    """Nonzero terms ``(coefficient, input bits, output bits)`` of a binary Bell expression."""

    def __init__(self, g: GyniInstance | BellInequality):
        ineq = build_inequality(g) if isinstance(g, GyniInstance) else g
        sc = ineq.scenario
        if sc.inputs != 2 or sc.outputs != 2:
            raise ValueError("see-saw supports two inputs and two outputs per party")
        self.n = sc.parties
        self.terms = []
        for cell, c in ineq.nonzero().items():
            a, x = sc.split_cell(cell)
            self.terms.append((float(c), list(sc.input_digits(x)), list(sc.output_digits(a))))


def bell_operator(game: _Game, s: QuantumStrategy) -> np.ndarray:
    d, n = s.dim, game.n
    total = np.zeros((d**n, d**n), dtype=complex)
    for q, xs, outs in game.terms:
        op = np.ones((1, 1))
        for i in range(n):
            op = np.kron(op, _outcome_op(s.proj[i][xs[i]], outs[i]))
        total += q * op
    return total


def strategy_value(game: _Game, s: QuantumStrategy) -> float:
    d, n = s.dim, game.n
    psi = s.state.reshape((d,) * n)
    total = 0.0
    for q, xs, outs in game.terms:
        phi = psi
        for i in range(n):
            phi = _apply_local(phi, _outcome_op(s.proj[i][xs[i]], outs[i]), i)
        total += q * float(np.vdot(psi, phi).real)
    return total


def _update_party(game: _Game, s: QuantumStrategy, i: int, tol: float = 1e-12):
    d, n = s.dim, game.n
    psi = s.state.reshape((d,) * n)
    r = [[np.zeros((d, d), dtype=complex) for _ in range(2)] for _ in range(2)]
    for q, xs, outs in game.terms:
        phi = psi
        for j in range(n):
            if j != i:
                phi = _apply_local(phi, _outcome_op(s.proj[j][xs[j]], outs[j]), j)
        # Reduced operator on party i: <psi| (. on i) (x) rest |psi>
        a = np.moveaxis(psi, i, 0).reshape(d, -1)
        b = np.moveaxis(phi, i, 0).reshape(d, -1)
        r[xs[i]][outs[i]] += q * (b @ a.conj().T)
    for x in range(2):
        diff = r[x][0] - r[x][1]
        diff = (diff + diff.conj().T) / 2
        vals, vecs = np.linalg.eigh(diff)
        pos = vecs[:, vals > tol]
        s.proj[i][x] = pos @ pos.conj().T


def _update_state(game: _Game, s: QuantumStrategy):
    vals, vecs = np.linalg.eigh(bell_operator(game, s))
    s.state = vecs[:, -1]


def _random_projector(rng: np.random.Generator, d: int) -> np.ndarray:
    h = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    vals, vecs = np.linalg.eigh(h + h.conj().T)
    pos = vecs[:, vals > 0]
    return pos @ pos.conj().T


def _random_state(rng: np.random.Generator, d: int, n: int, product: bool) -> np.ndarray:
    if product:
        psi = np.ones(1, dtype=complex)
        for _ in range(n):
            v = rng.normal(size=d) + 1j * rng.normal(size=d)
            psi = np.kron(psi, v / np.linalg.norm(v))
        return psi
    v = rng.normal(size=d**n) + 1j * rng.normal(size=d**n)
    return v / np.linalg.norm(v)


@dataclass(frozen=True)
class SeesawResult:
    best: float
    values: tuple[float, ...]
    histories: tuple[tuple[float, ...], ...]
    seed: int


def seesaw_run(
    g: GyniInstance | BellInequality,
    dim: int,
    rng: np.random.Generator,
    product_state: bool = False,
    update_state: bool = True,
    tol: float = 1e-10,
    max_iter: int = 500,
) -> tuple[float, list[float], QuantumStrategy]:
    game = _Game(g)
    n = game.n
    s = QuantumStrategy(
        _random_state(rng, dim, n, product_state),
        [[_random_projector(rng, dim) for _ in range(2)] for _ in range(n)],
        dim,
    )
    history = [strategy_value(game, s)]
    for _ in range(max_iter):
        for i in range(n):
            _update_party(game, s, i)
        if update_state:
            _update_state(game, s)
        history.append(strategy_value(game, s))
        prev, cur = history[-2], history[-1]
        if cur - prev <= tol * max(abs(cur), 1e-300):
            break
    return history[-1], history, s


def seesaw_search(
    g: GyniInstance | BellInequality,
    local_dim: int = 2,
    restarts: int = 50,
    seed: int = 0,
    product_state: bool = False,
    update_state: bool = True,
) -> SeesawResult:
    """Best see-saw value over ``restarts`` seeded random starts."""
    if local_dim not in (2, 3):
        raise ValueError("local dimension must be 2 or 3")
    if _Game(g).n > 4:
        raise ValueError("see-saw is limited to N <= 4")
    children = np.random.SeedSequence(seed).spawn(restarts)
    values, histories = [], []
    for child in children:
        v, hist, _ = seesaw_run(g, local_dim, np.random.default_rng(child), product_state, update_state)
        values.append(v)
        histories.append(tuple(hist))
    return SeesawResult(max(values), tuple(values), tuple(histories), seed)
