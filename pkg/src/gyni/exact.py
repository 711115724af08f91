"""Exact rational scalars, sparse exact matrices and rank computations.

Every quantity in the package is a :class:`fractions.Fraction`; nothing in
here ever rounds.  Large integer ranks are delegated to FLINT's
fraction-free elimination (``python-flint``), small ones and all pivot
bookkeeping use the pure-Python elimination in :func:`sparse_rref`.
"""
from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from fractions import Fraction
from math import lcm

import numpy as np

Rational = Fraction


class ExactMathError(ValueError):
    """Base class for errors raised by the exact-math layer."""


class DimensionMismatch(ExactMathError):
    pass


def to_rational(value) -> Fraction:
    """Coerce ints, Fractions and ``"num/den"`` strings to a Fraction.

    Floats are refused: silently importing a binary approximation would
    defeat the point of exact arithmetic.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (bool, float)):
        raise TypeError(f"refusing inexact value {value!r}")
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, str):
        return parse_rational(value)
    raise TypeError(f"cannot interpret {value!r} as a rational")


def format_rational(value: Fraction) -> str:
    """Canonical ``num/den`` form used in every JSON file (``0/1`` for zero)."""
    value = to_rational(value)
    return f"{value.numerator}/{value.denominator}"


def parse_rational(text: str) -> Fraction:
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        if int(den) <= 0:
            raise ExactMathError(f"denominator must be positive in {text!r}")
        return Fraction(int(num), int(den))
    return Fraction(int(text))


def decimal_string(value: Fraction, digits: int = 12) -> str:
    """Decimal rendering with ``digits`` significant digits (display only)."""
    value = to_rational(value)
    if value == 0:
        return "0"
    return f"{float(value):.{digits}g}"


class ExactMatrix:
    """A rows x cols matrix of Fractions, stored as one sparse dict per row.

    The dense view (``entries``) is row-major with ``rows * cols`` values.
    Instances are treated as immutable; :meth:`row` hands out copies.
    """

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, rows: int, cols: int, data: Iterable[Mapping[int, object]] = ()):
        if rows < 0 or cols < 0:
            raise ExactMathError("matrix shape must be non-negative")
        self.rows = rows
        self.cols = cols
        stored = []
        for row in data:
            clean = {}
            for j, v in row.items():
                if not 0 <= j < cols:
                    raise DimensionMismatch(f"column {j} outside 0..{cols - 1}")
                v = to_rational(v)
                if v:
                    clean[j] = v
            stored.append(clean)
        if len(stored) == 0:
            stored = [{} for _ in range(rows)]
        if len(stored) != rows:
            raise DimensionMismatch(f"expected {rows} rows, got {len(stored)}")
        self._data = tuple(stored)

    @classmethod
    def from_dense(cls, values: Sequence[Sequence[object]]) -> "ExactMatrix":
        values = [list(r) for r in values]
        cols = len(values[0]) if values else 0
        if any(len(r) != cols for r in values):
            raise DimensionMismatch("ragged rows")
        return cls(len(values), cols, ({j: v for j, v in enumerate(r) if v} for r in values))

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        return cls(n, n, ({i: 1} for i in range(n)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "ExactMatrix":
        return cls(rows, cols)

    def row(self, i: int) -> dict[int, Fraction]:
        return dict(self._data[i])

    def sparse_rows(self) -> tuple[dict[int, Fraction], ...]:
        return self._data

    def __getitem__(self, index: tuple[int, int]) -> Fraction:
        i, j = index
        return self._data[i].get(j, Fraction(0))

    @property
    def entries(self) -> tuple[Fraction, ...]:
        zero = Fraction(0)
        return tuple(r.get(j, zero) for r in self._data for j in range(self.cols))

    def to_dense(self) -> list[list[Fraction]]:
        zero = Fraction(0)
        return [[r.get(j, zero) for j in range(self.cols)] for r in self._data]

    def transpose(self) -> "ExactMatrix":
        cols: list[dict[int, Fraction]] = [{} for _ in range(self.cols)]
        for i, r in enumerate(self._data):
            for j, v in r.items():
                cols[j][i] = v
        return ExactMatrix(self.cols, self.rows, cols)

    def matvec(self, x: Sequence[Fraction]) -> list[Fraction]:
        if len(x) != self.cols:
            raise DimensionMismatch(f"vector of length {len(x)} for {self.cols} columns")
        return [sum((v * x[j] for j, v in r.items()), Fraction(0)) for r in self._data]

    def rmatvec(self, y: Sequence[Fraction]) -> list[Fraction]:
        """Return ``A^T y``."""
        if len(y) != self.rows:
            raise DimensionMismatch(f"vector of length {len(y)} for {self.rows} rows")
        out = [Fraction(0)] * self.cols
        for yi, r in zip(y, self._data):
            if yi:
                for j, v in r.items():
                    out[j] += yi * v
        return out

    def nnz(self) -> int:
        return sum(len(r) for r in self._data)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return (self.rows, self.cols, self._data) == (other.rows, other.cols, other._data)

    def __repr__(self) -> str:
        return f"ExactMatrix({self.rows}x{self.cols}, nnz={self.nnz()})"


def sparse_rref(
    rows: Sequence[Mapping[int, Fraction]],
    rhs: Sequence[Fraction] | None = None,
    priority: Iterable[int] | None = None,
    ncols: int | None = None,
):
    """Reduced row echelon form of a sparse system, pivoting in column order.

    Columns are tried in ``priority`` order (default ``0..ncols-1``); the
    first column with a nonzero entry among the unused rows becomes the next
    pivot, so the pivot set is the lexicographically first maximal
    independent column set with respect to that order.  Among candidate
    rows the sparsest one is used, which keeps fill-in low on the 0/+-1
    constraint systems this package builds.

    Returns ``(pivots, leftover)``: ``pivots`` is a list of
    ``(column, original_row_index, reduced_row, reduced_rhs)`` and
    ``leftover`` lists ``(original_row_index, rhs)`` for rows that reduced
    to zero (a nonzero rhs there means the system is inconsistent).
    """
    work = [{j: Fraction(v) for j, v in r.items() if v} for r in rows]
    b = [Fraction(0)] * len(work) if rhs is None else [Fraction(v) for v in rhs]
    colmap: dict[int, set[int]] = {}
    for i, r in enumerate(work):
        for j in r:
            colmap.setdefault(j, set()).add(i)
    if priority is None:
        if ncols is None:
            ncols = 1 + max(colmap, default=-1)
        priority = range(ncols)
    free = set(range(len(work)))
    pivots: list[tuple[int, int]] = []
    for j in priority:
        cand = [i for i in colmap.get(j, ()) if i in free]
        if not cand:
            continue
        i = min(cand, key=lambda k: (len(work[k]), k))
        free.discard(i)
        r = work[i]
        p = r[j]
        if p != 1:
            inv = 1 / p
            for k in r:
                r[k] *= inv
            b[i] *= inv
        for k in list(colmap[j]):
            if k == i:
                continue
            rk = work[k]
            f = rk[j]
            for col, v in r.items():
                nv = rk.get(col, 0) - f * v
                if nv:
                    if col not in rk:
                        colmap.setdefault(col, set()).add(k)
                    rk[col] = nv
                elif col in rk:
                    del rk[col]
                    colmap[col].discard(k)
            b[k] -= f * b[i]
        pivots.append((j, i))
    leftover = []
    for i in sorted(free):
        if work[i]:
            # Only reachable when ``priority`` omits some columns.
            raise ExactMathError("priority order does not cover every column")
        leftover.append((i, b[i]))
    return [(j, i, work[i], b[i]) for j, i in pivots], leftover


def solve_rank_and_basis(m: ExactMatrix) -> tuple[int, list[int]]:
    """Exact rank and pivot columns (in increasing order) of ``m``."""
    pivots, _ = sparse_rref(m.sparse_rows(), priority=range(m.cols))
    cols = sorted(j for j, *_ in pivots)
    return len(cols), cols


def _integer_rows(points: Sequence[Sequence[object]]) -> list[list[int]]:
    """Scale each rational row by the lcm of its denominators."""
    out = []
    for row in points:
        fr = [to_rational(v) for v in row]
        scale = lcm(*(v.denominator for v in fr)) if fr else 1
        out.append([int(v * scale) for v in fr])
    return out


def integer_rank(matrix) -> int:
    """Exact rank of an integer matrix (numpy array or nested lists)."""
    import flint

    arr = np.asarray(matrix, dtype=object) if not isinstance(matrix, np.ndarray) else matrix
    if arr.ndim != 2:
        raise DimensionMismatch("integer_rank expects a 2-d array")
    r, c = arr.shape
    if r == 0 or c == 0:
        return 0
    if r > c:
        arr = arr.T
        r, c = c, r
    if arr.dtype != object:
        arr = arr.astype(np.int64)
        flat = arr.ravel().tolist()
    else:
        flat = [int(v) for v in arr.ravel()]
    return flint.fmpz_mat(r, c, flat).rank()


#: Largest prime below 2**62; used for modular rank lower bounds.
RANK_PRIME = 4611686018427387847


def modular_rank(matrix: np.ndarray, prime: int = RANK_PRIME) -> int:
    """Rank of an integer matrix modulo ``prime``: a lower bound on the rational rank."""
    import flint

    r, c = matrix.shape
    if r == 0 or c == 0:
        return 0
    if r > c:
        matrix = matrix.T
        r, c = c, r
    flat = np.mod(matrix.astype(np.int64), prime).ravel().tolist()
    return flint.nmod_mat(r, c, flat, prime).rank()


def affine_rank_bounded(points: np.ndarray, upper: int, seed: int = 0) -> int:
    """Exact affine rank when a rigorous upper bound ``upper`` is known.

    Ranks of row subsets and ranks modulo a prime are both lower bounds, so
    the first one that reaches ``upper`` is the answer.  Otherwise the exact
    rank of all rows is computed.
    """
    diffs = points[1:].astype(np.int64) - points[0].astype(np.int64)
    diffs = diffs[np.any(diffs != 0, axis=1)]
    if diffs.shape[0] == 0:
        return 0
    diffs = np.unique(diffs, axis=0)

    def reached(rows):
        r = modular_rank(rows)
        if r > upper:
            raise ExactMathError(f"rank {r} exceeds the claimed upper bound {upper}")
        return r == upper

    if diffs.shape[0] > upper + 64:
        order = np.random.default_rng(seed).permutation(diffs.shape[0])
        if reached(diffs[order[: upper + 64]]):
            return upper
    if reached(diffs):
        return upper
    return integer_rank(diffs)


def affine_rank(points) -> int:
    """Dimension of the affine hull of ``points``.

    ``points`` is either a sequence of equal-length rational vectors or a 2-d
    integer numpy array (one point per row).  The rank of the differences
    ``p_i - p_0`` is computed exactly.
    """
    if isinstance(points, np.ndarray):
        if points.ndim != 2:
            raise DimensionMismatch("expected a 2-d array of points")
        if points.shape[0] == 0:
            raise ExactMathError("affine_rank of an empty point set")
        if not np.issubdtype(points.dtype, np.integer):
            raise TypeError("numpy input must have an integer dtype")
        base = points[0].astype(np.int64)
        diffs = points[1:].astype(np.int64) - base
        diffs = diffs[np.any(diffs != 0, axis=1)]
        if diffs.shape[0] == 0:
            return 0
        diffs = np.unique(diffs, axis=0)
        return integer_rank(diffs)
    pts = [list(p) for p in points]
    if not pts:
        raise ExactMathError("affine_rank of an empty point set")
    dim = len(pts[0])
    if any(len(p) != dim for p in pts):
        raise DimensionMismatch("points have different dimensions")
    base = [to_rational(v) for v in pts[0]]
    diffs = [[to_rational(v) - b for v, b in zip(p, base)] for p in pts[1:]]
    diffs = [d for d in diffs if any(d)]
    if not diffs:
        return 0
    return integer_rank(_integer_rows(diffs))


def affine_rank_reference(points: Sequence[Sequence[object]]) -> int:
    """Pure-Fraction affine rank; the independent oracle for :func:`affine_rank`."""
    pts = [[to_rational(v) for v in p] for p in points]
    if not pts:
        raise ExactMathError("affine_rank of an empty point set")
    dim = len(pts[0])
    if any(len(p) != dim for p in pts):
        raise DimensionMismatch("points have different dimensions")
    diffs = [{j: v - pts[0][j] for j, v in enumerate(p) if v != pts[0][j]} for p in pts[1:]]
    m = ExactMatrix(len(diffs), dim, diffs)
    return solve_rank_and_basis(m)[0]
