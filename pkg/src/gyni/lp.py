"""Exact rational simplex method.

The solver works on a sparse *dictionary*: every basic variable is kept as
``x_b = const + sum_j coef_j * x_j`` over the nonbasic variables.  The
initial dictionary comes from an exact sparse RREF of the equality system,
so redundant rows disappear up front and a caller that knows a feasible
basis (``basis_hint``) skips phase 1 entirely.

Pricing is steepest-edge by default.  The edge norms are only used to pick
the entering column, so they are computed in floating point; all tableau
arithmetic stays exact.  After ``stall_limit`` consecutive degenerate pivots
the solver switches to Bland's rule for the rest of the phase, which
guarantees termination.
"""
from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from .exact import DimensionMismatch, ExactMathError, ExactMatrix, sparse_rref, to_rational

log = logging.getLogger(__name__)

PIVOT_RULES = ("steepest", "dantzig", "bland")


class InfeasibleError(ExactMathError):
    def __init__(self, detail: str = ""):
        super().__init__("infeasible" + (f": {detail}" if detail else ""))


class UnboundedError(ExactMathError):
    def __init__(self, detail: str = ""):
        super().__init__("unbounded" + (f": {detail}" if detail else ""))


@dataclass(frozen=True)
class LinearProgram:
    """maximize ``objective . x`` subject to ``a_eq x = b_eq``.

    ``nonneg[j]`` marks ``x_j >= 0`` (default: every variable); ``upper[j]``
    is an optional upper bound.
    """

    objective: tuple[Fraction, ...]
    a_eq: ExactMatrix
    b_eq: tuple[Fraction, ...]
    nonneg: tuple[bool, ...] | None = None
    upper: tuple[Fraction | None, ...] | None = None

    def __post_init__(self):
        n = len(self.objective)
        if n == 0:
            raise DimensionMismatch("a linear program needs at least one variable")
        object.__setattr__(self, "objective", tuple(to_rational(c) for c in self.objective))
        object.__setattr__(self, "b_eq", tuple(to_rational(b) for b in self.b_eq))
        if self.a_eq.cols != n:
            raise DimensionMismatch(f"{self.a_eq.cols} constraint columns for {n} variables")
        if self.a_eq.rows != len(self.b_eq):
            raise DimensionMismatch(f"{self.a_eq.rows} constraint rows but {len(self.b_eq)} rhs values")
        if self.nonneg is None:
            object.__setattr__(self, "nonneg", (True,) * n)
        elif len(self.nonneg) != n:
            raise DimensionMismatch("nonneg flags do not match the variable count")
        if self.upper is None:
            object.__setattr__(self, "upper", (None,) * n)
        elif len(self.upper) != n:
            raise DimensionMismatch("upper bounds do not match the variable count")
        else:
            object.__setattr__(
                self, "upper", tuple(None if u is None else to_rational(u) for u in self.upper)
            )

    @property
    def num_vars(self) -> int:
        return len(self.objective)


@dataclass(frozen=True)
class LPResult:
    value: Fraction
    x: tuple[Fraction, ...]
    #: Dual multipliers for the equality rows.
    y: tuple[Fraction, ...]
    #: Dual multipliers (>= 0) for the upper bounds; zero where no bound is set.
    w: tuple[Fraction, ...]
    pivots: int
    stats: dict = field(default_factory=dict, compare=False)


def check_certificate(lp: LinearProgram, result: LPResult) -> list[str]:
    """Re-substitute a solution and its dual; return a list of failures.

    An empty list means the optimum is certified: ``x`` is feasible, ``y``
    and ``w`` are dual feasible, and both objectives equal ``result.value``.
    """
    problems = []
    x = result.x
    if len(x) != lp.num_vars:
        return ["primal vector has the wrong length"]
    ax = lp.a_eq.matvec(x)
    bad = [i for i, (lhs, rhs) in enumerate(zip(ax, lp.b_eq)) if lhs != rhs]
    if bad:
        problems.append(f"equality rows violated: {bad[:10]}")
    for j, v in enumerate(x):
        if lp.nonneg[j] and v < 0:
            problems.append(f"x[{j}] = {v} < 0")
        if lp.upper[j] is not None and v > lp.upper[j]:
            problems.append(f"x[{j}] = {v} above bound {lp.upper[j]}")
    primal = sum((c * v for c, v in zip(lp.objective, x)), Fraction(0))
    if primal != result.value:
        problems.append(f"objective at x is {primal}, reported {result.value}")
    aty = lp.a_eq.rmatvec(result.y)
    for j, c in enumerate(lp.objective):
        wj = result.w[j]
        if wj < 0:
            problems.append(f"upper-bound multiplier w[{j}] negative")
        if wj and lp.upper[j] is None:
            problems.append(f"w[{j}] set for an unbounded variable")
        lhs = aty[j] + wj
        if lp.nonneg[j]:
            if lhs < c:
                problems.append(f"dual constraint {j} violated: {lhs} < {c}")
        elif lhs != c:
            problems.append(f"dual equality {j} violated: {lhs} != {c}")
    dual = sum((b * y for b, y in zip(lp.b_eq, result.y)), Fraction(0))
    dual += sum((u * w for u, w in zip(lp.upper, result.w) if u is not None), Fraction(0))
    if dual != result.value:
        problems.append(f"dual objective {dual} differs from {result.value}")
    return problems


class _Dictionary:
    """Sparse simplex dictionary ``x_b = const_b + sum_j d[b][j] x_j``."""

    def __init__(self):
        self.rows: dict[int, tuple[Fraction, dict[int, Fraction]]] = {}
        self.cols: dict[int, set[int]] = {}

    def add_row(self, b: int, const: Fraction, coefs: dict[int, Fraction]):
        self.rows[b] = (const, coefs)
        for j in coefs:
            self.cols.setdefault(j, set()).add(b)

    def substitute(self, expr: dict[int, Fraction], const: Fraction = Fraction(0)):
        """Rewrite a linear form over all variables in terms of nonbasics."""
        out: dict[int, Fraction] = {}
        for j, c in expr.items():
            if not c:
                continue
            if j in self.rows:
                b0, coefs = self.rows[j]
                const += c * b0
                for k, v in coefs.items():
                    out[k] = out.get(k, 0) + c * v
            else:
                out[j] = out.get(j, 0) + c
        return const, {k: v for k, v in out.items() if v}

    def pivot(self, enter: int, leave: int, objectives: list[list]):
        const, coefs = self.rows.pop(leave)
        a = coefs.pop(enter)
        for k in coefs:
            self.cols[k].discard(leave)
        self.cols[enter].discard(leave)
        inv = -1 / a
        nconst = const * inv
        ncoefs = {k: v * inv for k, v in coefs.items()}
        ncoefs[leave] = -inv
        for b in list(self.cols.get(enter, ())):
            c2, d2 = self.rows[b]
            f = d2.pop(enter)
            c2 += f * nconst
            for k, v in ncoefs.items():
                nv = d2.get(k, 0) + f * v
                if nv:
                    if k not in d2:
                        self.cols.setdefault(k, set()).add(b)
                    d2[k] = nv
                elif k in d2:
                    del d2[k]
                    self.cols[k].discard(b)
            self.rows[b] = (c2, d2)
        self.cols[enter] = set()
        self.add_row(enter, nconst, ncoefs)
        for obj in objectives:
            z0, zc = obj
            f = zc.pop(enter, 0)
            if f:
                obj[0] = z0 + f * nconst
                for k, v in ncoefs.items():
                    nv = zc.get(k, 0) + f * v
                    if nv:
                        zc[k] = nv
                    elif k in zc:
                        del zc[k]

    def drop_column(self, j: int):
        for b in self.cols.pop(j, set()):
            self.rows[b][1].pop(j, None)


def _choose_entering(dic: _Dictionary, zc: dict[int, Fraction], rule: str):
    candidates = [k for k, v in zc.items() if v > 0]
    if not candidates:
        return None
    if rule == "bland":
        return min(candidates)
    if rule == "dantzig":
        return max(candidates, key=lambda k: (zc[k], -k))
    norms = dict.fromkeys(candidates, 1.0)
    for k in candidates:
        for b in dic.cols.get(k, ()):
            v = float(dic.rows[b][1][k])
            norms[k] += v * v
    return max(candidates, key=lambda k: (float(zc[k]) ** 2 / norms[k], -k))


def _run_phase(dic: _Dictionary, objective: list, rule: str, stall_limit: int, extra: list, counter: list):
    """Maximise ``objective`` (a mutable ``[const, coefs]``) in place."""
    active = rule
    stalled = 0
    while True:
        enter = _choose_entering(dic, objective[1], active)
        if enter is None:
            return
        best = None
        for b in dic.cols.get(enter, ()):
            const, coefs = dic.rows[b]
            a = coefs[enter]
            if a < 0:
                key = (const / -a, b)
                if best is None or key < best:
                    best = key
        if best is None:
            raise UnboundedError(f"variable {enter} can increase without limit")
        ratio, leave = best
        dic.pivot(enter, leave, [objective, *extra])
        counter[0] += 1
        if ratio == 0:
            stalled += 1
            if stalled >= stall_limit and active != "bland":
                log.debug("switching to Bland's rule after %d degenerate pivots", stalled)
                active = "bland"
        else:
            stalled = 0


def _standard_form(lp: LinearProgram):
    """Split free variables and turn upper bounds into slack rows."""
    cols: list[tuple[int, int]] = []  # (original var, sign)
    for j in range(lp.num_vars):
        cols.append((j, 1))
        if not lp.nonneg[j]:
            cols.append((j, -1))
    pos = {}
    for k, (j, s) in enumerate(cols):
        pos.setdefault(j, []).append(k)
    rows = []
    for r in lp.a_eq.sparse_rows():
        row = {}
        for j, v in r.items():
            for k in pos[j]:
                row[k] = v * cols[k][1]
        rows.append(row)
    rhs = list(lp.b_eq)
    n = len(cols)
    bound_rows = []
    for j, u in enumerate(lp.upper):
        if u is None:
            continue
        row = {k: Fraction(cols[k][1]) for k in pos[j]}
        row[n] = Fraction(1)
        bound_rows.append(j)
        cols.append((-1, 0))
        n += 1
        rows.append(row)
        rhs.append(u)
    c = [lp.objective[j] * s if j >= 0 else Fraction(0) for j, s in cols]
    return cols, rows, rhs, c, pos, bound_rows


def lp_maximize(
    lp: LinearProgram,
    basis_hint: Sequence[int] | None = None,
    pivot_rule: str = "steepest",
    stall_limit: int = 50,
) -> LPResult:
    """Solve ``lp`` exactly and return an optimal vertex with a dual certificate.

    ``basis_hint`` lists (original) variables to prefer as basic columns;
    when they form a feasible basis, phase 1 is skipped.
    Raises :class:`InfeasibleError` or :class:`UnboundedError`.
    """
    if pivot_rule not in PIVOT_RULES:
        raise ValueError(f"pivot_rule must be one of {PIVOT_RULES}")
    cols, rows, rhs, c, pos, bound_rows = _standard_form(lp)
    n = len(cols)
    order: list[int] = []
    seen = set()
    if basis_hint is not None:
        for j in basis_hint:
            for k in pos.get(j, ()):
                if k not in seen:
                    order.append(k)
                    seen.add(k)
    order += [k for k in range(n) if k not in seen]
    pivots, leftover = sparse_rref(rows, rhs, priority=order)
    for i, b in leftover:
        if b != 0:
            raise InfeasibleError(f"equality row {i} is inconsistent with the others")
    dic = _Dictionary()
    basic_rows = {}
    for j, i, row, b in pivots:
        dic.add_row(j, b, {k: -v for k, v in row.items() if k != j})
        basic_rows[j] = i
    counter = [0]
    aux = n
    negative = [b for b, (const, _) in dic.rows.items() if const < 0]
    if negative:
        for b in negative:
            const, coefs = dic.rows[b]
            coefs[aux] = Fraction(1)
            dic.cols.setdefault(aux, set()).add(b)
        leave = min(negative, key=lambda b: (dic.rows[b][0], b))
        phase1 = [Fraction(0), {aux: Fraction(-1)}]
        dic.pivot(aux, leave, [phase1])
        counter[0] += 1
        _run_phase(dic, phase1, pivot_rule, stall_limit, [], counter)
        if phase1[0] < 0:
            raise InfeasibleError("phase 1 optimum is negative")
        if aux in dic.rows:
            const, coefs = dic.rows[aux]
            if coefs:
                enter = min(coefs)
                dic.pivot(enter, aux, [phase1])
            else:
                del dic.rows[aux]
        dic.drop_column(aux)
    z0, zc = dic.substitute({j: v for j, v in enumerate(c) if v})
    objective = [z0, zc]
    phase1_pivots = counter[0]
    _run_phase(dic, objective, pivot_rule, stall_limit, [], counter)

    xs = [Fraction(0)] * n
    for b, (const, _) in dic.rows.items():
        xs[b] = const
    x = [Fraction(0)] * lp.num_vars
    for k, (j, s) in enumerate(cols):
        if j >= 0:
            x[j] += s * xs[k]
    value = objective[0]

    # Dual: reduced costs r_j = c_j - (A^T y)_j must vanish on the basis.
    basis = sorted(dic.rows)
    row_of = {i: None for i in basic_rows.values()}
    used_rows = sorted(row_of)
    trans = [{} for _ in basis]
    col_index = {b: t for t, b in enumerate(basis)}
    for i in used_rows:
        for k, v in rows[i].items():
            t = col_index.get(k)
            if t is not None:
                trans[t][i] = v
    sol, rest = sparse_rref(trans, [c[b] for b in basis], priority=used_rows)
    if any(b != 0 for _, b in rest) or len(sol) != len(used_rows):
        raise ExactMathError("final basis matrix is singular")
    y_full = [Fraction(0)] * len(rows)
    for i, _, _, b in sol:
        y_full[i] = b
    m = lp.a_eq.rows
    y = tuple(y_full[:m])
    w = [Fraction(0)] * lp.num_vars
    for t, j in enumerate(bound_rows):
        w[j] = y_full[m + t]
    stats = {"phase1_pivots": phase1_pivots, "rank": len(pivots), "columns": n}
    return LPResult(value, tuple(x), y, tuple(w), counter[0], stats)
