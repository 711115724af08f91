"""Facet test for Bell inequalities against the local polytope.

An inequality ``c . p <= bound`` is facet-defining iff it is valid on every
deterministic vertex and the vertices saturating it span an affine space of
dimension ``D - 1``, where ``D`` is the dimension of the local polytope.

Vertices can be embedded as full probability tables or as marginal
coordinates ``P(a_S = t_S | x_S)`` with ``t_i < d - 1``.  The second map is
linear and injective on the no-signalling affine space, so both give the
same affine ranks; the marginal one is much smaller for large scenarios.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

import numpy as np

from .exact import affine_rank, affine_rank_bounded
from .game import build_inequality, instance
from .scenario import (
    DEFAULT_ENUMERATION_CAP,
    BellInequality,
    Scenario,
    local_functions,
    deterministic_output_matrix,
    deterministic_vertex_matrix,
)

EMBEDDINGS = ("auto", "full", "marginal")
FULL_EMBEDDING_LIMIT = 256


@dataclass(frozen=True)
class FacetReport:
    inequality: BellInequality = field(repr=False)
    dimension: int
    saturating_count: int
    saturating_dimension: int
    is_valid: bool
    is_facet: bool
    max_value: Fraction
    embedding: str

    @property
    def gap(self) -> int:
        """How far the saturating set is from a facet (0 for facets)."""
        return self.dimension - 1 - self.saturating_dimension

    def to_json(self) -> dict:
        from .exact import format_rational

        return {
            "D": self.dimension,
            "saturating_count": self.saturating_count,
            "saturating_dimension": self.saturating_dimension,
            "is_valid": self.is_valid,
            "is_facet": self.is_facet,
            "max_value": format_rational(self.max_value),
            "bound": format_rational(self.inequality.bound),
            "embedding": self.embedding,
        }


def local_dimension_upper(scenario: Scenario) -> int:
    """Dimension of the no-signalling affine space, which contains every vertex."""
    return (scenario.inputs * (scenario.outputs - 1) + 1) ** scenario.parties - 1


def marginal_vertex_matrix(scenario: Scenario, cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """Deterministic vertices in marginal coordinates, same row order as the full embedding."""
    local = np.array(local_functions(scenario, cap))
    m, d = scenario.inputs, scenario.outputs
    cols = [np.ones(len(local), dtype=np.int8)]
    for s in range(m):
        for t in range(d - 1):
            cols.append((local[:, s] == t).astype(np.int8))
    loc = np.stack(cols, axis=1)
    out = loc
    for _ in range(scenario.parties - 1):
        out = (out[:, None, :, None] * loc[None, :, None, :]).reshape(out.shape[0] * loc.shape[0], -1)
    return out[:, 1:]


def vertex_matrix(scenario: Scenario, embedding: str = "auto") -> tuple[np.ndarray, str]:
    if embedding not in EMBEDDINGS:
        raise ValueError(f"embedding must be one of {EMBEDDINGS}")
    if embedding == "auto":
        embedding = "full" if scenario.num_cells <= FULL_EMBEDDING_LIMIT else "marginal"
    if embedding == "full":
        return deterministic_vertex_matrix(scenario), embedding
    return marginal_vertex_matrix(scenario), embedding


class LocalPolytope:
    """Deterministic vertices of a scenario with lazily computed dimension."""

    def __init__(self, scenario: Scenario, embedding: str = "auto"):
        self.scenario = scenario
        self.vertices, self.embedding = vertex_matrix(scenario, embedding)
        out = deterministic_output_matrix(scenario)
        self._cells = out + (np.arange(scenario.num_inputs) * scenario.num_outputs)[None, :]
        self._dimension: int | None = None

    @property
    def dimension(self) -> int:
        if self._dimension is None:
            self._dimension = affine_rank_bounded(self.vertices, local_dimension_upper(self.scenario))
        return self._dimension

    def values(self, ineq: BellInequality) -> tuple[np.ndarray, int]:
        """Integer numerators of ``ineq`` on every vertex, and their common denominator."""
        if ineq.scenario != self.scenario:
            raise ValueError("inequality belongs to another scenario")
        den = lcm(*(c.denominator for c in ineq.coefficients))
        nums = [int(c * den) for c in ineq.coefficients]
        big = max(abs(v) for v in nums) * self.scenario.num_inputs >= 2**62
        coeffs = np.array(nums, dtype=object if big else np.int64)
        return coeffs[self._cells].sum(axis=1), den


def local_dimension(scenario: Scenario, embedding: str = "auto") -> int:
    return LocalPolytope(scenario, embedding).dimension


def facet_check(ineq: BellInequality, embedding: str = "auto", polytope: LocalPolytope | None = None) -> FacetReport:
    """Validity and facet status of ``ineq`` against the deterministic vertices.

    Pass ``polytope`` to reuse vertices and ``D`` across many inequalities.
    """
    if ineq.bound_kind != "classical":
        raise ValueError("facet_check expects a classical bound")
    poly = polytope or LocalPolytope(ineq.scenario, embedding)
    dimension = poly.dimension
    values, den = poly.values(ineq)
    bound = ineq.bound * den
    if bound.denominator != 1:
        # Bound finer than every vertex value: nothing can saturate exactly.
        sat = np.zeros(len(values), dtype=bool)
    else:
        sat = values == int(bound)
    max_value = Fraction(int(max(values.tolist())), den)
    valid = max_value <= ineq.bound
    count = int(sat.sum())
    if count == 0:
        sat_dim = -1
    elif count == len(values):
        sat_dim = dimension
    elif valid:
        # A valid, non-constant inequality cuts the hull: D - 1 is an upper bound.
        sat_dim = affine_rank_bounded(poly.vertices[sat], dimension - 1)
    else:
        sat_dim = affine_rank(poly.vertices[sat])
    return FacetReport(
        ineq, dimension, count, sat_dim, valid, valid and sat_dim == dimension - 1, max_value, poly.embedding
    )


def generalized_promise_check(n: int, embedding: str = "auto") -> FacetReport:
    """Facet test for the game inequality with the parity-promise prior."""
    return facet_check(build_inequality(instance(n, "promise")), embedding)
