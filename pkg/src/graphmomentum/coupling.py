"""Vertex couplings and assembled momentum operators.

A momentum operator acts as ``-i d/dx`` on every edge of a balanced oriented
metric graph and is pinned down by one unitary matrix per vertex relating the
boundary values of outgoing edge ends to those of incoming ones,
``psi_out = U psi_in``.  The ordering of the ends inside each coupling is
explicit data; the canonical order puts finite edges before leads, ascending
by edge id.

Beyond assembly and validation this module detects reducibility: a vertex
whose matrix is block diagonal after row/column permutations splits into
independent sub-vertices, and propagating the splits through the graph
decomposes the operator into independent parts supported on edge-disjoint
subgraphs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    BoundaryIndexMismatch,
    CompactGraphRequired,
    InvalidCoupling,
    MissingVertexCoupling,
    NotBalanced,
)
from .graphs import (
    FiniteEdge,
    Lead,
    MetricGraph,
    ValidationReport,
    is_balanced,
    require_valid,
)
from .orientation import PathDecomposition, PathKind

UNITARITY_TOL = 1e-12
STRUCTURAL_ZERO_TOL = 1e-14


def _frozen_matrix(matrix) -> np.ndarray:
    m = np.array(matrix, dtype=complex)
    if m.ndim != 2:
        raise InvalidCoupling(f"coupling matrix must be 2-d, got shape {m.shape}")
    m.setflags(write=False)
    return m


@dataclass(frozen=True, eq=False)
class VertexCoupling:
    """Unitary relation ``out_values = matrix @ in_values`` at one vertex."""

    vertex: int
    out_order: tuple[int, ...]
    in_order: tuple[int, ...]
    matrix: np.ndarray

    def __init__(self, vertex, out_order, in_order, matrix):
        object.__setattr__(self, "vertex", int(vertex))
        object.__setattr__(self, "out_order", tuple(out_order))
        object.__setattr__(self, "in_order", tuple(in_order))
        object.__setattr__(self, "matrix", _frozen_matrix(matrix))

    def __eq__(self, other) -> bool:
        if not isinstance(other, VertexCoupling):
            return NotImplemented
        return (
            self.vertex == other.vertex
            and self.out_order == other.out_order
            and self.in_order == other.in_order
            and self.matrix.shape == other.matrix.shape
            and bool(np.array_equal(self.matrix, other.matrix))
        )

    def out_index(self, edge_id: int) -> int:
        return self.out_order.index(edge_id)

    def in_index(self, edge_id: int) -> int:
        return self.in_order.index(edge_id)

    def entry(self, out_edge: int, in_edge: int) -> complex:
        return complex(self.matrix[self.out_index(out_edge), self.in_index(in_edge)])


def canonical_orders(g: MetricGraph, vertex: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Finite-before-lead, ascending-id ordering of the ends at ``vertex``."""
    return g.outgoing_ends(vertex), g.incoming_ends(vertex)


def validate_coupling(c: VertexCoupling, tol: float = UNITARITY_TOL) -> ValidationReport:
    """Check dimensions and unitarity (max-norm deviation of U*U from I)."""
    bad: list[str] = []
    rows, cols = c.matrix.shape
    if rows != len(c.out_order) or cols != len(c.in_order):
        bad.append(
            f"matrix shape {rows}x{cols} does not match orders "
            f"{len(c.out_order)}x{len(c.in_order)}"
        )
    if rows != cols:
        bad.append(f"dimension mismatch {rows}x{cols} (unbalanced vertex)")
    elif rows > 0:
        dev = np.abs(c.matrix.conj().T @ c.matrix - np.eye(rows)).max()
        if not (dev <= tol):
            bad.append(f"not unitary (deviation {dev:.3e} > {tol:.1e})")
    if len(set(c.out_order)) != len(c.out_order) or len(set(c.in_order)) != len(c.in_order):
        bad.append("repeated edge id in coupling order")
    return ValidationReport(tuple(bad))


@dataclass(frozen=True)
class MomentumOperator:
    """Balanced oriented graph plus one valid coupling per vertex."""

    graph: MetricGraph
    couplings: tuple[VertexCoupling, ...]

    @cached_property
    def _by_vertex(self) -> dict[int, VertexCoupling]:
        return {c.vertex: c for c in self.couplings}

    def coupling_at(self, vertex: int) -> VertexCoupling:
        return self._by_vertex[vertex]

    @cached_property
    def out_position(self) -> dict[int, tuple[int, int]]:
        """edge id -> (vertex, row index) of its outgoing end."""
        pos = {}
        for c in self.couplings:
            for i, eid in enumerate(c.out_order):
                pos[eid] = (c.vertex, i)
        return pos

    @cached_property
    def in_position(self) -> dict[int, tuple[int, int]]:
        """edge id -> (vertex, column index) of its incoming end."""
        pos = {}
        for c in self.couplings:
            for i, eid in enumerate(c.in_order):
                pos[eid] = (c.vertex, i)
        return pos


def assemble(g: MetricGraph, couplings: Iterable[VertexCoupling]) -> MomentumOperator:
    """Build a momentum operator, verifying balance and coupling consistency."""
    require_valid(g)
    if not is_balanced(g):
        raise NotBalanced("momentum operators require a balanced graph")
    cs = tuple(couplings)
    seen = [c.vertex for c in cs]
    if len(set(seen)) != len(seen):
        raise MissingVertexCoupling(f"duplicate coupling for vertices {sorted(seen)}")
    missing = set(g.vertices) - set(seen)
    if missing:
        raise MissingVertexCoupling(f"no coupling for vertices {sorted(missing)}")
    for c in cs:
        if set(c.out_order) != set(g.outgoing_ends(c.vertex)):
            raise InvalidCoupling(
                f"out_order at vertex {c.vertex} does not match the outgoing ends"
            )
        if set(c.in_order) != set(g.incoming_ends(c.vertex)):
            raise InvalidCoupling(
                f"in_order at vertex {c.vertex} does not match the incoming ends"
            )
        report = validate_coupling(c)
        if not report.ok:
            raise InvalidCoupling(
                f"vertex {c.vertex}: " + "; ".join(report.violations)
            )
    return MomentumOperator(graph=g, couplings=tuple(sorted(cs, key=lambda c: c.vertex)))


@dataclass(frozen=True)
class BoundaryVector:
    """Boundary values keyed by edge id.

    ``out_values[e]`` is the value at the outgoing end of edge ``e`` (x = 0+
    for finite edges and outgoing leads); ``in_values[e]`` the value at the
    incoming end (x = length- for finite edges, x = 0- for incoming leads).
    """

    out_values: Mapping[int, complex]
    in_values: Mapping[int, complex]


def apply_vertex_conditions(op: MomentumOperator, b: BoundaryVector) -> float:
    """Max over vertices of ``|psi_out - U psi_in|_inf``; 0 means satisfied."""
    worst = 0.0
    for c in op.couplings:
        try:
            out = np.array([b.out_values[e] for e in c.out_order], dtype=complex)
            inn = np.array([b.in_values[e] for e in c.in_order], dtype=complex)
        except KeyError as exc:
            raise BoundaryIndexMismatch(
                f"boundary value missing for edge {exc.args[0]} at vertex {c.vertex}"
            ) from None
        if len(out) == 0:
            continue
        worst = max(worst, float(np.abs(out - c.matrix @ inn).max()))
    return worst


def irreducible_blocks(
    c: VertexCoupling, zero_tol: float = STRUCTURAL_ZERO_TOL
) -> list[VertexCoupling]:
    """Split a coupling into the blocks of its nonzero pattern.

    Entries with modulus <= ``zero_tol`` are treated as structural zeros.
    Rows and columns connected through nonzero entries end up in the same
    block; for a unitary matrix every block is square and unitary.  The
    result is a singleton exactly when the coupling is locally irreducible.
    """
    n = len(c.out_order)
    if n <= 1:
        return [c]
    parent = list(range(2 * n))  # rows 0..n-1, columns n..2n-1

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i: int, j: int) -> None:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    nonzero = np.abs(c.matrix) > zero_tol
    for i in range(n):
        for j in range(n):
            if nonzero[i, j]:
                union(i, n + j)

    groups: dict[int, tuple[list[int], list[int]]] = {}
    for i in range(n):
        groups.setdefault(find(i), ([], []))[0].append(i)
    for j in range(n):
        groups.setdefault(find(n + j), ([], []))[1].append(j)

    blocks = []
    for root in sorted(groups):
        rows, cols = groups[root]
        if len(rows) != len(cols):
            raise InvalidCoupling(
                f"vertex {c.vertex}: non-square block ({len(rows)}x{len(cols)}); "
                f"zero tolerance {zero_tol:.1e} is inconsistent with unitarity"
            )
        blocks.append(
            VertexCoupling(
                vertex=c.vertex,
                out_order=tuple(c.out_order[i] for i in rows),
                in_order=tuple(c.in_order[j] for j in cols),
                matrix=c.matrix[np.ix_(rows, cols)],
            )
        )
    return blocks


@dataclass(frozen=True)
class OperatorComponent:
    """One independent part of a decomposed operator, with id mappings."""

    operator: MomentumOperator
    edge_map: dict[int, int]  # new edge id -> original edge id
    vertex_map: dict[int, tuple[int, tuple[int, ...]]]  # new vertex -> (orig vertex, orig out ids)


def _decompose(op: MomentumOperator) -> list[OperatorComponent]:
    g = op.graph
    blocks = [b for c in op.couplings for b in irreducible_blocks(c)]

    edge_ids = [e.id for e in g.finite_edges] + [l.id for l in g.leads]
    parent = {eid: eid for eid in edge_ids}

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i: int, j: int) -> None:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    for b in blocks:
        members = list(b.out_order) + list(b.in_order)
        for other in members[1:]:
            union(members[0], other)

    comp_edges: dict[int, list[int]] = {}
    for eid in edge_ids:
        comp_edges.setdefault(find(eid), []).append(eid)

    components = []
    for root in sorted(comp_edges):
        edges = set(comp_edges[root])
        sub_blocks = [
            b for b in blocks if (set(b.out_order) | set(b.in_order)) & edges
        ]
        sub_blocks.sort(key=lambda b: (b.vertex, min(b.out_order + b.in_order)))
        new_vertex = {id(b): i for i, b in enumerate(sub_blocks)}
        old_edges = sorted(edges)
        new_edge = {old: new for new, old in enumerate(old_edges)}

        vertex_of_out = {e: new_vertex[id(b)] for b in sub_blocks for e in b.out_order}
        vertex_of_in = {e: new_vertex[id(b)] for b in sub_blocks for e in b.in_order}

        fes, leads = [], []
        for old in old_edges:
            if g.is_lead(old):
                l = g.lead(old)
                anchor = vertex_of_out[old] if l.outgoing else vertex_of_in[old]
                leads.append(Lead(new_edge[old], anchor, l.direction))
            else:
                e = g.finite_edge(old)
                fes.append(
                    FiniteEdge(new_edge[old], vertex_of_out[old], vertex_of_in[old], e.length)
                )
        couplings = [
            VertexCoupling(
                vertex=new_vertex[id(b)],
                out_order=tuple(new_edge[e] for e in b.out_order),
                in_order=tuple(new_edge[e] for e in b.in_order),
                matrix=b.matrix,
            )
            for b in sub_blocks
        ]
        sub = MetricGraph(
            vertices=range(len(sub_blocks)),
            finite_edges=tuple(fes),
            leads=tuple(leads),
        )
        components.append(
            OperatorComponent(
                operator=assemble(sub, couplings),
                edge_map={new: old for old, new in new_edge.items()},
                vertex_map={
                    new_vertex[id(b)]: (b.vertex, b.out_order) for b in sub_blocks
                },
            )
        )
    return components


def decompose_operator(op: MomentumOperator) -> list[MomentumOperator]:
    """Split the operator into independent parts; singleton iff indecomposable.

    Every vertex is first split into the irreducible blocks of its coupling;
    the connected components of the resulting graph then carry independent
    momentum operators whose graphs partition the edges and leads.
    """
    return [c.operator for c in _decompose(op)]


def decompose_operator_with_maps(op: MomentumOperator) -> list[OperatorComponent]:
    """Like ``decompose_operator`` but keeps edge/vertex id mappings."""
    return _decompose(op)


def reference_decoupled(op: MomentumOperator, d: PathDecomposition) -> MomentumOperator:
    """Permutation-coupled operator routing each loop of ``d`` onto itself.

    The resulting couplings are 0/1 matrices that connect every loop edge
    smoothly to its successor in the loop, so the operator decomposes into
    the loops of the given cover.  Defined for compact graphs only.
    """
    g = op.graph
    if g.leads:
        raise CompactGraphRequired("reference decoupling needs a graph without leads")
    if any(p.kind is not PathKind.LOOP for p in d.paths):
        raise CompactGraphRequired("the decomposition must consist of loops")

    routes: dict[int, dict[tuple[int, int], float]] = {
        c.vertex: {} for c in op.couplings
    }
    for path in d.paths:
        ids = path.edge_ids
        for prev, nxt in zip(ids, ids[1:] + ids[:1]):
            v = g.finite_edge(prev).end
            if g.finite_edge(nxt).start != v:
                raise CompactGraphRequired(
                    f"loop steps {prev}->{nxt} do not share a vertex"
                )
            routes[v][(nxt, prev)] = 1.0

    couplings = []
    for c in op.couplings:
        m = np.zeros((len(c.out_order), len(c.in_order)), dtype=complex)
        for (out_e, in_e), val in routes[c.vertex].items():
            m[c.out_index(out_e), c.in_index(in_e)] = val
        couplings.append(VertexCoupling(c.vertex, c.out_order, c.in_order, m))
    return assemble(g, couplings)
