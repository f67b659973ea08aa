"""Immutable data model for oriented metric graphs.

A graph consists of vertices (dense integer ids), finite edges carrying a
positive length and an orientation (``start`` -> ``end``), and semi-infinite
leads anchored at a vertex.  Outgoing leads are parametrized by ``[0, inf)``
with 0 at the anchor, incoming ones by ``(-inf, 0]`` with 0 at the anchor, so
forward motion always means increasing coordinate.

Finite edges and leads share one dense edge-id space.  Multigraphs and
self-loops are first class; a self-loop contributes one incoming and one
outgoing end to its vertex.

All types are frozen; every operation here is a pure function, safe to call
concurrently on shared graphs.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

from .errors import InvalidGraph


class LeadDirection(enum.Enum):
    OUTGOING = "outgoing"
    INCOMING = "incoming"


@dataclass(frozen=True)
class FiniteEdge:
    """Oriented edge of positive length, parametrized by ``[0, length]``."""

    id: int
    start: int
    end: int
    length: float


@dataclass(frozen=True)
class Lead:
    """Semi-infinite edge attached to ``anchor``."""

    id: int
    anchor: int
    direction: LeadDirection

    @property
    def outgoing(self) -> bool:
        return self.direction is LeadDirection.OUTGOING


@dataclass(frozen=True)
class GraphPoint:
    """A point on an edge, in that edge's own coordinate."""

    edge: int
    coordinate: float


@dataclass(frozen=True)
class VertexDegrees:
    """In/out counts of finite edges and leads at one vertex."""

    fin_in: int = 0
    fin_out: int = 0
    inf_in: int = 0
    inf_out: int = 0

    @property
    def total(self) -> int:
        return self.fin_in + self.fin_out + self.inf_in + self.inf_out

    @property
    def in_total(self) -> int:
        return self.fin_in + self.inf_in

    @property
    def out_total(self) -> int:
        return self.fin_out + self.inf_out

    @property
    def balanced(self) -> bool:
        # Unitary couplings relate all outgoing boundary values at a vertex
        # to all incoming ones, so the counts must match in total; finite
        # edges and leads may compensate each other (a lead can continue
        # into a finite edge).
        return self.in_total == self.out_total


@dataclass(frozen=True)
class DegreeProfile:
    """Per-vertex degree counts plus the global edge-end totals."""

    per_vertex: tuple[VertexDegrees, ...]
    n_fin: int
    n_inf_out: int
    n_inf_in: int

    def at(self, vertex: int) -> VertexDegrees:
        return self.per_vertex[vertex]


@dataclass(frozen=True)
class ValidationReport:
    """List of rule violations; empty means the object is admissible."""

    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class MetricGraph:
    """Finite oriented metric graph, possibly with semi-infinite leads."""

    vertices: tuple[int, ...]
    finite_edges: tuple[FiniteEdge, ...] = ()
    leads: tuple[Lead, ...] = ()

    def __init__(
        self,
        vertices: Iterable[int],
        finite_edges: Iterable[FiniteEdge] = (),
        leads: Iterable[Lead] = (),
    ):
        object.__setattr__(self, "vertices", tuple(vertices))
        object.__setattr__(self, "finite_edges", tuple(finite_edges))
        object.__setattr__(self, "leads", tuple(leads))

    # -- lookups ---------------------------------------------------------

    @cached_property
    def _edge_map(self) -> dict[int, FiniteEdge]:
        return {e.id: e for e in self.finite_edges}

    @cached_property
    def _lead_map(self) -> dict[int, Lead]:
        return {l.id: l for l in self.leads}

    @property
    def n_edges(self) -> int:
        return len(self.finite_edges) + len(self.leads)

    def finite_edge(self, edge_id: int) -> FiniteEdge:
        return self._edge_map[edge_id]

    def lead(self, edge_id: int) -> Lead:
        return self._lead_map[edge_id]

    def is_lead(self, edge_id: int) -> bool:
        return edge_id in self._lead_map

    def edge_ids(self) -> tuple[int, ...]:
        return tuple(sorted(self._edge_map) + sorted(self._lead_map))

    @property
    def compact(self) -> bool:
        return not self.leads

    # -- incident edge ends, in the canonical finite-before-lead order ---

    @cached_property
    def _outgoing_ends(self) -> dict[int, tuple[int, ...]]:
        ends: dict[int, list[int]] = {v: [] for v in self.vertices}
        for e in sorted(self.finite_edges, key=lambda e: e.id):
            ends.setdefault(e.start, []).append(e.id)
        for l in sorted(self.leads, key=lambda l: l.id):
            if l.outgoing:
                ends.setdefault(l.anchor, []).append(l.id)
        return {v: tuple(ids) for v, ids in ends.items()}

    @cached_property
    def _incoming_ends(self) -> dict[int, tuple[int, ...]]:
        ends: dict[int, list[int]] = {v: [] for v in self.vertices}
        for e in sorted(self.finite_edges, key=lambda e: e.id):
            ends.setdefault(e.end, []).append(e.id)
        for l in sorted(self.leads, key=lambda l: l.id):
            if not l.outgoing:
                ends.setdefault(l.anchor, []).append(l.id)
        return {v: tuple(ids) for v, ids in ends.items()}

    def outgoing_ends(self, vertex: int) -> tuple[int, ...]:
        """Edge ids whose outgoing end (coordinate 0) sits at ``vertex``."""
        return self._outgoing_ends.get(vertex, ())

    def incoming_ends(self, vertex: int) -> tuple[int, ...]:
        """Edge ids whose incoming end sits at ``vertex``."""
        return self._incoming_ends.get(vertex, ())

    # -- point geometry --------------------------------------------------

    def contains_point(self, p: GraphPoint) -> bool:
        if p.edge in self._edge_map:
            return 0.0 <= p.coordinate <= self._edge_map[p.edge].length
        if p.edge in self._lead_map:
            if self._lead_map[p.edge].outgoing:
                return p.coordinate >= 0.0
            return p.coordinate <= 0.0
        return False


def validate_graph(g: MetricGraph) -> ValidationReport:
    """Collect all structural violations of ``g`` (empty report = valid)."""
    bad: list[str] = []
    vset = set(g.vertices)
    if len(vset) != len(g.vertices):
        bad.append("duplicate vertex ids")
    if vset and vset != set(range(len(vset))):
        bad.append("vertex ids not densely numbered from 0")
    if any(v < 0 for v in vset):
        bad.append("negative vertex id")

    ids = [e.id for e in g.finite_edges] + [l.id for l in g.leads]
    if len(set(ids)) != len(ids):
        bad.append("duplicate edge ids")
    elif ids and set(ids) != set(range(len(ids))):
        bad.append("edge ids not densely numbered from 0")

    for e in g.finite_edges:
        if not (e.length > 0.0):
            bad.append(f"non-positive length on edge {e.id}")
        for v in (e.start, e.end):
            if v not in vset:
                bad.append(f"unknown vertex {v} on edge {e.id}")
    for l in g.leads:
        if l.anchor not in vset:
            bad.append(f"unknown vertex {l.anchor} on lead {l.id}")

    touched = {e.start for e in g.finite_edges} | {e.end for e in g.finite_edges}
    touched |= {l.anchor for l in g.leads}
    for v in sorted(vset - touched):
        bad.append(f"isolated vertex {v}")
    return ValidationReport(tuple(bad))


def require_valid(g: MetricGraph) -> None:
    report = validate_graph(g)
    if not report.ok:
        raise InvalidGraph("; ".join(report.violations))


def degree_profile(g: MetricGraph) -> DegreeProfile:
    """Count incident edge ends per vertex; rejects invalid graphs."""
    require_valid(g)
    counts = {v: [0, 0, 0, 0] for v in g.vertices}  # fin_in, fin_out, inf_in, inf_out
    for e in g.finite_edges:
        counts[e.end][0] += 1
        counts[e.start][1] += 1
    for l in g.leads:
        if l.outgoing:
            counts[l.anchor][3] += 1
        else:
            counts[l.anchor][2] += 1
    per_vertex = tuple(
        VertexDegrees(fin_in=c[0], fin_out=c[1], inf_in=c[2], inf_out=c[3])
        for _, c in sorted(counts.items())
    )
    return DegreeProfile(
        per_vertex=per_vertex,
        n_fin=len(g.finite_edges),
        n_inf_out=sum(1 for l in g.leads if l.outgoing),
        n_inf_in=sum(1 for l in g.leads if not l.outgoing),
    )


def is_balanced(g: MetricGraph) -> bool:
    """True iff incoming and outgoing edge ends match in number at every vertex.

    This is exactly the condition under which momentum operators exist: the
    per-vertex boundary-value spaces have equal dimension, so a unitary can
    relate them.
    """
    return all(d.balanced for d in degree_profile(g).per_vertex)


def total_length(g: MetricGraph) -> float:
    """Sum of the finite edge lengths (leads do not contribute)."""
    return float(sum(e.length for e in g.finite_edges))


def min_edge_length(g: MetricGraph) -> float:
    if not g.finite_edges:
        return float("inf")
    return min(e.length for e in g.finite_edges)


def reverse_orientation(g: MetricGraph) -> MetricGraph:
    """Flip every edge and lead direction; preserves balance."""
    flipped = {
        LeadDirection.OUTGOING: LeadDirection.INCOMING,
        LeadDirection.INCOMING: LeadDirection.OUTGOING,
    }
    return MetricGraph(
        vertices=g.vertices,
        finite_edges=tuple(
            FiniteEdge(e.id, e.end, e.start, e.length) for e in g.finite_edges
        ),
        leads=tuple(Lead(l.id, l.anchor, flipped[l.direction]) for l in g.leads),
    )
