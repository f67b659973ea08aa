"""Balanced orientation of undirected metric graphs.

An undirected graph admits a balanced orientation exactly when every vertex
degree is even (self-loops counting twice, leads once).  The constructive
procedure walks free paths: starting from an unused lead it threads finite
edges until it exits through another lead (a lead-to-lead path), and once all
leads are used it peels closed walks (loops) off the remaining even-degree
graph.  Each traversal fixes the orientation of the edges it covers, so the
result is balanced by construction and the walks form an exact cover.

Choices are tie-broken to the lowest unused edge id, which makes ``orient``
deterministic.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

from .errors import InvalidGraph, NotBalanced, NotOrientable, OddLeadCount
from .graphs import (
    FiniteEdge,
    Lead,
    LeadDirection,
    MetricGraph,
    degree_profile,
    is_balanced,
    validate_graph,
)


@dataclass(frozen=True)
class UndirectedEdge:
    id: int
    u: int
    v: int
    length: float

    def other(self, vertex: int) -> int:
        return self.v if vertex == self.u else self.u


@dataclass(frozen=True)
class UnorientedLead:
    id: int
    anchor: int


@dataclass(frozen=True)
class UndirectedMetricGraph:
    """Metric graph before a direction has been chosen for any edge."""

    vertices: tuple[int, ...]
    edges: tuple[UndirectedEdge, ...] = ()
    leads: tuple[UnorientedLead, ...] = ()

    def __init__(self, vertices, edges=(), leads=()):
        object.__setattr__(self, "vertices", tuple(vertices))
        object.__setattr__(self, "edges", tuple(edges))
        object.__setattr__(self, "leads", tuple(leads))

    @cached_property
    def degrees(self) -> dict[int, int]:
        deg = {v: 0 for v in self.vertices}
        for e in self.edges:
            deg[e.u] += 1
            deg[e.v] += 1  # a self-loop counts twice
        for l in self.leads:
            deg[l.anchor] += 1
        return deg

    def validate(self) -> list[str]:
        bad = []
        vset = set(self.vertices)
        if vset and vset != set(range(len(self.vertices))):
            bad.append("vertex ids not densely numbered from 0")
        for e in self.edges:
            if not (e.length > 0.0):
                bad.append(f"non-positive length on edge {e.id}")
            if e.u not in vset or e.v not in vset:
                bad.append(f"unknown vertex on edge {e.id}")
        for l in self.leads:
            if l.anchor not in vset:
                bad.append(f"unknown vertex on lead {l.id}")
        ids = [e.id for e in self.edges] + [l.id for l in self.leads]
        if len(set(ids)) != len(ids):
            bad.append("duplicate edge ids")
        elif ids and set(ids) != set(range(len(ids))):
            bad.append("edge ids not densely numbered from 0")
        return bad


class PathKind(enum.Enum):
    LOOP = "loop"
    LEAD_TO_LEAD = "lead-to-lead"


@dataclass(frozen=True)
class PathStep:
    """One traversed edge; traversal always follows the final orientation."""

    edge: int
    reverse: bool = False


@dataclass(frozen=True)
class FreePath:
    kind: PathKind
    steps: tuple[PathStep, ...]
    total_length: float  # math.inf for lead-to-lead paths

    @property
    def edge_ids(self) -> tuple[int, ...]:
        return tuple(s.edge for s in self.steps)


@dataclass(frozen=True)
class PathDecomposition:
    """Partition of a balanced oriented graph into free paths."""

    paths: tuple[FreePath, ...]

    @property
    def loops(self) -> tuple[FreePath, ...]:
        return tuple(p for p in self.paths if p.kind is PathKind.LOOP)

    def covered_edges(self) -> list[int]:
        return [s.edge for p in self.paths for s in p.steps]

    def loop_lengths(self) -> tuple[float, ...]:
        return tuple(p.total_length for p in self.loops)


def check_orientable(g: UndirectedMetricGraph) -> bool:
    """True iff every vertex degree (self-loops twice, leads once) is even."""
    bad = g.validate()
    if bad:
        raise InvalidGraph("; ".join(bad))
    return all(d % 2 == 0 for d in g.degrees.values())


def orient(g: UndirectedMetricGraph) -> tuple[MetricGraph, PathDecomposition]:
    """Construct a balanced orientation together with its free-path cover.

    Raises ``NotOrientable`` when some vertex degree is odd and
    ``OddLeadCount`` when the number of leads is odd (on a finite graph the
    former implies the latter cannot occur alone, but both are checked).
    """
    if not check_orientable(g):
        odd = sorted(v for v, d in g.degrees.items() if d % 2)
        raise NotOrientable(f"odd degree at vertices {odd}")
    if len(g.leads) % 2:
        raise OddLeadCount(f"{len(g.leads)} leads cannot be paired")

    edges = {e.id: e for e in g.edges}
    # incident edge ids per vertex, ascending; self-loops listed once
    incident: dict[int, list[int]] = {v: [] for v in g.vertices}
    for e in sorted(g.edges, key=lambda e: e.id):
        incident[e.u].append(e.id)
        if e.v != e.u:
            incident[e.v].append(e.id)
    leads_at: dict[int, list[int]] = {v: [] for v in g.vertices}
    for l in sorted(g.leads, key=lambda l: l.id):
        leads_at[l.anchor].append(l.id)

    used_edges: set[int] = set()
    used_leads: set[int] = set()
    oriented: dict[int, FiniteEdge] = {}
    lead_dir: dict[int, LeadDirection] = {}
    paths: list[FreePath] = []

    def next_item(vertex: int, allow_leads: bool) -> int | None:
        """Lowest unused edge/lead id incident to ``vertex``."""
        best = None
        for eid in incident[vertex]:
            if eid not in used_edges:
                best = eid
                break
        if allow_leads:
            for lid in leads_at[vertex]:
                if lid not in used_leads and (best is None or lid < best):
                    best = lid
        return best

    def walk_edge(eid: int, vertex: int) -> int:
        """Orient ``eid`` away from ``vertex`` and return the far endpoint."""
        e = edges[eid]
        other = e.other(vertex)
        oriented[eid] = FiniteEdge(eid, vertex, other, e.length)
        used_edges.add(eid)
        return other

    # lead-to-lead paths first: enter at the lowest unused lead
    lead_ids = sorted(l.id for l in g.leads)
    anchor_of = {l.id: l.anchor for l in g.leads}
    for lid in lead_ids:
        if lid in used_leads:
            continue
        used_leads.add(lid)
        lead_dir[lid] = LeadDirection.INCOMING
        steps = [PathStep(lid)]
        current = anchor_of[lid]
        while True:
            item = next_item(current, allow_leads=True)
            if item is None:  # unreachable on even-degree graphs
                raise NotOrientable(f"walk stuck at vertex {current}")
            if item in edges:
                current = walk_edge(item, current)
                steps.append(PathStep(item))
            else:
                used_leads.add(item)
                lead_dir[item] = LeadDirection.OUTGOING
                steps.append(PathStep(item))
                break
        paths.append(FreePath(PathKind.LEAD_TO_LEAD, tuple(steps), math.inf))

    # remaining graph has even degree everywhere: peel loops, closing each
    # walk at its first return to the start vertex
    for pivot in sorted(g.vertices):
        while next_item(pivot, allow_leads=False) is not None:
            steps = []
            current = pivot
            while True:
                item = next_item(current, allow_leads=False)
                if item is None:  # defensive; parity forbids this off-pivot
                    raise NotOrientable(f"open walk ended at vertex {current}")
                current = walk_edge(item, current)
                steps.append(PathStep(item))
                if current == pivot:
                    break
            length = sum(edges[s.edge].length for s in steps)
            paths.append(FreePath(PathKind.LOOP, tuple(steps), length))

    result = MetricGraph(
        vertices=g.vertices,
        finite_edges=tuple(oriented[eid] for eid in sorted(oriented)),
        leads=tuple(Lead(lid, anchor_of[lid], lead_dir[lid]) for lid in lead_ids),
    )
    return result, PathDecomposition(tuple(paths))


def decompose_free_paths(g: MetricGraph) -> PathDecomposition:
    """Cover a balanced oriented graph by free paths along its orientation."""
    if not is_balanced(g):
        raise NotBalanced("graph is not balanced")

    used: set[int] = set()
    paths: list[FreePath] = []

    def next_out(vertex: int, allow_leads: bool) -> int | None:
        for eid in g.outgoing_ends(vertex):
            if eid in used:
                continue
            if g.is_lead(eid) and not allow_leads:
                continue
            return eid
        return None

    for l in sorted(g.leads, key=lambda l: l.id):
        if l.outgoing or l.id in used:
            continue
        used.add(l.id)
        steps = [PathStep(l.id)]
        current = l.anchor
        while True:
            eid = next_out(current, allow_leads=True)
            if eid is None:
                raise NotBalanced(f"walk stuck at vertex {current}")
            used.add(eid)
            steps.append(PathStep(eid))
            if g.is_lead(eid):
                break
            current = g.finite_edge(eid).end
        paths.append(FreePath(PathKind.LEAD_TO_LEAD, tuple(steps), math.inf))

    for pivot in sorted(g.vertices):
        while next_out(pivot, allow_leads=False) is not None:
            steps = []
            current = pivot
            while True:
                eid = next_out(current, allow_leads=False)
                if eid is None:
                    raise NotBalanced(f"open walk ended at vertex {current}")
                used.add(eid)
                steps.append(PathStep(eid))
                current = g.finite_edge(eid).end
                if current == pivot:
                    break
            length = sum(g.finite_edge(s.edge).length for s in steps)
            paths.append(FreePath(PathKind.LOOP, tuple(steps), length))

    return PathDecomposition(tuple(paths))


def enumerate_orientations(g: UndirectedMetricGraph, cap: int) -> list[MetricGraph]:
    """All balanced orientations of ``g``, up to ``cap`` of them.

    Brute force over the two directions of every non-loop edge and every
    lead; a self-loop has a single representation (start == end) and is not
    flipped.  Intended for desk-scale graphs only.
    """
    if not check_orientable(g):
        raise NotOrientable("graph has a vertex of odd degree")

    flippable = [e for e in sorted(g.edges, key=lambda e: e.id) if e.u != e.v]
    loops = [e for e in g.edges if e.u == e.v]
    lead_list = sorted(g.leads, key=lambda l: l.id)

    found: list[MetricGraph] = []
    for bits in itertools.product((0, 1), repeat=len(flippable) + len(lead_list)):
        fe = [FiniteEdge(e.id, e.u, e.v, e.length) for e in loops]
        for b, e in zip(bits, flippable):
            fe.append(
                FiniteEdge(e.id, e.u, e.v, e.length)
                if b == 0
                else FiniteEdge(e.id, e.v, e.u, e.length)
            )
        leads = [
            Lead(l.id, l.anchor, LeadDirection.OUTGOING if b == 0 else LeadDirection.INCOMING)
            for b, l in zip(bits[len(flippable):], lead_list)
        ]
        candidate = MetricGraph(
            vertices=g.vertices,
            finite_edges=tuple(sorted(fe, key=lambda e: e.id)),
            leads=tuple(leads),
        )
        if is_balanced(candidate):
            found.append(candidate)
            if len(found) >= cap:
                break
    return found
