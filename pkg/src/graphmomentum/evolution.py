"""Shift group generated by a momentum operator.

The group acts by pulling values backward along the orientation: the value of
the evolved function at ``x`` is a sum over all orientation-respecting routes
of length ``a`` that end at ``x``, each contributing the packet value at the
route's start times the route factor (the product of the coupling entries
picked up at every vertex passed).  Negative times use forward routes with
conjugated entries, which realizes the inverse of the forward map.

Evaluation is undefined on the countable set of points whose route starts hit
a vertex exactly; packet closures produced here sidestep it by a tiny jitter.
Everything operates on immutable data, and evaluation points are independent,
so concurrent per-point use is safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .coupling import BoundaryVector, MomentumOperator, apply_vertex_conditions
from .errors import DomainViolation, ExplosionCapExceeded, VertexHit
from .graphs import GraphPoint, MetricGraph, min_edge_length

ROUTE_CAP = 10**6


@dataclass(frozen=True)
class RouteHop:
    """One vertex passage, entering via ``in_edge`` and leaving via ``out_edge``."""

    vertex: int
    in_edge: int
    out_edge: int


@dataclass(frozen=True)
class Route:
    """Orientation-respecting journey of length ``length`` ending at ``end``."""

    end: GraphPoint
    hops: tuple[RouteHop, ...]
    start: GraphPoint
    length: float


@dataclass(frozen=True)
class RouteFactor:
    route: Route
    factor: complex


@dataclass(frozen=True)
class EvolvedValue:
    point: GraphPoint
    value: complex


@dataclass(frozen=True)
class PacketComponent:
    """Complex profile on one edge with a declared support interval."""

    edge: int
    profile: Callable[[float], complex]
    support: tuple[float, float]
    derivative: Callable[[float], complex] | None = None

    def value(self, x: float) -> complex:
        lo, hi = self.support
        if lo <= x <= hi:
            return complex(self.profile(x))
        return 0.0

    def derivative_value(self, x: float) -> complex:
        if self.derivative is None:
            raise ValueError(f"component on edge {self.edge} has no derivative")
        lo, hi = self.support
        if lo <= x <= hi:
            return complex(self.derivative(x))
        return 0.0


@dataclass(frozen=True)
class WavePacket:
    """Finitely many edge-local components; profiles are evaluated lazily."""

    components: tuple[PacketComponent, ...]

    def __init__(self, components: Iterable[PacketComponent]):
        object.__setattr__(self, "components", tuple(components))

    def on_edge(self, edge: int) -> tuple[PacketComponent, ...]:
        return tuple(c for c in self.components if c.edge == edge)

    def edges(self) -> tuple[int, ...]:
        return tuple(sorted({c.edge for c in self.components}))

    def value(self, edge: int, x: float) -> complex:
        return sum((c.value(x) for c in self.on_edge(edge)), 0.0)

    def derivative(self, edge: int, x: float) -> complex:
        return sum((c.derivative_value(x) for c in self.on_edge(edge)), 0.0)

    def scaled(self, factor: complex) -> "WavePacket":
        def scale(c: PacketComponent) -> PacketComponent:
            prof = c.profile
            deriv = c.derivative
            return replace(
                c,
                profile=lambda x, _p=prof: factor * _p(x),
                derivative=None if deriv is None else (lambda x, _d=deriv: factor * _d(x)),
            )

        return WavePacket(tuple(scale(c) for c in self.components))


# ---------------------------------------------------------------------------
# route enumeration


def _interior_point(g: MetricGraph, p: GraphPoint) -> None:
    if not g.contains_point(p):
        raise ValueError(f"point {p} lies outside the graph")
    if g.is_lead(p.edge):
        if p.coordinate == 0.0:
            raise VertexHit(f"point {p} sits at the lead anchor")
    else:
        e = g.finite_edge(p.edge)
        if p.coordinate == 0.0 or p.coordinate == e.length:
            raise VertexHit(f"point {p} sits at a vertex")


def _backward_gap(g: MetricGraph, edge: int, t: float) -> tuple[float, int | None]:
    """Distance from ``(edge, t)`` back to the previous vertex, and that vertex."""
    if g.is_lead(edge):
        l = g.lead(edge)
        if l.outgoing:
            return t, l.anchor
        return math.inf, None  # incoming leads extend backward forever
    e = g.finite_edge(edge)
    return t, e.start


def _forward_gap(g: MetricGraph, edge: int, t: float) -> tuple[float, int | None]:
    """Distance from ``(edge, t)`` forward to the next vertex, and that vertex."""
    if g.is_lead(edge):
        l = g.lead(edge)
        if l.outgoing:
            return math.inf, None
        return -t, l.anchor
    e = g.finite_edge(edge)
    return e.length - t, e.end


def routes_to_point(
    op: MomentumOperator, x: GraphPoint, a: float, cap: int = ROUTE_CAP
) -> list[RouteFactor]:
    """All routes of length ``a >= 0`` ending at ``x``, with their factors.

    Routes whose factor vanishes exactly are pruned.  Raises ``VertexHit``
    when ``x`` or any route start lands on a vertex and
    ``ExplosionCapExceeded`` beyond ``cap`` routes.
    """
    if a < 0:
        raise ValueError("route length must be non-negative")
    g = op.graph
    _interior_point(g, x)

    results: list[RouteFactor] = []
    stack: list[tuple[int, float, float, complex, tuple[RouteHop, ...]]] = [
        (x.edge, x.coordinate, float(a), 1.0 + 0.0j, ())
    ]
    while stack:
        edge, t, budget, factor, hops = stack.pop()
        gap, vertex = _backward_gap(g, edge, t)
        if budget < gap:
            start = GraphPoint(edge, t - budget)
            results.append(
                RouteFactor(
                    Route(end=x, hops=tuple(reversed(hops)), start=start, length=a),
                    factor,
                )
            )
            continue
        if budget == gap:
            raise VertexHit(
                f"a route of length {a} ending at {x} starts exactly at vertex {vertex}"
            )
        c = op.coupling_at(vertex)
        row = c.out_index(edge)
        for col, in_edge in enumerate(c.in_order):
            entry = complex(c.matrix[row, col])
            if entry == 0.0:
                continue
            if g.is_lead(in_edge):
                t_in = 0.0
            else:
                t_in = g.finite_edge(in_edge).length
            stack.append(
                (
                    in_edge,
                    t_in,
                    budget - gap,
                    factor * entry,
                    hops + (RouteHop(vertex, in_edge, edge),),
                )
            )
        if len(results) + len(stack) > cap:
            raise ExplosionCapExceeded(f"more than {cap} routes to {x}")
    return results


def _forward_sum(
    op: MomentumOperator, psi: WavePacket, x: GraphPoint, a: float, cap: int
) -> complex:
    """Inverse-evolution value: sum of conj(factor) * psi(route end)."""
    g = op.graph
    _interior_point(g, x)
    total = 0.0 + 0.0j
    stack = [(x.edge, x.coordinate, float(a), 1.0 + 0.0j)]
    visited = 0
    while stack:
        edge, t, budget, factor = stack.pop()
        visited += 1
        if visited > cap:
            raise ExplosionCapExceeded(f"more than {cap} routes from {x}")
        gap, vertex = _forward_gap(g, edge, t)
        if budget < gap:
            total += factor.conjugate() * psi.value(edge, t + budget)
            continue
        if budget == gap:
            raise VertexHit(
                f"a route of length {a} starting at {x} ends exactly at vertex {vertex}"
            )
        c = op.coupling_at(vertex)
        col = c.in_index(edge)
        for row, out_edge in enumerate(c.out_order):
            entry = complex(c.matrix[row, col])
            if entry == 0.0:
                continue
            stack.append((out_edge, 0.0, budget - gap, factor * entry))
    return total


def evolve_at(
    op: MomentumOperator,
    psi: WavePacket,
    a: float,
    x: GraphPoint,
    cap: int = ROUTE_CAP,
) -> EvolvedValue:
    """Value of the evolved packet at ``x``; ``a`` may be negative."""
    if a >= 0:
        value = sum(
            (rf.factor * psi.value(rf.route.start.edge, rf.route.start.coordinate)
             for rf in routes_to_point(op, x, a, cap)),
            0.0 + 0.0j,
        )
    else:
        value = _forward_sum(op, psi, x, -a, cap)
    return EvolvedValue(point=x, value=complex(value))


# ---------------------------------------------------------------------------
# support transport


def _support_images(
    op: MomentumOperator, psi: WavePacket, a: float, cap: int = ROUTE_CAP
) -> dict[int, list[tuple[float, float]]]:
    """Per-edge intervals containing the support of the evolved packet."""
    g = op.graph
    forward = a >= 0
    shift = float(a)
    flows: list[tuple[int, float, float]] = []
    for comp in psi.components:
        lo, hi = comp.support
        flows.append((comp.edge, lo + shift, hi + shift))

    images: dict[int, list[tuple[float, float]]] = {}
    guard = 0
    while flows:
        guard += 1
        if guard > cap:
            raise ExplosionCapExceeded("support propagation exceeded the route cap")
        edge, lo, hi = flows.pop()
        if hi <= lo:
            continue
        if g.is_lead(edge):
            outgoing = g.lead(edge).outgoing
            lower, upper = (0.0, math.inf) if outgoing else (-math.inf, 0.0)
        else:
            lower, upper = 0.0, g.finite_edge(edge).length

        vis_lo, vis_hi = max(lo, lower), min(hi, upper)
        if vis_hi > vis_lo:
            images.setdefault(edge, []).append((vis_lo, vis_hi))

        if forward and hi > upper:  # spills over the next vertex
            excess_lo, excess_hi = max(lo, upper) - upper, hi - upper
            vertex = g.finite_edge(edge).end if not g.is_lead(edge) else g.lead(edge).anchor
            c = op.coupling_at(vertex)
            col = c.in_index(edge)
            for row, out_edge in enumerate(c.out_order):
                if complex(c.matrix[row, col]) == 0.0:
                    continue
                flows.append((out_edge, excess_lo, excess_hi))
        elif not forward and lo < lower:  # spills backward over the previous vertex
            excess_lo, excess_hi = lower - min(hi, lower), lower - lo
            vertex = g.finite_edge(edge).start if not g.is_lead(edge) else g.lead(edge).anchor
            c = op.coupling_at(vertex)
            row = c.out_index(edge)
            for col, in_edge in enumerate(c.in_order):
                if complex(c.matrix[row, col]) == 0.0:
                    continue
                if g.is_lead(in_edge):
                    end = 0.0
                else:
                    end = g.finite_edge(in_edge).length
                flows.append((in_edge, end - excess_hi, end - excess_lo))

    return {e: _merge_intervals(iv) for e, iv in images.items()}


def _merge_intervals(intervals: Sequence[tuple[float, float]]) -> list[tuple[float, float]]:
    merged: list[tuple[float, float]] = []
    for lo, hi in sorted(intervals):
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(hi, merged[-1][1]))
        else:
            merged.append((lo, hi))
    return merged


def _jitter(g: MetricGraph) -> float:
    m = min_edge_length(g)
    return (m if math.isfinite(m) else 1.0) * 1e-9


def _robust_value(
    op: MomentumOperator, psi: WavePacket, a: float, edge: int, t: float, cap: int
) -> complex:
    """Evaluate the evolved packet, nudging off the excluded countable set."""
    eps = _jitter(op.graph)
    for shift in (0.0, eps, -eps, 2 * eps, -2 * eps):
        try:
            return evolve_at(op, psi, a, GraphPoint(edge, t + shift), cap).value
        except VertexHit:
            continue
        except ValueError:
            continue  # jitter pushed the point off the edge; try the other side
    raise VertexHit(f"could not jitter point ({edge}, {t}) off the excluded set")


def evolve_packet(
    op: MomentumOperator, psi: WavePacket, a: float, cap: int = ROUTE_CAP
) -> WavePacket:
    """Evolved packet with exact lazy profiles (one component per image edge)."""
    images = _support_images(op, psi, a, cap)
    components = []
    for edge in sorted(images):
        lo = min(iv[0] for iv in images[edge])
        hi = max(iv[1] for iv in images[edge])

        def profile(t: float, _edge=edge) -> complex:
            return _robust_value(op, psi, a, _edge, t, cap)

        components.append(PacketComponent(edge=edge, profile=profile, support=(lo, hi)))
    return WavePacket(tuple(components))


def evolve_grid(
    op: MomentumOperator,
    psi: WavePacket,
    a: float,
    samples_per_unit: int = 200,
    cap: int = ROUTE_CAP,
) -> WavePacket:
    """Evolved packet sampled on every image edge, linearly interpolated."""
    images = _support_images(op, psi, a, cap)
    components = []
    for edge in sorted(images):
        lo = min(iv[0] for iv in images[edge])
        hi = max(iv[1] for iv in images[edge])
        n = max(8, int(math.ceil((hi - lo) * samples_per_unit)))
        xs = lo + (np.arange(n) + 0.5) * (hi - lo) / n
        vals = np.array([_robust_value(op, psi, a, edge, t, cap) for t in xs])

        def profile(t: float, _xs=xs, _vals=vals) -> complex:
            return complex(
                np.interp(t, _xs, _vals.real) + 1j * np.interp(t, _xs, _vals.imag)
            )

        components.append(PacketComponent(edge=edge, profile=profile, support=(lo, hi)))
    return WavePacket(tuple(components))


# ---------------------------------------------------------------------------
# norms and consistency checks

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def _integrate(fn: Callable[[float], float], lo: float, hi: float, panels: int) -> float:
    total = 0.0
    width = (hi - lo) / panels
    for p in range(panels):
        a = lo + p * width
        mid, half = a + 0.5 * width, 0.5 * width
        xs = mid + half * _GL_NODES
        total += half * float(sum(w * fn(x) for x, w in zip(xs, _GL_WEIGHTS)))
    return total


def packet_norm(psi: WavePacket, quadrature_points: int = 256) -> float:
    """L2 norm over the graph via composite Gauss-Legendre quadrature.

    ``quadrature_points`` is the approximate node count per unit of support
    length (never fewer than that many nodes per interval).
    """
    total = 0.0
    for edge in psi.edges():
        comps = psi.on_edge(edge)
        intervals = _merge_intervals([c.support for c in comps])
        for lo, hi in intervals:
            if hi <= lo:
                continue
            panels = max(1, int(math.ceil((hi - lo) * quadrature_points / 16.0)),
                         quadrature_points // 16)
            total += _integrate(
                lambda x: abs(sum((c.value(x) for c in comps), 0.0 + 0.0j)) ** 2,
                lo,
                hi,
                panels,
            )
    return math.sqrt(total)


def group_law_residual(
    op: MomentumOperator,
    psi: WavePacket,
    a: float,
    a2: float,
    samples_per_unit: int = 40,
    cap: int = ROUTE_CAP,
) -> float:
    """Sampled sup-norm of ``U(a) U(a2) psi - U(a + a2) psi``."""
    stepwise = evolve_packet(op, evolve_packet(op, psi, a2, cap), a, cap)
    direct = evolve_packet(op, psi, a + a2, cap)

    worst = 0.0
    edges = sorted(set(stepwise.edges()) | set(direct.edges()))
    for edge in edges:
        supports = [c.support for c in stepwise.on_edge(edge) + direct.on_edge(edge)]
        lo = min(s[0] for s in supports)
        hi = max(s[1] for s in supports)
        n = max(8, int(math.ceil((hi - lo) * samples_per_unit)))
        xs = lo + (np.arange(n) + 0.5) * (hi - lo) / n
        for x in xs:
            diff = stepwise.value(edge, float(x)) - direct.value(edge, float(x))
            worst = max(worst, abs(diff))
    return worst


def packet_boundary_values(g: MetricGraph, psi: WavePacket) -> BoundaryVector:
    """Edge-end values of a packet, for checking the vertex conditions."""
    out_values: dict[int, complex] = {}
    in_values: dict[int, complex] = {}
    for e in g.finite_edges:
        out_values[e.id] = psi.value(e.id, 0.0)
        in_values[e.id] = psi.value(e.id, e.length)
    for l in g.leads:
        if l.outgoing:
            out_values[l.id] = psi.value(l.id, 0.0)
        else:
            in_values[l.id] = psi.value(l.id, 0.0)
    return BoundaryVector(out_values=out_values, in_values=in_values)


def generator_residual(
    op: MomentumOperator,
    psi: WavePacket,
    h: float,
    samples_per_unit: int = 50,
    domain_tol: float = 1e-9,
    cap: int = ROUTE_CAP,
) -> float:
    """Sampled norm of ``(U(h) psi - psi) / h + i (-i psi')``.

    The packet must be differentiable on its edges and satisfy the vertex
    conditions (checked against ``domain_tol``); the residual tends to zero
    linearly in ``h`` for such packets, pinning the convention
    ``U(a) = exp(-i a P)`` for the generator ``P = -i d/dx``.
    """
    if h == 0:
        raise ValueError("step h must be nonzero")
    boundary = packet_boundary_values(op.graph, psi)
    dev = apply_vertex_conditions(op, boundary)
    if dev > domain_tol:
        raise DomainViolation(
            f"packet violates the vertex conditions (residual {dev:.3e})"
        )

    images = _support_images(op, psi, h, cap)
    for comp in psi.components:
        images.setdefault(comp.edge, []).append(comp.support)

    worst = 0.0
    for edge, intervals in sorted(images.items()):
        lo = min(iv[0] for iv in intervals)
        hi = max(iv[1] for iv in intervals)
        n = max(8, int(math.ceil((hi - lo) * samples_per_unit)))
        xs = lo + (np.arange(n) + 0.5) * (hi - lo) / n
        for x in xs:
            x = float(x)
            shifted = _robust_value(op, psi, h, edge, x, cap)
            residual = (shifted - psi.value(edge, x)) / h + psi.derivative(edge, x)
            worst = max(worst, abs(residual))
    return worst
