"""Shared random-graph and random-coupling generators for the test suite."""

from __future__ import annotations

import math

import numpy as np
from scipy.stats import unitary_group

from graphmomentum.coupling import MomentumOperator, VertexCoupling, assemble
from graphmomentum.graphs import MetricGraph, degree_profile
from graphmomentum.orientation import (
    PathDecomposition,
    UndirectedEdge,
    UndirectedMetricGraph,
    orient,
)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    if d == 1:
        return np.array([[np.exp(1j * rng.uniform(-math.pi, math.pi))]])
    return unitary_group.rvs(d, random_state=rng)


def random_even_multigraph(
    rng: np.random.Generator,
    max_vertices: int = 6,
    max_cycles: int = 4,
    max_cycle_len: int = 5,
    max_edges: int = 30,
) -> UndirectedMetricGraph:
    """Union of random closed walks: every vertex degree is even by construction."""
    n_v = int(rng.integers(2, max_vertices + 1))
    edges: list[UndirectedEdge] = []
    eid = 0
    for _ in range(int(rng.integers(1, max_cycles + 1))):
        length = int(rng.integers(1, max_cycle_len + 1))
        if eid + length > max_edges:
            break
        vs = [int(v) for v in rng.integers(0, n_v, length)]
        for i in range(length):
            edges.append(
                UndirectedEdge(eid, vs[i], vs[(i + 1) % length], float(rng.uniform(0.3, 1.5)))
            )
            eid += 1
    if not edges:
        edges.append(UndirectedEdge(0, 0, 0, float(rng.uniform(0.3, 1.5))))
    used = sorted({v for e in edges for v in (e.u, e.v)})
    remap = {v: i for i, v in enumerate(used)}
    return UndirectedMetricGraph(
        vertices=range(len(used)),
        edges=[UndirectedEdge(e.id, remap[e.u], remap[e.v], e.length) for e in edges],
    )


def random_couplings(
    graph: MetricGraph, rng: np.random.Generator
) -> list[VertexCoupling]:
    profile = degree_profile(graph)
    return [
        VertexCoupling(
            vertex=v,
            out_order=graph.outgoing_ends(v),
            in_order=graph.incoming_ends(v),
            matrix=random_unitary(profile.at(v).out_total, rng),
        )
        for v in graph.vertices
    ]


def random_compact_operator(
    rng: np.random.Generator, **kwargs
) -> tuple[MomentumOperator, PathDecomposition]:
    """Random balanced compact graph with random unitary couplings."""
    undirected = random_even_multigraph(rng, **kwargs)
    graph, decomposition = orient(undirected)
    return assemble(graph, random_couplings(graph, rng)), decomposition
