import math

import numpy as np
import pytest

from conftest import random_even_multigraph
from graphmomentum.errors import InvalidGraph
from graphmomentum.graphs import (
    FiniteEdge,
    GraphPoint,
    Lead,
    LeadDirection,
    MetricGraph,
    degree_profile,
    is_balanced,
    min_edge_length,
    reverse_orientation,
    total_length,
    validate_graph,
)
from graphmomentum.orientation import orient


def triangle(lengths=(1.0, 2.0, 3.0)) -> MetricGraph:
    return MetricGraph(
        vertices=range(3),
        finite_edges=[FiniteEdge(i, i, (i + 1) % 3, lengths[i]) for i in range(3)],
    )


def single_self_loop(length=2 * math.pi) -> MetricGraph:
    return MetricGraph(vertices=(0,), finite_edges=(FiniteEdge(0, 0, 0, length),))


def figure_eight_graph() -> MetricGraph:
    return MetricGraph(
        vertices=(0,),
        finite_edges=(FiniteEdge(0, 0, 0, 1.0), FiniteEdge(1, 0, 0, 1.0)),
    )


class TestValidate:
    def test_triangle_is_clean(self):
        assert validate_graph(triangle()).ok

    def test_zero_length_edge(self):
        g = MetricGraph(vertices=(0,), finite_edges=(FiniteEdge(0, 0, 0, 0.0),))
        report = validate_graph(g)
        assert not report.ok
        assert any("non-positive length" in v for v in report.violations)

    def test_lead_at_unknown_vertex(self):
        g = MetricGraph(
            vertices=(0,),
            finite_edges=(FiniteEdge(0, 0, 0, 1.0),),
            leads=(Lead(1, 7, LeadDirection.OUTGOING),),
        )
        report = validate_graph(g)
        assert any("unknown vertex" in v for v in report.violations)

    def test_isolated_vertex(self):
        g = MetricGraph(vertices=(0, 1), finite_edges=(FiniteEdge(0, 0, 0, 1.0),))
        assert any("isolated" in v for v in validate_graph(g).violations)

    def test_sparse_ids_rejected(self):
        g = MetricGraph(vertices=(0,), finite_edges=(FiniteEdge(5, 0, 0, 1.0),))
        assert any("densely numbered" in v for v in validate_graph(g).violations)


class TestDegreeProfile:
    def test_self_loop_counts_in_and_out(self):
        profile = degree_profile(single_self_loop())
        d = profile.at(0)
        assert (d.fin_in, d.fin_out) == (1, 1)

    def test_two_loop_junction_mixes_lead_and_edge(self):
        # one incoming lead and one incoming finite edge, two outgoing edges
        g = MetricGraph(
            vertices=(0, 1),
            finite_edges=(
                FiniteEdge(1, 0, 1, 1.0),
                FiniteEdge(2, 0, 1, 1.0),
                FiniteEdge(3, 1, 0, 1.0),
            ),
            leads=(Lead(0, 0, LeadDirection.INCOMING), Lead(4, 1, LeadDirection.OUTGOING)),
        )
        d = degree_profile(g).at(0)
        assert d.in_total == 2 and d.out_total == 2
        assert (d.fin_in, d.inf_in) == (1, 1)

    def test_figure_eight_centre(self):
        d = degree_profile(figure_eight_graph()).at(0)
        assert d.total == 4
        assert d.in_total == d.out_total == 2

    def test_invalid_graph_rejected(self):
        g = MetricGraph(vertices=(0,), finite_edges=(FiniteEdge(0, 0, 0, -1.0),))
        with pytest.raises(InvalidGraph):
            degree_profile(g)


class TestBalance:
    def test_figure_eight_balanced(self):
        assert is_balanced(figure_eight_graph())

    def test_single_edge_not_balanced(self):
        g = MetricGraph(vertices=(0, 1), finite_edges=(FiniteEdge(0, 0, 1, 1.0),))
        assert not is_balanced(g)

    def test_uneven_star_not_balanced(self):
        leads = [Lead(i, 0, LeadDirection.OUTGOING) for i in range(3)] + [
            Lead(3 + i, 0, LeadDirection.INCOMING) for i in range(2)
        ]
        assert not is_balanced(MetricGraph(vertices=(0,), leads=leads))

    def test_reversal_preserves_balance(self):
        rng = np.random.default_rng(101)
        for _ in range(20):
            graph, _ = orient(random_even_multigraph(rng))
            assert is_balanced(reverse_orientation(graph))

    def test_balanced_implies_even_degrees(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            graph, _ = orient(random_even_multigraph(rng))
            assert all(d.total % 2 == 0 for d in degree_profile(graph).per_vertex)


class TestTotals:
    def test_loop_total_length(self):
        assert total_length(single_self_loop(2 * math.pi)) == pytest.approx(2 * math.pi)

    def test_two_loop_finite_part(self):
        g = MetricGraph(
            vertices=(0, 1),
            finite_edges=(
                FiniteEdge(1, 0, 1, 1.0),
                FiniteEdge(2, 0, 1, 1.0),
                FiniteEdge(3, 1, 0, 1.0),
            ),
            leads=(Lead(0, 0, LeadDirection.INCOMING), Lead(4, 1, LeadDirection.OUTGOING)),
        )
        assert total_length(g) == pytest.approx(3.0)

    def test_no_edges(self):
        leads = (Lead(0, 0, LeadDirection.INCOMING), Lead(1, 0, LeadDirection.OUTGOING))
        g = MetricGraph(vertices=(0,), leads=leads)
        assert total_length(g) == 0.0
        assert min_edge_length(g) == math.inf

    def test_edge_end_totals_match(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            graph, _ = orient(random_even_multigraph(rng))
            profile = degree_profile(graph)
            assert sum(d.fin_out for d in profile.per_vertex) == profile.n_fin
            assert sum(d.fin_in for d in profile.per_vertex) == profile.n_fin


class TestGraphPoint:
    def test_point_membership(self):
        g = MetricGraph(
            vertices=(0,),
            finite_edges=(FiniteEdge(0, 0, 0, 2.0),),
            leads=(
                Lead(1, 0, LeadDirection.INCOMING),
                Lead(2, 0, LeadDirection.OUTGOING),
            ),
        )
        assert g.contains_point(GraphPoint(0, 1.5))
        assert not g.contains_point(GraphPoint(0, 2.5))
        assert g.contains_point(GraphPoint(1, -4.0))
        assert not g.contains_point(GraphPoint(1, 0.5))
        assert g.contains_point(GraphPoint(2, 0.5))
        assert not g.contains_point(GraphPoint(3, 0.0))
