"""Graph documents: a JSON text format plus the named builtin graphs.

A document is a UTF-8 JSON object with the sections ``vertices``,
``finite_edges`` (id, start, end, length), ``leads`` (id, anchor, direction)
and optionally ``couplings`` (vertex, in_order, out_order, matrix).  Complex
matrix entries are written as ``[re, im]`` pairs, matrices row-major.
Unknown keys are rejected and semantic problems are reported with the key
path they occur at.

The builtins cover the recurring example graphs: a phase-coupled loop, the
figure-eight, a loop hanging off a line, a star of leads, and the two-loop
graph with either leads or a closing fourth edge.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .coupling import MomentumOperator, VertexCoupling, assemble, validate_coupling
from .errors import DocumentError
from .graphs import FiniteEdge, Lead, LeadDirection, MetricGraph, validate_graph
from .orientation import UndirectedEdge, UndirectedMetricGraph, UnorientedLead

HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / math.sqrt(2.0)


# ---------------------------------------------------------------------------
# parsing


def _expect_keys(obj: Mapping[str, Any], allowed: set[str], required: set[str], where: str):
    unknown = set(obj) - allowed
    if unknown:
        raise DocumentError(f"unknown keys {sorted(unknown)}", where)
    missing = required - set(obj)
    if missing:
        raise DocumentError(f"missing keys {sorted(missing)}", where)


def _as_int(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise DocumentError(f"expected an integer, got {value!r}", where)
    return value


def _as_number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise DocumentError(f"expected a number, got {value!r}", where)
    return float(value)


def _as_complex(value: Any, where: str) -> complex:
    if (
        not isinstance(value, list)
        or len(value) != 2
        or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value)
    ):
        raise DocumentError(f"expected a [re, im] pair, got {value!r}", where)
    return complex(value[0], value[1])


def parse_document(text: str) -> tuple[MetricGraph, list[VertexCoupling]]:
    """Parse and validate a graph document.

    Raises ``DocumentError`` with a line/column position for syntax problems
    and with a key path for semantic ones.  The graph must be structurally
    valid; couplings, when present, must match their vertex and be unitary.
    Balance is not required here (an unbalanced graph can still be oriented).
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(
            f"syntax error: {exc.msg}", f"line {exc.lineno}, column {exc.colno}"
        ) from None
    if not isinstance(raw, dict):
        raise DocumentError("document must be a JSON object", "top level")
    _expect_keys(
        raw,
        {"vertices", "finite_edges", "leads", "couplings"},
        {"vertices"},
        "top level",
    )

    if not isinstance(raw["vertices"], list):
        raise DocumentError("vertices must be a list", "vertices")
    vertices = [_as_int(v, f"vertices[{i}]") for i, v in enumerate(raw["vertices"])]

    edges = []
    for i, item in enumerate(raw.get("finite_edges", [])):
        where = f"finite_edges[{i}]"
        if not isinstance(item, dict):
            raise DocumentError("edge must be an object", where)
        _expect_keys(item, {"id", "start", "end", "length"}, {"id", "start", "end", "length"}, where)
        edges.append(
            FiniteEdge(
                id=_as_int(item["id"], where + ".id"),
                start=_as_int(item["start"], where + ".start"),
                end=_as_int(item["end"], where + ".end"),
                length=_as_number(item["length"], where + ".length"),
            )
        )

    leads = []
    for i, item in enumerate(raw.get("leads", [])):
        where = f"leads[{i}]"
        if not isinstance(item, dict):
            raise DocumentError("lead must be an object", where)
        _expect_keys(item, {"id", "anchor", "direction"}, {"id", "anchor", "direction"}, where)
        direction = item["direction"]
        if direction not in ("incoming", "outgoing"):
            raise DocumentError(
                f"direction must be 'incoming' or 'outgoing', got {direction!r}",
                where + ".direction",
            )
        leads.append(
            Lead(
                id=_as_int(item["id"], where + ".id"),
                anchor=_as_int(item["anchor"], where + ".anchor"),
                direction=LeadDirection(direction),
            )
        )

    graph = MetricGraph(vertices=vertices, finite_edges=edges, leads=leads)
    report = validate_graph(graph)
    if not report.ok:
        raise DocumentError("; ".join(report.violations), "graph")

    couplings = []
    for i, item in enumerate(raw.get("couplings", [])):
        where = f"couplings[{i}]"
        if not isinstance(item, dict):
            raise DocumentError("coupling must be an object", where)
        _expect_keys(
            item, {"vertex", "in_order", "out_order", "matrix"},
            {"vertex", "in_order", "out_order", "matrix"}, where,
        )
        vertex = _as_int(item["vertex"], where + ".vertex")
        in_order = [_as_int(v, where + ".in_order") for v in item["in_order"]]
        out_order = [_as_int(v, where + ".out_order") for v in item["out_order"]]
        rows = item["matrix"]
        if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
            raise DocumentError("matrix must be a list of rows", where + ".matrix")
        matrix = [
            [_as_complex(v, f"{where}.matrix[{r}][{c}]") for c, v in enumerate(row)]
            for r, row in enumerate(rows)
        ]
        c = VertexCoupling(vertex=vertex, out_order=out_order, in_order=in_order, matrix=matrix)
        if vertex not in set(vertices):
            raise DocumentError(f"unknown vertex {vertex}", where + ".vertex")
        if set(out_order) != set(graph.outgoing_ends(vertex)) or set(in_order) != set(
            graph.incoming_ends(vertex)
        ):
            raise DocumentError(
                f"orders do not match the edge ends at vertex {vertex}", where
            )
        check = validate_coupling(c)
        if not check.ok:
            raise DocumentError("; ".join(check.violations), where + ".matrix")
        couplings.append(c)

    return graph, couplings


def document_text(graph: MetricGraph, couplings: Sequence[VertexCoupling] = ()) -> str:
    """Serialize a graph (and couplings) to canonical document text."""
    doc: dict[str, Any] = {
        "vertices": sorted(graph.vertices),
        "finite_edges": [
            {"id": e.id, "start": e.start, "end": e.end, "length": e.length}
            for e in sorted(graph.finite_edges, key=lambda e: e.id)
        ],
        "leads": [
            {"id": l.id, "anchor": l.anchor, "direction": l.direction.value}
            for l in sorted(graph.leads, key=lambda l: l.id)
        ],
    }
    if couplings:
        doc["couplings"] = [
            {
                "vertex": c.vertex,
                "in_order": list(c.in_order),
                "out_order": list(c.out_order),
                "matrix": [
                    [[float(v.real), float(v.imag)] for v in row] for row in c.matrix
                ],
            }
            for c in sorted(couplings, key=lambda c: c.vertex)
        ]
    return json.dumps(doc, indent=2) + "\n"


def to_undirected(graph: MetricGraph) -> UndirectedMetricGraph:
    """Forget the orientation of every edge and lead."""
    return UndirectedMetricGraph(
        vertices=graph.vertices,
        edges=tuple(
            UndirectedEdge(e.id, e.start, e.end, e.length) for e in graph.finite_edges
        ),
        leads=tuple(UnorientedLead(l.id, l.anchor) for l in graph.leads),
    )


# ---------------------------------------------------------------------------
# builtin graphs


def loop_graph(
    lengths: Sequence[float], phases: Sequence[float]
) -> tuple[MetricGraph, list[VertexCoupling]]:
    """Cycle of ``N`` edges whose vertex ``j`` multiplies by ``e^{i phase_j}``.

    Edge ``j`` runs from vertex ``j`` to vertex ``j + 1 (mod N)``; the
    spectrum in closed form is ``(2 pi n - sum(phases)) / sum(lengths)``.
    """
    n = len(lengths)
    if n != len(phases):
        raise ValueError("need one phase per vertex")
    vertices = range(n)
    edges = [FiniteEdge(j, j, (j + 1) % n, float(lengths[j])) for j in range(n)]
    graph = MetricGraph(vertices, edges)
    couplings = [
        VertexCoupling(
            vertex=j,
            out_order=(j,),
            in_order=((j - 1) % n,),
            matrix=[[cmath.exp(1j * phases[j])]],
        )
        for j in range(n)
    ]
    return graph, couplings


def figure_eight(
    l1: float = 1.0, l2: float = math.sqrt(2.0), matrix=None
) -> tuple[MetricGraph, list[VertexCoupling]]:
    """Two loops sharing a single vertex of degree four."""
    graph = MetricGraph(
        vertices=(0,),
        finite_edges=(FiniteEdge(0, 0, 0, float(l1)), FiniteEdge(1, 0, 0, float(l2))),
    )
    m = HADAMARD if matrix is None else matrix
    return graph, [VertexCoupling(vertex=0, out_order=(0, 1), in_order=(0, 1), matrix=m)]


def loop_line(
    ell: float = 1.0, matrix=None
) -> tuple[MetricGraph, list[VertexCoupling]]:
    """A loop attached to a line (incoming and outgoing lead at one vertex).

    Edge ids: 0 incoming lead, 1 the loop, 2 outgoing lead.  The coupling is
    2x2 in the order (loop, lead): identity decouples loop and line, the swap
    matrix threads the line through the loop, and the default mixing matrix
    has no vanishing entry.
    """
    graph = MetricGraph(
        vertices=(0,),
        finite_edges=(FiniteEdge(1, 0, 0, float(ell)),),
        leads=(Lead(0, 0, LeadDirection.INCOMING), Lead(2, 0, LeadDirection.OUTGOING)),
    )
    m = HADAMARD if matrix is None else matrix
    return graph, [VertexCoupling(vertex=0, out_order=(1, 2), in_order=(1, 0), matrix=m)]


LOOP_LINE_SWAP = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
LOOP_LINE_IDENTITY = np.eye(2, dtype=complex)


def star_graph(n: int = 3, matrix=None) -> tuple[MetricGraph, list[VertexCoupling]]:
    """``n`` incoming and ``n`` outgoing leads at one vertex.

    Edge ids 0..n-1 are the incoming leads, n..2n-1 the outgoing ones.  The
    default coupling is the unitary Fourier matrix (all entries nonzero).
    """
    if n < 1:
        raise ValueError("need at least one lead pair")
    leads = [Lead(j, 0, LeadDirection.INCOMING) for j in range(n)] + [
        Lead(n + j, 0, LeadDirection.OUTGOING) for j in range(n)
    ]
    graph = MetricGraph(vertices=(0,), leads=leads)
    if matrix is None:
        omega = cmath.exp(2j * math.pi / n)
        matrix = np.array(
            [[omega ** (j * m) for m in range(n)] for j in range(n)], dtype=complex
        ) / math.sqrt(n)
    return graph, [
        VertexCoupling(
            vertex=0,
            out_order=tuple(range(n, 2 * n)),
            in_order=tuple(range(n)),
            matrix=matrix,
        )
    ]


def two_loop(
    l1: float = 1.0, l2: float = 1.0, l3: float = 1.0
) -> tuple[MetricGraph, list[VertexCoupling]]:
    """Two parallel edges plus a return edge between two vertices, with leads.

    Edge ids: 0 incoming lead at vertex 0, edges 1 and 2 from vertex 0 to
    vertex 1 (lengths ``l1``, ``l2``), edge 3 back from vertex 1 to vertex 0
    (length ``l3``), 4 outgoing lead at vertex 1.  Both vertices carry the
    same real mixing matrix.
    """
    graph = MetricGraph(
        vertices=(0, 1),
        finite_edges=(
            FiniteEdge(1, 0, 1, float(l1)),
            FiniteEdge(2, 0, 1, float(l2)),
            FiniteEdge(3, 1, 0, float(l3)),
        ),
        leads=(Lead(0, 0, LeadDirection.INCOMING), Lead(4, 1, LeadDirection.OUTGOING)),
    )
    couplings = [
        VertexCoupling(vertex=0, out_order=(1, 2), in_order=(3, 0), matrix=HADAMARD),
        VertexCoupling(vertex=1, out_order=(3, 4), in_order=(1, 2), matrix=HADAMARD),
    ]
    return graph, couplings


def two_loop_compact(
    l1: float = 1.0, l2: float = 1.0, l3: float = 2.0, l4: float = 3.0
) -> tuple[MetricGraph, list[VertexCoupling]]:
    """The two-loop graph with the leads replaced by a closing fourth edge.

    Edge ids: 0 and 1 from vertex 0 to vertex 1 (lengths ``l1``, ``l2``),
    2 and 3 back from vertex 1 to vertex 0 (lengths ``l3``, ``l4``).
    """
    graph = MetricGraph(
        vertices=(0, 1),
        finite_edges=(
            FiniteEdge(0, 0, 1, float(l1)),
            FiniteEdge(1, 0, 1, float(l2)),
            FiniteEdge(2, 1, 0, float(l3)),
            FiniteEdge(3, 1, 0, float(l4)),
        ),
    )
    couplings = [
        VertexCoupling(vertex=0, out_order=(0, 1), in_order=(2, 3), matrix=HADAMARD),
        VertexCoupling(vertex=1, out_order=(2, 3), in_order=(0, 1), matrix=HADAMARD),
    ]
    return graph, couplings


@dataclass(frozen=True)
class NamedDocument:
    name: str
    summary: str
    text: str


_BUILTINS: dict[str, tuple[str, Callable[[], tuple[MetricGraph, list[VertexCoupling]]]]] = {
    "loop": (
        "cycle of 3 unit edges with phase couplings",
        lambda: loop_graph((1.0, 1.0, 1.0), (math.pi / 4, -math.pi / 3, math.pi / 6)),
    ),
    "figure-eight": (
        "two loops of lengths 1 and sqrt(2) at one vertex, mixing coupling",
        lambda: figure_eight(),
    ),
    "loop-line": (
        "unit loop on a line, mixing coupling with no zero entries",
        lambda: loop_line(),
    ),
    "star": (
        "3 incoming and 3 outgoing leads, Fourier coupling",
        lambda: star_graph(3),
    ),
    "two-loop": (
        "two unit edges and a unit return edge between two vertices, with leads",
        lambda: two_loop(1.0, 1.0, 1.0),
    ),
    "two-loop-compact": (
        "compact variant, lengths (1, 1, 2, 3)",
        lambda: two_loop_compact(1.0, 1.0, 2.0, 3.0),
    ),
}


def builtin_names() -> list[str]:
    return list(_BUILTINS)


def builtin_document(name: str) -> NamedDocument:
    if name not in _BUILTINS:
        raise DocumentError(f"unknown builtin graph {name!r}", "input")
    summary, build = _BUILTINS[name]
    graph, couplings = build()
    return NamedDocument(name=name, summary=summary, text=document_text(graph, couplings))


def builtin_operator(name: str) -> MomentumOperator:
    _, build = _BUILTINS[name]
    return assemble(*build())


def emit_examples() -> list[NamedDocument]:
    """All builtin graphs as round-trippable documents."""
    return [builtin_document(name) for name in _BUILTINS]
