"""Command-line front end.

Reads a graph document (file path, ``-`` for stdin, or a builtin name),
runs one computation, and writes a machine-readable result as CSV or as
``key=value`` structured text.  Identical invocations produce byte-identical
output.  Exit codes: 0 success, 1 computation failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

from . import documents
from .coupling import MomentumOperator, assemble, decompose_operator_with_maps
from .errors import (
    CompactGraphRequired,
    DocumentError,
    GraphMomentumError,
    InvalidCoupling,
    InvalidGraph,
    MissingVertexCoupling,
    NotBalanced,
    NotOrientable,
)
from .evolution import evolve_grid, WavePacket
from .graphs import validate_graph
from .orientation import orient
from .profiles import bump_component, normalized
from .spectra import (
    counting_function,
    embedded_eigenvalues,
    real_spectrum,
    resonances,
    secular_system,
)

_INPUT_ERRORS = (
    DocumentError,
    InvalidGraph,
    NotOrientable,
    NotBalanced,
    MissingVertexCoupling,
    InvalidCoupling,
    CompactGraphRequired,
    ValueError,
)


def _load_document(source: str) -> str:
    if source == "-":
        return sys.stdin.read()
    if source in documents.builtin_names():
        return documents.builtin_document(source).text
    path = Path(source)
    if not path.exists():
        raise DocumentError(
            f"input {source!r} is neither a file nor a builtin name "
            f"(builtins: {', '.join(documents.builtin_names())})",
            "input",
        )
    return path.read_text(encoding="utf-8")


def _operator(graph, couplings) -> MomentumOperator:
    if not couplings:
        raise DocumentError("this command needs a 'couplings' section", "couplings")
    return assemble(graph, couplings)


def _emit(args, header: list[str], rows: list[list]) -> None:
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
        text = buf.getvalue()
    else:
        lines = []
        for row in rows:
            lines.append(" ".join(f"{h}={_fmt(v)}" for h, v in zip(header, row)))
        text = "\n".join(lines) + ("\n" if lines else "")
    _write_text(args, text)


def _write_text(args, text: str) -> None:
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_validate(args) -> int:
    graph, _ = documents.parse_document(_load_document(args.input))
    report = validate_graph(graph)
    _emit(args, ["violation"], [[v] for v in report.violations])
    return 0 if report.ok else 2


def _cmd_orient(args) -> int:
    graph, _ = documents.parse_document(_load_document(args.input))
    undirected = documents.to_undirected(graph)
    try:
        oriented, decomposition = orient(undirected)
    except NotOrientable as exc:
        print(f"error: not balanced orientable: {exc}", file=sys.stderr)
        return 2
    rows = []
    membership = {}
    for p_idx, path in enumerate(decomposition.paths):
        for s_idx, step in enumerate(path.steps):
            membership[step.edge] = (p_idx, s_idx)
    for e in oriented.finite_edges:
        p, s = membership[e.id]
        rows.append(["edge", e.id, e.start, e.end, e.length, "", p, s])
    for l in oriented.leads:
        p, s = membership[l.id]
        rows.append(["lead", l.id, l.anchor, "", "", l.direction.value, p, s])
    rows.sort(key=lambda r: r[1])
    _emit(args, ["kind", "id", "a", "b", "length", "direction", "path", "position"], rows)
    return 0


def _cmd_spectrum(args) -> int:
    graph, couplings = documents.parse_document(_load_document(args.input))
    system = secular_system(_operator(graph, couplings))
    result = real_spectrum(system, args.halfwidth, k_tol=args.tol)
    _emit(args, ["k", "multiplicity"], [[k, m] for k, m in result.pairs()])
    return 0


def _cmd_count(args) -> int:
    graph, couplings = documents.parse_document(_load_document(args.input))
    system = secular_system(_operator(graph, couplings))
    n = counting_function(system, args.halfwidth)
    _emit(args, ["lambda", "count"], [[args.halfwidth, n]])
    return 0


def _cmd_embedded(args) -> int:
    graph, couplings = documents.parse_document(_load_document(args.input))
    op = _operator(graph, couplings)
    result = embedded_eigenvalues(op, args.halfwidth, sv_tol=args.sv_tol)
    rows = []
    for k, mult, basis in zip(
        result.eigenvalues, result.multiplicities, result.eigenfunctions or ()
    ):
        for b_idx, fn in enumerate(basis):
            for edge in sorted(fn.amplitudes):
                amp = fn.amplitude(edge)
                rows.append([k, mult, b_idx, edge, amp.real, amp.imag])
    _emit(args, ["k", "multiplicity", "basis", "edge", "re", "im"], rows)
    return 0


def _cmd_resonances(args) -> int:
    try:
        lo, hi = args.n.split("..")
        n_values = list(range(int(lo), int(hi) + 1))
    except ValueError:
        print(f"error: --n expects a range like 1..5, got {args.n!r}", file=sys.stderr)
        return 2
    result = resonances(args.ell, args.delta, n_values)
    rows = [
        [n, result.parameter, root.real, root.imag]
        for n, root in zip(result.seed_indices, result.roots)
    ]
    _emit(args, ["n", "delta", "re_k", "im_k"], rows)
    return 0


def _cmd_evolve(args) -> int:
    graph, couplings = documents.parse_document(_load_document(args.input))
    op = _operator(graph, couplings)
    packet = normalized(
        WavePacket(
            [
                bump_component(
                    edge=args.packet_edge,
                    center=args.packet_center,
                    halfwidth=args.packet_width,
                    momentum=args.packet_momentum,
                )
            ]
        )
    )
    evolved = evolve_grid(op, packet, args.a, samples_per_unit=args.samples_per_unit)
    rows = []
    for comp in evolved.components:
        lo, hi = comp.support
        n = max(2, int((hi - lo) * args.samples_per_unit))
        for i in range(n):
            x = lo + (i + 0.5) * (hi - lo) / n
            v = comp.value(x)
            rows.append([comp.edge, x, v.real, v.imag])
    _emit(args, ["edge", "x", "re", "im"], rows)
    return 0


def _cmd_decompose(args) -> int:
    graph, couplings = documents.parse_document(_load_document(args.input))
    op = _operator(graph, couplings)
    rows = []
    for c_idx, comp in enumerate(decompose_operator_with_maps(op)):
        for new_id in sorted(comp.edge_map):
            old = comp.edge_map[new_id]
            kind = "lead" if op.graph.is_lead(old) else "edge"
            rows.append([c_idx, kind, old])
    _emit(args, ["component", "kind", "id"], rows)
    return 0


def _cmd_example(args) -> int:
    if not args.name:
        rows = [[d.name, d.summary] for d in documents.emit_examples()]
        _emit(args, ["name", "summary"], rows)
        return 0
    doc = documents.builtin_document(args.name)
    _write_text(args, doc.text)
    return 0


# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphmomentum",
        description=(
            "Spectra and shift dynamics of momentum operators on balanced "
            "oriented metric graphs."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_input=True):
        if with_input:
            p.add_argument("input", help="document path, '-' for stdin, or a builtin name")
        p.add_argument("--format", choices=("csv", "text"), default="csv")
        p.add_argument("--output", help="write the result to this path instead of stdout")

    p = sub.add_parser("validate", help="report structural violations of a document")
    common(p)
    p.set_defaults(fn=_cmd_validate)

    p = sub.add_parser("orient", help="balanced-orient the underlying undirected graph")
    common(p)
    p.set_defaults(fn=_cmd_orient)

    p = sub.add_parser("spectrum", help="real eigenvalues of a compact graph")
    common(p)
    p.add_argument("--lambda", dest="halfwidth", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-12, help="momentum resolution")
    p.set_defaults(fn=_cmd_spectrum)

    p = sub.add_parser("count", help="eigenvalue counting function")
    common(p)
    p.add_argument("--lambda", dest="halfwidth", type=float, required=True)
    p.set_defaults(fn=_cmd_count)

    p = sub.add_parser("embedded", help="embedded eigenvalues of a graph with leads")
    common(p)
    p.add_argument("--lambda", dest="halfwidth", type=float, required=True)
    p.add_argument("--sv-tol", type=float, default=1e-10)
    p.set_defaults(fn=_cmd_embedded)

    p = sub.add_parser("resonances", help="two-loop resonance continuation")
    common(p, with_input=False)
    p.add_argument("--ell", type=float, required=True, help="unperturbed edge length")
    p.add_argument("--delta", type=float, required=True, help="length perturbation")
    p.add_argument("--n", required=True, help="seed index range, e.g. 1..5")
    p.set_defaults(fn=_cmd_resonances)

    p = sub.add_parser("evolve", help="apply the shift group to a bump packet")
    common(p)
    p.add_argument("--a", type=float, required=True, help="shift parameter")
    p.add_argument("--packet-edge", type=int, required=True)
    p.add_argument("--packet-center", type=float, required=True)
    p.add_argument("--packet-width", type=float, required=True, help="support halfwidth")
    p.add_argument("--packet-momentum", type=float, default=0.0)
    p.add_argument("--samples-per-unit", type=int, default=200)
    p.set_defaults(fn=_cmd_evolve)

    p = sub.add_parser("decompose", help="split the operator into independent parts")
    common(p)
    p.set_defaults(fn=_cmd_decompose)

    p = sub.add_parser("example", help="list builtin graphs or emit one as a document")
    p.add_argument("name", nargs="?", help="builtin name; omit to list all")
    p.add_argument("--format", choices=("csv", "text"), default="csv")
    p.add_argument("--output", help="write the result to this path instead of stdout")
    p.set_defaults(fn=_cmd_example)

    return parser


def run(argv: list[str]) -> int:
    """Parse arguments and execute one command; returns the exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.fn(args)
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GraphMomentumError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
