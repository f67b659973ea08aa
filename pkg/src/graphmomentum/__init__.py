"""Momentum operators on balanced oriented metric graphs.

The package builds first-order self-adjoint operators (acting as ``-i d/dx``
on every edge, coupled by per-vertex unitaries) on finite metric graphs,
computes their spectra, and applies the associated one-parameter group of
shifts to wave packets by enumerating routes.

Module map:

- ``graphs``       metric graph data model, degrees, balance
- ``orientation``  balanced orientability and free-path decompositions
- ``coupling``     vertex unitaries, operator assembly, decomposability
- ``spectra``      secular solver, counting, embedded eigenvalues, resonances
- ``evolution``    route factors, shift group, norms, group/generator checks
- ``profiles``     bump and plane-wave packet components
- ``documents``    JSON document format and builtin example graphs
- ``cli``          command-line front end
"""

from .coupling import (
    BoundaryVector,
    MomentumOperator,
    VertexCoupling,
    apply_vertex_conditions,
    assemble,
    canonical_orders,
    decompose_operator,
    decompose_operator_with_maps,
    irreducible_blocks,
    reference_decoupled,
    validate_coupling,
)
from .errors import GraphMomentumError
from .evolution import (
    EvolvedValue,
    PacketComponent,
    Route,
    RouteFactor,
    WavePacket,
    evolve_at,
    evolve_grid,
    evolve_packet,
    generator_residual,
    group_law_residual,
    packet_boundary_values,
    packet_norm,
    routes_to_point,
)
from .graphs import (
    DegreeProfile,
    FiniteEdge,
    GraphPoint,
    Lead,
    LeadDirection,
    MetricGraph,
    ValidationReport,
    degree_profile,
    is_balanced,
    reverse_orientation,
    total_length,
    validate_graph,
)
from .orientation import (
    FreePath,
    PathDecomposition,
    PathKind,
    PathStep,
    UndirectedEdge,
    UndirectedMetricGraph,
    UnorientedLead,
    check_orientable,
    decompose_free_paths,
    enumerate_orientations,
    orient,
)
from .spectra import (
    EigenfunctionCoefficients,
    ResonanceResult,
    SecularSystem,
    SpectrumResult,
    compact_two_loop_spectrum,
    counting_function,
    decoupled_spectrum,
    eigenfunction_boundary_values,
    embedded_eigenvalues,
    loop_graph_spectrum,
    real_spectrum,
    resonances,
    secular_determinant_grid,
    secular_matrix,
    secular_system,
    transfer_coefficients,
)

__version__ = "0.1.0"
