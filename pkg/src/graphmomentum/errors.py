"""Exception hierarchy shared by all modules."""


class GraphMomentumError(Exception):
    """Base class for all errors raised by this package."""


class InvalidGraph(GraphMomentumError):
    """The metric graph violates a structural invariant."""


class NotOrientable(GraphMomentumError):
    """The undirected graph has a vertex of odd degree."""


class OddLeadCount(NotOrientable):
    """The graph carries an odd number of semi-infinite leads."""


class NotBalanced(GraphMomentumError):
    """In/out edge counts differ at some vertex of an oriented graph."""


class MissingVertexCoupling(GraphMomentumError):
    """A vertex of the graph has no (or more than one) coupling attached."""


class InvalidCoupling(GraphMomentumError):
    """A vertex coupling fails unitarity or does not match the vertex."""


class CompactGraphRequired(GraphMomentumError):
    """The operation is defined for graphs without leads only."""


class LeadToLeadPathPresent(GraphMomentumError):
    """A path decomposition contains a lead-to-lead path where only loops work."""


class BoundaryIndexMismatch(GraphMomentumError):
    """Boundary values do not cover the edge ends required by the operator."""


class VertexHit(GraphMomentumError):
    """An evaluation point or a route start coincides with a vertex."""


class ExplosionCapExceeded(GraphMomentumError):
    """Route enumeration exceeded the configured route-count cap."""


class AtEmbeddedEigenvalue(GraphMomentumError):
    """The transfer problem is singular at the requested momentum."""


class ContinuationDiverged(GraphMomentumError):
    """Newton continuation of a root failed to converge."""


class DomainViolation(GraphMomentumError):
    """A wave packet does not satisfy the operator's vertex conditions."""


class DocumentError(GraphMomentumError):
    """A graph document failed to parse or validate.

    ``location`` is a human-readable position: either ``line L, column C``
    for syntax errors or a key path such as ``couplings[1].matrix`` for
    semantic ones.
    """

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        if location:
            message = f"{message} (at {location})"
        super().__init__(message)
