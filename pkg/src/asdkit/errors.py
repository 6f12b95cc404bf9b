"""Exception types shared across the package."""


class AsdError(Exception):
    """Base class for all errors raised by this package."""


class GroundMismatch(AsdError):
    """Operands live on different ground sets."""


class OverlapError(AsdError):
    """A state appears in more than one block."""


class CoverageError(AsdError):
    """Some state is missing from every block."""


class UnknownLabel(AsdError):
    """A label does not belong to the ground set."""


class ArityError(AsdError):
    """A lattice polynomial was evaluated against the wrong number of arguments."""


class EmptyStateSpace(AsdError):
    """A device needs at least one state."""


class EmptyPartitionSet(AsdError):
    """A device needs at least one partition."""


class DomainMismatch(AsdError):
    """A witness maps between the wrong state spaces or partition lists."""


class LimitExceeded(AsdError):
    """A configured size cap was exceeded."""


class PreconditionMismatch(AsdError):
    """Inputs violate a documented precondition of the operation."""


class HypothesisViolation(AsdError):
    """Inputs are outside the structural hypotheses of the algorithm."""


class NonUniqueTau(AsdError):
    """The varying-coordinate extraction was ambiguous; inputs are malformed."""


class GraphError(AsdError):
    """A graph fails the structural requirements of the encoding."""


class TooFewVertices(GraphError):
    """The encoding needs at least four vertices (or a clique size of four)."""


class IsolatedVertex(GraphError):
    """Isolated vertices break minimality of the graph device."""


class SearchBudgetExceeded(AsdError):
    """The backtracking search hit its node budget before deciding."""

    def __init__(self, nodes: int, budget: int):
        super().__init__(f"search exceeded budget of {budget} nodes (explored {nodes})")
        self.nodes = nodes
        self.budget = budget
