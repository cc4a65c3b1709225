"""Exception types shared across the package."""


class CausalRefineError(Exception):
    """Base class for all errors raised by this package."""


# graph construction / queries

class CycleDetected(CausalRefineError):
    """The edge set contains a directed cycle."""


class SelfLoop(CausalRefineError):
    """An edge connects a node to itself."""


class DuplicateEdge(CausalRefineError):
    """The same ordered edge appears more than once."""


class UnknownNode(CausalRefineError):
    """An edge endpoint does not name a known node."""


class OverflowRejected(CausalRefineError):
    """A requested tree is too large to index."""


class NoSuchPath(CausalRefineError):
    """No directed path with the requested number of edges exists."""


# refinement

class EmptyInput(CausalRefineError):
    """An aggregate was asked for on an empty collection."""


class DegenerateWeights(CausalRefineError):
    """Confidence weights sum to zero, so the fidelity term is undefined."""


class DimensionMismatch(CausalRefineError):
    """Vector lengths disagree with the graph's node count."""


class AllScoresMissing(CausalRefineError):
    """Every node is marked missing; there is nothing to refine against."""


class NonFiniteEncountered(CausalRefineError):
    """The objective or gradient stopped being finite during descent."""


# evaluation

class SingleClassPool(CausalRefineError):
    """AUC is undefined on a pool with only one class."""
