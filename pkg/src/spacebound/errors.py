"""Exception types shared across the library.

Structural problems found by ``validate`` are reported as data
(:class:`spacebound.terms.Violation`), not exceptions; everything here is
raised by operations whose preconditions were broken.
"""

from __future__ import annotations


class SpaceboundError(Exception):
    """Base class for all library errors."""


# -- term construction / grounding -----------------------------------------

class UnboundVariable(SpaceboundError):
    def __init__(self, name: str):
        super().__init__(f"unbound symbolic variable {name!r}")
        self.name = name


class BoxUnordered(SpaceboundError):
    """A box has a min corner coordinate above its max corner."""


class UnresolvedEventRelative(SpaceboundError):
    """An event-relative time label survived into a context that needs
    absolute time points."""


# -- time model -------------------------------------------------------------

class UnknownTimePoint(SpaceboundError):
    def __init__(self, point: str):
        super().__init__(f"unknown time point {point!r}")
        self.point = point


class NotOrdered(SpaceboundError):
    """Interval endpoints are not related by the partial order."""


class CycleDetected(SpaceboundError):
    """The edge relation of a time order is not acyclic."""


class NotAChain(SpaceboundError):
    """The operation needs a totally ordered (chain) time order."""


class OffsetOutOfRange(SpaceboundError):
    """An event-relative offset leaves the chain."""


# -- region algebra ---------------------------------------------------------

class DimensionMismatch(SpaceboundError):
    pass


class NegativeMargin(SpaceboundError):
    pass


# -- transforms -------------------------------------------------------------

class NotImplicationForm(SpaceboundError):
    """A term given to time indexing is not a conjunction of
    time-guarded implications."""

    def __init__(self, message: str, path: tuple[int, ...] = ()):
        super().__init__(f"{message} (at path {list(path)})")
        self.path = path


class UnmappedNode(SpaceboundError):
    def __init__(self, node: str):
        super().__init__(f"no geometry for node {node!r}")
        self.node = node


class NegationUnsupported(SpaceboundError):
    """Negation has no spatial semantics in the checked fragment."""


class UngroundedSymbol(SpaceboundError):
    """A symbolic box must be grounded before geometric evaluation."""


class NodeNotGeometrized(SpaceboundError):
    """A topological node atom must be geometrized before geometric
    evaluation."""


class NotSpatial(SpaceboundError):
    """A temporal, event or implication subterm appeared where only a
    spatial formula is allowed."""


class AlreadyOwned(SpaceboundError):
    def __init__(self, owner: str):
        super().__init__(f"atom already owned by {owner!r}")
        self.owner = owner


class ModeMismatch(SpaceboundError):
    pass


class ClassificationMismatch(SpaceboundError):
    pass


class EmptyInitial(SpaceboundError):
    """An automaton to unfold has no initial states."""


class ParameterOutOfRange(SpaceboundError):
    pass


class StepNonPositive(SpaceboundError):
    pass


# -- DSL --------------------------------------------------------------------

class DslSyntaxError(SpaceboundError):
    def __init__(self, line: int, col: int, expected: str):
        super().__init__(f"{line}:{col}: expected {expected}")
        self.line = line
        self.col = col
        self.expected = expected


class DuplicateName(SpaceboundError):
    def __init__(self, name: str):
        super().__init__(f"duplicate definition name {name!r}")
        self.name = name


# -- CLI / pipeline ---------------------------------------------------------

class UnknownPass(SpaceboundError):
    def __init__(self, name: str):
        super().__init__(f"unknown pipeline pass {name!r}")
        self.name = name
