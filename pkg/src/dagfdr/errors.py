"""Exception hierarchy shared by every module in the package."""

from __future__ import annotations


class DagFdrError(Exception):
    """Base class for all package errors."""


# graph construction / queries
class GraphError(DagFdrError):
    pass


class CycleError(GraphError):
    def __init__(self, cycle: list[str]):
        self.cycle = list(cycle)
        super().__init__("directed cycle: " + " -> ".join(self.cycle + self.cycle[:1]))


class RedundantEdgeError(GraphError):
    def __init__(self, edge: tuple[str, str], path: list[str]):
        self.edge = edge
        self.path = list(path)
        super().__init__(
            f"edge {edge[0]} -> {edge[1]} is implied by path " + " -> ".join(self.path)
        )


class DuplicateEdgeError(GraphError):
    def __init__(self, edge: tuple[str, str]):
        self.edge = edge
        super().__init__(f"duplicate edge {edge[0]} -> {edge[1]}")


class InvalidNodeId(GraphError):
    pass


class DepthOutOfRange(GraphError):
    pass


class RationalOverflow(DagFdrError):
    pass


# reshaping
class NonPositiveK(DagFdrError, ValueError):
    pass


class EmptySupport(DagFdrError, ValueError):
    pass


# p-value handling
class EmptyInput(DagFdrError, ValueError):
    pass


class InvalidP(DagFdrError, ValueError):
    pass


class ZeroPValue(InvalidP):
    pass


class BoundaryP(InvalidP):
    pass


class MissingLeafP(DagFdrError, KeyError):
    pass


class ExtraP(DagFdrError, KeyError):
    pass


class MissingPValue(DagFdrError, KeyError):
    def __init__(self, node):
        self.node = node
        super().__init__(f"no p-value for testable node {node!r}")

    def __str__(self):
        return self.args[0]


class InvalidAlpha(DagFdrError, ValueError):
    pass


class OracleIncomplete(DagFdrError):
    pass


class OracleExtraneous(DagFdrError):
    pass


class InsufficientParents(DagFdrError, ValueError):
    pass


class ConfigError(DagFdrError, ValueError):
    pass


class FormatError(DagFdrError, ValueError):
    """Malformed input file."""
