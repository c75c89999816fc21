"""Exception hierarchy shared across the engine.

Every error that can surface through the CLI or the HTTP service derives
from :class:`DswigError` and carries a short machine-readable ``code``.
"""

from __future__ import annotations


class DswigError(Exception):
    """Base class for all domain errors."""

    code = "error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def to_json(self) -> dict:
        return {"code": self.code, "message": self.message}


class ParseError(DswigError):
    """Syntax or semantic error in DSL source, with source location."""

    code = "parse_error"

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        loc = f" (line {line}" + (f", col {col}" if col is not None else "") + ")" if line else ""
        super().__init__(message + loc)
        self.line = line
        self.col = col

    def to_json(self) -> dict:
        out = super().to_json()
        if self.line is not None:
            out["location"] = {"line": self.line, "col": self.col}
        return out


class GraphError(DswigError):
    """Structural violation: cycles, duplicate nodes, bad endpoints."""

    code = "graph_error"


class TransformError(DswigError):
    """Invalid SWIG / delta-SWIG operation."""

    code = "transform_error"


class QueryError(DswigError):
    """Malformed or unresolvable d-separation query."""

    code = "query_error"


class AdjustError(DswigError):
    """Adjustment-set computation not applicable or out of bounds."""

    code = "adjust_error"


class SimulationError(DswigError):
    """Invalid simulation configuration or empty target group."""

    code = "simulation_error"


class EstimationError(DswigError):
    """Estimator preconditions violated (empty cells, overlap failure)."""

    code = "estimation_error"
