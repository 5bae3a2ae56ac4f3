# graphdual/core/errors.py
from __future__ import annotations


class GraphDualError(Exception):
    """Root of every error raised by the library."""

    kind = "error"

    def to_dict(self) -> dict:
        return {"type": self.kind, "message": str(self)}


class ValidationError(GraphDualError, ValueError):
    kind = "validation_error"


class GraphError(ValidationError):
    kind = "graph_error"


class PreconditionError(ValidationError):
    kind = "precondition_error"


class GuardError(ValidationError):
    kind = "guard_error"


class DomainError(ValidationError):
    kind = "domain_error"


class SimulationError(GraphDualError, RuntimeError):
    kind = "simulation_error"
