"""Storage planning for collections of dataset versions."""
from .core import (ROOT, Cost, CostMatrices, CostReport, SolverGraph, StoragePlan,
                   VersionGraph, WorkloadProfile, build_solver_graph, check_triangle,
                   evaluate, validate_plan)
from .errors import (CorruptionError, InfeasibleError, InvalidInputError,
                     InvalidPlanError, StoreplanError)

__version__ = "0.1.0"

__all__ = [
    "ROOT", "Cost", "CostMatrices", "CostReport", "SolverGraph", "StoragePlan",
    "VersionGraph", "WorkloadProfile", "build_solver_graph", "check_triangle",
    "evaluate", "validate_plan", "CorruptionError", "InfeasibleError",
    "InvalidInputError", "InvalidPlanError", "StoreplanError",
]
