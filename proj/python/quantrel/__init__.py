from ._quantrel import (
    SolverError,
    ValidationError,
    assemblage,
    behaviour,
    incompatibility,
    measurement_effects,
    nonlocality,
    ns_project,
    seesaw,
    state_matrix,
    steering,
)

__all__ = [
    "SolverError",
    "ValidationError",
    "assemblage",
    "behaviour",
    "incompatibility",
    "measurement_effects",
    "nonlocality",
    "ns_project",
    "seesaw",
    "state_matrix",
    "steering",
]
