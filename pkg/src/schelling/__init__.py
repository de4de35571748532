"""Schelling games on graphs: exact equilibrium, welfare and dynamics tooling."""

from .core import (
    Assignment,
    Fractional,
    GameError,
    GameInstance,
    Linear,
    ModifiedFractional,
    Social,
    Topology,
    Typed,
    best_deviation,
    is_equilibrium,
    social_welfare,
    utility,
    validate,
)

__all__ = [
    "Assignment", "Fractional", "GameError", "GameInstance", "Linear", "ModifiedFractional",
    "Social", "Topology", "Typed", "best_deviation", "is_equilibrium", "social_welfare",
    "utility", "validate",
]
