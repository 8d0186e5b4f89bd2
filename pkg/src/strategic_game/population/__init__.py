from .population import (
    Distribution,
    DistributionSpec,
    GroupSpec,
    PiecewiseLinearDensity,
    Scenario,
    TrueRule1D,
    TrueRuleND,
    Uniform01,
    ensure_valid,
    interval_mass,
    validate_scenario,
)

__all__ = [
    "Distribution",
    "DistributionSpec",
    "GroupSpec",
    "PiecewiseLinearDensity",
    "Scenario",
    "TrueRule1D",
    "TrueRuleND",
    "Uniform01",
    "ensure_valid",
    "interval_mass",
    "validate_scenario",
]
