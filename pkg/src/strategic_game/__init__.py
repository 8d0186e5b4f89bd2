"""Equilibria, subsidies and welfare for the two-group strategic classification game."""

from .costs import NO_SUBSIDY, SubsidyPlan
from .equilibrium import equilibrium_threshold, learner_cost_1d
from .main import main
from .models import Group, LearnerMode, Regime, SubsidyFamily
from .population import Scenario, ensure_valid, validate_scenario
from .reports.config_loader import ScenarioConfig, load_config, load_packaged
from .subsidy.optimize import optimize_subsidy
from .subsidy.regimes import compare_regimes, welfare_nonmanipulation

__all__ = [
    "NO_SUBSIDY",
    "Group",
    "LearnerMode",
    "Regime",
    "Scenario",
    "ScenarioConfig",
    "SubsidyFamily",
    "SubsidyPlan",
    "compare_regimes",
    "ensure_valid",
    "equilibrium_threshold",
    "learner_cost_1d",
    "load_config",
    "load_packaged",
    "main",
    "optimize_subsidy",
    "validate_scenario",
    "welfare_nonmanipulation",
]
