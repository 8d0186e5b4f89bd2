"""Regime reports and the cross-regime comparison behind the paradox and regret flags."""

import logging
from typing import Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from ..config.settings import get_settings
from ..costs.cost_model import NO_SUBSIDY, SubsidyPlan
from ..equilibrium.boundaries import floor_feature
from ..equilibrium.one_d import Threshold1D, equilibrium_threshold, require_1d
from ..models import Group, Interval, LearnerMode, PenaltyBreakdown, Provenance, Regime, SubsidyFamily
from ..population.population import Scenario, ensure_valid
from .optimize import optimize_subsidy
from .welfare import group_welfare, nonmanipulation_penalty, nonmanipulation_threshold, payoff_profile

logger = logging.getLogger(__name__)

DELTA_TOL = 1e-9

FAMILY_REGIMES = {SubsidyFamily.PROPORTIONAL: Regime.PROPORTIONAL, SubsidyFamily.FLAT: Regime.FLAT}


# ============== Report Models ==============

class DeltaSummary(BaseModel):
    """Payoff change of one group's candidates relative to the manipulation regime"""
    max_gain: float
    max_loss: float
    share_better: float = Field(..., description="Probability mass of candidates strictly better off")
    share_worse: float = Field(..., description="Probability mass of candidates strictly worse off")
    mean_delta: float


class RegimeReport(BaseModel):
    """Equilibrium of one regime with its learner penalty and group welfare"""
    regime: Regime
    classifier: Threshold1D
    subsidy: SubsidyPlan = NO_SUBSIDY
    learner_penalty: PenaltyBreakdown
    learner_utility: float
    welfare_a: float
    welfare_b: float
    fp_a_interval: Optional[Interval] = None
    fn_b_interval: Optional[Interval] = None
    welfare_provenance: Provenance = Provenance.QUADRATURE
    per_candidate_deltas: Dict[str, DeltaSummary] = Field(default_factory=dict)


class PayoffTable(BaseModel):
    """Candidate payoffs on a midpoint grid of unmanipulated features, per regime and group"""
    xs: List[float]
    payoffs: Dict[str, Dict[str, List[float]]] = Field(
        default_factory=dict, description="regime -> group -> payoff per grid point"
    )


class RegimeComparison(BaseModel):
    scenario: str
    reports: List[RegimeReport]
    subsidy_paradox: Dict[str, bool]
    manipulation_regret: bool
    payoff_table: PayoffTable

    def report(self, regime: Regime) -> RegimeReport:
        return next(r for r in self.reports if r.regime == regime)


# ============== Builders ==============

def _error_intervals(s: Scenario, sigma: float, plan: SubsidyPlan):
    a, b = s.group_a, s.group_b
    l_a = floor_feature(a.cost_1d, sigma, 1.0)
    l_b = floor_feature(b.cost_1d, sigma, plan.budget)
    return Interval.of(min(l_a, a.tau), a.tau), Interval.of(b.tau, min(l_b, 1.0))


def regime_report(
    s: Scenario,
    regime: Regime,
    sigma: float,
    plan: SubsidyPlan,
    penalty: PenaltyBreakdown,
) -> RegimeReport:
    """Assemble the report for a manipulation-game equilibrium (with or without subsidy)"""
    fp_a, fn_b = _error_intervals(s, sigma, plan)
    return RegimeReport(
        regime=regime,
        classifier=Threshold1D(sigma=sigma),
        subsidy=plan,
        learner_penalty=penalty,
        learner_utility=1.0 - penalty.total,
        welfare_a=group_welfare(s, sigma, plan, Group.A),
        welfare_b=group_welfare(s, sigma, plan, Group.B),
        fp_a_interval=fp_a,
        fn_b_interval=fn_b,
    )


def welfare_nonmanipulation(s: Scenario, mode: Optional[LearnerMode] = None) -> RegimeReport:
    """
    Benchmark where candidates cannot manipulate.

    Each group's welfare is its admitted mass at the learner's threshold tau*.
    """
    tau = nonmanipulation_threshold(s, mode)
    a, b = s.group_a, s.group_b
    penalty = nonmanipulation_penalty(s, tau)
    logger.info(f"Non-manipulation threshold for '{s.name}': tau*={tau:.6f}")
    return RegimeReport(
        regime=Regime.NO_MANIPULATION,
        classifier=Threshold1D(sigma=tau),
        learner_penalty=penalty,
        learner_utility=1.0 - penalty.total,
        welfare_a=a.marginal.mass(tau, 1.0),
        welfare_b=b.marginal.mass(tau, 1.0),
        fp_a_interval=Interval.of(tau, a.tau),
        fn_b_interval=Interval.of(b.tau, tau),
        welfare_provenance=Provenance.ANALYTIC,
    )


def solve_regime(s: Scenario, regime: Regime, grid: Optional[int] = None) -> RegimeReport:
    """Equilibrium report of a single regime (subsidy regimes optimize their parameter)"""
    if regime == Regime.NO_MANIPULATION:
        return welfare_nonmanipulation(s)
    if regime == Regime.MANIPULATION:
        eq = equilibrium_threshold(s, NO_SUBSIDY)
        return regime_report(s, regime, eq.sigma, NO_SUBSIDY, eq.penalty)
    family = next(f for f, r in FAMILY_REGIMES.items() if r == regime)
    eq = optimize_subsidy(s, family, grid)
    return regime_report(s, regime, eq.sigma, eq.plan, eq.penalty)


def _delta_summary(delta: np.ndarray, density: np.ndarray) -> DeltaSummary:
    weight = density / len(delta)
    return DeltaSummary(
        max_gain=float(max(0.0, np.max(delta))),
        max_loss=float(max(0.0, -np.min(delta))),
        share_better=float(np.sum(weight[delta > DELTA_TOL])),
        share_worse=float(np.sum(weight[delta < -DELTA_TOL])),
        mean_delta=float(np.sum(weight * delta)),
    )


def compare_regimes(
    s: Scenario,
    families: Sequence[SubsidyFamily] = (SubsidyFamily.PROPORTIONAL, SubsidyFamily.FLAT),
    grid: Optional[int] = None,
) -> RegimeComparison:
    """
    Run the benchmark, manipulation and subsidy regimes and compare them.

    Subsidy paradox (per family): no candidate of either group gains against
    the manipulation regime while some candidates of both groups lose.
    Manipulation regret: the non-manipulation benchmark is strictly better
    for the learner and both groups than every other regime.

    Args:
        s: Valid 1-D scenario
        families: Subsidy families to optimize and compare
        grid: Points per axis for optimize_subsidy (defaults to settings)
    """
    ensure_valid(s)
    require_1d(s)
    settings = get_settings()

    regimes = [Regime.NO_MANIPULATION, Regime.MANIPULATION] + [FAMILY_REGIMES[f] for f in families]
    reports = [solve_regime(s, r, grid) for r in regimes]
    benchmark = reports[0]

    n = settings.delta_grid
    xs = (np.arange(n) + 0.5) / n
    table = PayoffTable(xs=xs.tolist())
    profiles: Dict[Regime, Dict[Group, np.ndarray]] = {}
    for r in reports:
        if r.regime == Regime.NO_MANIPULATION:
            tau = r.classifier.sigma
            profiles[r.regime] = {grp: (xs >= tau).astype(float) for grp in Group}
        else:
            profiles[r.regime] = {
                grp: payoff_profile(s, r.classifier.sigma, r.subsidy, grp, xs) for grp in Group
            }
        table.payoffs[r.regime.value] = {grp.value: profiles[r.regime][grp].tolist() for grp in Group}

    densities = {grp: s.group(grp).marginal.pdf(xs) for grp in Group}
    base = profiles[Regime.MANIPULATION]
    for r in reports:
        r.per_candidate_deltas = {
            grp.value: _delta_summary(profiles[r.regime][grp] - base[grp], densities[grp]) for grp in Group
        }

    paradox = {}
    for regime in (FAMILY_REGIMES[f] for f in families):
        deltas = {grp: profiles[regime][grp] - base[grp] for grp in Group}
        nobody_gains = all(np.max(d) <= DELTA_TOL for d in deltas.values())
        both_lose = all(np.min(d) < -DELTA_TOL for d in deltas.values())
        paradox[regime.value] = bool(nobody_gains and both_lose)

    others = [r for r in reports if r.regime != Regime.NO_MANIPULATION]
    regret = all(
        benchmark.welfare_a > r.welfare_a + DELTA_TOL
        and benchmark.welfare_b > r.welfare_b + DELTA_TOL
        and benchmark.learner_utility > r.learner_utility + DELTA_TOL
        for r in others
    )

    if any(paradox.values()):
        logger.info(f"Subsidy paradox on '{s.name}': {paradox}")
    if regret:
        logger.info(f"Manipulation regret on '{s.name}'")
    return RegimeComparison(
        scenario=s.name,
        reports=reports,
        subsidy_paradox=paradox,
        manipulation_regret=regret,
        payoff_table=table,
    )
