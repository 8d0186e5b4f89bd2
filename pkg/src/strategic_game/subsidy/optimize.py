"""Joint optimization of the published threshold and the subsidy parameter."""

import logging
from typing import Callable, Tuple

import numpy as np
from pydantic import BaseModel

from ..config.settings import get_settings
from ..costs.cost_model import NO_SUBSIDY, SubsidyPlan
from ..equilibrium.boundaries import undominated_interval
from ..equilibrium.one_d import (
    Threshold1D,
    require_1d,
    equilibrium_threshold,
    learner_cost_1d,
    penalty_curve,
)
from ..models import Interval, LearnerMode, PenaltyBreakdown, SubsidyFamily
from ..population.population import Scenario, ensure_valid
from ..utils.numerics import golden_section_min

logger = logging.getLogger(__name__)


class SubsidyEquilibrium(BaseModel):
    """Learner's best (threshold, subsidy) pair for one subsidy family"""
    family: SubsidyFamily
    threshold: Threshold1D
    plan: SubsidyPlan
    penalty: PenaltyBreakdown
    interval: Interval

    @property
    def sigma(self) -> float:
        return self.threshold.sigma


def make_plan(family: SubsidyFamily, value: float) -> SubsidyPlan:
    if family == SubsidyFamily.PROPORTIONAL:
        return SubsidyPlan.proportional(min(1.0, value))
    return SubsidyPlan.flat(max(0.0, value))


def parameter_range(s: Scenario, family: SubsidyFamily) -> Tuple[float, float]:
    """
    Subsidy parameters worth searching.

    Budgets beyond the full cost span of group B change nothing but the spend,
    so beta stops at 1/span and alpha at span - 1.
    """
    c = s.group_b.cost_1d
    span = c.upper - c.lower
    if family == SubsidyFamily.PROPORTIONAL:
        return min(1.0, max(1e-3, 1.0 / span)), 1.0
    return 0.0, max(0.0, span - 1.0)


def _rank(total: float, money: float, sigma: float, tol: float) -> Tuple[float, float, float]:
    """Lexicographic key (penalty, spend, sigma) with penalties and spends rounded to the tie tolerance"""
    scale = max(tol, 1e-300)
    return (round(total / scale), round(money / scale), sigma)


def optimize_subsidy(s: Scenario, family: SubsidyFamily, grid: int | None = None) -> SubsidyEquilibrium:
    """
    Jointly choose the threshold and subsidy parameter minimizing the learner penalty.

    Args:
        s: Valid 1-D scenario
        family: Proportional or flat subsidies
        grid: Points per axis (defaults to the subsidy_grid setting)

    Returns:
        Best threshold and plan; ties prefer smaller spend, then smaller sigma
    """
    ensure_valid(s)
    require_1d(s)
    settings = get_settings()
    n = grid or settings.subsidy_grid
    tol = settings.tie_tol
    p_lo, p_hi = parameter_range(s, family)
    params = np.linspace(p_lo, p_hi, n) if p_hi > p_lo else np.array([p_lo])
    ts = np.linspace(0.0, 1.0, n)

    def sigma_at(t: float, plan: SubsidyPlan) -> float:
        lo, hi = undominated_interval(s, plan)
        return lo + t * (hi - lo)

    totals = np.empty((len(params), n))
    spends = np.empty((len(params), n))
    sigmas = np.empty((len(params), n))
    for j, p in enumerate(params):
        plan = make_plan(family, float(p))
        lo, hi = undominated_interval(s, plan)
        sigmas[j] = lo + ts * (hi - lo)
        curve = penalty_curve(s, sigmas[j], plan)
        totals[j] = curve["total"]
        spends[j] = curve["subsidy_money"]

    best_total = float(np.min(totals))
    slack = tol * max(1.0, abs(best_total))
    rows, cols = np.nonzero(totals <= best_total + slack)
    j, i = min(zip(rows, cols), key=lambda rc: (spends[rc], sigmas[rc]))
    j, i = int(j), int(i)
    logger.debug(f"Grid optimum for {family.value}: param={params[j]:.6g}, t={ts[i]:.6g}, penalty={totals[j, i]:.6e}")

    def exact(t: float, p: float) -> PenaltyBreakdown:
        plan = make_plan(family, p)
        return learner_cost_1d(s, sigma_at(t, plan), plan)

    t_best, p_best = float(ts[i]), float(params[j])
    best = exact(t_best, p_best)
    dt = ts[1] - ts[0]
    dp = params[1] - params[0] if len(params) > 1 else 0.0

    def refine(f: Callable[[float], float], centre: float, step: float, lo: float, hi: float, current: float):
        if step <= 0.0:
            return centre, current
        x, fx = golden_section_min(
            f, max(lo, centre - step), min(hi, centre + step), settings.refine_tol, settings.refine_max_iter
        )
        if fx < current - tol * max(1.0, abs(current)):
            return x, fx
        return centre, current

    current = best.total
    for _ in range(settings.refine_rounds):
        t_best, current = refine(lambda t: exact(t, p_best).total, t_best, dt, 0.0, 1.0, current)
        p_best, current = refine(lambda p: exact(t_best, p).total, p_best, dp, p_lo, p_hi, current)
    best = exact(t_best, p_best)
    plan = make_plan(family, p_best)
    sigma = sigma_at(t_best, plan)

    # The family always contains the no-subsidy plan
    baseline = equilibrium_threshold(s, NO_SUBSIDY, LearnerMode.PENALTY)
    neutral = make_plan(family, 1.0 if family == SubsidyFamily.PROPORTIONAL else 0.0)
    if _rank(baseline.penalty.total, 0.0, baseline.sigma, tol) < _rank(best.total, best.subsidy_money, sigma, tol):
        sigma, plan = baseline.sigma, neutral
        best = learner_cost_1d(s, sigma, plan)

    lo, hi = undominated_interval(s, plan)
    logger.info(
        f"Subsidy equilibrium for '{s.name}' ({family.value}): sigma*={sigma:.6f}, {plan.label()}, penalty={best.total:.6f}"
    )
    return SubsidyEquilibrium(
        family=family,
        threshold=Threshold1D(sigma=sigma),
        plan=plan,
        penalty=best,
        interval=Interval(lo=lo, hi=hi),
    )
