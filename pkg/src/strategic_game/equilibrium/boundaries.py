"""Correspondences l_m(y) and the undominated-interval endpoints sigma_m."""

import logging

import numpy as np

from ..config.settings import get_settings
from ..costs.cost_model import NO_SUBSIDY, CostFunction, SubsidyPlan, check_feature
from ..population.population import GroupSpec, Scenario

logger = logging.getLogger(__name__)


def floor_feature(cost: CostFunction, y, budget: float):
    """
    Vectorized l(y) = max{0, c^-1(c(y) - budget)}.

    Presented features above 1 are unreachable and map to +inf, so every
    interval [l, ...) built from them is empty.
    """
    settings = get_settings()
    y = np.asarray(y, dtype=float)
    target = cost(np.clip(y, 0.0, 1.0)) - budget
    clamped = target <= cost.lower
    inverse = cost.invert(
        np.clip(target, cost.lower, cost.upper),
        tol=settings.invert_tol,
        max_iter=settings.invert_max_iter,
    )
    out = np.where(clamped, 0.0, inverse)
    out = np.where(y > 1.0, np.inf, out)
    return float(out) if out.ndim == 0 else out


def ell(g: GroupSpec, y: float, plan: SubsidyPlan = NO_SUBSIDY) -> float:
    """
    Minimum unmanipulated feature that can present y within the plan's budget.

    Raises:
        ValueError: If y is outside [0, 1]
    """
    return floor_feature(g.cost_1d, check_feature(y, "y"), plan.budget)


def boundary_saturated(g: GroupSpec, plan: SubsidyPlan = NO_SUBSIDY) -> bool:
    """True when c(tau) + budget exceeds c(1), so sigma_boundary clamps to 1"""
    c = g.cost_1d
    return c.eval(g.tau) + plan.budget >= c.upper


def sigma_boundary(g: GroupSpec, plan: SubsidyPlan = NO_SUBSIDY) -> float:
    """
    Largest presented feature reachable from the true threshold within budget.

    None gives c^-1(c(tau) + 1), proportional(beta) c^-1(c(tau) + 1/beta) and
    flat(alpha) c^-1(c(tau) + 1 + alpha); the result is clamped to 1.
    """
    settings = get_settings()
    c = g.cost_1d
    target = c.eval(g.tau) + plan.budget
    if target >= c.upper:
        logger.debug(f"sigma boundary saturates at 1 (tau={g.tau}, plan={plan.label()})")
        return 1.0
    return float(c.invert(target, tol=settings.invert_tol, max_iter=settings.invert_max_iter))


def undominated_interval(s: Scenario, plan: SubsidyPlan = NO_SUBSIDY) -> tuple[float, float]:
    """[sigma_B(plan), sigma_A], ordered so that lo <= hi"""
    sigma_b = sigma_boundary(s.group_b, plan)
    sigma_a = sigma_boundary(s.group_a)
    return min(sigma_b, sigma_a), max(sigma_b, sigma_a)
