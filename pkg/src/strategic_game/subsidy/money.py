"""Learner spend on proportional and flat subsidies.

All functions here return the spend per group-B candidate (an integral
against D_B); the learner objective multiplies it by p_B.
"""

import logging

import numpy as np

from ..config.settings import get_settings
from ..costs.cost_model import SubsidyPlan
from ..equilibrium.boundaries import floor_feature
from ..population.population import Scenario
from ..utils.numerics import gauss_legendre, quad

logger = logging.getLogger(__name__)


def _quad_points(s: Scenario) -> list[float]:
    return s.group_b.marginal.breakpoints() + s.group_b.cost_1d.kinks()


def _gap_integral(s: Scenario, sigma: float, lo: float) -> float:
    """Integral over [lo, sigma] of (c_B(sigma) - c_B(x)) times the B density"""
    settings = get_settings()
    c = s.group_b.cost_1d
    dist = s.group_b.marginal
    top = c.eval(sigma)
    return quad(
        lambda x: (top - float(c(x))) * float(dist.pdf(x)),
        lo,
        sigma,
        points=_quad_points(s),
        epsabs=settings.quad_epsabs,
        limit=settings.quad_limit,
    )


def subsidy_money_proportional(s: Scenario, sigma: float, beta: float) -> float:
    """
    (1 - beta) times the manipulation cost of every group-B candidate who moves to sigma.

    Raises:
        ValueError: If beta is outside (0, 1]
    """
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"Proportional subsidy needs beta in (0, 1], got {beta}")
    if beta == 1.0:
        return 0.0
    if sigma <= s.group_b.tau or sigma > 1.0:
        logger.debug(f"No proportional spend at dominated threshold sigma={sigma}")
        return 0.0
    lo = floor_feature(s.group_b.cost_1d, sigma, 1.0 / beta)
    return (1.0 - beta) * _gap_integral(s, sigma, lo)


def subsidy_money_flat(s: Scenario, sigma: float, alpha: float) -> float:
    """
    Flat payouts min{alpha, cost} to group-B candidates who move to sigma.

    Candidates whose cost is below alpha are reimbursed in full; the rest,
    down to l_B^alpha(sigma), each receive alpha.

    Raises:
        ValueError: If alpha is negative
    """
    if alpha < 0.0:
        raise ValueError(f"Flat subsidy needs alpha >= 0, got {alpha}")
    if alpha == 0.0:
        return 0.0
    if sigma <= s.group_b.tau or sigma > 1.0:
        logger.debug(f"No flat spend at dominated threshold sigma={sigma}")
        return 0.0
    c = s.group_b.cost_1d
    full = floor_feature(c, sigma, alpha)
    reach = floor_feature(c, sigma, 1.0 + alpha)
    return _gap_integral(s, sigma, full) + alpha * s.group_b.marginal.mass(reach, full)


def subsidy_money(s: Scenario, sigma: float, plan: SubsidyPlan) -> float:
    """Per-candidate spend under any plan"""
    if plan.kind == "proportional":
        return subsidy_money_proportional(s, sigma, plan.beta)
    if plan.kind == "flat":
        return subsidy_money_flat(s, sigma, plan.alpha)
    return 0.0


def money_curve(s: Scenario, sigmas, plan: SubsidyPlan) -> np.ndarray:
    """Vectorized per-candidate spend over many thresholds (fixed-order quadrature, for grid scans)"""
    sigmas = np.asarray(sigmas, dtype=float)
    if plan.is_trivial:
        return np.zeros_like(sigmas)
    c = s.group_b.cost_1d
    dist = s.group_b.marginal
    active = (sigmas > s.group_b.tau) & (sigmas <= 1.0)
    top = c(np.clip(sigmas, 0.0, 1.0))

    def gap(lo):
        return gauss_legendre(lambda x: (top[..., None] - c(x)) * dist.pdf(x), lo, sigmas)

    if plan.kind == "proportional":
        lo = floor_feature(c, sigmas, plan.budget)
        spend = (1.0 - plan.beta) * gap(lo)
    else:
        full = floor_feature(c, sigmas, plan.alpha)
        reach = floor_feature(c, sigmas, plan.budget)
        spend = gap(full) + plan.alpha * dist.mass(reach, full)
    return np.where(active, spend, 0.0)
