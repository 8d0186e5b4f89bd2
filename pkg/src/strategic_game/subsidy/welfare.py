"""Per-group welfare under manipulation, subsidies and the non-manipulation benchmark."""

import logging
from typing import Optional

import numpy as np
from scipy import optimize

from ..config.settings import get_settings
from ..costs.cost_model import NO_SUBSIDY, SubsidyPlan, split_cost
from ..equilibrium.boundaries import floor_feature
from ..equilibrium.one_d import minimize_on_interval, require_1d
from ..models import Group, LearnerMode, PenaltyBreakdown, Provenance
from ..population.population import Scenario, ensure_valid
from ..utils.numerics import quad

logger = logging.getLogger(__name__)


def _plan_for(group: Group, plan: SubsidyPlan) -> SubsidyPlan:
    # Only group B is subsidized
    return plan if group == Group.B else NO_SUBSIDY


def group_welfare(s: Scenario, sigma: float, plan: SubsidyPlan, group: Group) -> float:
    """
    Average candidate utility of one group at threshold sigma.

    Candidates at or above sigma are admitted for free; those between
    l(sigma) and sigma move and keep 1 minus the cost they bear themselves.
    """
    ensure_valid(s)
    require_1d(s)
    settings = get_settings()
    g = s.group(group)
    plan = _plan_for(group, plan)
    if sigma > 1.0:
        return 0.0
    sigma = max(0.0, sigma)

    c, dist = g.cost_1d, g.marginal
    free = dist.mass(sigma, 1.0)
    floor = floor_feature(c, sigma, plan.budget)
    top = c.eval(sigma)

    def utility(x: float) -> float:
        borne, _ = split_cost(top - float(c(x)), plan)
        return (1.0 - float(borne)) * float(dist.pdf(x))

    points = dist.breakpoints() + c.kinks()
    if plan.kind == "flat":
        points.append(floor_feature(c, sigma, plan.alpha))
    movers = quad(utility, floor, sigma, points=points, epsabs=settings.quad_epsabs, limit=settings.quad_limit)
    return free + movers


def payoff_profile(s: Scenario, sigma: float, plan: SubsidyPlan, group: Group, xs) -> np.ndarray:
    """Best-response payoff of every unmanipulated feature in ``xs``"""
    g = s.group(group)
    plan = _plan_for(group, plan)
    xs = np.asarray(xs, dtype=float)
    if sigma > 1.0:
        return np.zeros_like(xs)
    c = g.cost_1d
    floor = floor_feature(c, sigma, plan.budget)
    borne = plan.borne_cost(np.maximum(c(min(sigma, 1.0)) - c(xs), 0.0))
    moving = np.maximum(0.0, 1.0 - borne)
    return np.where(xs >= sigma, 1.0, np.where(xs >= floor, moving, 0.0))


def welfare_curve(s: Scenario, sigmas, plan: SubsidyPlan, group: Group) -> np.ndarray:
    return np.array([group_welfare(s, float(z), plan, group) for z in np.asarray(sigmas, dtype=float)])


# ============== Non-manipulation Benchmark ==============

def nonmanipulation_penalty(s: Scenario, tau: float) -> PenaltyBreakdown:
    """Learner penalty when candidates cannot manipulate and the learner publishes tau"""
    a, b = s.group_a, s.group_b
    fn_b = s.c_fn * s.p_b * b.marginal.mass(b.tau, tau)
    fp_b = s.c_fp * s.p_b * b.marginal.mass(tau, b.tau)
    fp_a = s.c_fp * s.p_a * a.marginal.mass(tau, a.tau)
    fn_a = s.c_fn * s.p_a * a.marginal.mass(a.tau, tau)
    return PenaltyBreakdown(
        fn_b=fn_b,
        fp_a=fp_a,
        fp_b=fp_b,
        fn_a=fn_a,
        total=fn_b + fp_a + fp_b + fn_a,
        dominated=not (b.tau - 1e-12 <= tau <= a.tau + 1e-12),
        provenance=Provenance.ANALYTIC,
    )


def nonmanipulation_threshold(s: Scenario, mode: Optional[LearnerMode] = None) -> float:
    """
    Learner's threshold on true features, searched over [tau_B, tau_A].

    The equalizing learner balances weighted fn_B and fp_A masses instead.
    """
    ensure_valid(s)
    require_1d(s)
    mode = mode or s.learner_mode
    a, b = s.group_a, s.group_b
    lo, hi = b.tau, a.tau

    if mode == LearnerMode.EQUALIZE:
        def gap(t: float) -> float:
            return s.p_b * b.marginal.mass(b.tau, t) - s.p_a * a.marginal.mass(t, a.tau)

        if gap(lo) >= 0.0:
            return lo
        if gap(hi) <= 0.0:
            return hi
        return float(optimize.bisect(gap, lo, hi, xtol=1e-12, maxiter=200))

    def curve(grid):
        return (
            s.c_fn * s.p_b * b.marginal.mass(b.tau, grid)
            + s.c_fp * s.p_a * a.marginal.mass(grid, a.tau)
        )

    return minimize_on_interval(lambda t: nonmanipulation_penalty(s, t).total, curve, lo, hi)
