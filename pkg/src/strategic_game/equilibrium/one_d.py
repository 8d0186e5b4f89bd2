"""One-dimensional game: best responses, learner penalty and equilibrium thresholds."""

import logging
from typing import Dict, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import optimize

from ..config.settings import get_settings
from ..costs.cost_model import NO_SUBSIDY, SubsidyPlan, check_feature
from ..models import CurvaturePrediction, Interval, LearnerMode, PenaltyBreakdown, Provenance
from ..population.population import GroupSpec, Scenario, ensure_valid
from ..subsidy.money import money_curve, subsidy_money
from ..utils.numerics import first_argmin, golden_section_min
from .boundaries import boundary_saturated, ell, floor_feature, sigma_boundary, undominated_interval

logger = logging.getLogger(__name__)


# ============== Types ==============

class Threshold1D(BaseModel):
    """f(y) = 1 iff y >= sigma; sigma above 1 rejects everyone"""
    model_config = ConfigDict(frozen=True)

    sigma: float = Field(..., ge=0.0)


class BestResponse1D(BaseModel):
    model_config = ConfigDict(frozen=True)

    y: float
    paid_cost: float = Field(..., ge=0.0)
    payoff: float = Field(..., ge=0.0)


class EquilibriumResult(BaseModel):
    """Learner's threshold choice together with its penalty"""
    threshold: Threshold1D
    penalty: PenaltyBreakdown
    plan: SubsidyPlan = NO_SUBSIDY
    interval: Interval
    mode: LearnerMode = LearnerMode.PENALTY
    saturated_a: bool = False
    saturated_b: bool = False

    @property
    def sigma(self) -> float:
        return self.threshold.sigma


def _as_sigma(t) -> float:
    return t.sigma if isinstance(t, Threshold1D) else float(t)


def require_1d(s: Scenario) -> None:
    if not s.is_1d:
        raise ValueError(f"Scenario '{s.name}' is {s.dimension}-dimensional; use the d-D operations")


# ============== Candidates ==============

def best_response_1d(g: GroupSpec, x: float, t: Threshold1D, plan: SubsidyPlan = NO_SUBSIDY) -> BestResponse1D:
    """
    Candidate's optimal presented feature against threshold t.

    Candidates already admitted stay; those who can afford sigma move to it
    exactly (indifferent candidates move); the rest stay unadmitted.
    """
    x = check_feature(x, "x")
    sigma = _as_sigma(t)
    if x >= sigma:
        return BestResponse1D(y=x, paid_cost=0.0, payoff=1.0)
    if sigma > 1.0 or x < floor_feature(g.cost_1d, sigma, plan.budget):
        return BestResponse1D(y=x, paid_cost=0.0, payoff=0.0)

    c = g.cost_1d
    borne = float(plan.borne_cost(max(0.0, c.eval(sigma) - c.eval(x))))
    return BestResponse1D(y=sigma, paid_cost=borne, payoff=max(0.0, 1.0 - borne))


# ============== Learner Penalty ==============

def learner_cost_1d(s: Scenario, t, plan: SubsidyPlan = NO_SUBSIDY) -> PenaltyBreakdown:
    """
    Learner penalty at threshold t under a subsidy plan.

    Error masses are weighted by C * p of the affected group; group A never
    receives the subsidy. Thresholds outside [sigma_B(plan), sigma_A] are
    priced the same way and flagged dominated.
    """
    ensure_valid(s)
    require_1d(s)
    sigma = _as_sigma(t)
    a, b = s.group_a, s.group_b
    l_a = floor_feature(a.cost_1d, sigma, 1.0)
    l_b = floor_feature(b.cost_1d, sigma, plan.budget)

    fn_b = s.c_fn * s.p_b * b.marginal.mass(b.tau, l_b)
    fp_b = s.c_fp * s.p_b * b.marginal.mass(l_b, b.tau)
    fp_a = s.c_fp * s.p_a * a.marginal.mass(l_a, a.tau)
    fn_a = s.c_fn * s.p_a * a.marginal.mass(a.tau, l_a)
    money = s.p_b * subsidy_money(s, sigma, plan)

    lo, hi = undominated_interval(s, plan)
    dominated = sigma < lo - 1e-12 or sigma > hi + 1e-12
    if dominated:
        logger.debug(f"Threshold {sigma:.6g} lies outside the undominated interval [{lo:.6g}, {hi:.6g}]")

    return PenaltyBreakdown(
        fn_b=fn_b,
        fp_a=fp_a,
        fp_b=fp_b,
        fn_a=fn_a,
        subsidy_money=money,
        total=fn_b + fp_a + fp_b + fn_a + s.lam * money,
        dominated=dominated,
        provenance=Provenance.ANALYTIC if plan.is_trivial else Provenance.QUADRATURE,
    )


def penalty_curve(s: Scenario, sigmas, plan: SubsidyPlan = NO_SUBSIDY) -> Dict[str, np.ndarray]:
    """Vectorized learner penalty terms over a grid of thresholds"""
    sigmas = np.asarray(sigmas, dtype=float)
    a, b = s.group_a, s.group_b
    l_a = floor_feature(a.cost_1d, sigmas, 1.0)
    l_b = floor_feature(b.cost_1d, sigmas, plan.budget)
    terms = {
        "fn_b": s.c_fn * s.p_b * b.marginal.mass(b.tau, l_b),
        "fp_b": s.c_fp * s.p_b * b.marginal.mass(l_b, b.tau),
        "fp_a": s.c_fp * s.p_a * a.marginal.mass(l_a, a.tau),
        "fn_a": s.c_fn * s.p_a * a.marginal.mass(a.tau, l_a),
        "subsidy_money": s.p_b * money_curve(s, sigmas, plan),
    }
    terms["total"] = (
        terms["fn_b"] + terms["fp_b"] + terms["fp_a"] + terms["fn_a"] + s.lam * terms["subsidy_money"]
    )
    return terms


def _error_gap(s: Scenario, sigma: float, plan: SubsidyPlan) -> float:
    """Weighted fn_B mass minus weighted fp_A mass; non-decreasing in sigma"""
    a, b = s.group_a, s.group_b
    fn = s.p_b * b.marginal.mass(b.tau, floor_feature(b.cost_1d, sigma, plan.budget))
    fp = s.p_a * a.marginal.mass(floor_feature(a.cost_1d, sigma, 1.0), a.tau)
    return fn - fp


def equalizing_threshold(s: Scenario, lo: float, hi: float, plan: SubsidyPlan = NO_SUBSIDY) -> float:
    """Threshold in [lo, hi] where weighted fn_B and fp_A masses are equal (bisection)"""
    if _error_gap(s, lo, plan) >= 0.0:
        return lo
    if _error_gap(s, hi, plan) <= 0.0:
        return hi
    return float(optimize.bisect(lambda z: _error_gap(s, z, plan), lo, hi, xtol=1e-12, maxiter=200))


def minimize_on_interval(objective, vector_objective, lo: float, hi: float) -> float:
    """
    Dense grid then golden-section refinement in the best cell.

    Values within the plateau tolerance count as ties, and refinement replaces
    the grid point only if it beats it by more than that, so a flat penalty
    resolves to the smallest grid threshold (lo itself).
    """
    settings = get_settings()
    slack = settings.plateau_tol
    if hi - lo <= 1e-15:
        return lo
    grid = np.linspace(lo, hi, settings.grid_size)
    i = first_argmin(vector_objective(grid), slack)
    best_sigma = float(grid[i])
    best = objective(best_sigma)

    left, right = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    x, fx = golden_section_min(objective, left, right, settings.refine_tol, settings.refine_max_iter)
    if fx < best - slack * max(1.0, abs(best)):
        logger.debug(f"Refined threshold {best_sigma:.9f} -> {x:.9f} ({best:.3e} -> {fx:.3e})")
        return float(x)
    return best_sigma


def equilibrium_threshold(
    s: Scenario,
    plan: SubsidyPlan = NO_SUBSIDY,
    mode: Optional[LearnerMode] = None,
) -> EquilibriumResult:
    """
    Learner's equilibrium threshold over the undominated interval.

    Args:
        s: Valid 1-D scenario
        plan: Subsidy plan held fixed during the search
        mode: Learner mode; defaults to the scenario's

    Returns:
        Equilibrium threshold with its penalty decomposition
    """
    ensure_valid(s)
    require_1d(s)
    mode = mode or s.learner_mode
    lo, hi = undominated_interval(s, plan)

    if mode == LearnerMode.EQUALIZE:
        sigma = equalizing_threshold(s, lo, hi, plan)
    else:
        sigma = minimize_on_interval(
            lambda z: learner_cost_1d(s, z, plan).total,
            lambda grid: penalty_curve(s, grid, plan)["total"],
            lo,
            hi,
        )

    penalty = learner_cost_1d(s, sigma, plan)
    logger.info(
        f"Equilibrium for '{s.name}' ({plan.label()}, {mode.value}): sigma*={sigma:.6f}, penalty={penalty.total:.6f}"
    )
    return EquilibriumResult(
        threshold=Threshold1D(sigma=sigma),
        penalty=penalty,
        plan=plan,
        interval=Interval(lo=lo, hi=hi),
        mode=mode,
        saturated_a=boundary_saturated(s.group_a),
        saturated_b=boundary_saturated(s.group_b, plan),
    )


# ============== Curvature Shortcut ==============

def curvature_prediction(s: Scenario) -> CurvaturePrediction:
    """
    Predict the equilibrium endpoint from the curvature of proportional costs.

    Applies to uniform features, C_FN = C_FP, p_A = p_B and c_A = q * c_B:
    concave costs give sigma_B, convex costs sigma_A, affine costs leave the
    learner indifferent. Returns NOT_APPLICABLE otherwise, including when the
    correspondences clamp inside the interval.
    """
    if not s.is_1d:
        return CurvaturePrediction.NOT_APPLICABLE
    a, b = s.group_a, s.group_b
    if not (a.marginal.is_uniform() and b.marginal.is_uniform()):
        return CurvaturePrediction.NOT_APPLICABLE
    if abs(s.c_fn - s.c_fp) > 1e-12 or abs(s.p_a - s.p_b) > 1e-12:
        return CurvaturePrediction.NOT_APPLICABLE

    xs = np.linspace(0.0, 1.0, 257)
    ca, cb = a.cost_1d(xs), b.cost_1d(xs)
    ratio = ca[1:] / cb[1:]
    q = float(np.mean(ratio))
    if np.ptp(ratio) > 1e-9 * max(1.0, abs(q)) or abs(ca[0] - q * cb[0]) > 1e-9:
        return CurvaturePrediction.NOT_APPLICABLE

    sat_a, sat_b = boundary_saturated(a), boundary_saturated(b)
    if sat_a != sat_b:
        return CurvaturePrediction.NOT_APPLICABLE
    if not sat_a and float(ell(a, sigma_boundary(b))) <= 0.0:
        return CurvaturePrediction.NOT_APPLICABLE

    second = cb[2:] - 2.0 * cb[1:-1] + cb[:-2]
    eps = 1e-10 * max(1.0, float(np.max(np.abs(cb))))
    if np.all(second < -eps):
        return CurvaturePrediction.SIGMA_B
    if np.all(second > eps):
        return CurvaturePrediction.SIGMA_A
    if np.all(np.abs(second) <= eps):
        return CurvaturePrediction.INDIFFERENT
    return CurvaturePrediction.NOT_APPLICABLE
