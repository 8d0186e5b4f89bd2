"""d-dimensional game with linear costs and hyperplane classifiers.

Geometry (simplices, best responses, perfect classifiers, effective levels)
is exact; learner penalties over product-marginal populations are Monte
Carlo estimates with standard errors.
"""

import logging
from enum import Enum
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..config.settings import get_settings
from ..costs.cost_model import NO_SUBSIDY, LinearCostVector, SubsidyPlan
from ..models import Estimate, PenaltyBreakdown, Provenance
from ..population.population import GroupSpec, Scenario, TrueRuleND, ensure_valid
from ..utils.monte_carlo import BlockMonteCarlo

logger = logging.getLogger(__name__)

BOX_SLACK = 1e-12


# ============== Geometry ==============

class Hyperplane(BaseModel):
    """f(y) = 1 iff sum_i g_i y_i >= g0"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    g: List[float] = Field(..., min_length=1)
    g0: float

    @model_validator(mode="after")
    def validate_weights(self):
        if any(w < 0.0 for w in self.g):
            raise ValueError("hyperplane weights must be non-negative")
        if not any(w > 0.0 for w in self.g):
            raise ValueError("hyperplane needs at least one positive weight")
        return self

    @property
    def dimension(self) -> int:
        return len(self.g)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.g, dtype=float)

    def score(self, y) -> np.ndarray:
        return np.asarray(y, dtype=float) @ self.as_array()

    def classify(self, y) -> np.ndarray:
        return self.score(y) >= self.g0

    def with_offset(self, g0: float) -> "Hyperplane":
        return Hyperplane(g=self.g, g0=g0)


class SimplexDirection(str, Enum):
    FORWARD = "forward"  # features reachable from the anchor
    BACKWARD = "backward"  # origins that could have produced the anchor


class Simplex(BaseModel):
    """Points reachable from (or leading to) an anchor within a manipulation budget"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    anchor: List[float]
    budget: float = Field(..., ge=0.0)
    costs: LinearCostVector
    direction: SimplexDirection = SimplexDirection.FORWARD

    @model_validator(mode="after")
    def validate_anchor(self):
        if len(self.anchor) != self.costs.dimension:
            raise ValueError("simplex anchor and costs have different dimensions")
        if any(not (-BOX_SLACK <= v <= 1.0 + BOX_SLACK) for v in self.anchor):
            raise ValueError("simplex anchor must lie in the unit box")
        if any(c <= 0.0 for c in self.costs.coeffs):
            raise ValueError("simplex needs strictly positive costs")
        return self

    def _sign(self) -> float:
        return 1.0 if self.direction == SimplexDirection.FORWARD else -1.0

    def vertices(self, clamp: bool = True) -> np.ndarray:
        """Anchor followed by one vertex per axis, shape (d + 1, d)"""
        x = np.asarray(self.anchor, dtype=float)
        reach = self.budget / self.costs.as_array()
        verts = np.vstack([x, x + self._sign() * np.diag(reach)])
        return np.clip(verts, 0.0, 1.0) if clamp else verts

    def contains(self, point, within_box: bool = True) -> bool:
        p = np.asarray(point, dtype=float)
        x = np.asarray(self.anchor, dtype=float)
        step = self._sign() * (p - x)
        if np.any(step < -BOX_SLACK):
            return False
        if within_box and (np.any(p < -BOX_SLACK) or np.any(p > 1.0 + BOX_SLACK)):
            return False
        return float(step @ self.costs.as_array()) <= self.budget * (1.0 + 1e-12) + BOX_SLACK


def simplex_contained(inner: Simplex, outer: Simplex) -> bool:
    """True when every unclamped vertex of ``inner`` lies in ``outer`` (same direction)"""
    if inner.direction != outer.direction:
        raise ValueError("simplices point in different directions")
    return all(outer.contains(v, within_box=False) for v in inner.vertices(clamp=False))


# ============== Candidates ==============

class BestResponseND(BaseModel):
    model_config = ConfigDict(frozen=True)

    y: List[float]
    paid_cost: float = Field(..., ge=0.0)
    payoff: float = Field(..., ge=0.0)
    admitted: bool
    moved_components: List[int] = Field(default_factory=list)
    box_limited: bool = False


def best_response_nd(
    x,
    costs: LinearCostVector,
    h: Hyperplane,
    plan: SubsidyPlan = NO_SUBSIDY,
) -> BestResponseND:
    """
    Cheapest move onto the hyperplane, if it is affordable.

    The candidate spends only on axes with the best score-per-cost ratio
    g_i / c_i, filling them in index order. A move is affordable when its
    unsubsidized cost is at most ``plan.budget`` (1, 1/beta or 1 + alpha);
    ``paid_cost`` is the share the candidate bears, ``plan.borne_cost(raw)``,
    and payoff is 1 minus that share.
    When the unit box stops every such axis short of the hyperplane the
    candidate stays and the result is flagged ``box_limited``.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (costs.dimension,) or h.dimension != costs.dimension:
        raise ValueError("feature, cost and hyperplane dimensions disagree")
    if np.any(x < -BOX_SLACK) or np.any(x > 1.0 + BOX_SLACK):
        raise ValueError(f"Feature vector {x.tolist()} is outside the unit box")
    x = np.clip(x, 0.0, 1.0)

    g = h.as_array()
    score = float(g @ x)
    stay = list(x)
    if score >= h.g0:
        return BestResponseND(y=stay, paid_cost=0.0, payoff=1.0, admitted=True)

    ratios = costs.ratios(g)
    best = float(np.max(ratios))
    if score + plan.budget * best < h.g0:
        return BestResponseND(y=stay, paid_cost=0.0, payoff=0.0, admitted=False)

    y = x.copy()
    need = h.g0 - score
    moved: List[int] = []
    for k in np.flatnonzero(ratios >= best * (1.0 - 1e-12)):
        if need <= 0.0:
            break
        step = min(1.0 - y[k], need / g[k])
        if step <= 0.0:
            continue
        y[k] += step
        need -= g[k] * step
        moved.append(int(k))

    if need > 1e-12 * max(1.0, abs(h.g0)):
        logger.debug(f"Move from {x.tolist()} blocked by the unit box ({need:.3e} short)")
        return BestResponseND(y=stay, paid_cost=0.0, payoff=0.0, admitted=False, box_limited=True)

    raw = float(costs.as_array() @ (y - x))
    borne = float(plan.borne_cost(raw))
    return BestResponseND(
        y=list(y),
        paid_cost=borne,
        payoff=max(0.0, 1.0 - borne),
        admitted=True,
        moved_components=moved,
    )


def _best_axis(g: np.ndarray, costs: LinearCostVector) -> int:
    return int(np.argmax(costs.ratios(g)))


def perfect_classifier(group: GroupSpec, budget: float = 1.0) -> Hyperplane:
    """
    Hyperplane that, after best responses, admits exactly the group's positives.

    Uses g = w and g0 = tau + budget * max_i w_i / c_i.
    """
    if not isinstance(group.rule, TrueRuleND):
        raise TypeError("perfect_classifier needs a weighted (d-D) true rule")
    w = group.rule.as_array()
    ratios = group.cost.ratios(w)
    return Hyperplane(g=list(w), g0=group.tau + budget * float(np.max(ratios)))


def effective_level(h: Hyperplane, costs: LinearCostVector, budget: float = 1.0) -> float:
    """Score g.x above which a candidate can afford to reach the hyperplane"""
    return h.g0 - budget * float(np.max(costs.ratios(h.as_array())))


class Reduction(BaseModel):
    """1-D view of a hyperplane game: feature g.x with linear cost slope c_k / g_k"""
    model_config = ConfigDict(frozen=True)

    g: List[float]
    axis: int = Field(..., description="Zero-based index k of the best ratio axis")
    slope: float

    def score(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) @ np.asarray(self.g, dtype=float)


def reduce_to_1d(h: Hyperplane, costs: LinearCostVector) -> Reduction:
    """Scalarize a fixed direction g into a one-dimensional linear-cost game"""
    g = h.as_array()
    k = _best_axis(g, costs)
    return Reduction(g=list(g), axis=k, slope=costs.coeffs[k] / g[k])


# ============== Learner Penalty ==============

def require_nd(s: Scenario) -> None:
    if s.is_1d:
        raise ValueError(f"Scenario '{s.name}' is one-dimensional; use learner_cost_1d")


def _monte_carlo(mc_samples: Optional[int], seed: Optional[int]) -> BlockMonteCarlo:
    settings = get_settings()
    samples = settings.mc_samples if mc_samples is None else mc_samples
    if samples <= 0:
        raise ValueError(f"Monte Carlo needs a positive sample count, got {samples}")
    return BlockMonteCarlo(
        samples=samples,
        seed=settings.seed if seed is None else seed,
        block_size=settings.mc_block_size,
        workers=settings.mc_workers,
    )


def learner_cost_nd(
    s: Scenario,
    h: Hyperplane,
    plan: SubsidyPlan = NO_SUBSIDY,
    mc_samples: Optional[int] = None,
    seed: Optional[int] = None,
) -> PenaltyBreakdown:
    """
    Monte Carlo estimate of the learner penalty for a hyperplane classifier.

    A candidate is admitted iff its score reaches its group's effective level
    (box limits are ignored here). Group-B movers below g0 are paid the
    learner share of (c_k / g_k) * (g0 - g.x).

    Raises:
        ValueError: If mc_samples is 0 or the scenario is one-dimensional
    """
    ensure_valid(s)
    require_nd(s)
    mc = _monte_carlo(mc_samples, seed)
    a, b = s.group_a, s.group_b
    g = h.as_array()
    level_a = effective_level(h, a.cost, 1.0)
    level_b = effective_level(h, b.cost, plan.budget)
    slope_b = 1.0 / float(np.max(b.cost.ratios(g)))

    def kernel(rng: np.random.Generator, n: int):
        xa = a.sample(rng, n)
        xb = b.sample(rng, n)
        sa, sb = xa @ g, xb @ g
        pos_a, pos_b = a.rule.label(xa), b.rule.label(xb)
        reach_a, reach_b = sa >= level_a, sb >= level_b

        movers = reach_b & (sb < h.g0)
        share = np.where(movers, plan.learner_cost(slope_b * np.maximum(h.g0 - sb, 0.0)), 0.0)
        terms = {
            "fp_a": s.c_fp * s.p_a * (reach_a & ~pos_a),
            "fn_a": s.c_fn * s.p_a * (~reach_a & pos_a),
            "fn_b": s.c_fn * s.p_b * (~reach_b & pos_b),
            "fp_b": s.c_fp * s.p_b * (reach_b & ~pos_b),
            "subsidy_money": s.p_b * share,
        }
        terms["total"] = (
            terms["fp_a"] + terms["fn_a"] + terms["fn_b"] + terms["fp_b"] + s.lam * terms["subsidy_money"]
        )
        return {k: np.asarray(v, dtype=float) for k, v in terms.items()}

    est = mc.run(kernel)
    dominated = est["fn_a"].value > 0.0 or est["fp_b"].value > 0.0
    if dominated:
        logger.warning(f"Hyperplane {h.g}/{h.g0:.6g} commits errors an undominated classifier avoids")
    return PenaltyBreakdown(
        fn_b=est["fn_b"].value,
        fp_a=est["fp_a"].value,
        fp_b=est["fp_b"].value,
        fn_a=est["fn_a"].value,
        subsidy_money=est["subsidy_money"].value,
        total=est["total"].value,
        dominated=dominated,
        provenance=Provenance.MONTE_CARLO,
        standard_errors={k: e.se for k, e in est.items()},
    )


class OffsetSweep(BaseModel):
    """Learner penalty along offsets g0 of a fixed direction"""
    direction: List[float]
    offsets: List[float]
    totals: List[float]
    standard_errors: List[float]
    best: Hyperplane
    best_penalty: PenaltyBreakdown


def offset_range(s: Scenario, direction, plan: SubsidyPlan = NO_SUBSIDY) -> tuple[float, float]:
    """
    Offsets worth scanning along ``direction``.

    When both true rules share the direction this is the undominated range
    between the two perfect classifiers; otherwise every score from 0 up to
    reject-all.
    """
    g = np.asarray(direction, dtype=float)
    a, b = s.group_a, s.group_b

    def aligned(rule: TrueRuleND) -> bool:
        w = rule.as_array()
        return bool(np.allclose(w / np.max(w), g / np.max(g)))

    if aligned(a.rule) and aligned(b.rule):
        scale_a = np.max(g) / np.max(a.rule.as_array())
        scale_b = np.max(g) / np.max(b.rule.as_array())
        hi = scale_a * a.tau + float(np.max(a.cost.ratios(g)))
        lo = scale_b * b.tau + plan.budget * float(np.max(b.cost.ratios(g)))
        return min(lo, hi), max(lo, hi)
    return 0.0, float(np.sum(g)) + plan.budget * float(np.max(a.cost.ratios(g)))


def equilibrium_offset_nd(
    s: Scenario,
    direction,
    plan: SubsidyPlan = NO_SUBSIDY,
    n_offsets: int = 101,
    mc_samples: Optional[int] = None,
    seed: Optional[int] = None,
) -> OffsetSweep:
    """
    Scan offsets along a fixed direction and keep the cheapest.

    Every offset is evaluated on the same seeded samples, so differences
    between offsets carry no sampling noise from reseeding. Ties go to the
    smallest offset.
    """
    ensure_valid(s)
    require_nd(s)
    lo, hi = offset_range(s, direction, plan)
    offsets = np.linspace(lo, hi, max(2, n_offsets))
    base = Hyperplane(g=list(map(float, direction)), g0=float(lo))

    penalties = [learner_cost_nd(s, base.with_offset(float(o)), plan, mc_samples, seed) for o in offsets]
    totals = [p.total for p in penalties]
    i = int(np.argmin(totals))
    logger.info(f"Offset sweep on '{s.name}': best g0={offsets[i]:.6f} with penalty {totals[i]:.6f}")
    return OffsetSweep(
        direction=base.g,
        offsets=[float(o) for o in offsets],
        totals=totals,
        standard_errors=[p.standard_errors["total"] for p in penalties],
        best=base.with_offset(float(offsets[i])),
        best_penalty=penalties[i],
    )


# ============== Dominance Repair ==============

class RepairDiagnostic(BaseModel):
    """Error rates of f before and after combining it with the groups' perfect classifiers"""
    fn_a_before: Estimate
    fn_a_after: Estimate
    fp_b_before: Estimate
    fp_b_after: Estimate
    improves: bool


def dominance_repair(
    s: Scenario,
    h: Hyperplane,
    plan: SubsidyPlan = NO_SUBSIDY,
    mc_samples: Optional[int] = None,
    seed: Optional[int] = None,
) -> RepairDiagnostic:
    """
    Check whether f can be strictly improved by the perfect-classifier repairs.

    Group-A false negatives are compared for f and f OR f1_A; group-B false
    positives for f and f AND f1_B. ``improves`` is set when either drops by
    more than three standard errors.
    """
    ensure_valid(s)
    require_nd(s)
    mc = _monte_carlo(mc_samples, seed)
    a, b = s.group_a, s.group_b
    f1_a = perfect_classifier(a)
    f1_b = perfect_classifier(b, plan.budget)
    g = h.as_array()

    def kernel(rng: np.random.Generator, n: int):
        xa = a.sample(rng, n)
        xb = b.sample(rng, n)
        pos_a, pos_b = a.rule.label(xa), b.rule.label(xb)
        reach_f_a = xa @ g >= effective_level(h, a.cost)
        reach_1a = f1_a.score(xa) >= effective_level(f1_a, a.cost)
        reach_f_b = xb @ g >= effective_level(h, b.cost, plan.budget)
        reach_1b = f1_b.score(xb) >= effective_level(f1_b, b.cost, plan.budget)
        return {
            "fn_a_before": (pos_a & ~reach_f_a).astype(float),
            "fn_a_after": (pos_a & ~(reach_f_a | reach_1a)).astype(float),
            "fp_b_before": (~pos_b & reach_f_b).astype(float),
            "fp_b_after": (~pos_b & reach_f_b & reach_1b).astype(float),
        }

    est = mc.run(kernel)

    def dropped(before: Estimate, after: Estimate) -> bool:
        return before.value - after.value > 3.0 * (before.se + after.se)

    return RepairDiagnostic(
        **est,
        improves=dropped(est["fn_a_before"], est["fn_a_after"]) or dropped(est["fp_b_before"], est["fp_b_after"]),
    )
