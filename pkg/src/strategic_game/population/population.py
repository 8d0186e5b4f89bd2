"""Feature distributions, true labeling rules, groups and scenario validation."""

import itertools
import logging
from typing import Annotated, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, model_validator

from ..config.settings import get_settings
from ..costs.cost_model import (
    CostFunction,
    LinearCost,
    LinearCostVector,
    PowerSumCost,
    SqrtLinearCost,
    TabulatedCost,
    check_cost_condition,
    check_cost_condition_nd,
)
from ..errors import ScenarioError
from ..models import Group, LearnerMode, ValidationReport
from ..utils.numerics import bisect_increasing

logger = logging.getLogger(__name__)


# ============== Distributions ==============

class Distribution(BaseModel):
    """A probability distribution of unmanipulated features on [0, 1]."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    def pdf(self, x):
        raise NotImplementedError

    def cdf(self, x):
        raise NotImplementedError

    def breakpoints(self) -> List[float]:
        """Interior points where the density is not smooth"""
        return []

    def is_uniform(self) -> bool:
        return False

    def mass(self, lo, hi):
        """
        Probability of [lo, hi) after clamping to [0, 1]; empty intervals give 0.

        Vectorized; used internally where an interval may legitimately be empty.
        """
        lo = np.clip(np.asarray(lo, dtype=float), 0.0, 1.0)
        hi = np.clip(np.asarray(hi, dtype=float), 0.0, 1.0)
        out = np.where(hi > lo, self.cdf(hi) - self.cdf(lo), 0.0)
        return float(out) if out.ndim == 0 else out

    def ppf(self, u):
        return bisect_increasing(self.cdf, np.clip(np.asarray(u, dtype=float), 0.0, 1.0), tol=1e-12)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.ppf(rng.random(n))


class Uniform01(Distribution):
    kind: Literal["uniform"] = "uniform"

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= 0.0) & (x <= 1.0), 1.0, 0.0)

    def cdf(self, x):
        return np.clip(np.asarray(x, dtype=float), 0.0, 1.0)

    def ppf(self, u):
        return np.clip(np.asarray(u, dtype=float), 0.0, 1.0)

    def is_uniform(self) -> bool:
        return True


class PiecewiseLinearDensity(Distribution):
    """Density interpolated linearly between (x, density) knots, normalized to integrate to 1"""

    kind: Literal["piecewise_linear"] = "piecewise_linear"
    knots: List[Tuple[float, float]] = Field(..., min_length=2, description="(x, density) knots spanning [0, 1]")

    _xs: np.ndarray = PrivateAttr()
    _ds: np.ndarray = PrivateAttr()
    _cum: np.ndarray = PrivateAttr()

    @model_validator(mode="after")
    def validate_points(self):
        xs = np.asarray([p[0] for p in self.knots], dtype=float)
        ds = np.asarray([p[1] for p in self.knots], dtype=float)
        if xs[0] != 0.0 or xs[-1] != 1.0:
            raise ValueError("piecewise_linear knots must start at 0 and end at 1")
        if np.any(np.diff(xs) <= 0.0):
            raise ValueError("piecewise_linear knots must be strictly increasing in x")
        if np.any(ds < 0.0):
            raise ValueError("density values must be non-negative")
        if np.sum(0.5 * (ds[1:] + ds[:-1]) * np.diff(xs)) <= 0.0:
            raise ValueError("density must have positive total mass")
        return self

    def model_post_init(self, __context) -> None:
        xs = np.asarray([p[0] for p in self.knots], dtype=float)
        ds = np.asarray([p[1] for p in self.knots], dtype=float)
        areas = 0.5 * (ds[1:] + ds[:-1]) * np.diff(xs)
        total = float(np.sum(areas))
        if total <= 0.0:
            total = 1.0  # rejected by validate_points
        self._xs = xs
        self._ds = ds / total
        self._cum = np.concatenate([[0.0], np.cumsum(areas / total)])

    def _segment(self, x: np.ndarray):
        i = np.clip(np.searchsorted(self._xs, x, side="right") - 1, 0, len(self._xs) - 2)
        h = self._xs[i + 1] - self._xs[i]
        slope = (self._ds[i + 1] - self._ds[i]) / h
        return i, x - self._xs[i], slope

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        i, t, slope = self._segment(np.clip(x, 0.0, 1.0))
        inside = (x >= 0.0) & (x <= 1.0)
        return np.where(inside, self._ds[i] + slope * t, 0.0)

    def cdf(self, x):
        x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        i, t, slope = self._segment(x)
        return np.minimum(1.0, self._cum[i] + self._ds[i] * t + 0.5 * slope * t * t)

    def breakpoints(self) -> List[float]:
        return [float(x) for x in self._xs[1:-1]]


DistributionSpec = Annotated[Union[Uniform01, PiecewiseLinearDensity], Field(discriminator="kind")]


def interval_mass(d: Distribution, lo: float, hi: float) -> float:
    """
    Probability that a feature drawn from d falls in [lo, hi).

    Raises:
        ValueError: If the interval is inverted or leaves [0, 1]
    """
    if not (0.0 <= lo <= hi <= 1.0):
        raise ValueError(f"interval_mass needs 0 <= lo <= hi <= 1, got [{lo}, {hi})")
    if hi == lo:
        return 0.0
    return float(d.cdf(hi) - d.cdf(lo))


# ============== True Labeling Rules ==============

class TrueRule1D(BaseModel):
    """h(x) = 1 iff x >= tau"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    tau: float = Field(..., ge=0.0, le=1.0)

    def label(self, x):
        return np.asarray(x, dtype=float) >= self.tau


class TrueRuleND(BaseModel):
    """h(x) = 1 iff sum_i w_i x_i >= tau"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    weights: List[float] = Field(..., min_length=1)
    tau: float

    @model_validator(mode="after")
    def validate_weights(self):
        if any(w < 0.0 for w in self.weights):
            raise ValueError("true-rule weights must be non-negative")
        if not any(w > 0.0 for w in self.weights):
            raise ValueError("true-rule weights need at least one positive entry")
        return self

    def as_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)

    def label(self, x):
        return np.asarray(x, dtype=float) @ self.as_array() >= self.tau


# ============== Groups and Scenarios ==============

AnyCost = Annotated[
    Union[LinearCost, SqrtLinearCost, PowerSumCost, TabulatedCost, LinearCostVector],
    Field(discriminator="family"),
]


class GroupSpec(BaseModel):
    """One population group: feature distribution, manipulation cost and true rule.

    In d dimensions ``distribution`` is either one marginal shared by every
    axis or a list of d independent marginals.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    distribution: Union[DistributionSpec, List[DistributionSpec]] = Field(default_factory=Uniform01)
    cost: AnyCost
    rule: Union[TrueRule1D, TrueRuleND]

    @model_validator(mode="after")
    def validate_dimensions(self):
        if isinstance(self.cost, LinearCostVector):
            if not isinstance(self.rule, TrueRuleND):
                raise ValueError("a linear cost vector needs a weighted (d-D) true rule")
            if len(self.rule.weights) != self.cost.dimension:
                raise ValueError(
                    f"true-rule weights have dimension {len(self.rule.weights)}, costs {self.cost.dimension}"
                )
            if isinstance(self.distribution, list) and len(self.distribution) != self.cost.dimension:
                raise ValueError("one marginal distribution is needed per feature dimension")
        else:
            if not isinstance(self.rule, TrueRule1D):
                raise ValueError("a 1-D cost function needs a threshold true rule")
            if isinstance(self.distribution, list):
                raise ValueError("a 1-D group takes a single distribution")
        return self

    @property
    def dimension(self) -> int:
        return self.cost.dimension if isinstance(self.cost, LinearCostVector) else 1

    @property
    def is_1d(self) -> bool:
        return not isinstance(self.cost, LinearCostVector)

    @property
    def tau(self) -> float:
        return self.rule.tau

    @property
    def cost_1d(self) -> CostFunction:
        if not self.is_1d:
            raise TypeError("group has a d-dimensional linear cost")
        return self.cost

    @property
    def marginal(self) -> Distribution:
        """The 1-D feature distribution"""
        if isinstance(self.distribution, list):
            raise TypeError("group has per-dimension marginals")
        return self.distribution

    def marginals(self) -> List[Distribution]:
        if isinstance(self.distribution, list):
            return list(self.distribution)
        return [self.distribution] * self.dimension

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Draw n unmanipulated features, shape (n,) in 1-D and (n, d) otherwise"""
        if self.is_1d:
            return self.marginal.sample(rng, n)
        return np.column_stack([m.sample(rng, n) for m in self.marginals()])


class Scenario(BaseModel):
    """Two groups plus the learner's penalty weights.

    Construction only checks field types; ``validate_scenario`` checks the
    game's standing assumptions and every operation calls ``ensure_valid``.
    """

    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    name: str = "scenario"
    group_a: GroupSpec
    group_b: GroupSpec
    p_a: float = 0.5
    p_b: Optional[float] = None
    c_fp: float = 1.0
    c_fn: float = 1.0
    lam: float = Field(default=0.0, alias="lambda")
    learner_mode: LearnerMode = LearnerMode.PENALTY

    _report: Optional[ValidationReport] = PrivateAttr(default=None)

    @model_validator(mode="before")
    @classmethod
    def fill_p_b(cls, data):
        if isinstance(data, dict) and data.get("p_b") is None:
            data = {**data, "p_b": 1.0 - float(data.get("p_a", 0.5))}
        return data

    @property
    def dimension(self) -> int:
        return self.group_a.dimension

    @property
    def is_1d(self) -> bool:
        return self.group_a.is_1d and self.group_b.is_1d

    def group(self, which: Group) -> GroupSpec:
        return self.group_a if which == Group.A else self.group_b

    def proportion(self, which: Group) -> float:
        return self.p_a if which == Group.A else self.p_b

    def model_copy(self, *, update=None, deep: bool = False) -> "Scenario":
        copy = super().model_copy(update=update, deep=deep)
        copy._report = None
        return copy


def _containment_points(d: int, per_axis: int) -> np.ndarray:
    if d <= 3:
        axis = np.linspace(0.0, 1.0, per_axis)
        return np.array(list(itertools.product(axis, repeat=d)), dtype=float)
    rng = np.random.default_rng(0)
    return rng.random((20_000, d))


def validate_scenario(s: Scenario) -> ValidationReport:
    """
    Check proportions, penalty signs, dimension agreement, the cost condition
    and containment of the true rules (h_A = 1 implies h_B = 1).

    Returns:
        Report with one entry per check; never raises
    """
    settings = get_settings()
    failures: List[str] = []
    checks = {}
    details = {}

    checks["proportions"] = (
        0.0 <= s.p_a <= 1.0 and 0.0 <= s.p_b <= 1.0 and abs(s.p_a + s.p_b - 1.0) <= 1e-12
    )
    if not checks["proportions"]:
        failures.append(f"proportions: p_a={s.p_a} and p_b={s.p_b} must be in [0, 1] and sum to 1")

    checks["penalties"] = s.c_fp >= 0.0 and s.c_fn >= 0.0 and s.lam >= 0.0
    if not checks["penalties"]:
        failures.append(f"penalties: c_fp={s.c_fp}, c_fn={s.c_fn}, lambda={s.lam} must be non-negative")

    a, b = s.group_a, s.group_b
    checks["dimensions"] = a.is_1d == b.is_1d and a.dimension == b.dimension
    if not checks["dimensions"]:
        failures.append(f"dimensions: group A is {a.dimension}-D, group B is {b.dimension}-D")
        return ValidationReport(passed=False, failures=failures, checks=checks)

    if a.is_1d:
        cond = check_cost_condition(a.cost, b.cost, settings.cost_condition_grid)
        checks["containment"] = b.tau <= a.tau
        if not checks["containment"]:
            failures.append(f"containment: tau_B={b.tau} exceeds tau_A={a.tau}")
    else:
        cond = check_cost_condition_nd(a.cost, b.cost)
        checks["positive_costs"] = all(c > 0.0 for c in a.cost.coeffs + b.cost.coeffs)
        if not checks["positive_costs"]:
            failures.append("positive_costs: every linear cost coefficient must be strictly positive")
        pts = _containment_points(a.dimension, settings.containment_grid)
        in_a = pts @ a.rule.as_array() >= a.tau
        in_b = pts @ b.rule.as_array() >= b.tau - 1e-12
        escapes = int(np.sum(in_a & ~in_b))
        checks["containment"] = escapes == 0
        details["containment_points"] = int(len(pts))
        if escapes:
            failures.append(f"containment: {escapes} grid points are positive for A but negative for B")

    checks["cost_condition"] = cond.passed
    details["cost_condition_worst_margin"] = cond.worst_margin
    if not cond.passed:
        failures.append(
            f"cost_condition: {cond.violations} violating pairs (worst margin {cond.worst_margin:.3e})"
        )

    return ValidationReport(passed=not failures, failures=failures, checks=checks, details=details)


def ensure_valid(s: Scenario) -> Scenario:
    """
    Gate used by every downstream operation; the report is cached on the scenario.

    Raises:
        ScenarioError: If the scenario violates a standing assumption
    """
    if s._report is None:
        s._report = validate_scenario(s)
        if s._report.passed:
            logger.debug(f"Scenario '{s.name}' validated")
    if not s._report.passed:
        logger.error(f"Scenario '{s.name}' is invalid: {s._report.failures}")
        raise ScenarioError(s._report.failures)
    return s
