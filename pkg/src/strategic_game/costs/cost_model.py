"""Monotone manipulation costs, subsidy plans and the inter-group cost condition."""

import logging
from typing import Annotated, List, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, model_validator

from ..models import CostConditionReport
from ..utils.numerics import bisect_increasing

logger = logging.getLogger(__name__)

DOMAIN_SLACK = 1e-12


def check_feature(x: float, name: str = "x") -> float:
    x = float(x)
    if not (-DOMAIN_SLACK <= x <= 1.0 + DOMAIN_SLACK):
        raise ValueError(f"Feature {name}={x!r} is outside [0, 1]")
    return min(max(x, 0.0), 1.0)


# ============== Cost Families ==============

class CostFunction(BaseModel):
    """A strictly increasing, non-negative cost on the feature interval [0, 1]."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    def _raw(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x):
        """Vectorized evaluation without domain checks (internal hot path)"""
        return self._raw(np.asarray(x, dtype=float))

    def eval(self, x: float) -> float:
        """
        Evaluate the cost at a single feature value.

        Raises:
            ValueError: If x is outside [0, 1]
        """
        return float(self._raw(np.asarray(check_feature(x))))

    @property
    def lower(self) -> float:
        return float(self._raw(np.asarray(0.0)))

    @property
    def upper(self) -> float:
        return float(self._raw(np.asarray(1.0)))

    def kinks(self) -> List[float]:
        """Interior points where the cost is not smooth"""
        return []

    def invert(self, v, tol: float = 1e-9, max_iter: int = 200):
        """
        Return x with |c(x) - v| <= tol, elementwise for array input.

        Raises:
            ValueError: If some v lies outside [c(0), c(1)]
        """
        arr = np.asarray(v, dtype=float)
        lo, hi = self.lower, self.upper
        slack = DOMAIN_SLACK * max(1.0, abs(hi))
        if np.any(arr < lo - slack) or np.any(arr > hi + slack):
            raise ValueError(f"Cost value {v!r} is outside the range [{lo}, {hi}]")
        x = bisect_increasing(self, np.clip(arr, lo, hi), tol=tol, max_iter=max_iter)
        return float(x) if x.ndim == 0 else x


class LinearCost(CostFunction):
    """c(x) = slope * x"""
    family: Literal["linear"] = "linear"
    slope: float = Field(..., gt=0.0)

    def _raw(self, x: np.ndarray) -> np.ndarray:
        return self.slope * x


class SqrtLinearCost(CostFunction):
    """c(x) = sqrt_coeff * sqrt(x) + lin * x"""
    family: Literal["sqrt_linear"] = "sqrt_linear"
    sqrt: float = Field(default=0.0, ge=0.0, description="Coefficient of sqrt(x)")
    lin: float = Field(default=0.0, ge=0.0, description="Coefficient of x")

    @model_validator(mode="after")
    def validate_increasing(self):
        if self.sqrt <= 0.0 and self.lin <= 0.0:
            raise ValueError("sqrt_linear cost needs a positive coefficient to be strictly increasing")
        return self

    def _raw(self, x: np.ndarray) -> np.ndarray:
        return self.sqrt * np.sqrt(np.maximum(x, 0.0)) + self.lin * x


class PowerTerm(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    coeff: float = Field(..., ge=0.0)
    exponent: float = Field(..., gt=0.0)


class PowerSumCost(CostFunction):
    """c(x) = sum_j coeff_j * x ** exponent_j"""
    family: Literal["power_sum"] = "power_sum"
    terms: List[PowerTerm] = Field(..., min_length=1)

    @model_validator(mode="after")
    def validate_increasing(self):
        if not any(t.coeff > 0.0 for t in self.terms):
            raise ValueError("power_sum cost needs at least one positive coefficient")
        return self

    def _raw(self, x: np.ndarray) -> np.ndarray:
        base = np.maximum(x, 0.0)
        out = np.zeros_like(base, dtype=float)
        for t in self.terms:
            out = out + t.coeff * np.power(base, t.exponent)
        return out


class TabulatedCost(CostFunction):
    """Piecewise-linear interpolation of strictly increasing samples on [0, 1]"""
    family: Literal["tabulated"] = "tabulated"
    xs: List[float] = Field(..., min_length=2)
    values: List[float] = Field(..., min_length=2)

    _xs: np.ndarray = PrivateAttr()
    _values: np.ndarray = PrivateAttr()

    @model_validator(mode="after")
    def validate_samples(self):
        xs = np.asarray(self.xs, dtype=float)
        vs = np.asarray(self.values, dtype=float)
        if xs.shape != vs.shape:
            raise ValueError("tabulated cost needs as many values as grid points")
        if xs[0] != 0.0 or xs[-1] != 1.0:
            raise ValueError("tabulated cost grid must start at 0 and end at 1")
        if np.any(np.diff(xs) <= 0.0):
            raise ValueError("tabulated cost grid must be strictly increasing")
        if np.any(np.diff(vs) <= 0.0):
            raise ValueError("tabulated cost has a flat or decreasing segment; costs must be strictly increasing")
        if vs[0] < 0.0:
            raise ValueError("tabulated cost must be non-negative")
        return self

    def model_post_init(self, __context) -> None:
        self._xs = np.asarray(self.xs, dtype=float)
        self._values = np.asarray(self.values, dtype=float)

    def _raw(self, x: np.ndarray) -> np.ndarray:
        return np.interp(x, self._xs, self._values)

    def kinks(self) -> List[float]:
        return list(self.xs[1:-1])


CostFunctionSpec = Annotated[
    Union[LinearCost, SqrtLinearCost, PowerSumCost, TabulatedCost],
    Field(discriminator="family"),
]


# ============== Subsidy Plans ==============

class SubsidyPlan(BaseModel):
    """Who pays what share of a group-B candidate's manipulation cost.

    proportional(beta): the candidate bears beta * cost, the learner the rest.
    flat(alpha): the learner absorbs up to alpha of the cost.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["none", "proportional", "flat"] = "none"
    beta: float = Field(default=1.0, gt=0.0, le=1.0)
    alpha: float = Field(default=0.0, ge=0.0)

    @classmethod
    def none(cls) -> "SubsidyPlan":
        return cls()

    @classmethod
    def proportional(cls, beta: float) -> "SubsidyPlan":
        return cls(kind="proportional", beta=beta)

    @classmethod
    def flat(cls, alpha: float) -> "SubsidyPlan":
        return cls(kind="flat", alpha=alpha)

    @property
    def budget(self) -> float:
        """Largest unsubsidized cost a candidate will pay for a positive label"""
        if self.kind == "proportional":
            return 1.0 / self.beta
        if self.kind == "flat":
            return 1.0 + self.alpha
        return 1.0

    @property
    def parameter(self) -> float:
        if self.kind == "proportional":
            return self.beta
        if self.kind == "flat":
            return self.alpha
        return 0.0

    @property
    def is_trivial(self) -> bool:
        """True when the plan pays nothing (None, proportional(1), flat(0))"""
        return self.kind == "none" or (self.kind == "proportional" and self.beta == 1.0) or (
            self.kind == "flat" and self.alpha == 0.0
        )

    def borne_cost(self, raw):
        """Candidate-borne part of an unsubsidized cost (vectorized)"""
        if self.kind == "proportional":
            return self.beta * np.asarray(raw, dtype=float)
        if self.kind == "flat":
            return np.maximum(0.0, np.asarray(raw, dtype=float) - self.alpha)
        return np.asarray(raw, dtype=float)

    def learner_cost(self, raw):
        """Learner-borne part of an unsubsidized cost (vectorized)"""
        raw = np.asarray(raw, dtype=float)
        if self.kind == "proportional":
            return (1.0 - self.beta) * raw
        if self.kind == "flat":
            return np.minimum(self.alpha, raw)
        return np.zeros_like(raw)

    def label(self) -> str:
        if self.kind == "proportional":
            return f"proportional(beta={self.beta:.6g})"
        if self.kind == "flat":
            return f"flat(alpha={self.alpha:.6g})"
        return "none"


NO_SUBSIDY = SubsidyPlan()


def split_cost(raw, plan: SubsidyPlan):
    """
    Split an unsubsidized cost into (candidate_borne, learner_borne).

    The two parts always add back up to ``raw``.
    """
    raw = np.asarray(raw, dtype=float)
    borne = plan.borne_cost(raw)
    paid = plan.learner_cost(raw)
    assert np.allclose(borne + paid, raw, rtol=0.0, atol=1e-12), "subsidy split does not add up"
    return borne, paid


def manipulation_cost(c: CostFunction, x: float, y: float, plan: SubsidyPlan = NO_SUBSIDY) -> float:
    """
    Candidate-borne cost of presenting y instead of x.

    Raises:
        ValueError: If y < x or either feature is outside [0, 1]
    """
    x = check_feature(x, "x")
    y = check_feature(y, "y")
    if y < x:
        raise ValueError(f"Manipulation must not decrease the feature (x={x}, y={y})")
    raw = max(0.0, c.eval(y) - c.eval(x))
    return float(plan.borne_cost(raw))


def check_cost_condition(
    c_a: CostFunction,
    c_b: CostFunction,
    grid_resolution: int = 512,
    tol: float = 1e-12,
) -> CostConditionReport:
    """
    Check c_A(y) - c_A(x) <= c_B(y) - c_B(x) for all grid pairs y >= x.

    The pair margin (c_B gap minus c_A gap) equals D(y) - D(x) with
    D = c_B - c_A, so the condition is D non-decreasing on the grid.
    """
    grid_resolution = max(2, int(grid_resolution))
    xs = np.linspace(0.0, 1.0, grid_resolution)
    d = c_b(xs) - c_a(xs)
    margins = d[None, :] - d[:, None]
    upper = np.triu(np.ones_like(margins, dtype=bool), k=1)
    slack = tol * max(1.0, float(np.max(np.abs(c_b(xs)))))
    bad = upper & (margins < -slack)

    pairs = int(upper.sum())
    worst = float(np.min(margins[upper]))
    rows, cols = np.nonzero(bad)
    examples = [(float(xs[i]), float(xs[j])) for i, j in list(zip(rows, cols))[:10]]
    report = CostConditionReport(
        passed=not bad.any(),
        pairs_checked=pairs,
        violations=int(bad.sum()),
        worst_margin=worst,
        examples=examples,
    )
    if not report.passed:
        logger.warning(f"Cost condition fails on {report.violations} of {pairs} pairs (worst margin {worst:.3e})")
    return report


# ============== Linear d-D Costs ==============

class LinearCostVector(BaseModel):
    """Per-dimension linear cost coefficients c_i for the d-dimensional game"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    family: Literal["linear_vector"] = "linear_vector"
    coeffs: List[float] = Field(..., min_length=1)

    @model_validator(mode="after")
    def validate_coeffs(self):
        if any(c < 0.0 for c in self.coeffs):
            raise ValueError("linear cost coefficients must be non-negative")
        return self

    @property
    def dimension(self) -> int:
        return len(self.coeffs)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=float)

    def ratios(self, g) -> np.ndarray:
        """
        Score gained per unit cost along each axis, g_i / c_i.

        Raises:
            ValueError: If a zero cost meets a positive weight (free manipulation)
        """
        g = np.asarray(g, dtype=float)
        c = self.as_array()
        if g.shape != c.shape:
            raise ValueError(f"Weights of dimension {g.size} do not match costs of dimension {c.size}")
        if np.any((c == 0.0) & (g > 0.0)):
            raise ValueError("Zero manipulation cost on a scored dimension makes the best response unbounded")
        safe = np.where(c > 0.0, c, 1.0)
        return np.where(c > 0.0, g / safe, 0.0)


def check_cost_condition_nd(c_a: LinearCostVector, c_b: LinearCostVector) -> CostConditionReport:
    """Componentwise c_A,i <= c_B,i, the linear-cost form of the cost condition"""
    a, b = c_a.as_array(), c_b.as_array()
    if a.shape != b.shape:
        raise ValueError("group cost vectors have different dimensions")
    margins = b - a
    bad = np.flatnonzero(margins < 0.0)
    return CostConditionReport(
        passed=bad.size == 0,
        pairs_checked=int(a.size),
        violations=int(bad.size),
        worst_margin=float(np.min(margins)),
        examples=[(float(i), float(margins[i])) for i in bad[:10]],
    )
