from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field


# ============== Enums ==============

class Group(str, Enum):
    """Population groups; A has the lower manipulation cost"""
    A = "A"
    B = "B"


class Regime(str, Enum):
    """Game regimes compared in reports (values double as CLI --regime choices)"""
    NO_MANIPULATION = "none"
    MANIPULATION = "manip"
    PROPORTIONAL = "prop"
    FLAT = "flat"


class SubsidyFamily(str, Enum):
    PROPORTIONAL = "proportional"
    FLAT = "flat"


class LearnerMode(str, Enum):
    """How the learner picks a threshold inside the undominated interval"""
    PENALTY = "penalty"  # argmin of the learner penalty
    EQUALIZE = "equalize"  # equal weighted masses of fn_B and fp_A


class CurvaturePrediction(str, Enum):
    SIGMA_B = "sigma_b"
    SIGMA_A = "sigma_a"
    INDIFFERENT = "indifferent"
    NOT_APPLICABLE = "not_applicable"


class Provenance(str, Enum):
    """How a reported number was obtained"""
    ANALYTIC = "analytic"
    QUADRATURE = "quadrature"
    MONTE_CARLO = "monte-carlo"


# ============== Numeric Results ==============

class Estimate(BaseModel):
    """A Monte Carlo mean with its standard error"""
    model_config = ConfigDict(frozen=True)

    value: float
    se: float = Field(..., ge=0.0, description="Standard error of the mean")
    samples: int = Field(..., ge=1)

    def within(self, target: float, n_se: float = 3.0, floor: float = 1e-12) -> bool:
        """Whether ``target`` lies within n_se standard errors of the estimate"""
        return abs(self.value - target) <= n_se * self.se + floor


class Interval(BaseModel):
    """Half-open feature interval [lo, hi)"""
    model_config = ConfigDict(frozen=True)

    lo: float
    hi: float

    @classmethod
    def of(cls, lo: float, hi: float) -> Optional["Interval"]:
        """Build the interval, or None when it is empty"""
        return cls(lo=lo, hi=hi) if hi > lo else None


class PenaltyBreakdown(BaseModel):
    """Learner penalty split into its error terms and subsidy spend.

    ``subsidy_money`` is the population-level spend (p_B times the
    per-candidate integral); ``total`` adds it with weight lambda.
    """
    model_config = ConfigDict(frozen=True)

    fn_b: float
    fp_a: float
    fp_b: float = 0.0
    fn_a: float = 0.0
    subsidy_money: float = 0.0
    total: float
    dominated: bool = False
    provenance: Provenance = Provenance.ANALYTIC
    standard_errors: Optional[Dict[str, float]] = None

    @property
    def learner_utility(self) -> float:
        return 1.0 - self.total


# ============== Validation Reports ==============

class CostConditionReport(BaseModel):
    """Outcome of the grid check c_A(y) - c_A(x) <= c_B(y) - c_B(x)"""
    passed: bool
    pairs_checked: int
    violations: int = 0
    worst_margin: float = Field(..., description="Smallest (c_B gap - c_A gap) seen over y >= x")
    examples: List[Tuple[float, float]] = Field(default_factory=list, description="Violating (x, y) pairs")


class ValidationReport(BaseModel):
    """Pass/fail outcome with human-readable reasons"""
    passed: bool
    failures: List[str] = Field(default_factory=list)
    checks: Dict[str, bool] = Field(default_factory=dict)
    details: Dict[str, Any] = Field(default_factory=dict)
