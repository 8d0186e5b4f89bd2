from .cost_model import (
    NO_SUBSIDY,
    CostFunction,
    CostFunctionSpec,
    LinearCost,
    LinearCostVector,
    PowerSumCost,
    PowerTerm,
    SqrtLinearCost,
    SubsidyPlan,
    TabulatedCost,
    check_cost_condition,
    check_cost_condition_nd,
    manipulation_cost,
    split_cost,
)

__all__ = [
    "NO_SUBSIDY",
    "CostFunction",
    "CostFunctionSpec",
    "LinearCost",
    "LinearCostVector",
    "PowerSumCost",
    "PowerTerm",
    "SqrtLinearCost",
    "SubsidyPlan",
    "TabulatedCost",
    "check_cost_condition",
    "check_cost_condition_nd",
    "manipulation_cost",
    "split_cost",
]
