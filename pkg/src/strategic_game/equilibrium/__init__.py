from .boundaries import boundary_saturated, ell, floor_feature, sigma_boundary, undominated_interval
from .one_d import (
    BestResponse1D,
    EquilibriumResult,
    Threshold1D,
    best_response_1d,
    curvature_prediction,
    equilibrium_threshold,
    learner_cost_1d,
    penalty_curve,
)

__all__ = [
    "BestResponse1D",
    "EquilibriumResult",
    "Threshold1D",
    "best_response_1d",
    "boundary_saturated",
    "curvature_prediction",
    "ell",
    "equilibrium_threshold",
    "floor_feature",
    "learner_cost_1d",
    "penalty_curve",
    "sigma_boundary",
    "undominated_interval",
]

from .n_d import (
    BestResponseND,
    Hyperplane,
    OffsetSweep,
    Reduction,
    RepairDiagnostic,
    Simplex,
    SimplexDirection,
    best_response_nd,
    dominance_repair,
    effective_level,
    equilibrium_offset_nd,
    learner_cost_nd,
    perfect_classifier,
    reduce_to_1d,
    simplex_contained,
)

__all__ += [
    "BestResponseND",
    "Hyperplane",
    "OffsetSweep",
    "Reduction",
    "RepairDiagnostic",
    "Simplex",
    "SimplexDirection",
    "best_response_nd",
    "dominance_repair",
    "effective_level",
    "equilibrium_offset_nd",
    "learner_cost_nd",
    "perfect_classifier",
    "reduce_to_1d",
    "simplex_contained",
]
