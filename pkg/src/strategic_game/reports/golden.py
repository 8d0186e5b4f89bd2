"""Golden reproduction of the worked examples and the curvature shortcut."""

import logging
from enum import Enum
from typing import List, Optional

import numpy as np
from pydantic import BaseModel

from ..costs.cost_model import (
    NO_SUBSIDY,
    CostFunction,
    LinearCost,
    PowerSumCost,
    PowerTerm,
    SqrtLinearCost,
    SubsidyPlan,
)
from ..equilibrium.boundaries import ell, sigma_boundary, undominated_interval
from ..equilibrium.one_d import curvature_prediction, equilibrium_threshold, learner_cost_1d, penalty_curve
from ..models import CurvaturePrediction, Group, Provenance, Regime, SubsidyFamily
from ..population.population import GroupSpec, Scenario, TrueRule1D, validate_scenario
from ..storage.report_store import CsvTable, provenance_label, render_table
from ..subsidy.money import subsidy_money_proportional
from ..subsidy.optimize import optimize_subsidy
from ..subsidy.regimes import compare_regimes
from ..subsidy.welfare import group_welfare, nonmanipulation_penalty, nonmanipulation_threshold
from .config_loader import load_packaged

logger = logging.getLogger(__name__)

PRINTED = 1e-3  # values printed to three decimals
APPROX = 2e-3  # values printed with "approximately"
EXACT = 1e-6


class GoldenStatus(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    DISCREPANCY = "documented discrepancy"


class GoldenRow(BaseModel):
    quantity: str
    expected: float
    computed: float
    abs_delta: float
    tolerance: float
    passed: bool
    status: GoldenStatus
    provenance: Provenance = Provenance.ANALYTIC
    note: str = ""


class GoldenTable(BaseModel):
    rows: List[GoldenRow]

    @property
    def passed(self) -> bool:
        """Every row passes except those marked as documented discrepancies"""
        return all(r.passed for r in self.rows if r.status != GoldenStatus.DISCREPANCY)

    @property
    def failures(self) -> List[GoldenRow]:
        return [r for r in self.rows if r.status == GoldenStatus.FAIL]

    def to_csv_table(self) -> CsvTable:
        table = CsvTable.with_provenance(["quantity", "expected"], ["computed"], ["abs_delta", "tolerance", "pass", "status"])
        for r in self.rows:
            table.add(
                {
                    "quantity": r.quantity,
                    "expected": r.expected,
                    "computed": r.computed,
                    "computed_provenance": provenance_label(r.provenance),
                    "abs_delta": r.abs_delta,
                    "tolerance": r.tolerance,
                    "pass": r.passed,
                    "status": r.status.value,
                }
            )
        return table

    def summary_text(self) -> str:
        body = render_table(
            ["quantity", "expected", "computed", "|delta|", "tol", "status"],
            [[r.quantity, r.expected, r.computed, r.abs_delta, r.tolerance, r.status.value] for r in self.rows],
        )
        counted = [r for r in self.rows if r.status != GoldenStatus.DISCREPANCY]
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"{body}\n{sum(r.passed for r in counted)}/{len(counted)} rows pass "
            f"({len(self.rows) - len(counted)} documented discrepancies excluded): {verdict}\n"
        )


def _row(
    quantity: str,
    expected: float,
    computed: float,
    tolerance: float,
    provenance: Provenance = Provenance.ANALYTIC,
    discrepancy: Optional[str] = None,
) -> GoldenRow:
    computed = float(computed)
    delta = abs(computed - expected)
    passed = bool(delta <= tolerance)
    if discrepancy is not None:
        status = GoldenStatus.DISCREPANCY
    else:
        status = GoldenStatus.PASS if passed else GoldenStatus.FAIL
    if status == GoldenStatus.FAIL:
        logger.warning(f"Golden row {quantity} fails: expected {expected}, computed {computed:.6g}")
    return GoldenRow(
        quantity=quantity,
        expected=expected,
        computed=computed,
        abs_delta=delta,
        tolerance=tolerance,
        passed=passed,
        status=status,
        provenance=provenance,
        note=discrepancy or "",
    )


def _flag(quantity: str, value: bool, note: str = "") -> GoldenRow:
    row = _row(quantity, 1.0, 1.0 if value else 0.0, 0.0)
    return row.model_copy(update={"note": note}) if note else row


# ============== Worked Examples ==============

def example1_rows() -> List[GoldenRow]:
    s = load_packaged("example1").to_scenario()
    a, b = s.group_a, s.group_b
    manip = equilibrium_threshold(s)
    comparison = compare_regimes(s, families=(SubsidyFamily.PROPORTIONAL,))
    prop = comparison.report(Regime.PROPORTIONAL)
    q = Provenance.QUADRATURE
    return [
        _flag("Example1.cost_condition", validate_scenario(s).checks["cost_condition"]),
        _row("Example1.sigma_B", 0.398, sigma_boundary(b), PRINTED),
        _row("Example1.sigma_A", 0.546, sigma_boundary(a), PRINTED),
        _row("Example1.sigma_star", 0.398, manip.sigma, PRINTED),
        _row("Example1.fp_A_interval_lo", 0.272, ell(a, manip.sigma), PRINTED),
        _row("Example1.sigma_prop", 0.546, prop.classifier.sigma, PRINTED, q),
        _row("Example1.beta_star", 0.558, prop.subsidy.beta, APPROX, q),
        _row("Example1.fn_B_interval_hi", 0.348, ell(b, prop.classifier.sigma, prop.subsidy), PRINTED, q),
        _flag("Example1.subsidy_lowers_penalty", prop.learner_penalty.total < manip.penalty.total),
        _flag("Example1.subsidy_paradox", comparison.subsidy_paradox[Regime.PROPORTIONAL.value]),
    ]


def example2_rows() -> List[GoldenRow]:
    s = load_packaged("example2").to_scenario()
    a, b = s.group_a, s.group_b
    manip = equilibrium_threshold(s)
    printed = SubsidyPlan.proportional(0.994)
    sigma_beta = sigma_boundary(b, printed)
    opt = optimize_subsidy(s, SubsidyFamily.PROPORTIONAL)
    q = Provenance.QUADRATURE
    not_optimal = "printed subsidy is not a minimizer of the learner objective; spend outweighs error reduction"
    return [
        _flag("Example2.cost_condition", validate_scenario(s).checks["cost_condition"]),
        _row("Example2.sigma_star", 0.550, manip.sigma, PRINTED),
        _row("Example2.fp_A_interval_lo", 0.217, ell(a, manip.sigma), PRINTED),
        _row("Example2.welfare_B_at_sigma_star", 0.575, group_welfare(s, manip.sigma, NO_SUBSIDY, Group.B), PRINTED, q),
        _row("Example2.sigma_B_beta_at_printed_beta", 0.5515, sigma_beta, PRINTED),
        _row("Example2.fp_A_interval_lo_at_printed_beta", 0.218, ell(a, sigma_beta), PRINTED),
        _row("Example2.subsidy_money_at_printed_beta", 7.59e-4, subsidy_money_proportional(s, sigma_beta, 0.994), 1e-5, q),
        _row("Example2.optimizer_sigma_prop", 0.552, opt.sigma, PRINTED, q, discrepancy=not_optimal),
        _row("Example2.optimizer_beta_star", 0.994, opt.plan.beta, APPROX, q, discrepancy=not_optimal),
    ]


def example3_rows() -> List[GoldenRow]:
    s = load_packaged("example3").to_scenario()
    a, b = s.group_a, s.group_b
    sigma_a = sigma_boundary(a)
    sigma_1 = equilibrium_threshold(s).sigma
    printed = SubsidyPlan.proportional(0.806)
    tau = nonmanipulation_threshold(s)

    def welfare_order(group: Group) -> bool:
        benchmark = s.group(group).marginal.mass(tau, 1.0)
        manip = group_welfare(s, sigma_1, NO_SUBSIDY, group)
        subsidized = group_welfare(s, sigma_a, printed, group)
        return benchmark > manip > subsidized

    # The subsidy stage minimizes the unit-weighted penalty
    unit = s.model_copy(update={"c_fn": 1.0, "c_fp": 1.0})
    u_tau = 1.0 - nonmanipulation_penalty(unit, tau).total
    u_prop = 1.0 - learner_cost_1d(unit, sigma_a, printed).total
    u_1 = 1.0 - learner_cost_1d(unit, sigma_1, NO_SUBSIDY).total

    q = Provenance.QUADRATURE
    convention = "printed penalty totals follow no single weighting of the stated C and p"
    return [
        _flag("Example3.cost_condition", validate_scenario(s).checks["cost_condition"]),
        _row("Example3.sigma_A", 0.7333, sigma_a, PRINTED),
        _row("Example3.sigma_1", 0.64, sigma_1, APPROX),
        _row("Example3.ell_A_at_0.64", 0.3067, ell(a, 0.64), PRINTED),
        _row("Example3.ell_B_at_0.64", 0.390, ell(b, 0.64), PRINTED),
        _row("Example3.ell_B_beta_at_sigma_A", 0.423, ell(b, sigma_a, printed), PRINTED),
        _row("Example3.tau_star", 0.35, tau, PRINTED),
        _flag("Example3.welfare_order_A", welfare_order(Group.A)),
        _flag("Example3.welfare_order_B", welfare_order(Group.B)),
        _flag("Example3.learner_utility_order", u_tau > u_prop > u_1, note="priced with C_FN = C_FP = 1"),
        _row("Example3.penalty_sigma_1", 0.183, learner_cost_1d(s, sigma_1).total, PRINTED, discrepancy=convention),
        _row("Example3.penalty_prop", 0.128, learner_cost_1d(s, sigma_a, printed).total, PRINTED, q, discrepancy=convention),
        _row("Example3.penalty_tau_star", 0.1, nonmanipulation_penalty(s, tau).total, PRINTED, discrepancy=convention),
    ]


# ============== Curvature Shortcut ==============

def proportional_pair_scenario(name: str, c_a: CostFunction, c_b: CostFunction) -> Scenario:
    """Uniform features, equal proportions and unit penalties, tau_A = 0.4 and tau_B = 0.3"""
    return Scenario(
        name=name,
        group_a=GroupSpec(cost=c_a, rule=TrueRule1D(tau=0.4)),
        group_b=GroupSpec(cost=c_b, rule=TrueRule1D(tau=0.3)),
        c_fp=1.0,
        c_fn=1.0,
        lam=0.75,
    )


CURVATURE_CASES = {
    "concave": (SqrtLinearCost(sqrt=6.0), SqrtLinearCost(sqrt=8.0), CurvaturePrediction.SIGMA_B),
    "convex": (
        PowerSumCost(terms=[PowerTerm(coeff=3.0, exponent=2.0)]),
        PowerSumCost(terms=[PowerTerm(coeff=4.0, exponent=2.0)]),
        CurvaturePrediction.SIGMA_A,
    ),
    "affine": (LinearCost(slope=3.0), LinearCost(slope=4.0), CurvaturePrediction.INDIFFERENT),
}


def curvature_rows() -> List[GoldenRow]:
    rows = []
    for label, (c_a, c_b, predicted) in CURVATURE_CASES.items():
        s = proportional_pair_scenario(f"curvature_{label}", c_a, c_b)
        prediction = curvature_prediction(s)
        rows.append(_flag(f"Curvature.{label}.prediction", prediction == predicted, note=prediction.value))
        lo, hi = undominated_interval(s)
        if predicted == CurvaturePrediction.INDIFFERENT:
            totals = penalty_curve(s, np.linspace(lo, hi, 257))["total"]
            rows.append(_row(f"Curvature.{label}.penalty_spread", 0.0, float(np.ptp(totals)), 1e-9))
            # indifferent learners break the tie at sigma_B
            rows.append(_row(f"Curvature.{label}.sigma_star", lo, equilibrium_threshold(s).sigma, EXACT))
        else:
            target = lo if predicted == CurvaturePrediction.SIGMA_B else hi
            rows.append(_row(f"Curvature.{label}.sigma_star", target, equilibrium_threshold(s).sigma, EXACT))
    return rows


def build_golden_table() -> GoldenTable:
    """Evaluate every golden row; slow parts are the joint subsidy optimizations"""
    rows = example1_rows() + example2_rows() + example3_rows() + curvature_rows()
    table = GoldenTable(rows=rows)
    logger.info(f"Golden table: {len(rows)} rows, {len(table.failures)} failures")
    return table
