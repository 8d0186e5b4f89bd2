import numpy as np
import pytest

from strategic_game.costs.cost_model import NO_SUBSIDY, SubsidyPlan
from strategic_game.equilibrium.boundaries import sigma_boundary
from strategic_game.equilibrium.one_d import equilibrium_threshold, learner_cost_1d
from strategic_game.models import Group, LearnerMode, Provenance, Regime, SubsidyFamily
from strategic_game.reports.commands import random_scenario
from strategic_game.subsidy.money import (
    money_curve,
    subsidy_money,
    subsidy_money_flat,
    subsidy_money_proportional,
)
from strategic_game.subsidy.optimize import make_plan, optimize_subsidy, parameter_range
from strategic_game.subsidy.regimes import compare_regimes, solve_regime, welfare_nonmanipulation
from strategic_game.subsidy.welfare import (
    group_welfare,
    nonmanipulation_penalty,
    nonmanipulation_threshold,
    payoff_profile,
    welfare_curve,
)

from .conftest import linear_scenario


# ============== Subsidy Money ==============

def test_proportional_money_at_printed_beta(example2):
    sigma = sigma_boundary(example2.group_b, SubsidyPlan.proportional(0.994))
    assert subsidy_money_proportional(example2, sigma, 0.994) == pytest.approx(7.5908e-4, rel=1e-4)


def test_flat_money(example2):
    assert subsidy_money_flat(example2, 0.8, 1.0) == pytest.approx(0.375)
    # Every mover is reimbursed in full
    assert subsidy_money_flat(example2, 0.8, 5.0) == pytest.approx(1.28)


def test_no_money_when_nobody_needs_to_move(example2):
    assert subsidy_money_proportional(example2, 0.3, 0.5) == 0.0
    assert subsidy_money_flat(example2, 0.2, 1.0) == 0.0
    assert subsidy_money(example2, 0.6, NO_SUBSIDY) == 0.0
    assert subsidy_money_proportional(example2, 0.6, 1.0) == 0.0


def test_money_parameter_validation(example2):
    with pytest.raises(ValueError):
        subsidy_money_proportional(example2, 0.6, 0.0)
    with pytest.raises(ValueError):
        subsidy_money_flat(example2, 0.6, -0.1)


@pytest.mark.parametrize("plan", [SubsidyPlan.proportional(0.6), SubsidyPlan.flat(0.7)])
def test_money_curve_matches_adaptive_quadrature(example1, plan):
    sigmas = np.linspace(0.25, 0.95, 15)
    curve = money_curve(example1, sigmas, plan)
    for i, sigma in enumerate(sigmas):
        assert curve[i] == pytest.approx(subsidy_money(example1, float(sigma), plan), rel=1e-7, abs=1e-11)


def test_money_grows_with_generosity(example2):
    spend = [subsidy_money_proportional(example2, 0.7, b) for b in (0.9, 0.7, 0.5)]
    assert spend[0] < spend[1] < spend[2]


# ============== Welfare ==============

def test_example2_welfare(example2):
    assert group_welfare(example2, 0.55, NO_SUBSIDY, Group.B) == pytest.approx(0.575, abs=1e-9)


def test_example3_welfare_values(example3):
    sigma_1 = equilibrium_threshold(example3).sigma
    sigma_a = sigma_boundary(example3.group_a)
    plan = SubsidyPlan.proportional(0.806)
    assert group_welfare(example3, sigma_1, NO_SUBSIDY, Group.A) == pytest.approx(0.525, abs=1e-6)
    assert group_welfare(example3, sigma_1, NO_SUBSIDY, Group.B) == pytest.approx(0.48333, abs=1e-5)
    assert group_welfare(example3, sigma_a, plan, Group.A) == pytest.approx(0.43333, abs=1e-5)
    assert group_welfare(example3, sigma_a, plan, Group.B) == pytest.approx(0.42176, abs=1e-5)


def test_example3_benchmark(example3):
    report = welfare_nonmanipulation(example3)
    assert report.classifier.sigma == pytest.approx(0.35, abs=1e-9)
    assert report.welfare_a == pytest.approx(0.65) and report.welfare_b == pytest.approx(0.65)
    assert report.welfare_provenance == Provenance.ANALYTIC


def test_welfare_falls_as_threshold_rises(example1):
    sigmas = np.linspace(0.3, 0.7, 21)
    for group in Group:
        curve = welfare_curve(example1, sigmas, NO_SUBSIDY, group)
        assert np.all(np.diff(curve) <= 1e-12), f"group {group.value}"


def test_welfare_falls_as_threshold_rises_on_random_scenarios():
    rng = np.random.default_rng(909)
    for trial in range(10):
        s = random_scenario(rng, f"welfare_{trial}")
        plan = [NO_SUBSIDY, SubsidyPlan.proportional(rng.uniform(0.2, 1.0)), SubsidyPlan.flat(rng.uniform(0.0, 2.0))][trial % 3]
        sigmas = np.sort(rng.uniform(0.0, 1.0, 25))
        for group in Group:
            curve = welfare_curve(s, sigmas, plan, group)
            assert np.all(np.diff(curve) <= 1e-8), f"{s.name}/{group.value} under {plan.label()}"


def test_group_a_is_never_subsidized(example1):
    plan = SubsidyPlan.proportional(0.5)
    assert group_welfare(example1, 0.5, plan, Group.A) == group_welfare(example1, 0.5, NO_SUBSIDY, Group.A)
    assert group_welfare(example1, 0.5, plan, Group.B) > group_welfare(example1, 0.5, NO_SUBSIDY, Group.B)


def test_rejecting_everyone_gives_zero_welfare(example1):
    assert group_welfare(example1, 1.5, NO_SUBSIDY, Group.A) == 0.0


def test_payoff_profile_averages_to_welfare(example1):
    n = 100_000
    xs = (np.arange(n) + 0.5) / n
    plan = SubsidyPlan.flat(0.4)
    for group in Group:
        profile = payoff_profile(example1, 0.5, plan, group, xs)
        assert float(np.mean(profile)) == pytest.approx(group_welfare(example1, 0.5, plan, group), abs=1e-4)


def test_welfare_matches_monte_carlo(example1):
    rng = np.random.default_rng(9)
    plan = SubsidyPlan.proportional(0.7)
    for group in Group:
        xs = example1.group(group).sample(rng, 200_000)
        payoffs = payoff_profile(example1, 0.45, plan, group, xs)
        se = float(np.std(payoffs, ddof=1) / np.sqrt(len(payoffs)))
        exact = group_welfare(example1, 0.45, plan, group)
        assert abs(float(np.mean(payoffs)) - exact) <= 4 * se


# ============== Non-manipulation Benchmark ==============

def test_nonmanipulation_threshold_modes(example2, example3):
    assert nonmanipulation_threshold(example2) == pytest.approx(0.3, abs=1e-9)
    assert nonmanipulation_threshold(example3) == pytest.approx(0.35, abs=1e-9)
    assert nonmanipulation_threshold(example2, LearnerMode.EQUALIZE) == pytest.approx(0.35, abs=1e-9)


def test_costly_false_positives_push_benchmark_to_tau_a():
    s = linear_scenario(c_fp=2.0, c_fn=1.0)
    assert nonmanipulation_threshold(s) == pytest.approx(0.4, abs=1e-9)


def test_nonmanipulation_penalty(example2):
    p = nonmanipulation_penalty(example2, 0.35)
    assert p.total == pytest.approx(0.025)
    assert not p.dominated
    assert nonmanipulation_penalty(example2, 0.5).dominated


# ============== Subsidy Optimization ==============

def test_make_plan_clamps():
    assert make_plan(SubsidyFamily.PROPORTIONAL, 1.3).beta == 1.0
    assert make_plan(SubsidyFamily.FLAT, -0.2).alpha == 0.0


def test_parameter_range(example2):
    assert parameter_range(example2, SubsidyFamily.PROPORTIONAL) == (pytest.approx(0.25), 1.0)
    assert parameter_range(example2, SubsidyFamily.FLAT) == (0.0, pytest.approx(3.0))


def test_example1_optimal_proportional_subsidy(example1):
    eq = optimize_subsidy(example1, SubsidyFamily.PROPORTIONAL)
    assert eq.plan.beta == pytest.approx(0.558, abs=2e-3)
    assert eq.sigma == pytest.approx(0.54636, abs=1e-3)
    assert eq.penalty.total < equilibrium_threshold(example1).penalty.total


def test_expensive_subsidies_are_not_used(example1):
    s = example1.model_copy(update={"lam": 100.0})
    eq = optimize_subsidy(s, SubsidyFamily.PROPORTIONAL, grid=64)
    assert eq.plan.is_trivial
    assert eq.sigma == pytest.approx(equilibrium_threshold(s).sigma)


def test_optimizer_never_loses_to_no_subsidy(example1):
    baseline = equilibrium_threshold(example1).penalty.total
    for family in SubsidyFamily:
        eq = optimize_subsidy(example1, family, grid=64)
        assert eq.penalty.total <= baseline + 1e-12
        assert eq.penalty.total == pytest.approx(learner_cost_1d(example1, eq.sigma, eq.plan).total)


def test_optimizer_never_loses_to_no_subsidy_on_random_scenarios():
    rng = np.random.default_rng(808)
    for trial in range(8):
        s = random_scenario(rng, f"subsidized_{trial}")
        baseline = equilibrium_threshold(s).penalty.total
        for family in SubsidyFamily:
            eq = optimize_subsidy(s, family, grid=64)
            assert eq.penalty.total <= baseline + 1e-10, f"{s.name}/{family.value}"


# ============== Regimes ==============

def test_example1_subsidy_paradox(example1):
    comparison = compare_regimes(example1, families=(SubsidyFamily.PROPORTIONAL,))
    assert [r.regime for r in comparison.reports] == [Regime.NO_MANIPULATION, Regime.MANIPULATION, Regime.PROPORTIONAL]
    assert comparison.subsidy_paradox == {"prop": True}

    prop = comparison.report(Regime.PROPORTIONAL)
    manip = comparison.report(Regime.MANIPULATION)
    for group in ("A", "B"):
        delta = prop.per_candidate_deltas[group]
        assert delta.max_gain == 0.0 and delta.max_loss > 0.0
        assert delta.share_better == 0.0 and delta.share_worse > 0.0
        assert manip.per_candidate_deltas[group].max_loss == 0.0
    assert prop.welfare_a < manip.welfare_a
    assert prop.welfare_b < manip.welfare_b
    assert prop.learner_utility > manip.learner_utility


def test_payoff_table_matches_reports(example1):
    comparison = compare_regimes(example1, families=(SubsidyFamily.PROPORTIONAL,))
    table = comparison.payoff_table
    assert len(table.xs) == 10_000
    for r in comparison.reports:
        for group, welfare in (("A", r.welfare_a), ("B", r.welfare_b)):
            mean = float(np.mean(table.payoffs[r.regime.value][group]))
            assert mean == pytest.approx(welfare, abs=1e-6), f"{r.regime.value}/{group}"


def test_identical_groups_show_no_paradox():
    s = linear_scenario(slope_a=4.0, slope_b=4.0, tau_a=0.3, tau_b=0.3, lam=0.75)
    comparison = compare_regimes(s, grid=64)
    assert not any(comparison.subsidy_paradox.values())


def test_example3_welfare_ordering(example3):
    tau = nonmanipulation_threshold(example3)
    sigma_1 = equilibrium_threshold(example3).sigma
    sigma_a = sigma_boundary(example3.group_a)
    plan = SubsidyPlan.proportional(0.806)
    for group in Group:
        benchmark = example3.group(group).marginal.mass(tau, 1.0)
        manip = group_welfare(example3, sigma_1, NO_SUBSIDY, group)
        subsidized = group_welfare(example3, sigma_a, plan, group)
        assert benchmark > manip > subsidized


def test_solve_single_regimes(example2):
    manip = solve_regime(example2, Regime.MANIPULATION)
    assert manip.classifier.sigma == pytest.approx(0.55, abs=1e-9)
    assert manip.fp_a_interval.lo == pytest.approx(0.21667, abs=1e-5)
    assert manip.fn_b_interval is None or manip.fn_b_interval.hi - manip.fn_b_interval.lo < 1e-8

    flat = solve_regime(example2, Regime.FLAT, grid=64)
    assert flat.subsidy.kind == "flat"
    assert flat.learner_penalty.total <= manip.learner_penalty.total + 1e-12
