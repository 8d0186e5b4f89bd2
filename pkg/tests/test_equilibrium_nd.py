import itertools

import numpy as np
import pytest
from scipy.optimize import linprog

from strategic_game.config.settings import settings_override
from strategic_game.costs.cost_model import LinearCostVector, SubsidyPlan
from strategic_game.equilibrium.n_d import (
    Hyperplane,
    Simplex,
    SimplexDirection,
    best_response_nd,
    dominance_repair,
    effective_level,
    equilibrium_offset_nd,
    learner_cost_nd,
    offset_range,
    perfect_classifier,
    reduce_to_1d,
    simplex_contained,
)
from strategic_game.equilibrium.one_d import learner_cost_1d
from strategic_game.models import Provenance
from strategic_game.population.population import GroupSpec, Scenario, TrueRuleND


def vector(*coeffs):
    return LinearCostVector(coeffs=list(coeffs))


@pytest.fixture
def embedded_example2() -> Scenario:
    """Example 2 lifted to two features; the second feature is free of signal"""
    return Scenario(
        name="embedded_example2",
        group_a=GroupSpec(cost=vector(3.0, 6.0), rule=TrueRuleND(weights=[1.0, 0.0], tau=0.4)),
        group_b=GroupSpec(cost=vector(4.0, 8.0), rule=TrueRuleND(weights=[1.0, 0.0], tau=0.3)),
        c_fp=1 / 3,
        c_fn=2 / 3,
        lam=0.75,
    )


# ============== Best Responses ==============

def test_admitted_candidate_stays():
    r = best_response_nd([0.6, 0.6], vector(2.0, 4.0), Hyperplane(g=[1.0, 1.0], g0=1.0))
    assert r.admitted and r.payoff == 1.0
    assert r.y == [0.6, 0.6] and not r.moved_components


def test_moves_along_best_ratio_axis():
    r = best_response_nd([0.3, 0.4], vector(2.0, 4.0), Hyperplane(g=[1.0, 1.0], g0=1.0))
    assert r.admitted
    assert r.y == pytest.approx([0.6, 0.4])
    assert r.paid_cost == pytest.approx(0.6)
    assert r.payoff == pytest.approx(0.4)
    assert r.moved_components == [0]


def test_unaffordable_move_stays():
    r = best_response_nd([0.1, 0.1], vector(4.0, 8.0), Hyperplane(g=[1.0, 1.0], g0=1.0))
    assert not r.admitted and r.payoff == 0.0
    assert r.y == [0.1, 0.1]


def test_tied_axes_fill_in_index_order():
    r = best_response_nd([0.9, 0.2], vector(2.0, 2.0), Hyperplane(g=[1.0, 1.0], g0=1.3))
    assert r.admitted
    assert r.y == pytest.approx([1.0, 0.3])
    assert r.moved_components == [0, 1]
    assert r.paid_cost == pytest.approx(0.4)


def test_box_blocked_move_is_flagged():
    r = best_response_nd([0.9, 0.0], vector(1.0, 10.0), Hyperplane(g=[1.0, 0.1], g0=1.05))
    assert r.box_limited
    assert not r.admitted and r.y == [0.9, 0.0]


def test_subsidy_extends_reach():
    h = Hyperplane(g=[1.0, 1.0], g0=0.5)
    assert not best_response_nd([0.1, 0.1], vector(4.0, 8.0), h).admitted
    r = best_response_nd([0.1, 0.1], vector(4.0, 8.0), h, SubsidyPlan.proportional(0.5))
    assert r.admitted
    assert r.paid_cost == pytest.approx(0.6)
    assert r.payoff == pytest.approx(0.4)


def test_dimension_mismatch_raises():
    with pytest.raises(ValueError):
        best_response_nd([0.1, 0.1, 0.1], vector(4.0, 8.0), Hyperplane(g=[1.0, 1.0], g0=0.5))


def test_best_response_matches_linear_program():
    """Away from the box the cheapest move is the LP optimum min c.(y - x) s.t. g.y >= g0"""
    rng = np.random.default_rng(11)
    for _ in range(200):
        g = rng.uniform(0.2, 1.0, 3)
        c = rng.uniform(2.0, 6.0, 3)
        x = rng.uniform(0.0, 0.5, 3)
        h = Hyperplane(g=list(g), g0=float(g @ x + rng.uniform(0.0, 0.4)))
        r = best_response_nd(x, vector(*c), h)

        lp = linprog(c, A_ub=[-g], b_ub=[-h.g0], bounds=[(xi, 1.0) for xi in x], method="highs")
        assert lp.success
        cheapest = float(lp.fun - c @ x)
        if cheapest < 1.0 - 1e-7:
            assert r.admitted
            assert r.paid_cost == pytest.approx(cheapest, abs=1e-7)
        elif cheapest > 1.0 + 1e-7:
            assert not r.admitted


def _cheapest_move(x, c, g, need) -> float:
    """Exact cost of reaching g.(y - x) >= need inside the unit box; inf when the box forbids it"""
    cap = 1.0 - x
    best = np.inf
    for full in itertools.product((False, True), repeat=len(x)):
        full = np.array(full)
        gain = float(g[full] @ cap[full])
        cost = float(c[full] @ cap[full])
        if gain >= need:
            best = min(best, cost)
            continue
        for j in np.flatnonzero(~full):
            step = (need - gain) / g[j]
            if step <= cap[j]:
                best = min(best, cost + c[j] * step)
    return best


def _random_plan(rng) -> SubsidyPlan:
    kind = int(rng.integers(3))
    if kind == 1:
        return SubsidyPlan.proportional(float(rng.uniform(0.3, 1.0)))
    if kind == 2:
        return SubsidyPlan.flat(float(rng.uniform(0.0, 1.5)))
    return SubsidyPlan.none()


def test_best_response_matches_vertex_enumeration():
    rng = np.random.default_rng(12)
    box_limited = 0
    for _ in range(10_000):
        d = int(rng.integers(1, 5))
        g = rng.uniform(0.05, 1.0, d)
        c = rng.uniform(0.5, 5.0, d)
        if d > 1 and rng.random() < 0.2:
            c[1] = c[0] * g[1] / g[0]
        x = rng.uniform(0.0, 1.0, d)
        h = Hyperplane(g=list(g), g0=float(g @ x + rng.uniform(-0.1, 0.6) * g.sum()))
        plan = _random_plan(rng)
        r = best_response_nd(x, vector(*c), h, plan)

        need = h.g0 - float(g @ x)
        if need <= 0.0:
            assert r.admitted and r.payoff == 1.0 and r.paid_cost == 0.0
            continue
        ratios = g / c
        top = ratios >= ratios.max() * (1.0 - 1e-12)
        ideal = need / ratios.max()
        cheapest = _cheapest_move(x, c, g, need)

        if r.box_limited:
            box_limited += 1
            assert not r.admitted and r.y == list(x)
            assert float(g[top] @ (1.0 - x[top])) < need + 1e-9
            assert cheapest > ideal - 1e-9
        elif ideal < plan.budget - 1e-9:
            assert r.admitted
            assert cheapest == pytest.approx(ideal, abs=1e-9)
            assert r.paid_cost == pytest.approx(float(plan.borne_cost(cheapest)), abs=1e-9)
            y = np.asarray(r.y)
            assert np.all(y >= x - 1e-12) and np.all(y <= 1.0 + 1e-12)
            assert float(g @ y) >= h.g0 - 1e-9
        elif ideal > plan.budget + 1e-9:
            assert not r.admitted and r.payoff == 0.0
    assert box_limited > 0


# ============== Classifiers and Reductions ==============

def test_perfect_classifier_admits_exactly_the_positives():
    group = GroupSpec(cost=vector(2.0, 3.0), rule=TrueRuleND(weights=[1.0, 1.0], tau=0.61))
    h = perfect_classifier(group)
    assert h.g0 == pytest.approx(1.11)
    axis = np.linspace(0.0, 0.5, 21)
    for x0 in axis:
        for x1 in axis:
            x = np.array([x0, x1])
            r = best_response_nd(x, group.cost, h)
            assert r.admitted == bool(group.rule.label(x)), f"x={x.tolist()}"


def _knapsack_cost(points, c, g, g0) -> np.ndarray:
    """Cheapest in-box cost of reaching g.y >= g0 from every row of ``points``"""
    remaining = g0 - points @ g
    cost = np.zeros(len(points))
    for k in np.argsort(-(g / c), kind="stable"):
        take = np.clip(remaining, 0.0, g[k] * (1.0 - points[:, k]))
        cost += take * c[k] / g[k]
        remaining = remaining - take
    return np.where(remaining > 1e-12, np.inf, cost)


def test_perfect_classifier_admits_exactly_the_positives_on_random_groups():
    """Inside the box where no affordable move hits a wall, admission equals the true label"""
    rng = np.random.default_rng(13)
    for _ in range(100):
        d = int(rng.integers(1, 5))
        w = rng.uniform(0.1, 1.0, d)
        c = rng.uniform(1.5, 6.0, d)
        upper = 1.0 - 1.0 / c
        group = GroupSpec(cost=vector(*c), rule=TrueRuleND(weights=list(w), tau=float(rng.uniform(0.2, 0.8) * (w @ upper))))
        h = perfect_classifier(group)

        if d <= 3:
            axes = [np.linspace(0.0, u, 50) for u in upper]
            points = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
        else:
            points = rng.uniform(0.0, 1.0, (50**3, d)) * upper
        scores = points @ w
        clear = np.abs(scores - group.tau) > 1e-9
        admitted = _knapsack_cost(points, c, w, h.g0) <= 1.0 + 1e-12
        errors = int(np.sum((admitted != (scores >= group.tau)) & clear))
        assert errors == 0, f"w={w.tolist()}, c={c.tolist()}, tau={group.tau}"

        for x in points[rng.choice(len(points), 200)]:
            if abs(float(x @ w) - group.tau) > 1e-9:
                assert best_response_nd(x, group.cost, h).admitted == bool(group.rule.label(x))


def test_effective_level_of_perfect_classifier_is_tau():
    group = GroupSpec(cost=vector(2.0, 3.0), rule=TrueRuleND(weights=[1.0, 1.0], tau=0.7))
    assert effective_level(perfect_classifier(group), group.cost) == pytest.approx(0.7)
    plan = SubsidyPlan.flat(0.5)
    assert effective_level(perfect_classifier(group, plan.budget), group.cost, plan.budget) == pytest.approx(0.7)


def test_reduce_to_1d():
    h = Hyperplane(g=[0.5, 0.5], g0=1.0)
    r = reduce_to_1d(h, vector(2.0, 3.0))
    assert r.axis == 0 and r.slope == pytest.approx(4.0)
    r = reduce_to_1d(h, vector(3.0, 3.0))
    assert r.axis == 0 and r.slope == pytest.approx(6.0)
    assert float(r.score([0.2, 0.4])) == pytest.approx(0.3)


def test_simplex_containment():
    a = Simplex(anchor=[0.2, 0.2], budget=1.0, costs=vector(2.0, 3.0))
    b = Simplex(anchor=[0.2, 0.2], budget=1.0, costs=vector(3.0, 4.0))
    assert simplex_contained(b, a)
    assert not simplex_contained(a, b)
    assert a.contains([0.6, 0.2]) and not a.contains([0.8, 0.2])
    back = Simplex(anchor=[0.2, 0.2], budget=1.0, costs=vector(2.0, 3.0), direction=SimplexDirection.BACKWARD)
    assert back.contains([0.0, 0.1])
    with pytest.raises(ValueError):
        simplex_contained(back, a)


# ============== Learner Penalty ==============

def test_embedding_matches_one_dimensional_penalty(embedded_example2):
    p = learner_cost_nd(embedded_example2, Hyperplane(g=[1.0, 0.0], g0=0.55), mc_samples=200_000, seed=1)
    assert p.provenance == Provenance.MONTE_CARLO
    se = p.standard_errors["total"]
    assert abs(p.total - 0.030556) <= 4 * se + 1e-12
    assert p.fn_b == pytest.approx(0.0, abs=1e-3)
    assert not p.dominated


def test_monte_carlo_is_deterministic(embedded_example2):
    h = Hyperplane(g=[1.0, 0.0], g0=0.6)
    with settings_override(mc_block_size=5_000, mc_workers=1):
        serial = learner_cost_nd(embedded_example2, h, mc_samples=20_000, seed=3)
    with settings_override(mc_block_size=5_000, mc_workers=4):
        parallel = learner_cost_nd(embedded_example2, h, mc_samples=20_000, seed=3)
    assert serial.total == parallel.total
    assert serial.standard_errors == parallel.standard_errors


def test_zero_samples_raise(embedded_example2):
    with pytest.raises(ValueError):
        learner_cost_nd(embedded_example2, Hyperplane(g=[1.0, 0.0], g0=0.6), mc_samples=0)


def test_one_dimensional_operations_reject_nd(embedded_example2, example2):
    with pytest.raises(ValueError):
        learner_cost_1d(embedded_example2, 0.5)
    with pytest.raises(ValueError):
        learner_cost_nd(example2, Hyperplane(g=[1.0], g0=0.5))


def test_dominated_hyperplane_is_flagged(embedded_example2):
    p = learner_cost_nd(embedded_example2, Hyperplane(g=[1.0, 0.0], g0=0.9), mc_samples=20_000, seed=2)
    assert p.fn_a > 0.0
    assert p.dominated


def test_offset_sweep_finds_lower_end(embedded_example2):
    lo, hi = offset_range(embedded_example2, [1.0, 0.0])
    assert lo == pytest.approx(0.55) and hi == pytest.approx(0.73333, abs=1e-5)
    sweep = equilibrium_offset_nd(embedded_example2, [1.0, 0.0], n_offsets=11, mc_samples=20_000, seed=5)
    assert sweep.best.g0 == pytest.approx(0.55)
    assert len(sweep.offsets) == len(sweep.totals) == 11
    assert abs(sweep.best_penalty.total - 0.030556) <= 4 * sweep.standard_errors[0] + 1e-12


def test_dominance_repair(embedded_example2):
    bad = dominance_repair(embedded_example2, Hyperplane(g=[1.0, 0.0], g0=0.9), mc_samples=20_000, seed=4)
    assert bad.improves
    assert bad.fn_a_after.value == 0.0

    good = dominance_repair(embedded_example2, Hyperplane(g=[1.0, 0.0], g0=0.6), mc_samples=20_000, seed=4)
    assert not good.improves
