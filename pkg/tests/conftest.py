import os

import numpy as np
import pytest

from strategic_game.config.settings import clear_settings_cache
from strategic_game.costs.cost_model import LinearCost, PowerSumCost, PowerTerm, SqrtLinearCost, TabulatedCost
from strategic_game.population.population import GroupSpec, Scenario, TrueRule1D
from strategic_game.reports.config_loader import load_packaged


@pytest.fixture(autouse=True)
def isolated_settings(monkeypatch):
    """Every test starts from default settings, whatever SCGAME_* the shell exports"""
    for key in [k for k in os.environ if k.startswith("SCGAME_")]:
        monkeypatch.delenv(key, raising=False)
    clear_settings_cache()
    yield
    clear_settings_cache()


@pytest.fixture
def example1() -> Scenario:
    """Square-root costs, unit penalties, lambda = 3/4"""
    return load_packaged("example1").to_scenario()


@pytest.fixture
def example2() -> Scenario:
    """Linear costs 3x and 4x with C_FN = 2/3, C_FP = 1/3"""
    return load_packaged("example2").to_scenario()


@pytest.fixture
def example3() -> Scenario:
    """Example 2's game with the equalizing learner"""
    return load_packaged("example3").to_scenario()


COST_FAMILIES = ("linear", "sqrt_linear", "power_sum", "tabulated")


def random_cost_pair(rng: np.random.Generator, family: str):
    """
    Random (c_A, c_B) from one family with c_B - c_A non-decreasing.

    c_B is c_A plus an extra member of the same family, so every pair
    satisfies the cost condition.
    """
    if family == "linear":
        slope = rng.uniform(1.0, 8.0)
        return LinearCost(slope=slope), LinearCost(slope=slope + rng.uniform(0.0, 4.0))
    if family == "sqrt_linear":
        sqrt, lin = rng.uniform(0.5, 8.0), rng.uniform(0.0, 2.0)
        return (
            SqrtLinearCost(sqrt=sqrt, lin=lin),
            SqrtLinearCost(sqrt=sqrt + rng.uniform(0.0, 4.0), lin=lin + rng.uniform(0.0, 2.0)),
        )
    if family == "power_sum":
        exponents = rng.uniform(0.5, 2.0, int(rng.integers(1, 4)))
        coeffs = rng.uniform(0.5, 5.0, len(exponents))
        extra = rng.uniform(0.0, 2.0, len(exponents))
        return (
            PowerSumCost(terms=[PowerTerm(coeff=k, exponent=e) for k, e in zip(coeffs, exponents)]),
            PowerSumCost(terms=[PowerTerm(coeff=k + x, exponent=e) for k, x, e in zip(coeffs, extra, exponents)]),
        )
    if family == "tabulated":
        xs = np.concatenate([[0.0], np.sort(rng.uniform(0.05, 0.95, int(rng.integers(2, 7)))), [1.0]])
        base = rng.uniform(0.0, 1.0) + np.concatenate([[0.0], np.cumsum(rng.uniform(0.3, 3.0, len(xs) - 1))])
        extra = np.concatenate([[0.0], np.cumsum(rng.uniform(0.0, 1.0, len(xs) - 1))])
        return (
            TabulatedCost(xs=xs.tolist(), values=base.tolist()),
            TabulatedCost(xs=xs.tolist(), values=(base + extra).tolist()),
        )
    raise ValueError(f"unknown cost family {family}")


def random_pair_scenario(rng: np.random.Generator, family: str, **kwargs) -> Scenario:
    """Uniform groups with a random cost pair and nested true rules"""
    c_a, c_b = random_cost_pair(rng, family)
    tau_b = rng.uniform(0.05, 0.6)
    tau_a = tau_b + rng.uniform(0.0, 0.3)
    return Scenario(
        name=f"random_{family}",
        group_a=GroupSpec(cost=c_a, rule=TrueRule1D(tau=tau_a)),
        group_b=GroupSpec(cost=c_b, rule=TrueRule1D(tau=tau_b)),
        **kwargs,
    )


def linear_scenario(slope_a=3.0, slope_b=4.0, tau_a=0.4, tau_b=0.3, **kwargs) -> Scenario:
    return Scenario(
        name=kwargs.pop("name", "linear"),
        group_a=GroupSpec(cost=LinearCost(slope=slope_a), rule=TrueRule1D(tau=tau_a)),
        group_b=GroupSpec(cost=LinearCost(slope=slope_b), rule=TrueRule1D(tau=tau_b)),
        **kwargs,
    )
