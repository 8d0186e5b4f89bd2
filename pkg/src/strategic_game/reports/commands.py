"""Experiment commands behind the CLI; each returns a ReportBundle and writes nothing itself."""

import logging
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..config.settings import get_settings
from ..costs.cost_model import NO_SUBSIDY, SqrtLinearCost, SubsidyPlan
from ..equilibrium.boundaries import undominated_interval
from ..equilibrium.n_d import equilibrium_offset_nd
from ..equilibrium.one_d import equilibrium_threshold, learner_cost_1d
from ..errors import ConfigError, NumericalError
from ..models import Group, PenaltyBreakdown, Provenance, Regime, SubsidyFamily
from ..population.population import GroupSpec, Scenario, TrueRule1D
from ..storage.report_store import CsvTable, ReportBundle, provenance_label, render_table
from ..subsidy.optimize import optimize_subsidy
from ..subsidy.regimes import FAMILY_REGIMES, RegimeReport, compare_regimes, solve_regime
from ..subsidy.welfare import group_welfare
from .config_loader import ScenarioConfig, load_packaged
from .golden import GoldenTable, build_golden_table

logger = logging.getLogger(__name__)

PENALTY_TERMS = ["fn_b", "fp_a", "fp_b", "fn_a", "subsidy_money", "total"]
REPORT_NUMERIC = ["sigma", "subsidy_parameter"] + PENALTY_TERMS + ["learner_utility", "welfare_a", "welfare_b"]


# ============== Table Helpers ==============

def _penalty_cells(penalty: PenaltyBreakdown) -> Dict[str, object]:
    cells: Dict[str, object] = {}
    for term in PENALTY_TERMS:
        if penalty.provenance == Provenance.MONTE_CARLO:
            tag = provenance_label(Provenance.MONTE_CARLO, (penalty.standard_errors or {}).get(term))
        elif term in ("subsidy_money", "total"):
            tag = provenance_label(penalty.provenance)
        else:
            tag = provenance_label(Provenance.ANALYTIC)
        cells[term] = float(getattr(penalty, term))
        cells[f"{term}_provenance"] = tag
    return cells


def _report_row(report: RegimeReport) -> Dict[str, object]:
    penalty_tag = provenance_label(report.learner_penalty.provenance)
    welfare_tag = provenance_label(report.welfare_provenance)
    return {
        "regime": report.regime.value,
        "subsidy_kind": report.subsidy.kind,
        "sigma": report.classifier.sigma,
        "sigma_provenance": penalty_tag,
        "subsidy_parameter": report.subsidy.parameter,
        "subsidy_parameter_provenance": penalty_tag,
        **_penalty_cells(report.learner_penalty),
        "learner_utility": report.learner_utility,
        "learner_utility_provenance": penalty_tag,
        "welfare_a": report.welfare_a,
        "welfare_a_provenance": welfare_tag,
        "welfare_b": report.welfare_b,
        "welfare_b_provenance": welfare_tag,
        "dominated": report.learner_penalty.dominated,
    }


def _report_summary(s: Scenario, report: RegimeReport) -> str:
    lines = [
        f"Scenario: {s.name}",
        f"Regime: {report.regime.value}",
        f"Threshold sigma*: {report.classifier.sigma:.6f}",
        f"Subsidy: {report.subsidy.label()}",
        f"Learner penalty: {report.learner_penalty.total:.6f} (utility {report.learner_utility:.6f})",
        f"Welfare A: {report.welfare_a:.6f}",
        f"Welfare B: {report.welfare_b:.6f}",
    ]
    if report.fp_a_interval is not None:
        lines.append(f"Group A false positives: [{report.fp_a_interval.lo:.6f}, {report.fp_a_interval.hi:.6f})")
    if report.fn_b_interval is not None:
        lines.append(f"Group B false negatives: [{report.fn_b_interval.lo:.6f}, {report.fn_b_interval.hi:.6f})")
    return "\n".join(lines) + "\n"


# ============== equilibrium ==============

def cmd_equilibrium(config: ScenarioConfig, regime: Regime, seed: Optional[int] = None) -> ReportBundle:
    """
    Solve one regime for a scenario.

    One-dimensional scenarios get the full regime report. For d-dimensional
    scenarios only the manipulation regime is available; the offset along
    group B's true direction is swept with seeded Monte Carlo.

    Raises:
        ConfigError: If the regime is unavailable for the scenario's dimension
    """
    s = config.to_scenario()
    name = f"{s.name}_{regime.value}"
    if not s.is_1d:
        return _equilibrium_nd(s, regime, name, seed)

    report = solve_regime(s, regime)
    table = CsvTable.with_provenance(["regime", "subsidy_kind"], REPORT_NUMERIC, ["dominated"])
    table.add(_report_row(report))
    return ReportBundle(
        name=name,
        data={"scenario": s.name, "dimension": 1, "report": report.model_dump(mode="json")},
        tables={"equilibrium": table},
        summary=_report_summary(s, report),
    )


def _equilibrium_nd(s: Scenario, regime: Regime, name: str, seed: Optional[int]) -> ReportBundle:
    if regime != Regime.MANIPULATION:
        raise ConfigError(f"Regime '{regime.value}' needs a one-dimensional scenario; use --regime manip")
    settings = get_settings()
    seed = settings.seed if seed is None else seed
    sweep = equilibrium_offset_nd(s, s.group_b.rule.weights, NO_SUBSIDY, seed=seed)

    table = CsvTable.with_provenance([], ["offset", "total"])
    for offset, total, se in zip(sweep.offsets, sweep.totals, sweep.standard_errors):
        table.add(
            {
                "offset": offset,
                "offset_provenance": provenance_label(Provenance.ANALYTIC),
                "total": total,
                "total_provenance": provenance_label(Provenance.MONTE_CARLO, se),
            }
        )
    best = sweep.best_penalty
    summary = (
        f"Scenario: {s.name} ({s.dimension}-D)\n"
        f"Regime: {regime.value}\n"
        f"Direction: {sweep.direction}\n"
        f"Best offset g0: {sweep.best.g0:.6f}\n"
        f"Learner penalty: {best.total:.6f} +/- {best.standard_errors['total']:.2e}\n"
    )
    return ReportBundle(
        name=name,
        data={
            "scenario": s.name,
            "dimension": s.dimension,
            "seed": seed,
            "classifier": sweep.best.model_dump(mode="json"),
            "penalty": best.model_dump(mode="json"),
        },
        tables={"offsets": table},
        summary=summary,
    )


# ============== reproduce-examples ==============

def cmd_reproduce_examples() -> Tuple[ReportBundle, GoldenTable]:
    """Golden table over the worked examples; the caller turns ``table.passed`` into the exit code"""
    table = build_golden_table()
    return (
        ReportBundle(
            name="golden",
            data={"passed": table.passed, "rows": [r.model_dump(mode="json") for r in table.rows]},
            tables={"table": table.to_csv_table()},
            summary=table.summary_text(),
        ),
        table,
    )


# ============== sweep ==============

SWEEP_PARAMS = ("sigma", "beta", "alpha", "lambda")


def parse_range(text: str) -> np.ndarray:
    """
    Parse ``lo:hi:steps`` into an evenly spaced grid.

    Raises:
        ConfigError: On a malformed range, steps < 1, lo > hi, or lo == hi with several steps
    """
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"Range '{text}' must look like lo:hi:steps")
    try:
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as e:
        raise ConfigError(f"Range '{text}' has a non-numeric part") from e
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise ConfigError(f"Range '{text}' has a non-finite bound")
    if steps < 1:
        raise ConfigError(f"Range '{text}' needs at least one step")
    if lo > hi:
        raise ConfigError(f"Range '{text}' is inverted")
    if steps > 1 and lo == hi:
        raise ConfigError(f"Range '{text}' has zero width but {steps} steps")
    return np.linspace(lo, hi, steps)


def _sweep_plan(beta: Optional[float], alpha: Optional[float]) -> SubsidyPlan:
    if beta is not None and alpha is not None:
        raise ConfigError("Give at most one of --beta and --alpha")
    try:
        if beta is not None:
            return SubsidyPlan.proportional(beta)
        if alpha is not None:
            return SubsidyPlan.flat(alpha)
    except ValueError as e:
        raise ConfigError(f"Invalid subsidy plan: {e}") from e
    return NO_SUBSIDY


def cmd_sweep(
    config: ScenarioConfig,
    param: str,
    range_spec: Optional[str] = None,
    sigma: Optional[float] = None,
    beta: Optional[float] = None,
    alpha: Optional[float] = None,
    family: SubsidyFamily = SubsidyFamily.PROPORTIONAL,
) -> ReportBundle:
    """
    Penalty decomposition and welfare along one parameter.

    sigma: thresholds under a fixed plan (default range: the undominated interval).
    beta / alpha: subsidy parameter at a fixed threshold (default: the no-subsidy equilibrium).
    lambda: joint subsidy optimum of ``family`` for each spend weight.

    Raises:
        ConfigError: On an unknown parameter, a bad range or values outside the parameter's domain
    """
    if param not in SWEEP_PARAMS:
        raise ConfigError(f"Unknown sweep parameter '{param}' (choose from {', '.join(SWEEP_PARAMS)})")
    s = config.to_scenario()
    if not s.is_1d:
        raise ConfigError("Sweeps need a one-dimensional scenario")
    plan = _sweep_plan(beta, alpha)

    if range_spec is None:
        if param != "sigma":
            raise ConfigError(f"--range is required when sweeping {param}")
        lo, hi = undominated_interval(s, plan)
        values = np.linspace(lo, hi, 101)
    else:
        values = parse_range(range_spec)

    if param == "sigma" and values[0] < 0.0:
        raise ConfigError("Thresholds must be non-negative")
    if param == "beta" and (values[0] <= 0.0 or values[-1] > 1.0):
        raise ConfigError("beta must lie in (0, 1]")
    if param in ("alpha", "lambda") and values[0] < 0.0:
        raise ConfigError(f"{param} must be non-negative")

    fixed_sigma = sigma
    if param in ("beta", "alpha") and fixed_sigma is None:
        fixed_sigma = equilibrium_threshold(s, NO_SUBSIDY).sigma

    numeric = ["value", "sigma", "subsidy_parameter"] + PENALTY_TERMS + ["learner_utility", "welfare_a", "welfare_b"]
    table = CsvTable.with_provenance(["param", "subsidy_kind"], numeric, ["dominated"])
    for v in values:
        v = float(v)
        if param == "sigma":
            z, row_plan, scenario = v, plan, s
        elif param == "beta":
            z, row_plan, scenario = fixed_sigma, SubsidyPlan.proportional(v), s
        elif param == "alpha":
            z, row_plan, scenario = fixed_sigma, SubsidyPlan.flat(v), s
        else:
            scenario = s.model_copy(update={"lam": v})
            eq = optimize_subsidy(scenario, family)
            z, row_plan = eq.sigma, eq.plan
        penalty = learner_cost_1d(scenario, z, row_plan)
        analytic = provenance_label(Provenance.ANALYTIC)
        solved = provenance_label(Provenance.QUADRATURE) if param == "lambda" else analytic
        table.add(
            {
                "param": param,
                "subsidy_kind": row_plan.kind,
                "value": v,
                "value_provenance": analytic,
                "sigma": float(z),
                "sigma_provenance": solved,
                "subsidy_parameter": row_plan.parameter,
                "subsidy_parameter_provenance": solved,
                **_penalty_cells(penalty),
                "learner_utility": 1.0 - penalty.total,
                "learner_utility_provenance": provenance_label(penalty.provenance),
                "welfare_a": group_welfare(scenario, z, row_plan, Group.A),
                "welfare_a_provenance": provenance_label(Provenance.QUADRATURE),
                "welfare_b": group_welfare(scenario, z, row_plan, Group.B),
                "welfare_b_provenance": provenance_label(Provenance.QUADRATURE),
                "dominated": penalty.dominated,
            }
        )

    logger.info(f"Swept {param} over {len(values)} points on '{s.name}'")
    return ReportBundle(
        name=f"{s.name}_sweep_{param}",
        data={
            "scenario": s.name,
            "param": param,
            "values": [float(v) for v in values],
            "fixed_sigma": fixed_sigma,
            "plan": plan.model_dump(mode="json"),
            "family": family.value if param == "lambda" else None,
            "points": len(values),
        },
        tables={"points": table},
        summary=f"Sweep of {param} on {s.name}: {len(values)} points\n",
    )


# ============== paradox-search ==============

def _round4(v) -> float:
    return round(float(v), 4)


def random_scenario(rng: np.random.Generator, name: str) -> Scenario:
    """
    Random sqrt-linear scenario satisfying the standing assumptions.

    Group B's coefficients dominate group A's termwise, so c_B - c_A is
    non-decreasing; tau_B <= tau_A keeps the true rules nested.
    """
    sqrt_a, lin_a = rng.uniform(1.0, 10.0), rng.uniform(0.0, 2.0)
    sqrt_b, lin_b = sqrt_a + rng.uniform(0.0, 6.0), lin_a + rng.uniform(0.0, 2.0)
    tau_b = rng.uniform(0.15, 0.5)
    tau_a = tau_b + rng.uniform(0.02, 0.25)
    return Scenario(
        name=name,
        group_a=GroupSpec(cost=SqrtLinearCost(sqrt=_round4(sqrt_a), lin=_round4(lin_a)), rule=TrueRule1D(tau=_round4(tau_a))),
        group_b=GroupSpec(cost=SqrtLinearCost(sqrt=_round4(sqrt_b), lin=_round4(lin_b)), rule=TrueRule1D(tau=_round4(tau_b))),
        c_fp=_round4(rng.uniform(0.25, 1.5)),
        c_fn=_round4(rng.uniform(0.25, 1.5)),
        lam=_round4(rng.uniform(0.1, 1.5)),
    )


def cmd_paradox_search(
    trials: int,
    seed: Optional[int] = None,
    family: Optional[SubsidyFamily] = None,
    grid: Optional[int] = None,
) -> ReportBundle:
    """
    Look for subsidy-paradox and manipulation-regret witnesses.

    Trial 0 is the first worked example; later trials are random
    sqrt-linear scenarios. Each witness is attached as a reusable config.

    Raises:
        ConfigError: If trials is negative
    """
    if trials < 0:
        raise ConfigError(f"--trials must be non-negative, got {trials}")
    settings = get_settings()
    seed = settings.seed if seed is None else seed
    families = (family,) if family is not None else (SubsidyFamily.PROPORTIONAL, SubsidyFamily.FLAT)
    rng = np.random.default_rng(seed)

    numeric = ["manip_sigma"]
    for f in families:
        numeric += [f"{f.value}_sigma", f"{f.value}_parameter", f"{f.value}_penalty_gain"]
    flags = [f"paradox_{FAMILY_REGIMES[f].value}" for f in families] + ["manipulation_regret"]
    table = CsvTable.with_provenance(["trial", "scenario", "status"], numeric, flags + ["witness"])

    witnesses: List[dict] = []
    attachments: Dict[str, dict] = {}
    for trial in range(trials):
        if trial == 0:
            s = load_packaged("example1").to_scenario()
        else:
            s = random_scenario(rng, f"paradox_trial_{trial}")
        row: Dict[str, object] = {"trial": trial, "scenario": s.name, "status": "ok", "witness": ""}
        try:
            comparison = compare_regimes(s, families=families, grid=grid)
        except NumericalError as e:
            logger.warning(f"Trial {trial} skipped: {e}")
            row.update({"status": "numerical-error", **{c: "" for c in table.columns if c not in row}})
            table.add(row)
            continue

        manip = comparison.report(Regime.MANIPULATION)
        row["manip_sigma"] = manip.classifier.sigma
        row["manip_sigma_provenance"] = provenance_label(Provenance.ANALYTIC)
        for f in families:
            rep = comparison.report(FAMILY_REGIMES[f])
            for key, value in (
                ("sigma", rep.classifier.sigma),
                ("parameter", rep.subsidy.parameter),
                ("penalty_gain", manip.learner_penalty.total - rep.learner_penalty.total),
            ):
                row[f"{f.value}_{key}"] = value
                row[f"{f.value}_{key}_provenance"] = provenance_label(Provenance.QUADRATURE)
            row[f"paradox_{FAMILY_REGIMES[f].value}"] = comparison.subsidy_paradox[FAMILY_REGIMES[f].value]
        row["manipulation_regret"] = comparison.manipulation_regret

        if any(comparison.subsidy_paradox.values()) or comparison.manipulation_regret:
            stem = f"witness_{trial}"
            row["witness"] = f"{stem}.json"
            attachments[stem] = json_config(s)
            witnesses.append(
                {
                    "trial": trial,
                    "scenario": s.name,
                    "file": f"{stem}.json",
                    "subsidy_paradox": comparison.subsidy_paradox,
                    "manipulation_regret": comparison.manipulation_regret,
                }
            )
        table.add(row)

    found = {
        FAMILY_REGIMES[f].value: any(w["subsidy_paradox"].get(FAMILY_REGIMES[f].value) for w in witnesses)
        for f in families
    }
    lines = [f"Paradox search: {trials} trials, seed {seed}"]
    for regime_value, ok in found.items():
        lines.append(f"  {regime_value} paradox witness: {'found' if ok else f'none found in {trials} trials'}")
    lines.append(f"  manipulation regret witnesses: {sum(w['manipulation_regret'] for w in witnesses)}")
    if witnesses:
        lines.append("")
        lines.append(
            render_table(
                ["trial", "scenario", "file"],
                [[w["trial"], w["scenario"], w["file"]] for w in witnesses],
            )
        )
    logger.info(f"Paradox search finished: {len(witnesses)} witnesses in {trials} trials")
    return ReportBundle(
        name="paradox_search",
        data={
            "trials": trials,
            "seed": seed,
            "families": [f.value for f in families],
            "paradox_found": found,
            "witnesses": witnesses,
        },
        tables={"summary": table},
        summary="\n".join(lines) + "\n",
        attachments=attachments,
    )


def json_config(s: Scenario) -> dict:
    """Scenario as a config document that load_config reads back"""
    return ScenarioConfig.from_scenario(s).model_dump(mode="json", by_alias=True)
