"""Strategic classification game command-line interface"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .config.settings import get_settings, settings_override
from .errors import ConfigError, NumericalError, StrategicGameError
from .models import Regime, SubsidyFamily
from .reports.commands import SWEEP_PARAMS, cmd_equilibrium, cmd_paradox_search, cmd_reproduce_examples, cmd_sweep
from .reports.config_loader import ScenarioConfig, load_config
from .storage.report_store import ReportBundle, ReportStore

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

_HANDLER_NAME = "strategic_game.console"


def setup_logging(level: str = "INFO") -> None:
    """Configure application logging (safe to call repeatedly)"""
    formatter = logging.Formatter(
        fmt="%(asctime)s | %(levelname)-8s | %(name)s:%(lineno)d | %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )
    root_logger = logging.getLogger()
    handler = next((h for h in root_logger.handlers if h.get_name() == _HANDLER_NAME), None)
    if handler is None:
        handler = logging.StreamHandler(sys.stdout)
        handler.set_name(_HANDLER_NAME)
        handler.setFormatter(formatter)
        root_logger.addHandler(handler)
    handler.setLevel(level)
    root_logger.setLevel(level)


logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="strategic-game",
        description="Equilibria, subsidies and welfare in the two-group strategic classification game",
    )
    parser.add_argument("--output-dir", type=Path, default=None, help="Directory for report files")
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    eq = sub.add_parser("equilibrium", help="Solve one regime for a scenario config")
    eq.add_argument("config", help="Scenario config file or packaged scenario name")
    eq.add_argument("--regime", choices=[r.value for r in Regime], default=Regime.MANIPULATION.value)
    eq.add_argument("--seed", type=int, default=None)

    sub.add_parser("reproduce-examples", help="Golden table for the worked examples")

    sw = sub.add_parser("sweep", help="Penalty and welfare along one parameter")
    sw.add_argument("config", help="Scenario config file or packaged scenario name")
    sw.add_argument("--param", choices=SWEEP_PARAMS, required=True)
    sw.add_argument("--range", dest="range_spec", default=None, help="lo:hi:steps")
    sw.add_argument("--sigma", type=float, default=None, help="Fixed threshold for beta/alpha sweeps")
    sw.add_argument("--beta", type=float, default=None, help="Fixed proportional subsidy for sigma sweeps")
    sw.add_argument("--alpha", type=float, default=None, help="Fixed flat subsidy for sigma sweeps")
    sw.add_argument("--family", choices=[f.value for f in SubsidyFamily], default=SubsidyFamily.PROPORTIONAL.value)

    ps = sub.add_parser("paradox-search", help="Search random scenarios for paradox witnesses")
    ps.add_argument("--trials", type=int, default=20)
    ps.add_argument("--seed", type=int, default=None)
    ps.add_argument("--family", choices=[f.value for f in SubsidyFamily], default=None)
    ps.add_argument("--grid", type=int, default=None, help="Points per axis of the subsidy search")
    return parser


def resolve_output_dir(flag: Optional[Path], config: Optional[ScenarioConfig] = None) -> Path:
    """Flag, then SCGAME_OUTPUT_DIR (or .env), then the config's run.output_dir, then the default"""
    settings = get_settings()
    if flag is not None:
        return flag
    if "output_dir" in settings.model_fields_set:
        return settings.output_dir
    if config is not None and config.run.output_dir is not None:
        return config.run.output_dir
    return settings.output_dir


def _run(args: argparse.Namespace) -> int:
    if args.command == "reproduce-examples":
        bundle, table = cmd_reproduce_examples()
        _write(bundle, resolve_output_dir(args.output_dir))
        print(bundle.summary, end="")
        return EXIT_OK if table.passed else EXIT_FAILURE

    if args.command == "paradox-search":
        family = SubsidyFamily(args.family) if args.family else None
        bundle = cmd_paradox_search(args.trials, args.seed, family, args.grid)
        _write(bundle, resolve_output_dir(args.output_dir))
        print(bundle.summary, end="")
        return EXIT_OK

    # Validation happens before any file is written
    config = load_config(args.config)
    with settings_override(**config.run.setting_updates()):
        if args.command == "equilibrium":
            bundle = cmd_equilibrium(config, Regime(args.regime), args.seed)
        else:
            bundle = cmd_sweep(
                config,
                args.param,
                args.range_spec,
                sigma=args.sigma,
                beta=args.beta,
                alpha=args.alpha,
                family=SubsidyFamily(args.family),
            )
    _write(bundle, resolve_output_dir(args.output_dir, config))
    print(bundle.summary, end="")
    return EXIT_OK


def _write(bundle: ReportBundle, output_dir: Path) -> None:
    paths = ReportStore(output_dir).write_bundle(bundle)
    logger.info(f"Wrote {len(paths)} report files to {output_dir}")


def main(argv: Optional[List[str]] = None) -> int:
    """
    CLI entry point.

    Returns:
        0 on success, 1 on failed golden rows or other errors,
        2 on invalid configs or ranges, 3 on numerical failures
    """
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level or get_settings().log_level)
    try:
        return _run(args)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except NumericalError as e:
        logger.error(f"Numerical failure: {e}")
        return EXIT_NUMERICAL
    except StrategicGameError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_FAILURE
