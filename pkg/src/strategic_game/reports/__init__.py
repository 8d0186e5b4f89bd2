from .commands import cmd_equilibrium, cmd_paradox_search, cmd_reproduce_examples, cmd_sweep, parse_range
from .config_loader import RunOptions, ScenarioConfig, load_config, load_packaged, parse_config
from .golden import GoldenRow, GoldenStatus, GoldenTable, build_golden_table

__all__ = [
    "GoldenRow",
    "GoldenStatus",
    "GoldenTable",
    "RunOptions",
    "ScenarioConfig",
    "build_golden_table",
    "cmd_equilibrium",
    "cmd_paradox_search",
    "cmd_reproduce_examples",
    "cmd_sweep",
    "load_config",
    "load_packaged",
    "parse_config",
]
