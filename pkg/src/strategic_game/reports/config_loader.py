import json
import logging
from importlib import resources
from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..errors import ConfigError
from ..models import LearnerMode
from ..population.population import GroupSpec, Scenario, validate_scenario

logger = logging.getLogger(__name__)

PACKAGED_SCENARIOS = "strategic_game.scenarios"


class RunOptions(BaseModel):
    """Per-run overrides of the numerical settings; unset fields fall back to Settings"""

    model_config = ConfigDict(extra="forbid")

    grid_size: Optional[int] = Field(default=None, ge=3)
    subsidy_grid: Optional[int] = Field(default=None, ge=3)
    delta_grid: Optional[int] = Field(default=None, ge=10)
    mc_samples: Optional[int] = Field(default=None, ge=1)
    seed: Optional[int] = Field(default=None, ge=0)
    output_dir: Optional[Path] = None

    def setting_updates(self) -> dict:
        """Fields that map onto Settings (output_dir is resolved by the CLI)"""
        return self.model_dump(exclude={"output_dir"}, exclude_none=True)


class ScenarioConfig(BaseModel):
    """File-backed scenario record plus run options"""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    name: str = "scenario"
    group_a: GroupSpec
    group_b: GroupSpec
    p_a: float = 0.5
    p_b: Optional[float] = None
    c_fp: float = 1.0
    c_fn: float = 1.0
    lam: float = Field(default=0.0, alias="lambda")
    learner_mode: LearnerMode = LearnerMode.PENALTY
    run: RunOptions = Field(default_factory=RunOptions)

    def to_scenario(self) -> Scenario:
        return Scenario.model_validate(self.model_dump(exclude={"run"}, by_alias=True))

    @classmethod
    def from_scenario(cls, s: Scenario, run: Optional[RunOptions] = None) -> "ScenarioConfig":
        return cls.model_validate({**s.model_dump(by_alias=True), "run": run or RunOptions()})

    def to_json(self) -> str:
        """Pretty-printed document that parse_config reads back to an equal config"""
        return self.model_dump_json(by_alias=True, indent=2)


def _first_error(e: ValidationError) -> str:
    err = e.errors()[0]
    where = ".".join(str(part) for part in err["loc"]) or "<root>"
    return f"{where}: {err['msg']}"


def parse_config(text: str, source: str = "<string>", validate: bool = True) -> ScenarioConfig:
    """
    Parse and check a scenario config document.

    Args:
        text: JSON document
        source: Name used in error messages
        validate: Also run validate_scenario on the result

    Returns:
        Parsed config

    Raises:
        ConfigError: On malformed JSON, unknown or invalid fields, or a scenario
            that violates the game's assumptions
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{source} is not valid JSON: {e}") from e

    try:
        config = ScenarioConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(f"{source}: invalid field {_first_error(e)}") from e

    if validate:
        report = validate_scenario(config.to_scenario())
        if not report.passed:
            raise ConfigError(f"{source}: scenario is invalid: {'; '.join(report.failures)}")
    return config


def packaged_names() -> List[str]:
    """Names of the scenario configs shipped with the package"""
    root = resources.files(PACKAGED_SCENARIOS)
    return sorted(p.name[: -len(".json")] for p in root.iterdir() if p.name.endswith(".json"))


def load_packaged(name: str) -> ScenarioConfig:
    """
    Load a shipped scenario such as ``example1``.

    Raises:
        ConfigError: If no such scenario is packaged
    """
    resource = resources.files(PACKAGED_SCENARIOS) / f"{name}.json"
    if not resource.is_file():
        raise ConfigError(f"No packaged scenario named '{name}' (available: {', '.join(packaged_names())})")
    return parse_config(resource.read_text(encoding="utf-8"), source=f"packaged:{name}")


def load_config(path: str | Path) -> ScenarioConfig:
    """
    Load a scenario config file.

    A bare name of a packaged scenario (``example1`` or ``example1.json``)
    is accepted when no such file exists.

    Raises:
        ConfigError: If the file cannot be read or fails validation
    """
    path = Path(path)
    if not path.exists():
        stem = path.name[: -len(".json")] if path.name.endswith(".json") else path.name
        if stem in packaged_names():
            logger.info(f"Using packaged scenario '{stem}'")
            return load_packaged(stem)
        raise ConfigError(f"Config file not found: {path}")

    logger.info(f"Loading scenario config: {path}")
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        logger.error(f"Error reading config {path}: {e}")
        raise ConfigError(f"Cannot read config {path}: {e}") from e
    return parse_config(text, source=str(path))
