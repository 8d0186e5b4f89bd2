from contextlib import contextmanager
from functools import lru_cache
from pathlib import Path
from typing import Iterator, Literal, Optional

from pydantic import Field, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Numerical and output settings, overridable through SCGAME_* environment variables"""

    model_config = SettingsConfigDict(
        env_prefix="SCGAME_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Output
    output_dir: Path = Path("./reports")  # Where report bundles are written
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"

    # Randomness
    seed: int = Field(default=20240229, ge=0, description="Root seed for every random stream")

    # Equilibrium search
    grid_size: int = Field(default=2048, ge=3, description="Threshold grid for the 1-D argmin")
    subsidy_grid: int = Field(default=512, ge=3, description="Points per axis of the joint (sigma, subsidy) grid")
    refine_tol: float = Field(default=1e-7, gt=0.0, le=1e-2)
    refine_max_iter: int = Field(default=200, ge=10)
    refine_rounds: int = Field(default=3, ge=1, description="Alternating axis refinements in optimize_subsidy")
    tie_tol: float = Field(default=1e-12, ge=0.0)

    # Inversion and quadrature
    invert_tol: float = Field(default=1e-9, gt=0.0)
    invert_max_iter: int = Field(default=200, ge=20)
    quad_epsabs: float = Field(default=1e-9, gt=0.0)
    quad_limit: int = Field(default=200, ge=50)

    # Validation grids
    cost_condition_grid: int = Field(default=512, ge=2)
    containment_grid: int = Field(default=21, ge=2, description="Points per axis for the d-D containment check")

    # Monte Carlo
    mc_samples: int = Field(default=1_000_000, ge=1)
    mc_block_size: int = Field(default=131_072, ge=1)
    mc_workers: int = Field(default=4, ge=1, le=64)

    # Reports
    delta_grid: int = Field(default=10_000, ge=10, description="Feature grid for per-candidate payoff deltas")

    @property
    def plateau_tol(self) -> float:
        """Penalty differences treated as ties; stays above the noise inversion leaves on a flat penalty"""
        return max(self.tie_tol, self.invert_tol)

    @model_validator(mode="after")
    def validate_block_size(self):
        """Keep Monte Carlo blocks no larger than the sample count"""
        if self.mc_block_size > self.mc_samples:
            object.__setattr__(self, "mc_block_size", self.mc_samples)
        return self


_override: Optional[Settings] = None


@lru_cache()
def _environment_settings() -> Settings:
    return Settings()


def get_settings() -> Settings:
    """Active settings: an override installed by ``settings_override``, else the cached environment settings"""
    return _override or _environment_settings()


def clear_settings_cache() -> None:
    """Forget cached environment settings (after changing SCGAME_* variables)"""
    _environment_settings.cache_clear()


@contextmanager
def settings_override(**updates) -> Iterator[Settings]:
    """
    Temporarily replace selected settings for everything that calls get_settings.

    None values are ignored, so optional run options can be passed straight through.
    """
    global _override
    previous = _override
    base = get_settings()
    changes = {k: v for k, v in updates.items() if v is not None}
    _override = Settings(**{**base.model_dump(), **changes}) if changes else base
    try:
        yield _override
    finally:
        _override = previous
