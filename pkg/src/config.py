"""Runtime settings, overridable through PATROL_* environment variables or a .env file."""

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Defaults shared by the library and the CLI."""

    model_config = SettingsConfigDict(
        env_prefix="PATROL_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Monte Carlo
    replications: int = 10_000
    seed: int = 42
    workers: int = 1
    ci_level: float = 0.95

    # Attackers
    burn_in_cycles: int = 100
    phase_grid_size: int = 128
    delay_grid_steps: int = 8
    attack_point: float = 0.0
    max_horizon_doublings: int = 16

    # Validators and numerics
    rate_cap_tolerance: float = 0.02
    min_rate_cap_load: float = 100.0
    integer_tolerance: float = 1e-9
    poisson_tail_mass: float = 1e-12
    max_support: int = 10


settings = Settings()

SCHEMA_VERSION = 1
