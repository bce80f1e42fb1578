from enum import Enum
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from find_markov_gap.utils.errors import ConfigError


class NoiseSchedule(str, Enum):
    STALL_OR_PLATEAU = "stall_or_plateau"
    STALL = "stall"
    PLATEAU = "plateau"
    NEVER = "never"

    def fires_on(self, trigger: str) -> bool:
        if self is NoiseSchedule.NEVER:
            return False
        return self is NoiseSchedule.STALL_OR_PLATEAU or self.value == trigger


class OptimizerConfig(BaseModel):
    """Descent settings; fields take their names or the UPPER_CASE YAML aliases."""

    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)

    grad_tol: float = Field(3e-3, alias="GRAD_TOL", gt=0)
    max_iters: int = Field(500, alias="MAX_ITERS", ge=0)
    initial_step: float = Field(1.0, alias="INITIAL_STEP", gt=0)
    shrink_factor: float = Field(0.5, alias="SHRINK_FACTOR", gt=0, lt=1)
    max_backtracks: int = Field(30, alias="MAX_BACKTRACKS", ge=0)
    max_bisections: int = Field(12, alias="MAX_BISECTIONS", ge=0)
    max_expansions: int = Field(8, alias="MAX_EXPANSIONS", ge=0)
    noise_amplitude: float = Field(1e-2, alias="NOISE_AMPLITUDE", ge=0)
    noise_schedule: NoiseSchedule = Field(NoiseSchedule.STALL_OR_PLATEAU, alias="NOISE_SCHEDULE")
    plateau_window: int = Field(20, alias="PLATEAU_WINDOW", ge=0)
    plateau_rtol: float = Field(1e-3, alias="PLATEAU_RTOL", gt=0)
    # set from the run-level SEED, never echoed with the section
    rng_seed: int = Field(0, alias="RNG_SEED", exclude=True)
    tr_constrained: bool = Field(False, alias="TR_CONSTRAINED")
    eps: float = Field(1e-8, alias="EPS", gt=0, le=1e-4)
    log_every: int = Field(10, alias="LOG_EVERY", ge=1)

    def __init__(self, **data: Any) -> None:
        try:
            super().__init__(**data)
        except ValidationError as e:
            raise ConfigError(f"Invalid optimizer settings:\n{e}") from e
