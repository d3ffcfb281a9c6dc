import logging
import os
from typing import Mapping, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .exceptions import ConfigurationError

THREADS_ENV = "HYBRID_SCHED_THREADS"
LOG_LEVEL_ENV = "HYBRID_SCHED_LOG_LEVEL"


class OracleLimits(BaseModel):
    model_config = ConfigDict(frozen=True)

    max_tasks: int = Field(
        default=10,
        ge=0,
        description="Largest task count the exact branch-and-bound oracle accepts.",
    )
    max_machines: int = Field(
        default=4,
        ge=2,
        description="Largest m + k the exact branch-and-bound oracle accepts.",
    )


class LpLimits(BaseModel):
    model_config = ConfigDict(frozen=True)

    max_tasks: int = Field(
        default=5000,
        ge=0,
        description=(
            "Instances with more tasks are refused by the LP path.  Reduction "
            "instances carry complete bipartite arc sets that make the dense "
            "tableau explode long before the task count looks large."
        ),
    )


class ReductionLimits(BaseModel):
    model_config = ConfigDict(frozen=True)

    max_tasks: int = Field(
        default=200_000,
        ge=0,
        description="Largest number of tasks a materialized reduction instance may have.",
    )
    max_arcs: int = Field(
        default=5_000_000,
        ge=0,
        description="Largest number of precedence arcs a materialized reduction may have.",
    )


def _default_threads() -> int:
    return max(1, min(4, os.cpu_count() or 1))


class RuntimeConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    threads: int = Field(
        default_factory=_default_threads,
        ge=1,
        description=f"Worker pool size for batch runs (`{THREADS_ENV}`).",
    )
    log_level: str = Field(
        default="WARNING",
        description=f"Logging level name for the command line (`{LOG_LEVEL_ENV}`).",
    )

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        level = value.strip().upper()
        if not isinstance(logging.getLevelName(level), int):
            raise ValueError(f"unknown log level `{value}`")
        return level

    @classmethod
    def from_env(cls, environ: Optional[Mapping[str, str]] = None) -> "RuntimeConfig":
        """
        >>> RuntimeConfig.from_env({"HYBRID_SCHED_THREADS": "3"}).threads
        3
        >>> RuntimeConfig.from_env({"HYBRID_SCHED_LOG_LEVEL": "debug"}).log_level
        'DEBUG'
        """
        env = os.environ if environ is None else environ
        values = {}
        if env.get(THREADS_ENV):
            values["threads"] = env[THREADS_ENV]
        if env.get(LOG_LEVEL_ENV):
            values["log_level"] = env[LOG_LEVEL_ENV]

        try:
            return cls.model_validate(values)
        except ValidationError as e:
            error = e.errors()[0]
            name = THREADS_ENV if error["loc"][0] == "threads" else LOG_LEVEL_ENV
            raise ConfigurationError(f"{name}: {error['msg']}") from e
