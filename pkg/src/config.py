import os
from pathlib import Path
from typing import Any, Literal, Mapping, Optional

from pydantic import BaseModel, ConfigDict, PositiveInt, ValidationError

from src.errors import ConfigError


ENV_KEYS = {
    "max_order": "TSK_MAX_ORDER",
    "max_subgroups": "TSK_MAX_SUBGROUPS",
    "budget": "TSK_BUDGET",
    "cache_dir": "TSK_CACHE_DIR",
    "output_format": "TSK_FORMAT",
    "workers": "TSK_WORKERS",
    "exhaustive_limit": "TSK_EXHAUSTIVE_LIMIT",
    "log_level": "TSK_LOG_LEVEL",
}


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    max_order: PositiveInt = 512
    max_subgroups: PositiveInt = 20_000
    budget: PositiveInt = 10_000_000
    cache_dir: Optional[Path] = None
    output_format: Literal["text", "json", "csv", "dot"] = "text"
    workers: PositiveInt = 1
    exhaustive_limit: PositiveInt = 16
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "WARNING"


def load_config(
    overrides: Optional[Mapping[str, Any]] = None,
    environ: Optional[Mapping[str, str]] = None,
) -> RunConfig:
    """
    Build the run configuration: defaults, then TSK_* environment, then flags.

    Parameters:
    overrides (Mapping): Values from command-line flags; None entries are ignored.
    environ (Mapping): Environment to read, os.environ when omitted.

    Returns:
    RunConfig: The validated configuration.
    """
    env = os.environ if environ is None else environ
    values = {}
    for field, key in ENV_KEYS.items():
        raw = env.get(key)
        if raw:
            values[field] = raw.upper() if field == "log_level" else raw

    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value

    try:
        return RunConfig(**values)
    except ValidationError as e:
        raise ConfigError(f"invalid configuration: {e}")
