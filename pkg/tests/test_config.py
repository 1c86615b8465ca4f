from pathlib import Path

import pytest

from src.config import ENV_KEYS, RunConfig, load_config
from src.errors import ConfigError


def test_defaults():
    config = load_config(environ={})
    assert config == RunConfig()
    assert config.max_order == 512
    assert config.max_subgroups == 20_000
    assert config.budget == 10_000_000
    assert config.cache_dir is None
    assert config.output_format == "text"
    assert config.workers == 1


def test_environment_then_flags():
    environ = {"TSK_MAX_ORDER": "64", "TSK_BUDGET": "100", "TSK_CACHE_DIR": "/tmp/tsk", "TSK_LOG_LEVEL": "info"}
    config = load_config({"budget": 5, "workers": None}, environ=environ)
    assert config.max_order == 64
    assert config.budget == 5
    assert config.cache_dir == Path("/tmp/tsk")
    assert config.log_level == "INFO"
    assert config.workers == 1


def test_every_field_has_an_environment_key():
    assert set(ENV_KEYS) == set(RunConfig.model_fields)


@pytest.mark.parametrize(
    "overrides, environ",
    [
        ({"max_order": 0}, {}),
        ({}, {"TSK_WORKERS": "many"}),
        ({"output_format": "yaml"}, {}),
        ({"colour": "blue"}, {}),
    ],
)
def test_invalid_configuration(overrides, environ):
    with pytest.raises(ConfigError) as info:
        load_config(overrides, environ=environ)
    assert info.value.exit_code == 2


def test_config_is_frozen():
    config = load_config(environ={})
    with pytest.raises(ValueError):
        config.budget = 3
