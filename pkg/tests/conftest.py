import os
from functools import lru_cache

import pytest

from src.config import load_config
from src.engine.groups import build_group
from src.engine.lattice import SubgroupLattice, enumerate_subgroups
from src.engine.transfer import ArrowUniverse
from src.schemas.groups import parse_group_spec


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long acceptance runs, enabled with TSK_RUN_SLOW=1")


def pytest_collection_modifyitems(config, items):
    if os.environ.get("TSK_RUN_SLOW") == "1":
        return
    skip = pytest.mark.skip(reason="slow acceptance run; set TSK_RUN_SLOW=1")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@lru_cache(maxsize=None)
def _lattice(spec: str) -> SubgroupLattice:
    return enumerate_subgroups(build_group(parse_group_spec(spec)))


@lru_cache(maxsize=None)
def _universe(spec: str) -> ArrowUniverse:
    return ArrowUniverse(_lattice(spec))


@pytest.fixture(scope="session")
def lattice():
    return _lattice


@pytest.fixture(scope="session")
def universe():
    return _universe


@pytest.fixture
def config():
    return load_config(environ={})
