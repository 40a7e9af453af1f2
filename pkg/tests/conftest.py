"""Pytest configuration and shared fixtures for the fastweb test suite."""

import logging
import math
from pathlib import Path

import numpy as np
import pytest

from fastweb.config import RunConfig
from fastweb.entire import FunctionSpec
from fastweb.enums import Family
from fastweb.field import GridSpec
from fastweb.maxmod import get_profile

HALF_EXP_RF = math.log(2.0)


@pytest.fixture
def half_exp() -> FunctionSpec:
    """``z e^z / 2``: fixes the origin, ``R_f = ln 2``."""
    return FunctionSpec.create(Family.HALF_EXP)


@pytest.fixture
def pure_exp() -> FunctionSpec:
    return FunctionSpec.create(Family.PURE_EXP)


@pytest.fixture
def scaled_exp() -> FunctionSpec:
    return FunctionSpec.create(Family.SCALED_EXP)


@pytest.fixture
def baker() -> FunctionSpec:
    return FunctionSpec.create(Family.BAKER_PRODUCT)


@pytest.fixture(params=list(Family), ids=lambda fam: fam.value)
def any_function(request) -> FunctionSpec:
    """One default member of every family."""
    return FunctionSpec.create(request.param)


@pytest.fixture
def half_exp_profile(half_exp):
    return get_profile(half_exp)


@pytest.fixture
def small_grid() -> GridSpec:
    """Odd-sized window whose middle row lies on the real axis."""
    return GridSpec.parse("0,0,6,6,31,31")


@pytest.fixture
def tiny_grid() -> GridSpec:
    return GridSpec.parse("0,0,4,4,9,9")


@pytest.fixture
def run_config(tmp_path: Path) -> RunConfig:
    """Cheap configuration writing into a temporary directory."""
    return RunConfig(grid="0,0,4,4,17,17", samples=50, out=str(tmp_path / "out"))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture(autouse=True)
def restore_fastweb_log_level():
    """The command-line tests change the package log level; put it back."""
    logger = logging.getLogger("fastweb")
    level = logger.level
    yield
    logger.setLevel(level)


def pytest_collection_modifyitems(config, items):
    """Automatically mark tests based on their location."""
    for item in items:
        path = str(item.fspath)
        if "integration" in path:
            item.add_marker(pytest.mark.integration)
        elif "performance" in path:
            item.add_marker(pytest.mark.performance)
            item.add_marker(pytest.mark.slow)
        else:
            item.add_marker(pytest.mark.unit)
