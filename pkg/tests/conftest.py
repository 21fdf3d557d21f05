"""Test fixtures."""

from __future__ import annotations

import json
import logging
from typing import TYPE_CHECKING

import numpy as np
import pytest

from hnc_navigation.configuration import Configuration
from hnc_navigation.field import FieldParams
from hnc_navigation.hierarchy import BinaryHierarchy
from hnc_navigation.scenario import Scenario

from . import ALPHA, BETA, load_fixture

if TYPE_CHECKING:
    from pathlib import Path

_LOGGER = logging.getLogger(__name__)

logging.basicConfig(level=logging.DEBUG)


@pytest.fixture
def rng() -> np.random.Generator:
    """Return a seeded random generator."""
    return np.random.default_rng(20140601)


@pytest.fixture
def four_disk_scenario() -> Scenario:
    """Return the four disk line swap scenario."""
    return Scenario.from_dict(json.loads(load_fixture("four_disk_line.json")))


@pytest.fixture
def two_disk_scenario() -> Scenario:
    """Return the two disk swap scenario."""
    return Scenario.from_dict(json.loads(load_fixture("two_disk_swap.json")))


@pytest.fixture
def square_goal() -> Configuration:
    """Return two pairs of unit disks, far apart, supporting ((1,2),(3,4))."""
    return Configuration(
        [[0.0, 0.0], [3.0, 0.2], [20.0, 0.1], [23.0, -0.3]], np.ones(4)
    )


@pytest.fixture
def square_params(square_goal: Configuration) -> FieldParams:
    """Return field parameters for the pairs goal."""
    return FieldParams(
        goal=square_goal,
        tree=BinaryHierarchy.from_newick("((1,2),(3,4));"),
        alpha=ALPHA,
        beta=BETA,
    )


@pytest.fixture
def scenario_file(tmp_path: Path) -> Path:
    """Write the four disk scenario to a temporary file."""
    path = tmp_path / "four_disk_line.json"
    path.write_text(load_fixture("four_disk_line.json"), encoding="utf-8")
    return path
