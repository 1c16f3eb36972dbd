import os
import sys

import pytest

# Ensure the package is importable during pytest collection.
PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), os.pardir))
if PROJECT_ROOT not in sys.path:
    sys.path.insert(0, PROJECT_ROOT)

from sdstab.dynamics import ControlSystem, ScalarField, VectorField  # noqa: E402
from sdstab.scenarios.builtin import example1, example2  # noqa: E402


@pytest.fixture(autouse=True)
def _isolated_environment(monkeypatch):
    for name in ("SDSTAB_CONFIG_JSON", "SDSTAB_OUTPUT_DIR", "SDSTAB_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def example1_scenario():
    return example1()


@pytest.fixture
def example1_system(example1_scenario) -> ControlSystem:
    return example1_scenario.system


@pytest.fixture
def half_norm() -> ScalarField:
    return ScalarField.squared_norm(2, 0.5, name="V")


@pytest.fixture
def example2_scenario():
    return example2()


@pytest.fixture
def zero_affine() -> ControlSystem:
    return ControlSystem.affine(VectorField.zero(2), VectorField.zero(2), name="zero")
