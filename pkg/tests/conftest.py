import os
import sys

import pytest

# Add project root to path
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from core.persistence.model_io import load_model  # noqa: E402
from core.model.types import SystemModel  # noqa: E402
from data import EXAMPLE_DIR  # noqa: E402
from tests import factories  # noqa: E402

GOLDEN_DIR = os.path.join(os.path.dirname(__file__), "golden")


@pytest.fixture(autouse=True)
def _isolated_env(monkeypatch, tmp_path):
    """Keep a developer's holx.json / HOLX_* variables out of the tests."""
    for var in ("HOLX_CONFIG", "HOLX_HORIZON", "HOLX_COLOR", "HOLX_LOG_LEVEL", "HOLX_LOG_FILE"):
        monkeypatch.delenv(var, raising=False)
    monkeypatch.chdir(tmp_path)


@pytest.fixture
def empty_model() -> SystemModel:
    return SystemModel()


@pytest.fixture
def single_process_path():
    return EXAMPLE_DIR / "single_process.holx"


@pytest.fixture
def assembly_line_path():
    return EXAMPLE_DIR / "assembly_line.holx"


@pytest.fixture
def single_process_model(single_process_path):
    return load_model(single_process_path)


@pytest.fixture
def assembly_line_model(assembly_line_path):
    return load_model(assembly_line_path)


@pytest.fixture
def chain_model():
    return factories.chain_model()


@pytest.fixture
def golden_empty_bytes():
    with open(os.path.join(GOLDEN_DIR, "empty_model.holx"), "rb") as f:
        return f.read()
