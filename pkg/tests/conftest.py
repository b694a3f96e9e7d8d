import os
import pytest
from pathlib import Path
import tempfile
import shutil

import numpy as np

from src.shared_utils.config import Settings, get_settings
from src.services.nn_core import DenseSpec, ActivationSpec, NetworkSpec, mirror_decoder


@pytest.fixture
def test_settings():
    """Provides a settings object for testing."""
    return Settings(environment="dev")


@pytest.fixture(autouse=True)
def reset_settings_cache():
    """Automatically clear settings cache before each test."""
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def isolated_env(monkeypatch):
    """Provides a clean environment for tests that need to modify env vars.

    Usage:
        def test_something(isolated_env):
            isolated_env.setenv("MY_VAR", "value")
            # Test code here
    """
    original_env = os.environ.copy()

    yield monkeypatch

    os.environ.clear()
    os.environ.update(original_env)


@pytest.fixture
def temp_output_dir():
    """Creates a temporary output directory for archives and reports.

    Returns:
        Path: Path to temporary directory with data/ and outputs/ subdirs
    """
    temp_dir = Path(tempfile.mkdtemp())
    (temp_dir / "data").mkdir(parents=True, exist_ok=True)
    (temp_dir / "outputs").mkdir(parents=True, exist_ok=True)

    yield temp_dir

    shutil.rmtree(temp_dir, ignore_errors=True)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_encoder():
    """Dense 4 -> 3 -> 2 encoder with a leaky hidden layer."""
    return NetworkSpec(
        layers=[
            DenseSpec(in_units=4, out_units=3),
            ActivationSpec(function="leaky_relu", alpha=0.1),
            DenseSpec(in_units=3, out_units=2),
        ],
        input_shape=(4,),
    )


@pytest.fixture
def tiny_decoder(tiny_encoder):
    """Mirror of tiny_encoder ending in a sigmoid."""
    return mirror_decoder(tiny_encoder, ActivationSpec(function="leaky_relu", alpha=0.1))


@pytest.fixture
def tiny_data(rng):
    """40 samples of 4 features in [0, 1]."""
    return rng.uniform(0.0, 1.0, size=(40, 4))
