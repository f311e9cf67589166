"""
Pytest configuration and fixtures for delayed-choice simulator tests
"""

import json
import os
import shutil
import tempfile

import numpy as np
import pytest

from delayedchoice.config import FORMAT_ENV_VAR
from delayedchoice.eraser import CircuitMode, EraserConfig, build_state
from delayedchoice.qcore import singlet_state
from delayedchoice.wheeler import WheelerConfig, symmetric_grid


@pytest.fixture
def temp_config_dir():
    """Create a temporary directory for config and output files"""
    temp_dir = tempfile.mkdtemp()
    yield temp_dir
    if os.path.exists(temp_dir):
        shutil.rmtree(temp_dir)


@pytest.fixture
def write_config(temp_config_dir):
    """Write a JSON config file and return its path"""

    def _write(data, name="config.json"):
        path = os.path.join(temp_config_dir, name)
        with open(path, "w") as f:
            if isinstance(data, str):
                f.write(data)
            else:
                json.dump(data, f)
        return path

    return _write


@pytest.fixture
def singlet():
    """The two-qubit singlet"""
    return singlet_state()


@pytest.fixture
def eraser_config():
    """kd = 2 pi on the default 181-bin grid over [-pi/3, pi/3]"""
    return EraserConfig.from_bins(k=1.0, d=2 * np.pi, theta_bins=181)


@pytest.fixture
def unitary_eraser():
    return build_state(CircuitMode.UNITARY)


@pytest.fixture
def paper_eraser():
    return build_state(CircuitMode.PAPER)


@pytest.fixture
def wheeler_config():
    """Slits 10 wavelengths apart, screen far away, 1e-3 rad grid"""
    return WheelerConfig.from_geometry(
        k=2 * np.pi, d=10.0, screen_distance=1.0e5, theta_grid=symmetric_grid(2001, 1.0)
    )


@pytest.fixture
def telescope_config():
    """Telescope placed so the inverse-square weights give (0.2, 0.8)"""
    return WheelerConfig(
        k=2 * np.pi,
        r1=(0.0, 0.5),
        r2=(0.0, -0.5),
        screen_distance=10.0,
        theta_grid=symmetric_grid(11, 0.5),
        telescope_aim=(1 / np.sqrt(3), -0.5),
        acceptance_halfwidth=0.1,
    )


@pytest.fixture(autouse=True)
def setup_test_env():
    """Keep the output-format environment override out of the tests"""
    original = os.environ.pop(FORMAT_ENV_VAR, None)

    yield

    os.environ.pop(FORMAT_ENV_VAR, None)
    if original is not None:
        os.environ[FORMAT_ENV_VAR] = original
