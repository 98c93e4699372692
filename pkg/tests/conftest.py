"""Shared fixtures."""

import numpy as np
import pytest

from src.core import registry  # noqa: F401
from src.physics.bloch import SequenceTiming
from src.physics.profiles import Constant, FieldProfile, Linear


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def random_unit_vectors(rng):
    def draw(count):
        v = rng.normal(size=(count, 3))
        return v / np.linalg.norm(v, axis=1, keepdims=True)
    return draw


@pytest.fixture
def short_timing():
    return SequenceTiming(te_ratio=15.0, echo_count=40)


@pytest.fixture
def static_profile():
    return FieldProfile(Constant(0.7), Constant(1.0))


@pytest.fixture
def ramp_profile():
    return FieldProfile(Linear(1e-3, -0.5), Constant(1.0))


@pytest.fixture
def isolated_output(tmp_path, monkeypatch):
    """Output directory with the environment default cleared."""
    monkeypatch.delenv("CPMG_OUTPUT_DIR", raising=False)
    return tmp_path / "out"
