"""Pytest configuration and shared fixtures

Fixtures provide small subspaces, noisy observations and a fast solver
configuration so that individual tests stay quick. Settings are re-read
from a clean environment for every test.
"""

import logging
from collections.abc import Iterator

import numpy as np
import pytest

from sisrec.config.settings import reset_settings
from sisrec.core.signal import ObservationWindow, SisSpec, add_noise, random_member
from sisrec.services.solver import SolverConfig


@pytest.fixture(autouse=True)
def clean_settings(monkeypatch: pytest.MonkeyPatch) -> Iterator[None]:
    """
    Drop cached settings and SISREC_ variables around each test.

    Handlers installed on the package logger during the test (for example by
    the CLI) are removed afterwards.
    """
    import os

    for key in list(os.environ):
        if key.startswith("SISREC_"):
            monkeypatch.delenv(key, raising=False)
    package_logger = logging.getLogger("sisrec")
    handlers = list(package_logger.handlers)
    level = package_logger.level
    reset_settings()
    yield
    reset_settings()
    for handler in list(package_logger.handlers):
        if handler not in handlers:
            package_logger.removeHandler(handler)
    package_logger.setLevel(level)


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator for reproducible draws."""
    return np.random.default_rng(1234)


@pytest.fixture
def single_tone() -> SisSpec:
    """One undamped harmonic at frequency 0.3 rad/sample."""
    return SisSpec.from_roots([np.exp(0.3j)])


@pytest.fixture
def two_tones() -> SisSpec:
    """Two well separated harmonics on the unit circle."""
    return SisSpec.from_roots([np.exp(0.4j), np.exp(-1.7j)])


@pytest.fixture
def double_root() -> SisSpec:
    """Linear trend: root 1 with multiplicity 2."""
    return SisSpec.from_roots([(1.0, 2)])


@pytest.fixture
def fast_solver() -> SolverConfig:
    """Solver settings for unit tests."""
    return SolverConfig(max_iter=300, tol=1e-9, lipschitz_iters=20)


@pytest.fixture
def clean_observation(two_tones: SisSpec, rng: np.random.Generator) -> ObservationWindow:
    """Noise-free observations of a two-tone signal on [-40, 40]."""
    x = random_member(two_tones, -40, 40, rng)
    return add_noise(x, 40, 0.0, seed=7)


@pytest.fixture
def noisy_observation(two_tones: SisSpec, rng: np.random.Generator) -> ObservationWindow:
    """Two-tone signal with unit windowed norm per sample in noise of level 0.5."""
    x = random_member(two_tones, -40, 40, rng)
    x = x.scaled(np.sqrt(81) / np.linalg.norm(x.values))
    return add_noise(x, 40, 0.5, seed=7)
