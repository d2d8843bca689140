import math

import numpy as np
import pytest

from defectwalk.walk import LatticeWindow, WaveFunction, validate_params

S2 = 1 / math.sqrt(2)


@pytest.fixture
def pstar():
    return validate_params([0.6], [0.8], [[S2, S2]])


@pytest.fixture
def h0():
    return validate_params([0.0], [1.0], [[S2, S2]])


@pytest.fixture
def params2d():
    return validate_params([0.6, 0.6], [0.8, 0.8], [[0.5, 0.5], [0.5, 0.5]])


@pytest.fixture
def flat():
    # mu = 0: Phi has no second component
    return validate_params([0.6], [0.8], [[1.0, 0.0]])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_state(rng, window, *, normalize=False):
    shape = (*window.shape, window.n, 2)
    amps = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    if normalize:
        amps /= np.linalg.norm(amps)
    return WaveFunction(window, amps)


def random_params(rng, n=1):
    p = rng.uniform(-0.95, 0.95, size=n)
    q = np.sqrt(1 - p**2) * np.exp(1j * rng.uniform(0, 2 * np.pi, size=n))
    phi = rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2))
    phi /= np.linalg.norm(phi)
    return validate_params(p, q, phi)


def delta(n, site, vec, radius=0):
    return WaveFunction.delta(LatticeWindow.zero_padded(radius, n), site, vec)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
