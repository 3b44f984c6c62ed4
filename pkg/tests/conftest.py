import numpy as np
import pytest

from esla import default_interpolants
from esla.lgm import GlmModel


@pytest.fixture(scope="session")
def interpolants():
    return default_interpolants()


@pytest.fixture(scope="session")
def bernoulli_model():
    rng = np.random.default_rng(11)
    x = rng.standard_normal(10)
    y = (rng.random(10) < 1.0 / (1.0 + np.exp(-(0.5 + x)))).astype(float)
    return GlmModel("bernoulli", y, x, 1.0)


@pytest.fixture(scope="session")
def poisson_model():
    rng = np.random.default_rng(12)
    x = rng.standard_normal(8)
    y = rng.poisson(np.exp(0.5 + x)).astype(float)
    return GlmModel("poisson", y, x, 1.0)


@pytest.fixture(scope="session")
def gaussian_model():
    rng = np.random.default_rng(13)
    x = rng.standard_normal(6)
    y = 0.5 + x + 0.7 * rng.standard_normal(6)
    return GlmModel("gaussian", y, x, 0.5, noise_precision=2.0)


_REPORT = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line per acceptance criterion and print it."""
    lines = request.config.stash.setdefault(_REPORT, [])

    def record(number, passed, detail):
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        lines.append((number, line))
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_REPORT, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
