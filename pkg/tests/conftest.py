import random

import pytest

from ellsix.core import EllipticParams


@pytest.fixture
def P():
    """A fixed generic parameter pair used across the unit tests."""
    return EllipticParams(0.12 + 0.05j, 0.55 + 0.25j)


@pytest.fixture
def P0():
    """The trigonometric degeneration p = 0."""
    return EllipticParams(0, 0.6 + 0.2j)


@pytest.fixture
def rng():
    return random.Random(20240611)


def rc(rng, lo=0.5, hi=2.0):
    """Random complex number in an annulus, away from the unit-circle resonances."""
    import cmath
    return cmath.rect(rng.uniform(lo, hi), rng.uniform(-3.1, 3.1))


def pytest_terminal_summary(terminalreporter):
    from tests.test_acceptance import RESULTS
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
