from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

SQRT_4PI = math.sqrt(4.0 * math.pi)


def random_dirs(rng, n):
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1)[:, None]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def sphere_table_24():
    """BIE far-field table of the unit sound-soft ball at lambda = 2, order 24."""
    from starscatter.forward import compute_far_field_table
    from starscatter.geometry import RadialShape

    return compute_far_field_table(RadialShape.sphere(), [2.0], 24)


@pytest.fixture(scope="session")
def bumpy_shape():
    from starscatter.geometry import RadialShape

    return RadialShape.from_terms({(0, 0): SQRT_4PI, (2, 0): 0.3, (3, 1): 0.15, (1, -1): 0.1})


# one line per acceptance criterion, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
