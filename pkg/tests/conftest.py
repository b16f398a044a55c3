import math

import pytest
from hypothesis import HealthCheck, settings

from lee2d.geometry import Manifold

settings.register_profile(
    "ci", derandomize=True, deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


GEOMETRIES = {
    "plane": Manifold.plane(),
    "torus": Manifold.torus(2.0, 3.0),
    "sphere": Manifold.sphere(1.0),
    "hyperbolic": Manifold.hyperbolic(1.0),
}


@pytest.fixture(params=sorted(GEOMETRIES))
def manifold(request):
    return GEOMETRIES[request.param]


def plane_kernel(d, s, m):
    t = s / (2.0 * m)
    return math.exp(-d * d / (4.0 * t)) / (4.0 * math.pi * t)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict = {}


def record_acceptance(number: int, passed: bool, detail: str, elapsed: float, budget: float | None):
    timing = f"{elapsed:.2f}s" + (f" (budget {budget:g}s)" if budget else "")
    line = f"ACCEPTANCE {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}  [{timing}]"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
