import os
import time

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("ci", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# one line per acceptance criterion, printed at the end of the run
CRITERIA = {}


def record(number, ok, detail, seconds=None):
    tail = f" ({seconds:.1f}s)" if seconds is not None else ""
    CRITERIA[number] = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}{tail}"
    print(CRITERIA[number])


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        terminalreporter.write_line(CRITERIA[k])


@pytest.fixture(scope="session")
def holder_solution():
    """Disc with g = |theta|^(1/2) on a 256 x 256 grid, order-16 stencil."""
    from lgobstacle.cli import DEFAULTS, build_problem
    from lgobstacle.solver import solve

    spec = dict(DEFAULTS)
    spec.update(
        {
            "domain": {"kind": "disc", "radius": 1.0, "h": 2 / 256, "collar": 3},
            "boundary": {"kind": "holder", "alpha": 0.5, "phase": 0.0},
            "stencil": 16,
        }
    )
    d, st, g, psi, lad = build_problem(spec)
    t = time.perf_counter()
    sol = solve(d, g, psi, st, lad)
    sol.domain._cache["solve_seconds"] = time.perf_counter() - t
    return sol


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
