import numpy as np
import pytest

from helpers import FunctionOracle


@pytest.fixture
def box_oracle():
    """YES for "me" inside [0, 1]^2, YES for "victim" inside [3, 4] x [0, 1]."""

    def accept(claim, x):
        if claim == "me":
            return bool(np.all((x >= 0) & (x <= 1)))
        if claim == "victim":
            return bool(3 <= x[0] <= 4 and 0 <= x[1] <= 1)
        return False

    return FunctionOracle(accept, k=2, bounds=[[-10, 10], [-10, 10]])


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("tests.test_acceptance") or sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
