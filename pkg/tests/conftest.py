import math

import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=30)
settings.load_profile("default")


@pytest.fixture(scope="session")
def interval_m2():
    from widom import Interval, build_equilibrium
    return build_equilibrium(Interval(-2.0, 2.0), 512)


@pytest.fixture(scope="session")
def arc_quarter():
    from widom import CircularArc, build_equilibrium
    return build_equilibrium(CircularArc(math.pi / 2), 512)


# one summary line per acceptance criterion, printed at the end of the run
ACCEPTANCE = {}


@pytest.fixture
def criterion():
    def record(number, title, checks):
        """checks: iterable of (label, passed, detail)."""
        checks = list(checks)
        failing = [c for c in checks if not c[1]]
        status = "PASS" if not failing else "FAIL"
        line = f"criterion {number:2d}: {status}  {title}  ({len(checks) - len(failing)}/{len(checks)} checks)"
        ACCEPTANCE[number] = line
        print(line)
        assert not failing, "; ".join(f"{label}: {detail}" for label, _, detail in failing)
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
