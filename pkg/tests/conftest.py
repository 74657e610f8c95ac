import pytest

from becgw.mode_dynamics import BecConfig
from becgw.sensitivity import MeasurementPlan

_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LINES] = []


@pytest.fixture
def acceptance(request):
    """``report(criterion, ok, detail)`` prints one PASS/FAIL line and keeps it for the summary."""
    lines = request.config.stash[_LINES]

    def report(criterion, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
        lines.append(line)
        print(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def bec():
    """Condensate from the worked example: m = 1e-25 kg, n = 7e20 m^-3, c_s = 1.2 cm/s, L = 1 mm."""
    return BecConfig(atom_mass=1e-25, number_density=7e20, sound_speed=1.2e-2, box_length=1e-3)


@pytest.fixture
def plan():
    return MeasurementPlan(tau=1e-3, t_obs=1e6)
