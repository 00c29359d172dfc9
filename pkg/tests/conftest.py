from __future__ import annotations

import pytest

import fleetgen

# One line per acceptance check, printed after the run so the verdicts are
# visible even with output capture on.
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def corner_fleet(tmp_path_factory):
    fleet_dir = tmp_path_factory.mktemp("corner_fleet")
    return fleetgen.write_fleet(fleet_dir, fleetgen.corner_profiles())


@pytest.fixture(scope="session")
def grit_fleet(tmp_path_factory):
    fleet_dir = tmp_path_factory.mktemp("grit_fleet")
    return fleetgen.write_fleet(fleet_dir, [fleetgen.grit_profile()])


@pytest.fixture(scope="session")
def drift_fleet(tmp_path_factory):
    fleet_dir = tmp_path_factory.mktemp("drift_fleet")
    return fleetgen.write_fleet(fleet_dir, fleetgen.drift_profiles())


@pytest.fixture(scope="session")
def acceptance_log():
    def record(number: int, ok: bool, detail: str) -> None:
        verdict = "PASS" if ok else "FAIL"
        ACCEPTANCE_LINES.append(f"criterion {number:2d}: {verdict}  {detail}")
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
