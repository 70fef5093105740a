import pytest

from lrsinr.scenario import ScenarioConfig, build_covariance

ACCEPTANCE_LINES: list = []


@pytest.fixture(scope="session")
def jam_cfg():
    """Three jammers at -20/0/20 deg, powers 6/2/1, 10 dB, 100 sensors."""
    return ScenarioConfig(m=100, jammer_aoas_deg=(-20.0, 0.0, 20.0), jammer_powers=(6.0, 2.0, 1.0))


@pytest.fixture(scope="session")
def jam_model(jam_cfg):
    return build_covariance(jam_cfg)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
