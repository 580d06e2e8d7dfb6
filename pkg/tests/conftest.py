import pytest
from hypothesis import settings

from specgame import MarketParams

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

# filled by tests/test_acceptance.py, printed at the end of the run
ACCEPTANCE = {}


@pytest.fixture
def p0():
    return MarketParams(u0=10.0, eta=0.5, rho=0.5, s_lo=5.0, s_hi=10.0)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.split()[0][1:])):
        parts = ACCEPTANCE[key]
        failed = [name for name, ok in parts.items() if not ok]
        status = "PASS" if not failed else "FAIL"
        line = f"{status} {key}"
        if failed:
            line += f"  (failing: {', '.join(failed)})"
        terminalreporter.write_line(line)
