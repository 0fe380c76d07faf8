import os

import pytest
from hypothesis import HealthCheck, settings

from mas_lab.elliptic import EllipticProblem
from mas_lab.exterior import ExteriorCircularProblem
from mas_lab.interior import InteriorCircularProblem

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def fig2():
    return ExteriorCircularProblem(rho_cyl=8.0, rho_fil=10.0, rho_aux=5.5, N=81, scheme="bounded")


@pytest.fixture
def fig2_trad(fig2):
    return fig2.with_(scheme="traditional")


@pytest.fixture
def fig3():
    return EllipticProblem(a=6.0, b=3.0, rho_fil=7.5, a_aux=5.2222, N=80, scheme="traditional")


@pytest.fixture
def fig4():
    return InteriorCircularProblem(rho_cyl=5.0, rho_fil=4.0, rho_aux=6.5, N=59)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES = {}


@pytest.fixture
def criterion():
    def record(number, title, ok, detail):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}: {title}; {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
