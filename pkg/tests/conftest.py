import numpy as np
import pytest

from jqfsim.model import TransmonSpec, build_model
from jqfsim.units import ghz, mhz


def fig2_specs(dq_levels=4, jqf_levels=2, alpha_mhz=-300.0):
    dq = TransmonSpec(ghz(5.0), mhz(alpha_mhz), mhz(0.002), 0.0, dq_levels)
    jqf = TransmonSpec(ghz(5.0), mhz(alpha_mhz), mhz(100.0), np.pi, jqf_levels)
    return [dq, jqf]


@pytest.fixture(scope="session")
def fig2_model():
    return build_model(fig2_specs())


def random_density(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def record_criterion(label, ok, detail):
    line = f"{label}: {'PASS' if ok else 'FAIL'} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
