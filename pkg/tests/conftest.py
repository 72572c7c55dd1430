"""Shared fixtures.  Long dynamics runs are session-scoped so each happens once."""

import numpy as np
import pytest

from giant_ssh.presets import preset
from giant_ssh.protocols import prepare_initial_state, ramp_crossings, run_transfer

ACCEPTANCE_LINES: list[str] = []


def report(criterion: str, ok: bool, detail: str) -> None:
    """Record one acceptance line; the lines are printed again in the terminal summary."""
    line = f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def fig2():
    return preset("fig2")


@pytest.fixture(scope="session")
def fig3():
    return preset("fig3")


@pytest.fixture(scope="session")
def fig4():
    return preset("fig4")


@pytest.fixture(scope="session")
def fig5():
    return preset("fig5")


@pytest.fixture(scope="session")
def fig3_prepared(fig3):
    return prepare_initial_state(fig3)


@pytest.fixture(scope="session")
def fig3_transfer(fig3, fig3_prepared):
    return run_transfer(fig3, fig3_prepared.state, check=False)


@pytest.fixture(scope="session")
def fig3_crossings(fig3):
    return ramp_crossings(fig3)


@pytest.fixture(scope="session")
def fig5_prepared(fig5):
    return prepare_initial_state(fig5)


@pytest.fixture(scope="session")
def fig5_transfer(fig5, fig5_prepared):
    return run_transfer(fig5, fig5_prepared.state, check=False)


@pytest.fixture(scope="session")
def fig3_T_scan(fig3, fig3_prepared, fig3_transfer):
    """Final target fidelity for T in {T0/4, T0/2, T0, 2 T0}."""
    T0 = fig3.transfer.total_time
    finals = {}
    for factor in (0.25, 0.5, 2.0):
        sc = fig3.with_total_time(factor * T0)
        finals[factor] = run_transfer(sc, fig3_prepared.state, check=False, stride=10 ** 6).final_fidelity
    finals[1.0] = fig3_transfer.final_fidelity
    return dict(sorted(finals.items()))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
