import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from giant_ssh.dynamics import (
    Drive,
    Schedule,
    generator_at,
    oracle_propagate,
    propagate,
)
from giant_ssh.errors import ConfigError, NormDriftError
from giant_ssh.lattice import AtomSpec, LatticeSpec, System
from giant_ssh.protocols import gap_state
from giant_ssh.spectral import check_hermitian, fidelity
from giant_ssh.sweep import Detuning


@pytest.fixture(scope="module")
def small():
    return System(LatticeSpec(L=10), (AtomSpec(2, 4, omega0=0.4), AtomSpec(7, 8, omega0=-0.2)))


def _vacuum(system):
    psi = np.zeros(system.layout.dim, complex)
    psi[0] = 1.0
    return psi


def _mixed(system):
    psi = np.zeros(system.layout.dim, complex)
    psi[system.layout.atom_index(0)] = psi[system.layout.site_index("B", 2)] = math.sqrt(0.5)
    return psi


def test_ramp_midpoint_detuning(fig3):
    sched = fig3.transfer_schedule()
    f = sched.frequencies(sched.total_time / 2)
    assert fig3.transfer.detuning.value(f) == pytest.approx(0.7)
    np.testing.assert_allclose(sched.frequencies([0, sched.total_time])[:, 1], [-0.2, -0.4])


def test_generator_drive_window(small):
    sched = Schedule.static([0.4, -0.2], 10.0, Drive(0, 0.01, 0.3, 5.0))
    h_on = generator_at(small, sched, 2.0)
    assert h_on[1, 0] == pytest.approx(0.01 * np.exp(-0.6j))
    assert h_on[0, 1] == pytest.approx(np.conj(h_on[1, 0]))
    h_off = generator_at(small, sched, 7.0)
    assert h_off[1, 0] == 0 and h_off[0, 1] == 0
    assert check_hermitian(h_on) == 0.0


def test_schedule_validation():
    with pytest.raises(ConfigError):
        Schedule.static([0.1], 0.0)
    with pytest.raises(ConfigError):
        Schedule.static([0.1], 10.0, Drive(0, 0.01, 0.0, 20.0))
    with pytest.raises(ConfigError):
        Schedule(10.0, (0.1, 0.2), (0.0,))


def test_breakpoints_include_drive_switch_off():
    sched = Schedule.static([0.1], 10.0, Drive(0, 0.01, 0.0, 4.0))
    assert sched.breakpoints() == [0.0, 4.0, 10.0]


def test_stationary_gap_state(fig3):
    _, psi = gap_state(fig3, fig3.initial_frequencies, 0)
    rec = propagate(psi, fig3.system, Schedule.static(fig3.initial_frequencies, 200.0), stride=200,
                    references={"f_init": psi})
    assert np.all(rec.fidelity_series["f_init"] > 1 - 1e-10)


def test_rejects_bad_inputs(small):
    sched = Schedule.static([0.4, -0.2], 1.0)
    with pytest.raises(ConfigError):
        propagate(np.zeros(5), small, sched)
    with pytest.raises(ConfigError):
        propagate(2 * _vacuum(small), small, sched)
    with pytest.raises(ConfigError):
        propagate(_vacuum(small), small, sched, dt=0.02)
    with pytest.raises(ConfigError):
        oracle_propagate(_vacuum(small), small, sched, segment_dt=0.1)


def test_drive_needs_vacuum_basis(small):
    sched = Schedule.static([0.4, -0.2], 1.0, Drive(0, 0.01, 0.0, 1.0))
    psi = np.zeros(small.layout.dim - 1, complex)
    psi[0] = 1.0
    with pytest.raises(ConfigError):
        propagate(psi, small.one_excitation(), sched)


def test_norm_abort_path(small, monkeypatch):
    import giant_ssh.dynamics as dyn

    monkeypatch.setattr(dyn, "NORM_ABORT", 1e-300)
    with pytest.raises(NormDriftError):
        dyn.propagate(_mixed(small), small, Schedule.static([0.4, -0.2], 5.0), stride=10)


def test_sampling_layout(small):
    sched = Schedule.static([0.4, -0.2], 10.0, Drive(0, 0.005, 0.1, 3.0))
    rec = propagate(_vacuum(small), small, sched, dt=0.01, stride=100)
    assert rec.sample_times[0] == 0 and rec.sample_times[-1] == pytest.approx(10.0)
    assert 3.0 in np.round(rec.sample_times, 12)
    assert np.all(np.diff(rec.sample_times) > 0)
    assert rec.states.shape == (len(rec.sample_times), small.layout.dim)
    assert rec.schedule_trace.shape == (len(rec.sample_times), 2)
    total = rec.site_probability_frames.sum(1) + rec.atom_probabilities.sum(1) + rec.vacuum_probabilities
    np.testing.assert_allclose(total, rec.norms ** 2, atol=1e-12)


@given(st.floats(5.0, 40.0), st.floats(-0.2, 0.2))
@settings(max_examples=8, deadline=None)
def test_rk4_matches_oracle_on_short_ramps(T, span):
    system = System(LatticeSpec(L=10), (AtomSpec(2, 4, omega0=0.4), AtomSpec(7, 8, omega0=-0.2)))
    sched = Schedule.linear_detuning([0.4, 0.4], Detuning(1, 0, -1), 0.6, span, T)
    psi = _mixed(system)
    a = propagate(psi, system, sched, dt=0.005).final_state
    b = oracle_propagate(psi, system, sched, segment_dt=0.005)
    assert fidelity(a, b) > 1 - 1e-8
    assert abs(np.linalg.norm(b) - 1) < 1e-12


def test_driven_oracle_agrees(small):
    drive = Drive(0, 0.02, 0.09, 30.0)
    sched = Schedule.static([0.4, -0.2], 40.0, drive)
    a = propagate(_vacuum(small), small, sched).final_state
    b = oracle_propagate(_vacuum(small), small, sched, segment_dt=0.005)
    assert fidelity(a, b) > 1 - 1e-9


def test_fourth_order_convergence(small):
    sched = Schedule.linear_detuning([0.4, 0.4], Detuning(1, 0, -1), 0.6, 0.2, 20.0)
    psi = _mixed(small)
    ref = oracle_propagate(psi, small, sched, segment_dt=0.001)
    errs = [np.linalg.norm(propagate(psi, small, sched, dt=dt).final_state - ref) for dt in (0.01, 0.005)]
    assert errs[0] / errs[1] == pytest.approx(16.0, rel=0.1)


def test_norm_drift_bound(fig3_transfer, fig3_prepared):
    assert fig3_transfer.trajectory.max_norm_drift <= 1e-8
    assert fig3_prepared.trajectory.max_norm_drift <= 1e-8
