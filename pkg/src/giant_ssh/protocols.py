"""Scenario runners: resonant preparation of a gap state, then an adiabatic detuning ramp."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .dynamics import DEFAULT_DT, DEFAULT_STRIDE, Drive, Schedule, TrajectoryRecord, propagate
from .errors import ConfigError, NonAdiabaticError, PreparationError
from .lattice import AtomSpec, LatticeSpec, System
from .spectral import (
    EigenSystem,
    Label,
    ShapeReport,
    classify,
    eigendecompose,
    photon_distribution,
    shape_classify,
)
from .sweep import FINE_GRID, GAP_THRESHOLD, Detuning, detect_crossings, find_crossings, sweep_spectrum


@dataclass(frozen=True)
class Preparation:
    """Resonant drive on ``target_atom`` tuned to gap state ``gap_rank`` (0 = lowest gap state)."""

    strength: float = 0.005
    target_atom: int = 0
    gap_rank: int = 0
    max_duration: float = 5000.0
    min_fidelity: float = 0.95


@dataclass(frozen=True)
class Transfer:
    """Linear ramp of ``detuning`` from ``start`` to ``start + span`` over ``total_time``.

    The target is the gap state at the final detuning whose photon footprint
    is dominated by ``target_atom`` (0-based) when that is set; otherwise the
    gap state of rank ``target_rank``; otherwise the preparation rank.
    """

    detuning: Detuning
    start: float
    span: float
    total_time: float
    target_rank: int | None = None
    target_atom: int | None = None

    def __post_init__(self):
        if self.target_rank is not None and self.target_atom is not None:
            raise ConfigError("choose the transfer target by rank or by atom, not both")


@dataclass(frozen=True)
class Scenario:
    name: str
    lattice: LatticeSpec
    atoms: tuple[AtomSpec, ...]
    preparation: Preparation
    transfer: Transfer
    dt: float = DEFAULT_DT
    stride: int = DEFAULT_STRIDE
    sweep_range: tuple[float, float] | None = None
    sweep_spacing: float = FINE_GRID
    gap_threshold: float = GAP_THRESHOLD
    outputs: tuple[str, ...] = ("spectrum", "sweep", "trajectory")

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        if self.sweep_range is not None:
            object.__setattr__(self, "sweep_range", tuple(float(x) for x in self.sweep_range))

    @property
    def sweep_interval(self) -> tuple[float, float]:
        """Detuning interval of overview sweeps; defaults to the ramp interval."""
        if self.sweep_range is not None:
            return self.sweep_range
        tr = self.transfer
        return tuple(sorted((tr.start, tr.start + tr.span)))

    def sweep_grid(self, spacing: float | None = None) -> np.ndarray:
        lo, hi = self.sweep_interval
        spacing = spacing or self.sweep_spacing
        n = max(2, int(round((hi - lo) / spacing)) + 1)
        return np.linspace(lo, hi, n)

    def run_sweep(self, spacing: float | None = None):
        return sweep_spectrum(self.lattice, self.atoms, self.transfer.detuning, self.sweep_grid(spacing),
                              base_frequencies=[a.omega0 for a in self.atoms])

    @property
    def system(self) -> System:
        return System(self.lattice, self.atoms, include_vacuum=True)

    def frequencies_at(self, detuning_value: float) -> np.ndarray:
        base = [a.omega0 for a in self.atoms]
        return self.transfer.detuning.frequencies(base, detuning_value)

    @property
    def initial_frequencies(self) -> np.ndarray:
        return self.frequencies_at(self.transfer.start)

    @property
    def final_frequencies(self) -> np.ndarray:
        return self.frequencies_at(self.transfer.start + self.transfer.span)

    def transfer_schedule(self, total_time: float | None = None) -> Schedule:
        tr = self.transfer
        base = [a.omega0 for a in self.atoms]
        return Schedule.linear_detuning(base, tr.detuning, tr.start, tr.span, total_time or tr.total_time)

    def with_total_time(self, total_time: float) -> "Scenario":
        return replace(self, transfer=replace(self.transfer, total_time=total_time))


def gap_eigensystem(scenario: Scenario, frequencies) -> EigenSystem:
    one = scenario.system.one_excitation()
    return classify(eigendecompose(one.hamiltonian(frequencies)), scenario.lattice.edges)


def gap_state(scenario: Scenario, frequencies, rank: int) -> tuple[float, np.ndarray]:
    """Energy and vacuum-padded vector of the ``rank``-th gap state (ascending energy)."""
    es = gap_eigensystem(scenario, frequencies)
    idx = es.gap_indices
    if not -len(idx) <= rank < len(idx):
        raise ConfigError(f"gap state rank {rank} requested but only {len(idx)} gap states exist")
    k = idx[rank]
    return float(es.energies[k]), scenario.system.layout.embed(es.state(k))


def shape_of(scenario: Scenario, psi: np.ndarray) -> ShapeReport:
    return shape_classify(photon_distribution(psi, scenario.system.layout), scenario.atoms)


@dataclass
class PreparationResult:
    state: np.ndarray
    t_peak: float
    peak_fidelity: float
    target: np.ndarray
    target_energy: float
    driven_amplitude: float
    trajectory: TrajectoryRecord
    xi: float = 0.0

    @property
    def rabi_estimate(self) -> float:
        """Weak-drive two-level prediction ``pi / (2 xi |C_e|)`` of the peak time."""
        return math.pi / (2 * self.xi * self.driven_amplitude) if self.driven_amplitude > 0 else math.inf


def prepare_initial_state(scenario: Scenario, dt: float | None = None, sample_every: float = 0.5) -> PreparationResult:
    """Drive ``|G,vac>`` resonantly into the chosen gap state and stop at the first fidelity peak.

    Frequencies stay at the start of the transfer ramp.  The drive is switched
    off at the returned ``t_peak``.
    """
    prep = scenario.preparation
    dt = dt or scenario.dt
    system = scenario.system
    freqs = scenario.initial_frequencies
    energy, target = gap_state(scenario, freqs, prep.gap_rank)
    amp = abs(target[system.layout.atom_index(prep.target_atom)])

    if prep.strength * amp > 0:
        horizon = min(math.pi / (prep.strength * amp), prep.max_duration)
    else:
        horizon = prep.max_duration
    drive = Drive(prep.target_atom, prep.strength, energy, t_off=horizon)
    schedule = Schedule.static(freqs, horizon, drive=drive)
    psi0 = np.zeros(system.layout.dim, dtype=complex)
    psi0[0] = 1.0
    stride = max(1, int(round(sample_every / dt)))
    rec = propagate(psi0, system, schedule, dt=dt, stride=stride, references={"f_init": target})
    f = rec.fidelity_series["f_init"]
    k = int(np.argmax(f))
    result = PreparationResult(
        state=rec.states[k],
        t_peak=float(rec.sample_times[k]),
        peak_fidelity=float(f[k]),
        target=target,
        target_energy=energy,
        driven_amplitude=float(amp),
        trajectory=rec,
        xi=prep.strength,
    )
    if result.peak_fidelity < prep.min_fidelity:
        raise PreparationError(
            f"peak fidelity {result.peak_fidelity:.4f} < {prep.min_fidelity} within q*t <= {horizon:.1f}: "
            f"drive too weak/strong or off resonance (xi={prep.strength}, w_d={energy:.6f})"
        )
    return result


@dataclass
class TransferResult:
    trajectory: TrajectoryRecord
    initial: np.ndarray
    target: np.ndarray
    final_fidelity: float
    jump_time: float | None
    jump_detuning: float | None
    shape_before: ShapeReport
    shape_after: ShapeReport
    total_time: float

    def summary(self) -> dict:
        return {
            "final_fidelity": self.final_fidelity,
            "jump_time_q": self.jump_time,
            "jump_detuning_q": self.jump_detuning,
            "shape_before": _shape_dict(self.shape_before),
            "shape_after": _shape_dict(self.shape_after),
            "total_time_q": self.total_time,
        }


def _shape_dict(rep: ShapeReport) -> dict:
    return {
        "dominant_atom": rep.dominant_atom,
        "footprint_probability": rep.footprint_probability,
        "peak_count": rep.peak_count,
        "shape": rep.shape.value,
    }


def gap_state_of_atom(scenario: Scenario, frequencies, atom: int) -> tuple[float, np.ndarray]:
    """Gap state whose photon weight sits mostly in the footprint of ``atom`` (0-based)."""
    es = gap_eigensystem(scenario, frequencies)
    best = None
    for k in es.gap_indices:
        psi = scenario.system.layout.embed(es.state(k))
        rep = shape_of(scenario, psi)
        if rep.dominant_atom == atom + 1 and (best is None or rep.footprint_probability > best[0]):
            best = (rep.footprint_probability, float(es.energies[k]), psi)
    if best is None:
        raise ConfigError(f"no gap state is localized at atom {atom + 1}")
    return best[1], best[2]


def transfer_target(scenario: Scenario) -> np.ndarray:
    tr = scenario.transfer
    freqs = scenario.final_frequencies
    if tr.target_atom is not None:
        return gap_state_of_atom(scenario, freqs, tr.target_atom)[1]
    rank = scenario.preparation.gap_rank if tr.target_rank is None else tr.target_rank
    return gap_state(scenario, freqs, rank)[1]


def first_crossing_time(times: np.ndarray, series: np.ndarray, level: float = 0.5) -> float | None:
    """First time ``series`` reaches ``level``, linearly interpolated between samples."""
    above = np.nonzero(series >= level)[0]
    if len(above) == 0:
        return None
    k = int(above[0])
    if k == 0:
        return float(times[0])
    t0, t1 = times[k - 1], times[k]
    f0, f1 = series[k - 1], series[k]
    return float(t0 + (level - f0) * (t1 - t0) / (f1 - f0))


def run_transfer(
    scenario: Scenario,
    psi_prepared: np.ndarray,
    dt: float | None = None,
    stride: int | None = None,
    check: bool = True,
) -> TransferResult:
    """Evolve the prepared state through the linear detuning ramp.

    Records ``f_init`` against the initial gap eigenstate and ``f_target``
    against the target gap eigenstate at the final detuning.
    """
    tr = scenario.transfer
    prep = scenario.preparation
    dt = dt or scenario.dt
    stride = stride or scenario.stride
    _, initial = gap_state(scenario, scenario.initial_frequencies, prep.gap_rank)
    target = transfer_target(scenario)

    schedule = scenario.transfer_schedule()
    rec = propagate(
        np.asarray(psi_prepared, dtype=complex), scenario.system, schedule, dt=dt, stride=stride,
        references={"f_init": initial, "f_target": target},
    )
    f_t = rec.fidelity_series["f_target"]
    jump = first_crossing_time(rec.sample_times, f_t, 0.5)
    jump_det = None if jump is None else tr.start + tr.span * jump / tr.total_time
    result = TransferResult(
        trajectory=rec,
        initial=initial,
        target=target,
        final_fidelity=float(f_t[-1]),
        jump_time=jump,
        jump_detuning=jump_det,
        shape_before=shape_of(scenario, initial),
        shape_after=shape_of(scenario, target),
        total_time=tr.total_time,
    )
    if check and result.final_fidelity < 0.9:
        gap = ramp_min_separation(scenario)
        # Landau-Zener: the loss exponent grows linearly with the ramp time
        loss = max(1.0 - result.final_fidelity, 1e-12)
        suggested = tr.total_time * math.log(100.0) / max(-math.log(loss), 1e-3)
        raise NonAdiabaticError(
            f"final target fidelity {result.final_fidelity:.4f} < 0.9; narrowest gap {gap:.3e} q; "
            f"try q*T >= {suggested:.3g}",
            final_fidelity=result.final_fidelity, min_separation=gap, suggested_T=suggested,
        )
    return result


def ramp_sweep(scenario: Scenario, spacing: float = FINE_GRID):
    """One-excitation spectrum sweep over the ramp interval of a scenario."""
    tr = scenario.transfer
    lo, hi = sorted((tr.start, tr.start + tr.span))
    n = max(3, int(round((hi - lo) / spacing)) + 1)
    grid = np.linspace(lo, hi, n)
    return sweep_spectrum(scenario.lattice, scenario.atoms, tr.detuning, grid,
                          base_frequencies=[a.omega0 for a in scenario.atoms])


def ramp_min_separation(scenario: Scenario) -> float:
    sr = ramp_sweep(scenario)
    gaps = sr.gap_branches
    seps = [detect_crossings(sr, (a, b)).min_separation for a, b in zip(gaps[:-1], gaps[1:])]
    return float(min(seps)) if seps else math.inf


def ramp_crossings(scenario: Scenario, spacing: float = FINE_GRID):
    return find_crossings(ramp_sweep(scenario, spacing), scenario.gap_threshold)


def two_atom_transfer(scenario: Scenario, psi_prepared: np.ndarray, **kw) -> TransferResult:
    if len(scenario.atoms) != 2:
        raise ConfigError("two_atom_transfer needs exactly two atoms")
    return run_transfer(scenario, psi_prepared, **kw)


def three_atom_transfer(scenario: Scenario, psi_prepared: np.ndarray, **kw) -> TransferResult:
    if len(scenario.atoms) != 3:
        raise ConfigError("three_atom_transfer needs exactly three atoms")
    return run_transfer(scenario, psi_prepared, **kw)


def gap_manifold_leakage(scenario: Scenario, rec: TrajectoryRecord, every: int = 1) -> np.ndarray:
    """Population outside the instantaneous gap states (band and bound states) at each sample.

    The vacuum amplitude is excluded; it is not part of the one-excitation manifold.
    """
    layout = scenario.system.layout
    schedule = scenario.transfer_schedule()
    one = scenario.system.one_excitation()
    out = []
    for k in range(0, len(rec.sample_times), every):
        freqs = schedule.frequencies(rec.sample_times[k])
        es = classify(eigendecompose(one.hamiltonian(freqs)), scenario.lattice.edges)
        amps = es.vectors.conj().T @ rec.states[k][layout.offset:]
        mask = np.array([lab != Label.GAP for lab in es.labels])
        out.append(float(np.sum(np.abs(amps[mask]) ** 2)))
    return np.array(out)


@dataclass
class ScenarioRun:
    scenario: Scenario
    preparation: PreparationResult
    transfer: TransferResult
    crossings: list = field(default_factory=list)


def run_scenario(scenario: Scenario) -> ScenarioRun:
    """Preparation followed by the ramp, plus the crossings found along the ramp."""
    prep = prepare_initial_state(scenario)
    result = run_transfer(scenario, prep.state)
    return ScenarioRun(scenario, prep, result, ramp_crossings(scenario))
