"""Time evolution under ramped atomic frequencies and a windowed coherent drive.

Convention: ``i d/dt |psi> = H(t) |psi>`` with the drive entry
``<e_target|H|G,vac> = xi * exp(-i w_d t)`` while ``0 <= t <= t_off``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numba
import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, NormDriftError
from .lattice import System
from .spectral import check_hermitian, jacobi_inplace

NORM_ABORT = 1e-6
DEFAULT_DT = 0.005
DEFAULT_STRIDE = 1000


@dataclass(frozen=True)
class Drive:
    target_atom: int  # 0-based
    strength: float
    frequency: float
    t_off: float


@dataclass(frozen=True)
class Schedule:
    """Atom frequencies ``omega_i(t) = start_i + slope_i * t`` on ``[0, total_time]`` and an optional drive."""

    total_time: float
    start: tuple[float, ...]
    slope: tuple[float, ...] = ()
    drive: Drive | None = None

    def __post_init__(self):
        object.__setattr__(self, "start", tuple(float(x) for x in self.start))
        slope = tuple(float(x) for x in self.slope) or (0.0,) * len(self.start)
        object.__setattr__(self, "slope", slope)
        if len(self.slope) != len(self.start):
            raise ConfigError("one slope per atom is required")
        if not self.total_time > 0:
            raise ConfigError(f"total_time must be positive, got {self.total_time!r}")
        if self.drive is not None and not 0 <= self.drive.t_off <= self.total_time:
            raise ConfigError("drive window must end inside [0, total_time]")

    @classmethod
    def static(cls, frequencies: Sequence[float], total_time: float, drive: Drive | None = None) -> "Schedule":
        return cls(total_time, tuple(frequencies), drive=drive)

    @classmethod
    def linear_detuning(cls, base: Sequence[float], detuning, start: float, span: float,
                        total_time: float) -> "Schedule":
        """Sweep ``detuning`` (a :class:`~giant_ssh.sweep.Detuning`) from ``start`` to ``start + span``."""
        freqs = detuning.frequencies(base, start)
        slope = np.zeros(len(freqs))
        slope[detuning.swept] = detuning.sign * span / total_time
        return cls(total_time, tuple(freqs), tuple(slope))

    def frequencies(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.asarray(self.start) + np.multiply.outer(t, np.asarray(self.slope))

    def breakpoints(self) -> list[float]:
        points = [0.0, float(self.total_time)]
        if self.drive is not None and 0 < self.drive.t_off < self.total_time:
            points.insert(1, float(self.drive.t_off))
        return points

    def check_in_gap(self, gap_half_width: float) -> list[str]:
        problems = []
        for i, (a, b) in enumerate(zip(self.frequencies(0.0), self.frequencies(self.total_time))):
            if max(abs(a), abs(b)) >= gap_half_width:
                problems.append(f"atom {i + 1} frequency ramp {a:.4g} -> {b:.4g} leaves the band gap")
        return problems


def _require_drive_basis(system: System, schedule: Schedule) -> None:
    if schedule.drive is not None:
        if not system.include_vacuum:
            raise ConfigError("a drive needs the vacuum state |G,vac> in the basis")
        if not 0 <= schedule.drive.target_atom < system.N:
            raise ConfigError(f"drive target atom {schedule.drive.target_atom + 1} does not exist")
    if len(schedule.start) != system.N:
        raise ConfigError(f"schedule has {len(schedule.start)} frequencies for {system.N} atoms")


def generator_at(system: System, schedule: Schedule, t: float, drive_on: bool | None = None) -> np.ndarray:
    """Hamiltonian at time ``t``; ``drive_on`` overrides the window test at its edge."""
    _require_drive_basis(system, schedule)
    h = system.hamiltonian(schedule.frequencies(t)).astype(complex)
    drive = schedule.drive
    if drive is not None:
        if drive_on is None:
            drive_on = 0.0 <= t <= drive.t_off
        if drive_on:
            ai = system.layout.atom_index(drive.target_atom)
            val = drive.strength * np.exp(-1j * drive.frequency * t)
            h[ai, 0] += val
            h[0, ai] += np.conj(val)
    return h


@dataclass
class TrajectoryRecord:
    sample_times: np.ndarray
    states: np.ndarray
    norms: np.ndarray
    schedule_trace: np.ndarray
    layout: object
    fidelity_series: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.states) ** 2

    @property
    def site_probability_frames(self) -> np.ndarray:
        return self.probabilities[:, self.layout.photon_slice]

    @property
    def atom_probabilities(self) -> np.ndarray:
        return self.probabilities[:, self.layout.atom_slice]

    @property
    def vacuum_probabilities(self) -> np.ndarray:
        if not self.layout.include_vacuum:
            return np.zeros(len(self.sample_times))
        return self.probabilities[:, 0]

    @property
    def max_norm_drift(self) -> float:
        return float(np.max(np.abs(self.norms - 1.0)))

    def add_reference(self, name: str, ref: np.ndarray) -> np.ndarray:
        series = np.abs(self.states @ np.conj(ref)) ** 2
        self.fidelity_series[name] = series
        return series


# --- kernels -----------------------------------------------------------------


@numba.njit(cache=True)
def _apply_h(t, psi, data, indices, indptr, atom_idx, w0, slope, drive_on, tgt, vac, xi, wd, out):
    n = psi.shape[0]
    for r in range(n):
        acc = 0j
        for k in range(indptr[r], indptr[r + 1]):
            acc += data[k] * psi[indices[k]]
        out[r] = acc
    for j in range(atom_idx.shape[0]):
        a = atom_idx[j]
        out[a] += (w0[j] + slope[j] * t) * psi[a]
    if drive_on:
        phase = complex(math.cos(wd * t), -math.sin(wd * t))
        out[tgt] += xi * phase * psi[vac]
        out[vac] += xi * phase.conjugate() * psi[tgt]
    for r in range(n):
        out[r] = -1j * out[r]


@numba.njit(cache=True)
def _rk4_segment(psi, t0, dt, n_steps, stride, data, indices, indptr, atom_idx, w0, slope,
                 drive_on, tgt, vac, xi, wd, out_states, out_times, out_start, abort_tol):
    n = psi.shape[0]
    k1 = np.empty(n, np.complex128)
    k2 = np.empty(n, np.complex128)
    k3 = np.empty(n, np.complex128)
    k4 = np.empty(n, np.complex128)
    tmp = np.empty(n, np.complex128)
    y = psi.copy()
    slot = out_start
    half = 0.5 * dt
    for step in range(1, n_steps + 1):
        t = t0 + (step - 1) * dt
        _apply_h(t, y, data, indices, indptr, atom_idx, w0, slope, drive_on, tgt, vac, xi, wd, k1)
        for r in range(n):
            tmp[r] = y[r] + half * k1[r]
        _apply_h(t + half, tmp, data, indices, indptr, atom_idx, w0, slope, drive_on, tgt, vac, xi, wd, k2)
        for r in range(n):
            tmp[r] = y[r] + half * k2[r]
        _apply_h(t + half, tmp, data, indices, indptr, atom_idx, w0, slope, drive_on, tgt, vac, xi, wd, k3)
        for r in range(n):
            tmp[r] = y[r] + dt * k3[r]
        _apply_h(t + dt, tmp, data, indices, indptr, atom_idx, w0, slope, drive_on, tgt, vac, xi, wd, k4)
        for r in range(n):
            y[r] += dt / 6.0 * (k1[r] + 2.0 * k2[r] + 2.0 * k3[r] + k4[r])
        if step % stride == 0 or step == n_steps:
            out_states[slot] = y
            out_times[slot] = t0 + step * dt
            slot += 1
            nrm = 0.0
            for r in range(n):
                nrm += y[r].real ** 2 + y[r].imag ** 2
            if abs(math.sqrt(nrm) - 1.0) > abort_tol:
                return y, slot, step
    return y, slot, -1


def _static_csr(system: System):
    h = system.hamiltonian(np.zeros(system.N))
    m = sp.csr_matrix(h.astype(complex))
    m.sort_indices()
    return m.data, m.indices.astype(np.int64), m.indptr.astype(np.int64)


def _segments(schedule: Schedule, dt: float):
    """(t_start, step, n_steps, drive_on) pieces whose edges hit every breakpoint."""
    pts = schedule.breakpoints()
    drive = schedule.drive
    out = []
    for a, b in zip(pts[:-1], pts[1:]):
        n = max(1, int(math.ceil((b - a) / dt - 1e-9)))
        on = drive is not None and b <= drive.t_off
        out.append((a, (b - a) / n, n, on))
    return out


def propagate(
    psi0: np.ndarray,
    system: System,
    schedule: Schedule,
    dt: float = DEFAULT_DT,
    stride: int = DEFAULT_STRIDE,
    references: Mapping[str, np.ndarray] | None = None,
    check_norm: bool = True,
) -> TrajectoryRecord:
    """Fixed-step classical RK4 integration of the Schrodinger equation.

    The generator is re-evaluated at each RK4 stage time.  No renormalization is
    applied; a norm drift above ``1e-6`` at any stored sample raises
    :class:`NormDriftError`.  States are stored every ``stride`` steps, at the
    start, at the end of the drive window and at ``total_time``.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (system.layout.dim,):
        raise ConfigError(f"initial state has shape {psi0.shape}, layout needs ({system.layout.dim},)")
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-10:
        raise ConfigError("initial state is not normalized")
    if not dt > 0 or dt * system.lattice.q > 0.01 + 1e-15:
        raise ConfigError(f"time step q*dt={dt * system.lattice.q:g} must lie in (0, 0.01]")
    if stride < 1:
        raise ConfigError("sampling stride must be >= 1")
    _require_drive_basis(system, schedule)

    data, indices, indptr = _static_csr(system)
    atom_idx = np.array([system.layout.atom_index(i) for i in range(system.N)], dtype=np.int64)
    w0 = np.asarray(schedule.start, dtype=float)
    slope = np.asarray(schedule.slope, dtype=float)
    drive = schedule.drive
    tgt = system.layout.atom_index(drive.target_atom) if drive else 0
    xi = float(drive.strength) if drive else 0.0
    wd = float(drive.frequency) if drive else 0.0

    segs = _segments(schedule, dt)
    n_samples = 1 + sum(n // stride + 1 for _, _, n, _ in segs)
    states = np.empty((n_samples, psi0.size), dtype=complex)
    times = np.empty(n_samples)
    states[0] = psi0
    times[0] = 0.0
    slot = 1
    y = psi0.copy()
    abort_tol = NORM_ABORT if check_norm else np.inf
    for t_start, h, n, on in segs:
        y, slot, failed = _rk4_segment(
            y, t_start, h, n, stride, data, indices, indptr, atom_idx, w0, slope,
            on, tgt, 0, xi, wd, states, times, slot, abort_tol,
        )
        if failed >= 0:
            drift = abs(np.linalg.norm(y) - 1.0)
            raise NormDriftError(
                f"norm drifted by {drift:.3e} at t={t_start + failed * h:.6g} (q*dt={h:g}); reduce the time step"
            )
    states = states[:slot]
    times = times[:slot]
    # consecutive segments may both store their shared edge
    keep = np.concatenate([[True], np.diff(times) > 0])
    states, times = states[keep], times[keep]
    rec = TrajectoryRecord(
        sample_times=times,
        states=states,
        norms=np.linalg.norm(states, axis=1),
        schedule_trace=schedule.frequencies(times),
        layout=system.layout,
    )
    for name, ref in (references or {}).items():
        rec.add_reference(name, ref)
    return rec


@numba.njit(cache=True)
def _apply_segments(psi, vecs, energies, seg_dt):
    n = psi.shape[0]
    y = psi.copy()
    c = np.empty(n, np.complex128)
    for s in range(vecs.shape[0]):
        v = vecs[s]
        for k in range(n):
            acc = 0j
            for r in range(n):
                acc += np.conj(v[r, k]) * y[r]
            e = energies[s, k] * seg_dt
            c[k] = acc * complex(math.cos(e), -math.sin(e))
        for r in range(n):
            acc = 0j
            for k in range(n):
                acc += v[r, k] * c[k]
            y[r] = acc
    return y


@numba.njit(cache=True)
def _real_ramp_segments(psi, base, atom_idx, w0, slope, t_start, seg_dt, n_seg, tol):
    # Warm-started Jacobi: the previous eigenbasis nearly diagonalizes the next midpoint generator.
    n = psi.shape[0]
    y = psi.copy()
    v = np.eye(n)
    hm = base.copy()
    c = np.empty(n, np.complex128)
    for s in range(n_seg):
        tm = t_start + (s + 0.5) * seg_dt
        for j in range(atom_idx.shape[0]):
            hm[atom_idx[j], atom_idx[j]] = w0[j] + slope[j] * tm
        a = np.dot(v.T, np.dot(hm, v))
        for i in range(n):
            for k in range(i + 1, n):
                sym = 0.5 * (a[i, k] + a[k, i])
                a[i, k] = sym
                a[k, i] = sym
        if jacobi_inplace(a, v, tol, 50) < 0:
            raise RuntimeError("Jacobi iteration did not converge")
        # accumulated rotations drift from orthogonality; one Newton-Schulz step restores it
        v = 1.5 * v - 0.5 * np.dot(v, np.dot(v.T, v))
        for k in range(n):
            acc = 0j
            for r in range(n):
                acc += v[r, k] * y[r]
            e = a[k, k] * seg_dt
            c[k] = acc * complex(math.cos(e), -math.sin(e))
        for r in range(n):
            acc = 0j
            for k in range(n):
                acc += v[r, k] * c[k]
            y[r] = acc
    return y


def oracle_propagate(
    psi0: np.ndarray,
    system: System,
    schedule: Schedule,
    segment_dt: float = 0.05,
    batch: int = 4096,
) -> np.ndarray:
    """Final state from a product of exact propagators of the midpoint-frozen generator.

    Each segment applies ``V exp(-i E segment_dt) V^dag`` from the
    eigendecomposition of ``H`` at the segment midpoint.  Segment edges always
    include the drive switch-off time.  Drive-free stretches are real symmetric
    and use warm-started Jacobi; driven stretches use batched LAPACK.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    if segment_dt * system.lattice.q > 0.05 + 1e-15:
        raise ConfigError("oracle segments must satisfy q*segment_dt <= 0.05")
    _require_drive_basis(system, schedule)
    base = system.hamiltonian(np.zeros(system.N))
    check_hermitian(base)
    atom_idx = np.array([system.layout.atom_index(i) for i in range(system.N)], dtype=np.int64)
    w0 = np.asarray(schedule.start, dtype=float)
    slope = np.asarray(schedule.slope, dtype=float)
    drive = schedule.drive
    y = psi0.copy()
    for t_start, h, n, on in _segments(schedule, segment_dt):
        if not on:
            y = _real_ramp_segments(y, base, atom_idx, w0, slope, t_start, h, n, 1e-14)
            continue
        ai = system.layout.atom_index(drive.target_atom)
        for s0 in range(0, n, batch):
            mids = t_start + (np.arange(s0, min(n, s0 + batch)) + 0.5) * h
            hs = np.repeat(base.astype(complex)[None], len(mids), axis=0)
            hs[:, atom_idx, atom_idx] += schedule.frequencies(mids)
            val = drive.strength * np.exp(-1j * drive.frequency * mids)
            hs[:, ai, 0] += val
            hs[:, 0, ai] += np.conj(val)
            energies, vecs = np.linalg.eigh(hs)
            y = _apply_segments(y, np.ascontiguousarray(vecs), energies, h)
    return y


def expectation_energy(psi: np.ndarray, h: np.ndarray) -> float:
    return float(np.real(np.vdot(psi, h @ psi)))
