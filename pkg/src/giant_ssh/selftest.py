"""Quick invariant checks run by ``giant-ssh selftest`` (seconds, no files written)."""

from __future__ import annotations

import numpy as np

from .dynamics import Drive, Schedule, generator_at, propagate
from .lattice import LatticeSpec, System, build_hamiltonian
from .presets import preset
from .spectral import check_hermitian, eigendecompose, fidelity


def _band_edges():
    lat = LatticeSpec(L=100)
    e = eigendecompose(build_hamiltonian(lat, [])).energies
    t1, t2 = lat.hoppings
    inner = np.sort(np.abs(e))[0]
    err = max(abs(e[-1] - (t1 + t2)), abs(e[0] + t1 + t2), abs(inner - abs(t1 - t2)))
    return err <= 1e-9, f"max edge error {err:.2e} q"


def _hermiticity():
    sc = preset("fig3")
    drive = Drive(0, 0.005, 0.1, 100.0)
    sched = Schedule.static(sc.initial_frequencies, 100.0, drive)
    h = generator_at(sc.system, sched, 37.3)
    dev = check_hermitian(h)
    return dev <= 1e-12, f"max |H - H^dag| = {dev:.2e} q"


def _residuals():
    sc = preset("fig2")
    h = sc.system.one_excitation().hamiltonian(sc.frequencies_at(0.65))
    es = eigendecompose(h)
    res = float(np.max(np.abs(h @ es.vectors - es.vectors * es.energies)))
    return res <= 1e-9, f"max eigen-residual {res:.2e} q"


def _norm():
    sc = preset("fig3")
    sched = Schedule.static(sc.initial_frequencies, 200.0, Drive(0, 0.005, 0.1, 100.0))
    psi0 = np.zeros(sc.system.layout.dim, complex)
    psi0[0] = 1.0
    rec = propagate(psi0, sc.system, sched, stride=100)
    drift = rec.max_norm_drift
    return drift <= 1e-8, f"norm drift {drift:.2e} over q t = 200"


def _phase():
    rng = np.random.default_rng(0)
    a = rng.normal(size=8) + 1j * rng.normal(size=8)
    b = rng.normal(size=8) + 1j * rng.normal(size=8)
    a /= np.linalg.norm(a)
    b /= np.linalg.norm(b)
    diff = abs(fidelity(a, b) - fidelity(np.exp(0.7j) * a, np.exp(-2.1j) * b))
    return diff <= 1e-14, f"fidelity change under global phases {diff:.1e}"


def _translation():
    sc = preset("fig2")
    freqs = sc.frequencies_at(0.7)
    e0 = eigendecompose(System(sc.lattice, sc.atoms, False).hamiltonian(freqs)).energies
    moved = [a.shifted(37, sc.lattice.L) for a in sc.atoms]
    e1 = eigendecompose(System(sc.lattice, moved, False).hamiltonian(freqs)).energies
    err = float(np.max(np.abs(e0 - e1)))
    return err <= 1e-9, f"spectrum change under a 37-cell shift {err:.2e} q"


CHECKS = {
    "band_edges": _band_edges,
    "hermiticity": _hermiticity,
    "eigen_residuals": _residuals,
    "norm_conservation": _norm,
    "fidelity_phase_invariance": _phase,
    "translation_isospectral": _translation,
}


def run_selftest() -> list[tuple[str, bool, str]]:
    out = []
    for name, check in CHECKS.items():
        ok, detail = check()
        out.append((name, bool(ok), detail))
    return out
