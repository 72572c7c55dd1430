"""Detuning sweeps, overlap-based branch tracking and level-crossing analysis."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError
from .lattice import AtomSpec, BasisLayout, LatticeSpec, build_hamiltonian
from .spectral import EigenSystem, Label, classify, eigendecompose, fidelity

FINE_GRID = 0.0025
COARSE_GRID = 0.01
GAP_THRESHOLD = 1e-3


@dataclass(frozen=True)
class Detuning:
    """How a detuning value maps onto the swept atom's frequency.

    ``omega[swept] = omega[reference] + sign * value``.  With ``sign=-1`` this is
    the two-atom convention ``value = omega_ref - omega_swept``.  Indices are 0-based.
    """

    swept: int
    reference: int = 0
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ConfigError(f"detuning sign must be +1 or -1, got {self.sign!r}")

    def frequencies(self, base: Sequence[float], value: float) -> np.ndarray:
        freqs = np.array(base, dtype=float)
        freqs[self.swept] = freqs[self.reference] + self.sign * value
        return freqs

    def value(self, freqs: Sequence[float]) -> float:
        return self.sign * (freqs[self.swept] - freqs[self.reference])


@dataclass
class SweepResult:
    """Spectra along a detuning grid with states re-ordered into continuous branches.

    ``energies[p, b]`` and ``vectors[p, :, b]`` belong to branch ``b`` at grid
    point ``p``; ``labels[p][b]`` is the spectral label there.
    """

    grid: np.ndarray
    energies: np.ndarray
    vectors: np.ndarray
    labels: list[list[Label]]
    detuning: Detuning
    warnings: dict[int, str] = field(default_factory=dict)

    @property
    def n_branches(self) -> int:
        return self.energies.shape[1]

    @property
    def gap_branches(self) -> list[int]:
        """Branches labeled GAP at every grid point, ordered by mean energy."""
        ids = [b for b in range(self.n_branches) if all(row[b] == Label.GAP for row in self.labels)]
        return sorted(ids, key=lambda b: self.energies[:, b].mean())

    def state(self, point: int, branch: int) -> np.ndarray:
        return self.vectors[point, :, branch]

    def swap_points(self, a: int, b: int) -> list[int]:
        """Grid indices after which the energy order of branches ``a`` and ``b`` flips."""
        s = np.sign(self.energies[:, a] - self.energies[:, b])
        return [int(p) for p in np.nonzero(s[1:] * s[:-1] < 0)[0]]


@dataclass(frozen=True)
class CrossingReport:
    pair: tuple[int, int]
    detuning_star: float
    energy_star: float
    min_separation: float
    is_true_crossing: bool
    approached: bool
    grid_index: int
    flanking_fidelities: dict[str, float]


def track_branches(prev: EigenSystem, nxt: EigenSystem) -> np.ndarray:
    """Assign every state of ``nxt`` to a branch (state index) of ``prev``.

    Greedy: (prev, next) pairs are taken in descending ``|<prev|next>|``; ties
    go to the smaller energy difference.  Returns ``perm`` with ``perm[j]`` the
    index in ``nxt`` continuing branch ``j`` of ``prev``.
    """
    if prev.vectors.shape != nxt.vectors.shape:
        raise ValueError("eigensystems have different dimensions")
    n = len(prev)
    ov = np.round(np.abs(prev.vectors.conj().T @ nxt.vectors), 10)
    de = np.abs(prev.energies[:, None] - nxt.energies[None, :])
    order = np.lexsort((de.ravel(), -ov.ravel()))
    perm = np.full(n, -1, dtype=int)
    taken = np.zeros(n, dtype=bool)
    remaining = n
    for flat in order:
        i, j = divmod(int(flat), n)
        if perm[i] >= 0 or taken[j]:
            continue
        perm[i] = j
        taken[j] = True
        remaining -= 1
        if remaining == 0:
            break
    return perm


def spectrum_at(
    lattice: LatticeSpec,
    atoms: Sequence[AtomSpec],
    frequencies: Sequence[float],
    margin: float = 1e-6,
) -> EigenSystem:
    layout = BasisLayout(N=len(atoms), L=lattice.L)
    h = build_hamiltonian(lattice, atoms, frequencies, layout)
    return classify(eigendecompose(h), lattice.edges, margin=margin * lattice.q)


def sweep_spectrum(
    lattice: LatticeSpec,
    atoms: Sequence[AtomSpec],
    detuning: Detuning,
    grid: Sequence[float],
    base_frequencies: Sequence[float] | None = None,
    margin: float = 1e-6,
) -> SweepResult:
    """Diagonalize at every grid detuning and stitch states into branches."""
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 2:
        raise ConfigError("detuning grid needs at least two points")
    if np.any(np.diff(grid) <= 0):
        raise ConfigError("detuning grid must be strictly ascending")
    if base_frequencies is None:
        base_frequencies = [a.omega0 for a in atoms]
    edges = lattice.edges
    warn: dict[int, str] = {}

    energies, vectors, labels = [], [], []
    prev = None
    for p, x in enumerate(grid):
        freqs = detuning.frequencies(base_frequencies, x)
        if not edges.in_gap(freqs[detuning.swept]):
            warn[p] = f"swept atom frequency {freqs[detuning.swept]:.6g} outside the band gap"
        es = spectrum_at(lattice, atoms, freqs, margin)
        if prev is not None:
            perm = track_branches(prev, es)
            es = EigenSystem(
                es.energies[perm], es.vectors[:, perm],
                tuple(es.labels[k] for k in perm), tuple(es.ambiguous[k] for k in perm),
            )
        energies.append(es.energies)
        vectors.append(es.vectors)
        labels.append(list(es.labels))
        prev = es
    return SweepResult(grid, np.array(energies), np.array(vectors), labels, detuning, warn)


def _parabola_vertex(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    a, b, c = np.polyfit(x, y, 2)
    if a <= 0:
        k = int(np.argmin(y))
        return float(x[k]), float(y[k])
    xv = -b / (2 * a)
    xv = float(np.clip(xv, x[0], x[-1]))
    return xv, float(np.polyval([a, b, c], xv))


def detect_crossings(
    sr: SweepResult,
    pair: tuple[int, int],
    gap_threshold: float = GAP_THRESHOLD,
) -> CrossingReport:
    """Locate the closest approach of two branches and characterize it.

    The minimum of ``|E_a - E_b|`` on the grid is refined with a parabola
    through the bracketing points.  Flanking fidelities compare states two grid
    steps before and after the minimum.
    """
    a, b = pair
    sep = np.abs(sr.energies[:, a] - sr.energies[:, b])
    n = len(sr.grid)
    i = int(np.argmin(sep))
    if 0 < i < n - 1:
        x_star, s_star = _parabola_vertex(sr.grid[i - 1:i + 2], sep[i - 1:i + 2])
    else:
        x_star, s_star = float(sr.grid[i]), float(sep[i])
    s_star = max(0.0, min(s_star, float(sep[i])))
    mid = 0.5 * (sr.energies[:, a] + sr.energies[:, b])
    e_star = float(np.interp(x_star, sr.grid, mid))

    lo, hi = max(i - 2, 0), min(i + 2, n - 1)
    flank = {
        "a_a": fidelity(sr.state(lo, a), sr.state(hi, a)),
        "a_b": fidelity(sr.state(lo, a), sr.state(hi, b)),
        "b_a": fidelity(sr.state(lo, b), sr.state(hi, a)),
        "b_b": fidelity(sr.state(lo, b), sr.state(hi, b)),
    }
    return CrossingReport(
        pair=(a, b),
        detuning_star=x_star,
        energy_star=e_star,
        min_separation=s_star,
        is_true_crossing=bool(s_star < gap_threshold),
        approached=bool(s_star < 10 * gap_threshold),
        grid_index=i,
        flanking_fidelities=flank,
    )


def find_crossings(sr: SweepResult, gap_threshold: float = GAP_THRESHOLD) -> list[CrossingReport]:
    """Interior closest approaches between energy-adjacent gap branches, sorted by detuning.

    A pair counts when its separation has an interior grid minimum that comes
    within ten times ``gap_threshold``.
    """
    gaps = sr.gap_branches
    reports = []
    for a, b in zip(gaps[:-1], gaps[1:]):
        rep = detect_crossings(sr, (a, b), gap_threshold)
        if 0 < rep.grid_index < len(sr.grid) - 1 and rep.approached:
            reports.append(rep)
    return sorted(reports, key=lambda r: r.detuning_star)


def dominant_atoms(sr: SweepResult, branch: int, layout: BasisLayout) -> np.ndarray:
    """0-based index of the atom carrying the most weight along a branch."""
    amps = np.abs(sr.vectors[:, layout.atom_slice, branch]) ** 2
    return np.argmax(amps, axis=1)


def character_exchanges(sr: SweepResult, layout: BasisLayout) -> list[int]:
    """Grid indices where some gap branch changes its dominant atom."""
    events = set()
    for b in sr.gap_branches:
        dom = dominant_atoms(sr, b, layout)
        events.update(int(p) for p in np.nonzero(dom[1:] != dom[:-1])[0])
    return sorted(events)


def crossing_parity(d1: int, d2: int) -> bool:
    """Parity rule for an in-gap crossing of two giant atoms: one footprint even, the other odd."""
    if d1 < 0 or d2 < 0:
        raise ValueError("footprint sizes must be non-negative")
    return (d1 + d2) % 2 == 1
