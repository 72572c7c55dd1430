"""Geometry and single-excitation Hamiltonian of giant atoms on a periodic SSH ring.

Basis ordering (fixed, see :class:`BasisLayout`)::

    [ |G,vac> ]  (only when the vacuum is included)
    atom 1 .. atom N excitations
    (A,1), (B,1), (A,2), (B,2), ..., (A,L), (B,L)

Cell indices are 1-based in :class:`AtomSpec` and 0-based inside matrices.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError


def hopping_amplitudes(theta: float, delta: float, q: float = 1.0) -> tuple[float, float]:
    """Intracell and intercell hoppings ``t1 = q(1 + delta cos theta)``, ``t2 = q(1 - delta cos theta)``."""
    c = np.cos(theta)
    return q * (1.0 + delta * c), q * (1.0 - delta * c)


def dispersion(k, t1: float, t2: float):
    """Lower and upper SSH bands ``-/+ sqrt(t1^2 + t2^2 + 2 t1 t2 cos k)``.

    Works elementwise on arrays of ``k``.
    """
    arg = t1 * t1 + t2 * t2 + 2.0 * t1 * t2 * np.cos(k)
    e_plus = np.sqrt(np.maximum(arg, 0.0))
    return -e_plus, e_plus


@dataclass(frozen=True)
class BandEdges:
    lower_band: tuple[float, float]
    gap: tuple[float, float]
    upper_band: tuple[float, float]

    @property
    def gap_half_width(self) -> float:
        return self.gap[1]

    @property
    def band_top(self) -> float:
        return self.upper_band[1]

    def in_gap(self, energy: float) -> bool:
        return self.gap[0] < energy < self.gap[1]


def band_edges(t1: float, t2: float) -> BandEdges:
    """Band intervals of the infinite chain; the gap is open and empty when ``t1 == t2``."""
    inner = abs(t1 - t2)
    outer = abs(t1) + abs(t2)
    return BandEdges(
        lower_band=(-outer, -inner),
        gap=(-inner, inner),
        upper_band=(inner, outer),
    )


@dataclass(frozen=True)
class LatticeSpec:
    """Periodic SSH ring of ``L`` cells with two resonators (A, B) per cell."""

    L: int
    q: float = 1.0
    delta: float = 0.5
    theta: float = 0.2 * np.pi
    boundary: str = "PERIODIC"

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 2:
            raise ConfigError(f"lattice needs L >= 2 cells, got {self.L!r}")
        if not self.q > 0:
            raise ConfigError(f"energy unit q must be positive, got {self.q!r}")
        if self.boundary != "PERIODIC":
            raise ConfigError(f"only PERIODIC boundary is supported, got {self.boundary!r}")

    @property
    def hoppings(self) -> tuple[float, float]:
        return hopping_amplitudes(self.theta, self.delta, self.q)

    @property
    def edges(self) -> BandEdges:
        return band_edges(*self.hoppings)


@dataclass(frozen=True)
class AtomSpec:
    """Giant atom with its A leg in cell ``n`` and its B leg in cell ``m`` (1-based)."""

    n: int
    m: int
    g: float = 0.9
    omega0: float = 0.0

    @property
    def d(self) -> int:
        return abs(self.m - self.n)

    @property
    def window(self) -> tuple[int, int]:
        """Footprint cells padded by one on each side (1-based, inclusive, unwrapped)."""
        return min(self.n, self.m) - 1, max(self.n, self.m) + 1

    def validate(self, L: int) -> None:
        for name, cell in (("n", self.n), ("m", self.m)):
            if int(cell) != cell or not 1 <= cell <= L:
                raise ConfigError(f"atom leg {name}={cell!r} outside cells 1..{L}")

    def shifted(self, offset: int, L: int) -> "AtomSpec":
        return AtomSpec(
            n=(self.n - 1 + offset) % L + 1,
            m=(self.m - 1 + offset) % L + 1,
            g=self.g,
            omega0=self.omega0,
        )


@dataclass(frozen=True)
class BasisLayout:
    N: int
    L: int
    include_vacuum: bool = False

    @property
    def offset(self) -> int:
        return 1 if self.include_vacuum else 0

    @property
    def dim(self) -> int:
        return self.N + 2 * self.L + self.offset

    @property
    def vacuum_index(self) -> int | None:
        return 0 if self.include_vacuum else None

    def atom_index(self, i: int) -> int:
        """Basis index of atom ``i`` (0-based)."""
        if not 0 <= i < self.N:
            raise IndexError(f"atom {i} out of range for N={self.N}")
        return self.offset + i

    def site_index(self, sublattice: str, cell: int) -> int:
        """Basis index of resonator ``sublattice`` in 0-based ``cell``."""
        if not 0 <= cell < self.L:
            raise IndexError(f"cell {cell} out of range for L={self.L}")
        return self.offset + self.N + 2 * cell + {"A": 0, "B": 1}[sublattice]

    @property
    def photon_slice(self) -> slice:
        start = self.offset + self.N
        return slice(start, start + 2 * self.L)

    @property
    def atom_slice(self) -> slice:
        return slice(self.offset, self.offset + self.N)

    def label(self, index: int) -> tuple:
        """Physical label of a basis index: ``("vac",)``, ``("atom", i)`` or ``(sublattice, cell)``."""
        if not 0 <= index < self.dim:
            raise IndexError(index)
        if self.include_vacuum and index == 0:
            return ("vac",)
        j = index - self.offset
        if j < self.N:
            return ("atom", j)
        j -= self.N
        return ("AB"[j % 2], j // 2)

    def index(self, label: tuple) -> int:
        kind = label[0]
        if kind == "vac":
            if not self.include_vacuum:
                raise KeyError("layout has no vacuum state")
            return 0
        if kind == "atom":
            return self.atom_index(label[1])
        return self.site_index(kind, label[1])

    def embed(self, vec: np.ndarray) -> np.ndarray:
        """Copy a one-excitation vector into this layout (vacuum amplitude zero)."""
        vec = np.asarray(vec)
        one_ex = self.N + 2 * self.L
        if vec.shape[-1] == self.dim:
            return vec.astype(complex)
        if vec.shape[-1] != one_ex:
            raise ValueError(f"vector of length {vec.shape[-1]} does not fit layout of dim {self.dim}")
        out = np.zeros(vec.shape[:-1] + (self.dim,), dtype=complex)
        out[..., self.offset:] = vec
        return out


def _check_atoms(lattice: LatticeSpec, atoms: Sequence[AtomSpec]) -> None:
    for atom in atoms:
        atom.validate(lattice.L)


def ssh_block(lattice: LatticeSpec) -> np.ndarray:
    """Real ``2L x 2L`` hopping matrix: ``t1`` inside cells, ``t2`` from B_l to A_{l+1} (with wrap)."""
    L = lattice.L
    t1, t2 = lattice.hoppings
    h = np.zeros((2 * L, 2 * L))
    a = 2 * np.arange(L)
    b = a + 1
    a_next = 2 * ((np.arange(L) + 1) % L)
    np.add.at(h, (a, b), t1)
    np.add.at(h, (b, a), t1)
    np.add.at(h, (a_next, b), t2)
    np.add.at(h, (b, a_next), t2)
    return h


def build_hamiltonian(
    lattice: LatticeSpec,
    atoms: Sequence[AtomSpec],
    frequencies: Sequence[float] | None = None,
    layout: BasisLayout | None = None,
) -> np.ndarray:
    """Dense real-symmetric Hamiltonian of the chain plus giant atoms.

    ``frequencies`` defaults to each atom's ``omega0``.  Legs of different
    atoms may share a resonator; that is allowed but warned about.
    """
    atoms = list(atoms)
    N = len(atoms)
    if layout is None:
        layout = BasisLayout(N=N, L=lattice.L)
    if layout.N != N or layout.L != lattice.L:
        raise ConfigError(f"layout (N={layout.N}, L={layout.L}) does not match {N} atoms on L={lattice.L}")
    if frequencies is None:
        frequencies = [a.omega0 for a in atoms]
    frequencies = np.asarray(frequencies, dtype=float)
    if frequencies.shape != (N,):
        raise ConfigError(f"need one frequency per atom ({N}), got {frequencies.shape}")
    _check_atoms(lattice, atoms)

    h = np.zeros((layout.dim, layout.dim))
    ph = layout.photon_slice
    h[ph, ph] = ssh_block(lattice)

    owner: dict[int, int] = {}
    for i, atom in enumerate(atoms):
        ai = layout.atom_index(i)
        h[ai, ai] = frequencies[i]
        for site in (layout.site_index("A", atom.n - 1), layout.site_index("B", atom.m - 1)):
            if site in owner:
                warnings.warn(
                    f"atoms {owner[site] + 1} and {i + 1} share basis site {site}", stacklevel=2
                )
            owner.setdefault(site, i)
            h[ai, site] += atom.g
            h[site, ai] += atom.g
    return h


@dataclass(frozen=True)
class System:
    """A lattice with its giant atoms, plus the basis choice used for dynamics."""

    lattice: LatticeSpec
    atoms: tuple[AtomSpec, ...]
    include_vacuum: bool = True

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        _check_atoms(self.lattice, self.atoms)

    @property
    def N(self) -> int:
        return len(self.atoms)

    @property
    def layout(self) -> BasisLayout:
        return BasisLayout(N=self.N, L=self.lattice.L, include_vacuum=self.include_vacuum)

    @property
    def base_frequencies(self) -> np.ndarray:
        return np.array([a.omega0 for a in self.atoms], dtype=float)

    def hamiltonian(self, frequencies: Sequence[float] | None = None) -> np.ndarray:
        return build_hamiltonian(self.lattice, self.atoms, frequencies, self.layout)

    def one_excitation(self) -> "System":
        return System(self.lattice, self.atoms, include_vacuum=False)
