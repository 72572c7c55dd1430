"""Giant atoms nonlocally coupled to a periodic SSH photonic ring: spectra, sweeps and ramp dynamics."""

from .dynamics import Drive, Schedule, TrajectoryRecord, oracle_propagate, propagate
from .errors import (
    ConfigError,
    GiantSSHError,
    NonAdiabaticError,
    NormDriftError,
    NotHermitianError,
    PreparationError,
)
from .io import export_sweep, export_trajectory, parse_scenario, render
from .lattice import AtomSpec, BandEdges, BasisLayout, LatticeSpec, System, band_edges, build_hamiltonian
from .presets import preset
from .protocols import (
    Preparation,
    Scenario,
    Transfer,
    prepare_initial_state,
    three_atom_transfer,
    two_atom_transfer,
)
from .spectral import Label, Shape, classify, eigendecompose, fidelity, photon_distribution, shape_classify
from .sweep import Detuning, crossing_parity, detect_crossings, find_crossings, sweep_spectrum

__version__ = "0.1.0"
