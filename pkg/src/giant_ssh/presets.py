"""Built-in scenarios for the four reference figures, plus the probe-point analyses they use.

Shared parameters: theta = 0.2 pi, delta = 0.5, g = 0.9 q, omega_1 = 0.4 q.
Two-atom presets measure the detuning as ``omega_1 - omega_2`` (``transfer.sign = -1``);
three-atom presets measure it as ``omega_3 - omega_1`` (``transfer.sign = 1``).
"""

from __future__ import annotations

import numpy as np

from .io import parse_scenario
from .protocols import Scenario, gap_eigensystem, gap_state
from .spectral import fidelity

_COMMON = """\
format = giant-ssh/1
lattice.q = 1.0
lattice.delta = 0.5
lattice.theta_over_pi = 0.2
"""

PRESET_TEXT = {
    "fig2": _COMMON + """\
name = fig2
lattice.L = 100
atom.1.n = 50
atom.1.m = 52
atom.1.g = 0.9
atom.1.omega = 0.4
atom.2.n = 54
atom.2.m = 55
atom.2.g = 0.9
transfer.atom = 2
transfer.reference = 1
transfer.sign = -1
transfer.start = 0.6
transfer.span = 0.2
sweep.spacing = 0.0025
outputs = spectrum,sweep
""",
    "fig3": _COMMON + """\
name = fig3
lattice.L = 10
atom.1.n = 2
atom.1.m = 4
atom.1.g = 0.9
atom.1.omega = 0.4
atom.2.n = 7
atom.2.m = 8
atom.2.g = 0.9
prepare.xi = 0.005
prepare.atom = 1
prepare.gap_state = 1
transfer.atom = 2
transfer.reference = 1
transfer.sign = -1
transfer.start = 0.6
transfer.span = 0.2
transfer.T = 53200
transfer.target_atom = 2
solver.dt = 0.005
solver.stride = 1000
outputs = spectrum,sweep,trajectory
""",
    "fig4": _COMMON + """\
name = fig4
lattice.L = 100
atom.1.n = 50
atom.1.m = 52
atom.1.g = 0.9
atom.1.omega = 0.4
atom.2.n = 54
atom.2.m = 55
atom.2.g = 0.9
atom.2.omega = -0.4
atom.3.n = 60
atom.3.m = 62
atom.3.g = 0.9
transfer.atom = 3
transfer.reference = 1
transfer.sign = 1
transfer.start = -0.15
transfer.span = 0.2
sweep.start = -0.15
sweep.stop = 0.12
sweep.spacing = 0.0025
outputs = spectrum,sweep
""",
    "fig5": _COMMON + """\
name = fig5
lattice.L = 20
atom.1.n = 2
atom.1.m = 4
atom.1.g = 0.9
atom.1.omega = 0.4
atom.2.n = 7
atom.2.m = 8
atom.2.g = 0.9
atom.2.omega = -0.4
atom.3.n = 16
atom.3.m = 18
atom.3.g = 0.9
prepare.xi = 0.005
prepare.atom = 1
prepare.gap_state = 3
transfer.atom = 3
transfer.reference = 1
transfer.sign = 1
transfer.start = -0.15
transfer.span = 0.2
transfer.T = 200000
transfer.target_atom = 3
solver.dt = 0.005
solver.stride = 1000
outputs = spectrum,sweep,trajectory
""",
}

# detuning values of the labeled points in the spectrum figures
FIG2_POINTS = {"c": 0.65, "d": 0.75}
FIG4_POINTS = {"a": -0.02, "bc": 0.05, "de": 0.1}


def preset(name: str) -> Scenario:
    try:
        return parse_scenario(PRESET_TEXT[name])
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESET_TEXT)}") from None


def gap_states_at(scenario: Scenario, detuning: float) -> list[tuple[float, np.ndarray]]:
    """All gap states (energy, padded vector) at one detuning, ascending in energy."""
    freqs = scenario.frequencies_at(detuning)
    n = len(gap_eigensystem(scenario, freqs).gap_indices)
    return [gap_state(scenario, freqs, r) for r in range(n)]


def fig2_states(scenario: Scenario | None = None) -> dict[str, np.ndarray]:
    """``c``: lower gap state at 0.65 q; ``d``: lower and ``b``: upper gap state at 0.75 q."""
    scenario = scenario or preset("fig2")
    left = gap_states_at(scenario, FIG2_POINTS["c"])
    right = gap_states_at(scenario, FIG2_POINTS["d"])
    return {"c": left[0][1], "d": right[0][1], "b": right[-1][1]}


def fig2_fidelities(scenario: Scenario | None = None) -> dict[str, float]:
    s = fig2_states(scenario)
    return {"F1": fidelity(s["d"], s["c"]), "F2": fidelity(s["b"], s["c"])}


def fig4_states(scenario: Scenario | None = None) -> dict[str, np.ndarray]:
    """``a``: lowest gap state at -0.02 q; ``b``/``c``: middle/lowest at 0.05 q; ``d``/``e``: upper/middle at 0.1 q."""
    scenario = scenario or preset("fig4")
    pa = gap_states_at(scenario, FIG4_POINTS["a"])
    pbc = gap_states_at(scenario, FIG4_POINTS["bc"])
    pde = gap_states_at(scenario, FIG4_POINTS["de"])
    return {"a": pa[0][1], "b": pbc[1][1], "c": pbc[0][1], "d": pde[2][1], "e": pde[1][1]}


def fig4_fidelities(scenario: Scenario | None = None) -> dict[str, float]:
    s = fig4_states(scenario)
    return {
        "F1": fidelity(s["b"], s["a"]),
        "F2": fidelity(s["c"], s["a"]),
        "F3": fidelity(s["d"], s["b"]),
        "F4": fidelity(s["e"], s["b"]),
    }
