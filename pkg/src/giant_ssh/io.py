"""Scenario config files and deterministic CSV / JSON export.

Config format: one ``key = value`` per line, ``#`` starts a comment.  Energies
are in units of q and times in units of 1/q.  Cells and atoms are 1-based.
Example::

    format = giant-ssh/1
    name = demo
    lattice.L = 10
    atom.1.n = 2
    atom.1.m = 4
    atom.1.omega = 0.4
    atom.2.n = 7
    atom.2.m = 8
    transfer.atom = 2
    transfer.sign = -1
    transfer.start = 0.6
    transfer.span = 0.2
"""

from __future__ import annotations

import json
import math
import re
from pathlib import Path
from typing import Callable

import numpy as np

from .dynamics import DEFAULT_DT, DEFAULT_STRIDE, TrajectoryRecord
from .errors import ConfigError
from .lattice import AtomSpec, LatticeSpec
from .protocols import Preparation, Scenario, Transfer
from .sweep import FINE_GRID, GAP_THRESHOLD, CrossingReport, Detuning, SweepResult

FORMAT = "giant-ssh/1"
OUTPUT_KINDS = ("spectrum", "sweep", "trajectory")

_ATOM_KEY = re.compile(r"^atom\.(\d+)\.(n|m|g|omega)$")

# key -> (parser, default); default None means optional with no value
_SCALAR_KEYS: dict[str, tuple[Callable, object]] = {
    "format": (str, None),
    "name": (str, "scenario"),
    "lattice.L": (int, None),
    "lattice.q": (float, 1.0),
    "lattice.delta": (float, 0.5),
    "lattice.theta": (float, None),
    "lattice.theta_over_pi": (float, None),
    "prepare.xi": (float, 0.005),
    "prepare.atom": (int, 1),
    "prepare.gap_state": (int, 1),
    "prepare.max_duration": (float, 5000.0),
    "prepare.min_fidelity": (float, 0.95),
    "transfer.atom": (int, None),
    "transfer.reference": (int, 1),
    "transfer.sign": (int, 1),
    "transfer.start": (float, None),
    "transfer.span": (float, 0.0),
    "transfer.T": (float, 5.32e4),
    "transfer.target_gap_state": (int, None),
    "transfer.target_atom": (int, None),
    "solver.dt": (float, DEFAULT_DT),
    "solver.stride": (int, DEFAULT_STRIDE),
    "sweep.start": (float, None),
    "sweep.stop": (float, None),
    "sweep.spacing": (float, FINE_GRID),
    "sweep.gap_threshold": (float, GAP_THRESHOLD),
    "outputs": (str, ",".join(OUTPUT_KINDS)),
}
REQUIRED_KEYS = ("format", "lattice.L", "atom.1.n", "atom.1.m", "transfer.atom", "transfer.start")


def _int(text: str) -> int:
    value = float(text)
    if value != int(value):
        raise ValueError(f"{text!r} is not an integer")
    return int(value)


def _read_pairs(text: str, problems: list[str]) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems.append(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        if key in pairs:
            problems.append(f"line {lineno}: duplicate key {key!r}")
            continue
        pairs[key] = value
    return pairs


def parse_scenario(text: str) -> Scenario:
    """Parse and validate a config document; every problem found is reported in one ConfigError."""
    problems: list[str] = []
    pairs = _read_pairs(text, problems)

    values: dict[str, object] = {}
    atom_fields: dict[int, dict[str, object]] = {}
    for key, raw in pairs.items():
        m = _ATOM_KEY.match(key)
        try:
            if m:
                idx, fld = int(m.group(1)), m.group(2)
                atom_fields.setdefault(idx, {})[fld] = _int(raw) if fld in "nm" else float(raw)
            elif key in _SCALAR_KEYS:
                parser = _SCALAR_KEYS[key][0]
                values[key] = _int(raw) if parser is int else parser(raw)
            else:
                problems.append(f"unknown key {key!r}")
        except ValueError:
            problems.append(f"{key}: cannot parse {raw!r}")

    missing = [k for k in REQUIRED_KEYS if k not in values and not _atom_key_present(k, atom_fields)]
    if missing:
        problems.append("missing required keys: " + ", ".join(missing))
    if "format" in values and values["format"] != FORMAT:
        problems.append(f"format must be {FORMAT!r}, got {values['format']!r}")

    def get(key):
        return values.get(key, _SCALAR_KEYS[key][1])

    # lattice
    if "lattice.theta" in values and "lattice.theta_over_pi" in values:
        problems.append("give either lattice.theta or lattice.theta_over_pi, not both")
    if "lattice.theta" in values:
        theta = float(values["lattice.theta"])
    else:
        theta = float(values.get("lattice.theta_over_pi", 0.2)) * math.pi
    lattice = None
    if "lattice.L" in values:
        try:
            lattice = LatticeSpec(L=get("lattice.L"), q=get("lattice.q"), delta=get("lattice.delta"), theta=theta)
        except ConfigError as exc:
            problems.extend(exc.problems)

    # atoms
    idxs = sorted(atom_fields)
    if idxs and idxs != list(range(1, len(idxs) + 1)):
        problems.append(f"atoms must be numbered 1..N without gaps, got {idxs}")
    atoms: list[AtomSpec] = []
    for i in idxs:
        f = atom_fields[i]
        for leg in ("n", "m"):
            if leg not in f:
                problems.append(f"atom.{i}.{leg} is missing")
        if "n" not in f or "m" not in f:
            continue
        atom = AtomSpec(n=f["n"], m=f["m"], g=f.get("g", 0.9), omega0=f.get("omega", 0.0))
        if lattice is not None:
            try:
                atom.validate(lattice.L)
            except ConfigError as exc:
                problems.append(f"atom.{i}: {exc}")
        atoms.append(atom)
    N = len(atoms)

    # preparation
    prep_atom = get("prepare.atom")
    gap_state = get("prepare.gap_state")
    if N and not 1 <= prep_atom <= N:
        problems.append(f"prepare.atom={prep_atom} outside 1..{N}")
    if gap_state < 1:
        problems.append("prepare.gap_state counts gap states from 1 (lowest energy)")
    if get("prepare.xi") < 0:
        problems.append("prepare.xi must be non-negative")
    if not get("prepare.max_duration") > 0:
        problems.append("prepare.max_duration must be positive")
    preparation = Preparation(
        strength=get("prepare.xi"), target_atom=prep_atom - 1, gap_rank=gap_state - 1,
        max_duration=get("prepare.max_duration"), min_fidelity=get("prepare.min_fidelity"),
    )

    # transfer
    transfer = None
    n_before = len(problems)
    swept, ref, sign = get("transfer.atom"), get("transfer.reference"), get("transfer.sign")
    if swept is not None and N:
        if not 1 <= swept <= N:
            problems.append(f"transfer.atom={swept} outside 1..{N}")
        if not 1 <= ref <= N:
            problems.append(f"transfer.reference={ref} outside 1..{N}")
        if swept == ref:
            problems.append("transfer.atom and transfer.reference must differ")
    if sign not in (1, -1):
        problems.append(f"transfer.sign must be 1 or -1, got {sign}")
    if not get("transfer.T") > 0:
        problems.append("transfer.T must be positive")
    target = get("transfer.target_gap_state")
    if target is not None and target < 1:
        problems.append("transfer.target_gap_state counts gap states from 1")
    target_atom = get("transfer.target_atom")
    if target_atom is not None:
        if target is not None:
            problems.append("give transfer.target_gap_state or transfer.target_atom, not both")
        if N and not 1 <= target_atom <= N:
            problems.append(f"transfer.target_atom={target_atom} outside 1..{N}")
    transfer_ok = len(problems) == n_before and N > 0 and len(atoms) == len(idxs)
    if swept is not None and get("transfer.start") is not None and transfer_ok:
        transfer = Transfer(
            detuning=Detuning(swept=swept - 1, reference=ref - 1, sign=sign),
            start=get("transfer.start"), span=get("transfer.span"), total_time=get("transfer.T"),
            target_rank=None if target is None else target - 1,
            target_atom=None if target_atom is None else target_atom - 1,
        )

    # solver and sweep
    dt, stride = get("solver.dt"), get("solver.stride")
    if lattice is not None and not 0 < dt * lattice.q <= 0.01:
        problems.append(f"solver.dt: q*dt={dt * lattice.q:g} must lie in (0, 0.01]")
    if stride < 1:
        problems.append("solver.stride must be >= 1")
    s0, s1 = get("sweep.start"), get("sweep.stop")
    sweep_range = None
    if (s0 is None) != (s1 is None):
        problems.append("sweep.start and sweep.stop go together")
    elif s0 is not None:
        if not s1 > s0:
            problems.append("sweep.stop must exceed sweep.start")
        sweep_range = (s0, s1)
    if not get("sweep.spacing") > 0:
        problems.append("sweep.spacing must be positive")
    outputs = tuple(x.strip() for x in get("outputs").split(",") if x.strip())
    bad = [x for x in outputs if x not in OUTPUT_KINDS]
    if bad:
        problems.append(f"unknown outputs {bad}; choose from {list(OUTPUT_KINDS)}")

    # frequencies: the swept atom starts at the ramp start; the ramp must stay in the gap
    if transfer is not None and lattice is not None:
        base = [a.omega0 for a in atoms]
        f0 = transfer.detuning.frequencies(base, transfer.start)
        f1 = transfer.detuning.frequencies(base, transfer.start + transfer.span)
        atoms = [AtomSpec(a.n, a.m, a.g, float(f0[i])) for i, a in enumerate(atoms)]
        edges = lattice.edges
        for i in range(N):
            for label, f in (("start", f0[i]), ("end", f1[i])):
                if not edges.in_gap(f):
                    problems.append(
                        f"atom {i + 1} frequency {f:.6g} at ramp {label} leaves the gap "
                        f"({edges.gap[0]:.6g}, {edges.gap[1]:.6g})"
                    )

    if problems:
        raise ConfigError("invalid scenario config: " + "; ".join(problems), problems)
    return Scenario(
        name=get("name"), lattice=lattice, atoms=tuple(atoms), preparation=preparation,
        transfer=transfer, dt=dt, stride=stride, sweep_range=sweep_range,
        sweep_spacing=get("sweep.spacing"), gap_threshold=get("sweep.gap_threshold"), outputs=outputs,
    )


def _atom_key_present(key: str, atom_fields: dict) -> bool:
    m = _ATOM_KEY.match(key)
    return bool(m) and m.group(2) in atom_fields.get(int(m.group(1)), {})


def load_scenario(path) -> Scenario:
    return parse_scenario(Path(path).read_text())


def render(scenario: Scenario) -> str:
    """Resolved config text; ``parse_scenario(render(s)) == s``."""
    lat, prep, tr = scenario.lattice, scenario.preparation, scenario.transfer
    lines = [
        f"format = {FORMAT}",
        f"name = {scenario.name}",
        f"lattice.L = {lat.L}",
        f"lattice.q = {lat.q!r}",
        f"lattice.delta = {lat.delta!r}",
        f"lattice.theta = {lat.theta!r}",
    ]
    for i, a in enumerate(scenario.atoms, 1):
        lines += [f"atom.{i}.n = {a.n}", f"atom.{i}.m = {a.m}", f"atom.{i}.g = {a.g!r}",
                  f"atom.{i}.omega = {a.omega0!r}"]
    lines += [
        f"prepare.xi = {prep.strength!r}",
        f"prepare.atom = {prep.target_atom + 1}",
        f"prepare.gap_state = {prep.gap_rank + 1}",
        f"prepare.max_duration = {prep.max_duration!r}",
        f"prepare.min_fidelity = {prep.min_fidelity!r}",
        f"transfer.atom = {tr.detuning.swept + 1}",
        f"transfer.reference = {tr.detuning.reference + 1}",
        f"transfer.sign = {tr.detuning.sign}",
        f"transfer.start = {tr.start!r}",
        f"transfer.span = {tr.span!r}",
        f"transfer.T = {tr.total_time!r}",
    ]
    if tr.target_rank is not None:
        lines.append(f"transfer.target_gap_state = {tr.target_rank + 1}")
    if tr.target_atom is not None:
        lines.append(f"transfer.target_atom = {tr.target_atom + 1}")
    lines += [f"solver.dt = {scenario.dt!r}", f"solver.stride = {scenario.stride}"]
    if scenario.sweep_range is not None:
        lines += [f"sweep.start = {scenario.sweep_range[0]!r}", f"sweep.stop = {scenario.sweep_range[1]!r}"]
    lines += [
        f"sweep.spacing = {scenario.sweep_spacing!r}",
        f"sweep.gap_threshold = {scenario.gap_threshold!r}",
        f"outputs = {','.join(scenario.outputs)}",
    ]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- CSV export

def _g(x) -> str:
    """12 significant digits, with ``-0`` folded to ``0`` so output is byte-stable."""
    s = f"{float(x):.12g}"
    return "0" if s == "-0" else s


def sweep_csv(sr: SweepResult) -> str:
    rows = ["detuning_q,branch_id,energy_q,label"]
    for p, x in enumerate(sr.grid):
        for b in range(sr.n_branches):
            rows.append(f"{_g(x)},{b},{_g(sr.energies[p, b])},{sr.labels[p][b].value}")
    return "\n".join(rows) + "\n"


def export_sweep(sr: SweepResult, path=None) -> str:
    """CSV with one row per (grid point, branch), sorted by detuning then branch."""
    text = sweep_csv(sr)
    if path is not None:
        Path(path).write_text(text)
    return text


def crossings_csv(reports: list[CrossingReport]) -> str:
    rows = ["branch_a,branch_b,detuning_star_q,energy_star_q,min_separation_q,is_true_crossing,"
            "f_a_a,f_a_b,f_b_a,f_b_b"]
    for r in reports:
        f = r.flanking_fidelities
        rows.append(",".join([
            str(r.pair[0]), str(r.pair[1]), _g(r.detuning_star), _g(r.energy_star), _g(r.min_separation),
            str(r.is_true_crossing).lower(), _g(f["a_a"]), _g(f["a_b"]), _g(f["b_a"]), _g(f["b_b"]),
        ]))
    return "\n".join(rows) + "\n"


def spectrum_csv(energies, labels, dominant=None) -> str:
    rows = ["state_index,energy_q,label" + (",dominant_atom" if dominant is not None else "")]
    for k, (e, lab) in enumerate(zip(energies, labels)):
        row = f"{k},{_g(e)},{lab.value}"
        if dominant is not None:
            row += f",{dominant[k]}"
        rows.append(row)
    return "\n".join(rows) + "\n"


def _frame_indices(n: int, max_frames: int | None) -> np.ndarray:
    if max_frames is None or n <= max_frames:
        return np.arange(n)
    idx = np.unique(np.round(np.linspace(0, n - 1, max_frames)).astype(int))
    return idx


def export_trajectory(rec: TrajectoryRecord, outdir, max_frames: int | None = 2000) -> dict[str, Path]:
    """Write ``fidelity.csv``, ``frames.csv`` and ``schedule.csv`` into ``outdir``.

    ``fidelity.csv`` and ``schedule.csv`` hold every stored sample.  ``frames.csv``
    (per-site photon probabilities) is thinned to at most ``max_frames``
    evenly spaced samples, always keeping the first and last.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    t = rec.sample_times
    n = len(t)
    nan = np.full(n, np.nan)
    f_init = rec.fidelity_series.get("f_init", nan)
    f_target = rec.fidelity_series.get("f_target", nan)
    p_atoms = rec.atom_probabilities.sum(axis=1)
    p_vac = rec.vacuum_probabilities

    rows = ["t_q,norm,f_init,f_target,p_atoms,p_vac"]
    for k in range(n):
        rows.append(",".join(_g(v) for v in (t[k], rec.norms[k], f_init[k], f_target[k], p_atoms[k], p_vac[k])))
    paths = {"fidelity": outdir / "fidelity.csv", "frames": outdir / "frames.csv",
             "schedule": outdir / "schedule.csv"}
    paths["fidelity"].write_text("\n".join(rows) + "\n")

    sites = rec.site_probability_frames
    n_sites = sites.shape[1]
    kinds = ["AB"[j % 2] for j in range(n_sites)]
    cells = [j // 2 + 1 for j in range(n_sites)]
    rows = ["t_q,site_index,site_kind,cell,probability"]
    for k in _frame_indices(n, max_frames):
        tk = _g(t[k])
        rows.extend(f"{tk},{j},{kinds[j]},{cells[j]},{_g(sites[k, j])}" for j in range(n_sites))
    paths["frames"].write_text("\n".join(rows) + "\n")

    trace = np.atleast_2d(rec.schedule_trace)
    rows = ["t_q,atom,omega_q"]
    for k in range(n):
        tk = _g(t[k])
        rows.extend(f"{tk},{i + 1},{_g(trace[k, i])}" for i in range(trace.shape[1]))
    paths["schedule"].write_text("\n".join(rows) + "\n")
    return paths


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_summary(summary: dict, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n")
    return path


def write_config_echo(scenario: Scenario, outdir) -> Path:
    path = Path(outdir) / "config.txt"
    path.write_text(render(scenario))
    return path


# ---------------------------------------------------------------- plot scripts

_PLOT_SWEEP = '''"""Plot the detuning sweep written to sweep.csv."""
import csv
import matplotlib.pyplot as plt

data = {}
with open("sweep.csv") as fh:
    for row in csv.DictReader(fh):
        data.setdefault(int(row["branch_id"]), []).append(
            (float(row["detuning_q"]), float(row["energy_q"]), row["label"]))
fig, ax = plt.subplots(figsize=(5, 4))
for branch, pts in sorted(data.items()):
    gap = all(p[2] == "GAP" for p in pts)
    ax.plot([p[0] for p in pts], [p[1] for p in pts], color="tab:red" if gap else "0.6",
            lw=1.5 if gap else 0.5)
ax.set_xlabel("detuning / q")
ax.set_ylabel("E / q")
fig.tight_layout()
fig.savefig("sweep.png", dpi=150)
'''

_PLOT_TRAJECTORY = '''"""Plot fidelities and the photon heat map of a trajectory."""
import csv
import numpy as np
import matplotlib.pyplot as plt

with open("fidelity.csv") as fh:
    rows = list(csv.DictReader(fh))
t = np.array([float(r["t_q"]) for r in rows])
fig, ax = plt.subplots(figsize=(5, 3))
for col, style in (("f_init", "-"), ("f_target", "--")):
    y = np.array([float(r[col]) for r in rows])
    if np.isfinite(y).any():
        ax.plot(t, y, style, label=col)
ax.set_xlabel("q t")
ax.set_ylabel("fidelity")
ax.legend()
fig.tight_layout()
fig.savefig("fidelity.png", dpi=150)

frames = {}
with open("frames.csv") as fh:
    for r in csv.DictReader(fh):
        frames.setdefault(float(r["t_q"]), []).append(float(r["probability"]))
times = sorted(frames)
img = np.array([frames[k] for k in times]).T
fig, ax = plt.subplots(figsize=(5, 4))
ax.imshow(img, aspect="auto", origin="lower", extent=[times[0], times[-1], 0, img.shape[0]])
ax.set_xlabel("q t")
ax.set_ylabel("site index")
fig.tight_layout()
fig.savefig("frames.png", dpi=150)
'''


def emit_plot_scripts(outdir, kinds) -> list[Path]:
    """Write matplotlib scripts next to the CSVs they read (run them from ``outdir``)."""
    outdir = Path(outdir)
    written = []
    if "sweep" in kinds:
        written.append(outdir / "plot_sweep.py")
        written[-1].write_text(_PLOT_SWEEP)
    if "trajectory" in kinds:
        written.append(outdir / "plot_trajectory.py")
        written[-1].write_text(_PLOT_TRAJECTORY)
    return written
