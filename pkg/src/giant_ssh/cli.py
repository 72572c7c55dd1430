"""Command-line entry point: ``giant-ssh <command> ...`` (also ``python3 -m giant_ssh``)."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io, presets
from .errors import ConfigError, GiantSSHError
from .protocols import (
    Scenario,
    gap_eigensystem,
    prepare_initial_state,
    ramp_crossings,
    run_transfer,
    shape_of,
)
from .sweep import character_exchanges, find_crossings


def _shape(rep) -> dict:
    return {"dominant_atom": rep.dominant_atom, "shape": rep.shape.value,
            "peak_count": rep.peak_count, "footprint_probability": rep.footprint_probability}


def _crossing(rep) -> dict:
    return {"pair": list(rep.pair), "detuning_star_q": rep.detuning_star, "energy_star_q": rep.energy_star,
            "min_separation_q": rep.min_separation, "is_true_crossing": rep.is_true_crossing,
            "flanking_fidelities": rep.flanking_fidelities}


def _apply_overrides(scenario: Scenario, args) -> Scenario:
    changes = {}
    if getattr(args, "dt", None) is not None:
        if not 0 < args.dt * scenario.lattice.q <= 0.01:
            raise ConfigError(f"--dt: q*dt={args.dt:g} must lie in (0, 0.01]")
        changes["dt"] = args.dt
    if getattr(args, "grid", None) is not None:
        if not args.grid > 0:
            raise ConfigError("--grid spacing must be positive")
        changes["sweep_spacing"] = args.grid
    return replace(scenario, **changes) if changes else scenario


def _outdir(args, default: str) -> Path:
    out = Path(args.out or default)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------- stages

def run_spectrum(scenario: Scenario, out: Path, detuning: float | None = None, tag: str = "") -> dict:
    x = scenario.transfer.start if detuning is None else detuning
    freqs = scenario.frequencies_at(x)
    es = gap_eigensystem(scenario, freqs)
    layout = scenario.system.one_excitation().layout
    dominant = [int(np.argmax(np.abs(es.vectors[layout.atom_slice, k]))) + 1 for k in range(len(es))]
    (out / f"spectrum{tag}.csv").write_text(io.spectrum_csv(es.energies, es.labels, dominant))
    gaps = []
    for k in es.gap_indices:
        psi = scenario.system.layout.embed(es.state(k))
        gaps.append({"energy_q": float(es.energies[k]), **_shape(shape_of(scenario, psi))})
    return {"detuning_q": x, "frequencies_q": freqs.tolist(), "gap_state_count": len(gaps), "gap_states": gaps,
            "label_counts": {lab.value: int(sum(1 for l in es.labels if l == lab)) for lab in set(es.labels)}}


def run_sweep_stage(scenario: Scenario, out: Path) -> dict:
    sr = scenario.run_sweep()
    io.export_sweep(sr, out / "sweep.csv")
    reports = find_crossings(sr, scenario.gap_threshold)
    (out / "crossings.csv").write_text(io.crossings_csv(reports))
    layout = scenario.system.one_excitation().layout
    return {
        "grid_points": len(sr.grid),
        "gap_branches": sr.gap_branches,
        "swap_points": {f"{a}-{b}": sr.swap_points(a, b)
                        for a, b in zip(sr.gap_branches[:-1], sr.gap_branches[1:])},
        "character_exchanges": [float(sr.grid[p]) for p in character_exchanges(sr, layout)],
        "crossings": [_crossing(r) for r in reports],
        "warnings": {str(k): v for k, v in sr.warnings.items()},
    }


def run_prepare_stage(scenario: Scenario, out: Path):
    prep = prepare_initial_state(scenario)
    rec = prep.trajectory
    rec.fidelity_series["f_target"] = rec.fidelity_series["f_init"]
    io.export_trajectory(rec, out / "prepare")
    summary = {"t_peak_q": prep.t_peak, "peak_fidelity": prep.peak_fidelity,
               "target_energy_q": prep.target_energy, "driven_amplitude": prep.driven_amplitude,
               "rabi_estimate_q": prep.rabi_estimate,
               "max_norm_drift": rec.max_norm_drift}
    return prep, summary


def run_transfer_stage(scenario: Scenario, out: Path, psi) -> dict:
    res = run_transfer(scenario, psi)
    io.export_trajectory(res.trajectory, out / "transfer")
    crossings = ramp_crossings(scenario)
    summary = res.summary()
    summary["max_norm_drift"] = res.trajectory.max_norm_drift
    summary["ramp_crossings"] = [_crossing(r) for r in crossings]
    return summary


# ---------------------------------------------------------------- commands

def cmd_spectrum(args):
    sc = _apply_overrides(io.load_scenario(args.config), args)
    out = _outdir(args, f"out_{sc.name}_spectrum")
    io.write_config_echo(sc, out)
    return {"spectrum": run_spectrum(sc, out, args.detuning)}, out, ()


def cmd_sweep(args):
    sc = _apply_overrides(io.load_scenario(args.config), args)
    out = _outdir(args, f"out_{sc.name}_sweep")
    io.write_config_echo(sc, out)
    return {"sweep": run_sweep_stage(sc, out)}, out, ("sweep",)


def cmd_prepare(args):
    sc = _apply_overrides(io.load_scenario(args.config), args)
    out = _outdir(args, f"out_{sc.name}_prepare")
    io.write_config_echo(sc, out)
    _, summary = run_prepare_stage(sc, out)
    return {"prepare": summary}, out, ("trajectory",)


def cmd_transfer(args):
    sc = _apply_overrides(io.load_scenario(args.config), args)
    out = _outdir(args, f"out_{sc.name}_transfer")
    io.write_config_echo(sc, out)
    prep, psum = run_prepare_stage(sc, out)
    return {"prepare": psum, "transfer": run_transfer_stage(sc, out, prep.state)}, out, ("trajectory",)


def cmd_reproduce(args):
    sc = _apply_overrides(presets.preset(args.figure), args)
    out = _outdir(args, f"out_{args.figure}")
    io.write_config_echo(sc, out)
    summary: dict = {"figure": args.figure}
    kinds = ["sweep"]
    if args.figure == "fig2":
        for name, x in presets.FIG2_POINTS.items():
            summary[f"spectrum_{name}"] = run_spectrum(sc, out, x, tag=f"_{name}")
        summary["fidelities"] = presets.fig2_fidelities(sc)
        summary["sweep"] = run_sweep_stage(sc, out)
    elif args.figure == "fig4":
        for name, x in presets.FIG4_POINTS.items():
            summary[f"spectrum_{name}"] = run_spectrum(sc, out, x, tag=f"_{name}")
        summary["fidelities"] = presets.fig4_fidelities(sc)
        summary["sweep"] = run_sweep_stage(sc, out)
    else:
        summary["spectrum"] = run_spectrum(sc, out)
        summary["sweep"] = run_sweep_stage(sc, out)
        prep, summary["prepare"] = run_prepare_stage(sc, out)
        summary["transfer"] = run_transfer_stage(sc, out, prep.state)
        kinds.append("trajectory")
    return summary, out, tuple(kinds)


def cmd_preset(args):
    sys.stdout.write(presets.PRESET_TEXT[args.figure])
    return None, None, ()


def cmd_selftest(args):
    from .selftest import run_selftest

    results = run_selftest()
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    failed = [name for name, ok, _ in results if not ok]
    if failed:
        raise GiantSSHError(f"selftest failures: {', '.join(failed)}")
    return None, None, ()


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory (created if missing)")
    common.add_argument("--dt", type=float, help="RK4 time step in units of 1/q")
    common.add_argument("--grid", type=float, help="sweep grid spacing in units of q")
    common.add_argument("--emit-plots", action="store_true", help="write matplotlib scripts next to the CSVs")

    parser = argparse.ArgumentParser(prog="giant-ssh", description="Giant atoms on an SSH photonic ring.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", parents=[common], help="diagonalize and classify one configuration")
    p.add_argument("config")
    p.add_argument("--detuning", type=float, help="detuning to diagonalize at (default: ramp start)")
    p.set_defaults(func=cmd_spectrum)
    for name, func, text in (("sweep", cmd_sweep, "detuning sweep with crossing analysis"),
                             ("prepare", cmd_prepare, "driven preparation of the initial gap state"),
                             ("transfer", cmd_transfer, "preparation followed by the detuning ramp")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("config")
        p.set_defaults(func=func)
    p = sub.add_parser("reproduce", parents=[common], help="run a built-in figure preset")
    p.add_argument("figure", choices=sorted(presets.PRESET_TEXT))
    p.set_defaults(func=cmd_reproduce)
    p = sub.add_parser("preset", help="print the config text of a built-in preset")
    p.add_argument("figure", choices=sorted(presets.PRESET_TEXT))
    p.set_defaults(func=cmd_preset)
    p = sub.add_parser("selftest", help="run the built-in invariant checks")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        summary, out, kinds = args.func(args)
    except GiantSSHError as exc:
        print(json.dumps(exc.record(), sort_keys=True), file=sys.stderr)
        return 2
    except (OSError, KeyError) as exc:
        print(json.dumps({"error": "io", "message": str(exc)}, sort_keys=True), file=sys.stderr)
        return 2
    if out is not None:
        io.write_summary(summary, out / "summary.json")
        if args.emit_plots:
            io.emit_plot_scripts(out, [k for k in kinds if k == "sweep"])
            for sub in ("prepare", "transfer"):
                if (out / sub).is_dir():
                    io.emit_plot_scripts(out / sub, ("trajectory",))
        print(json.dumps({"status": "ok", "out": str(out)}, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
