"""Command-line front end.

Every command resolves its settings as built-in defaults < config file < flags,
records the full resolved set in a manifest and writes CSV outputs whose
header embeds the manifest hash.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import classical as cl
from . import kicked_dirac as kd
from .core import ParameterError, PhysicalParams, RunConfig, kick_amplitude, validate
from .dirac_box import Basis
from .io import ConfigError, OutputSet, csv_text, load_config, make_manifest

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3


class ConvergenceFailure(RuntimeError):
    pass


CLASSICAL_DEFAULTS = dict(
    box_length=1.0, wavelength=1.0, kick_strength=0.0159, kick_period=100.0,
    kick_amplitude_mode="as-printed", ensemble_size=1000, n_kicks=1000,
    momentum_halfwidth=0.1,
)

QUANTUM_DEFAULTS = dict(
    box_length=10.0, wavelength=None, kick_strength=0.5, kick_period=200.0,
    basis_size=256, grid_points=1024, phase_mode="scalar", n_kicks=100,
    samples_per_period=1, initial_level=40, renormalize=False, max_defect=0.5,
)

PACKET_DEFAULTS = dict(
    packet_center=None, packet_width=None, packet_velocity=0.0,
    packet_spin=[1.0, 0.0, 0.0, 0.0],
)

COMMAND_DEFAULTS = {
    "classical-portrait": dict(CLASSICAL_DEFAULTS, n_orbits=100),
    "classical-energy": dict(CLASSICAL_DEFAULTS),
    "classical-sweep": dict(CLASSICAL_DEFAULTS, n_eps=64, n_T=64, eps_max=0.2,
                            T_max=200.0, workers=None),
    "spectrum": dict(box_length=10.0, basis_size=256),
    "quantum-energy": dict(QUANTUM_DEFAULTS),
    "density": dict(QUANTUM_DEFAULTS, snapshot_every=1),
    "zitterbewegung": {**QUANTUM_DEFAULTS, **PACKET_DEFAULTS, "kick_strengths": [0.0, 0.1],
                       "kick_period": 10.0, "n_kicks": 200, "samples_per_period": 10,
                       "packet_velocity": -0.75},
    "wavepacket": {**QUANTUM_DEFAULTS, **PACKET_DEFAULTS, "kick_strength": 0.1,
                   "kick_period": 10.0, "n_kicks": 467, "snapshot_kicks": [0, 64, 261, 467]},
}
# the eps list replaces the single kick strength; packets replace the initial level
del COMMAND_DEFAULTS["zitterbewegung"]["kick_strength"]
del COMMAND_DEFAULTS["zitterbewegung"]["initial_level"]
del COMMAND_DEFAULTS["wavepacket"]["initial_level"]

KNOWN_KEYS = {"seed", "output_dir"} | {k for d in COMMAND_DEFAULTS.values() for k in d}


def _float_list(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _complex_list(text: str) -> list[complex]:
    return [complex(t.replace(" ", "")) for t in text.split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML file of key = value settings")
    common.add_argument("--out", dest="output_dir", help="output directory")
    common.add_argument("--seed", type=int)

    physical = argparse.ArgumentParser(add_help=False)
    physical.add_argument("--box-length", type=float)
    physical.add_argument("--wavelength", type=float)
    physical.add_argument("--kick-strength", type=float)
    physical.add_argument("--kick-period", type=float)

    classical = argparse.ArgumentParser(add_help=False)
    classical.add_argument("--kick-amplitude-mode", choices=["as-printed", "hamiltonian"])
    classical.add_argument("--ensemble-size", type=int)
    classical.add_argument("--n-kicks", type=int)
    classical.add_argument("--momentum-halfwidth", type=float)

    quantum = argparse.ArgumentParser(add_help=False)
    quantum.add_argument("--n-max", dest="basis_size", type=int)
    quantum.add_argument("--grid-points", type=int)
    quantum.add_argument("--phase-mode", choices=["scalar", "mass-term"])
    quantum.add_argument("--n-kicks", type=int)
    quantum.add_argument("--samples-per-period", type=int)
    quantum.add_argument("--initial-level", type=int)
    quantum.add_argument("--renormalize", action="store_true", default=None)
    quantum.add_argument("--max-defect", type=float)

    packet = argparse.ArgumentParser(add_help=False)
    packet.add_argument("--packet-center", type=float)
    packet.add_argument("--packet-width", type=float)
    packet.add_argument("--packet-velocity", type=float)
    packet.add_argument("--packet-spin", type=_complex_list,
                        help="four comma-separated amplitudes, e.g. 1,0,0,0")

    parser = argparse.ArgumentParser(
        prog="relkick",
        description="Kicked relativistic particle in a 1D box: classical map and Dirac dynamics.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("classical-portrait", parents=[common, physical, classical],
                       help="phase-space points (orbit, kick, x, p)")
    p.add_argument("--n-orbits", type=int, help="1 gives a single long trajectory")
    sub.add_parser("classical-energy", parents=[common, physical, classical],
                   help="ensemble mean kinetic energy per kick")
    p = sub.add_parser("classical-sweep", parents=[common, physical, classical],
                       help="final mean energy on an (eps, T) grid")
    p.add_argument("--n-eps", type=int)
    p.add_argument("--n-T", dest="n_T", type=int)
    p.add_argument("--eps-max", type=float)
    p.add_argument("--T-max", dest="T_max", type=float)
    p.add_argument("--workers", type=int, help="default: $RELKICK_WORKERS or 1")

    p = sub.add_parser("spectrum", parents=[common], help="box spectrum (n, k, E, A)")
    p.add_argument("--box-length", type=float)
    p.add_argument("--n-max", dest="basis_size", type=int)

    sub.add_parser("quantum-energy", parents=[common, physical, quantum],
                   help="norm, kinetic energy and mean position per kick")
    p = sub.add_parser("density", parents=[common, physical, quantum],
                       help="probability density snapshots from an eigenstate")
    p.add_argument("--snapshot-every", type=int)
    p = sub.add_parser("zitterbewegung", parents=[common, physical, quantum, packet],
                       help="mean position of a Gaussian packet, free and kicked")
    p.add_argument("--kick-strengths", type=_float_list, help="comma-separated eps list")
    p = sub.add_parser("wavepacket", parents=[common, physical, quantum, packet],
                       help="Gaussian packet density snapshots")
    p.add_argument("--snapshot-kicks", type=_int_list, help="comma-separated kick indices")
    return parser


def resolve_settings(command: str, args: argparse.Namespace) -> dict:
    settings = {"seed": 20240101, "output_dir": "."}
    settings.update(COMMAND_DEFAULTS[command])
    if getattr(args, "config", None):
        cfg = load_config(args.config)
        unknown = sorted(set(cfg) - KNOWN_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        settings.update({k: v for k, v in cfg.items() if k in settings})
    for key, value in vars(args).items():
        if key in ("command", "config") or value is None:
            continue
        settings[key] = value
    if "wavelength" in settings and settings["wavelength"] is None:
        settings["wavelength"] = settings["box_length"]
    if "packet_center" in settings:
        if settings["packet_center"] is None:
            settings["packet_center"] = 0.5 * settings["box_length"]
        if settings["packet_width"] is None:
            settings["packet_width"] = settings["box_length"] / 50.0
        settings["packet_spin"] = [complex(s) if not isinstance(s, str)
                                   else complex(s.replace(" ", ""))
                                   for s in settings["packet_spin"]]
    return settings


def _params(s: dict, kick_strength=None) -> PhysicalParams:
    return validate(PhysicalParams(
        box_length=float(s["box_length"]),
        wavelength=float(s["wavelength"]),
        kick_strength=float(s["kick_strength"] if kick_strength is None else kick_strength),
        kick_period=float(s["kick_period"]),
        kick_amplitude_mode=s.get("kick_amplitude_mode", "as-printed"),
    ))


def _run_config(s: dict) -> RunConfig:
    return RunConfig(
        seed=int(s["seed"]),
        ensemble_size=int(s.get("ensemble_size", 1)),
        n_kicks=max(1, int(s.get("n_kicks", 1))),
        basis_size=int(s.get("basis_size", 1)),
        grid_points=int(s.get("grid_points", 2)),
        output_dir=str(s["output_dir"]),
    )


def _check_defect(op: kd.KickOperator, s: dict):
    if op.defect > float(s["max_defect"]) and not s["renormalize"]:
        raise ConvergenceFailure(
            f"unitarity defect {op.defect:.3g} exceeds max_defect {s['max_defect']} "
            f"(eps={op.kick_strength}); enlarge --n-max or pass --renormalize")


# -- commands: each returns (outputs {name: (columns, rows, notes)}, derived) --

def cmd_classical_portrait(s):
    params, cfg = _params(s), _run_config(s)
    ens = cl.initial_ensemble(params, RunConfig(cfg.seed, int(s["n_orbits"])),
                              float(s["momentum_halfwidth"]))
    traj = cl.trajectory(ens, params, cfg.n_kicks)
    rows = [(o, k + 1, traj.x[k, o], traj.p[k, o])
            for o in range(traj.x.shape[1]) for k in range(cfg.n_kicks)]
    return ({"portrait.csv": (["orbit", "kick_index", "x", "p"], rows, ())},
            {"kappa": kick_amplitude(params)})


def cmd_classical_energy(s):
    params, cfg = _params(s), _run_config(s)
    init = cl.initial_ensemble(params, cfg, float(s["momentum_halfwidth"]))
    series = cl.ensemble_energy(params, cfg, init)
    rows = list(zip(series.kicks, series.mean, series.var))
    notes = ("E_kin = sqrt(p^2+1) - 1 (rest mass subtracted)",)
    return ({"energy.csv": (["kick_index", "mean_E", "var_E"], rows, notes)},
            {"kappa": kick_amplitude(params), "initial_mean_E": series.initial_mean})


def cmd_classical_sweep(s):
    params, cfg = _params(s), _run_config(s)
    eps, Ts = cl.default_sweep_grid(int(s["n_eps"]), int(s["n_T"]),
                                    float(s["eps_max"]), float(s["T_max"]))
    workers = s["workers"] or cl.default_workers()
    grid = cl.parameter_sweep(eps, Ts, params, cfg, workers=int(workers))
    rows = [(e, T, grid[i, j]) for i, e in enumerate(eps) for j, T in enumerate(Ts)]
    # worker count must not influence outputs or manifest
    s.pop("workers", None)
    return ({"sweep.csv": (["eps", "T", "mean_E_final"], rows, ())},
            {"cells": len(rows)})


def cmd_spectrum(s):
    basis = Basis(int(s["basis_size"]), float(s["box_length"]))
    rows = list(zip(basis.n, basis.k, basis.energy, basis.norm))
    return {"spectrum.csv": (["n", "k_n", "E_n", "A_n"], rows, ())}, {"N_max": basis.size}


def _series_rows(series, prefix=()):
    return [prefix + (t, n, e, x) for t, n, e, x in
            zip(series.time, series.norm, series.energy, series.position)]


def _quantum_setup(s, kick_strength=None):
    params = _params(s, kick_strength)
    basis = Basis(int(s["basis_size"]), params.box_length)
    op = kd.kick_matrix(params, basis, s["phase_mode"])
    _check_defect(op, s)
    return params, basis, op


def cmd_quantum_energy(s):
    params, basis, op = _quantum_setup(s)
    level = int(s["initial_level"])
    series = kd.observable_series(kd.eigenstate(basis, level), params, op,
                                  int(s["n_kicks"]), int(s["samples_per_period"]),
                                  renormalize=bool(s["renormalize"]))
    derived = {"N_max": basis.size, "bessel_order": op.bessel_order, "defect": op.defect,
               "max_step_norm_change": series.max_step_norm_change}
    if 2 * level <= basis.size:
        deviation = kd.energy_convergence(lambda b: kd.eigenstate(b, level), params,
                                          basis.size, int(s["n_kicks"]), s["phase_mode"])
        derived.update(convergence_rel_dev=deviation, convergence_flag=deviation > 0.01)
        notes = (f"convergence vs N_max/2: max relative E deviation {deviation:.3e}"
                 + (" (FLAGGED > 1%)" if deviation > 0.01 else ""),)
    else:
        derived.update(convergence_rel_dev=None, convergence_flag=True)
        notes = ("convergence vs N_max/2 skipped: initial level outside the half basis",)
    return ({"quantum_energy.csv": (["t", "norm", "E_mean", "x_mean"],
                                    _series_rows(series), notes)}, derived)


def _density_rows(series, T):
    rows = []
    for k in sorted(series.snapshots):
        rho = series.snapshots[k]
        rows += [(k * T, x, r) for x, r in zip(series.grid, rho)]
    return rows


def cmd_density(s):
    params, basis, op = _quantum_setup(s)
    n = int(s["n_kicks"])
    every = max(1, int(s["snapshot_every"]))
    series = kd.observable_series(kd.eigenstate(basis, int(s["initial_level"])), params, op,
                                  n, 1, density_at=range(0, n + 1, every),
                                  grid_points=int(s["grid_points"]),
                                  renormalize=bool(s["renormalize"]))
    derived = {"N_max": basis.size, "bessel_order": op.bessel_order, "defect": op.defect}
    return ({"density.csv": (["t", "x", "rho"], _density_rows(series, params.kick_period), ()),
             "series.csv": (["t", "norm", "E_mean", "x_mean"], _series_rows(series), ())},
            derived)


def _packet(s, basis):
    spec = kd.GaussianPacketSpec(float(s["packet_center"]), float(s["packet_width"]),
                                 float(s["packet_velocity"]), tuple(s["packet_spin"]))
    return kd.gaussian_packet(spec, basis)


def cmd_zitterbewegung(s):
    rows = []
    derived = {"N_max": int(s["basis_size"]), "defects": [], "bessel_orders": []}
    packet = None
    for eps in s["kick_strengths"]:
        params, basis, op = _quantum_setup(s, eps)
        if packet is None:
            packet = _packet(s, basis)
        series = kd.observable_series(packet.state, params, op, int(s["n_kicks"]),
                                      int(s["samples_per_period"]),
                                      renormalize=bool(s["renormalize"]))
        rows += _series_rows(series, (eps,))
        derived["defects"].append(op.defect)
        derived["bessel_orders"].append(op.bessel_order)
    derived["captured_norm"] = packet.captured_norm
    derived["in_box_fraction"] = packet.in_box_fraction
    return ({"zitterbewegung.csv": (["eps", "t", "norm", "E_mean", "x_mean"], rows, ())},
            derived)


def cmd_wavepacket(s):
    params, basis, op = _quantum_setup(s)
    packet = _packet(s, basis)
    snaps = [int(k) for k in s["snapshot_kicks"]]
    n = max(int(s["n_kicks"]), max(snaps))
    series = kd.observable_series(packet.state, params, op, n, int(s["samples_per_period"]),
                                  density_at=snaps, grid_points=int(s["grid_points"]),
                                  renormalize=bool(s["renormalize"]))
    derived = {"N_max": basis.size, "bessel_order": op.bessel_order, "defect": op.defect,
               "captured_norm": packet.captured_norm,
               "in_box_fraction": packet.in_box_fraction}
    return ({"density.csv": (["t", "x", "rho"], _density_rows(series, params.kick_period), ()),
             "series.csv": (["t", "norm", "E_mean", "x_mean"], _series_rows(series), ())},
            derived)


COMMANDS = {
    "classical-portrait": cmd_classical_portrait,
    "classical-energy": cmd_classical_energy,
    "classical-sweep": cmd_classical_sweep,
    "spectrum": cmd_spectrum,
    "quantum-energy": cmd_quantum_energy,
    "density": cmd_density,
    "zitterbewegung": cmd_zitterbewegung,
    "wavepacket": cmd_wavepacket,
}


def run(command: str, settings: dict) -> list[str]:
    """Execute ``command`` with resolved ``settings``; return written paths."""
    start = time.perf_counter()
    settings = dict(settings)
    outputs, derived = COMMANDS[command](settings)
    manifest = make_manifest(command, settings, derived)
    out = OutputSet(settings["output_dir"])
    try:
        for name, (columns, rows, notes) in outputs.items():
            out.write(name, csv_text(columns, rows, manifest, notes))
        manifest["outputs"] = sorted(outputs)
        manifest["wall_clock_s"] = round(time.perf_counter() - start, 3)
        out.write(f"{command}.manifest.ndjson", json.dumps(manifest, sort_keys=True) + "\n")
        return out.commit()
    except BaseException:
        out.discard()
        raise


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = resolve_settings(args.command, args)
        paths = run(args.command, settings)
    except (ParameterError, ConfigError) as exc:
        print(f"relkick: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceFailure as exc:
        print(f"relkick: convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    for path in paths:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
