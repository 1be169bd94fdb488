"""Command-line interface.

Subcommands: sweep, design-gate, disorder, pulse, two-photon, loss-scaling,
replay.  Each run writes one CSV plus a JSON manifest recording the fully
resolved configuration; ``wgqed replay <manifest>`` reproduces the CSV byte
for byte at any thread count.  With --plot, a quick-look PNG is rendered
next to the CSV.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .disorder import disorder_sweep
from .errors import (ConfigError, NearSingularPhase, NoValidBranch,
                     SingularTransmission, WaveguideQEDError)
from .gate import (deterministic_phase_shift, find_coverage_branches,
                   operating_point, verify_operating_point)
from .pulse import (GaussianPulse, pulse_phase_shift,
                    pulse_transmission_probability, transmission_at)
from .runio import (Param, append_comment_block, load_manifest,
                    read_config_file, resolve_config, write_csv,
                    write_manifest)
from .scattering import EmitterParams
from .sweeps import (SweepGrid, fit_power_law, loss_scaling_samples,
                     sweep_response)
from .transfer import TimedArray, wrap_phase
from .two_photon import inelastic_density, symmetric_grid

PI = math.pi

_COMMON = [
    Param("seed", "int", 12345, "base seed for any stochastic sampling"),
    Param("threads", "int", 0, "worker threads (0 = auto); never affects output bytes"),
]

COMMAND_PARAMS: dict[str, list[Param]] = {
    "sweep": _COMMON + [
        Param("n_emitters", "int", 30, "number of emitters in the periodic chain"),
        Param("gamma", "float", 0.0, "non-waveguide loss rate (units of the waveguide rate)"),
        Param("delta_min", "float", -20.0, "detuning window start"),
        Param("delta_max", "float", 20.0, "detuning window end"),
        Param("n_delta", "int", 400, "detuning nodes"),
        Param("phi_min", "float", 0.0, "propagation-phase window start (radians)"),
        Param("phi_max", "float", PI, "propagation-phase window end (radians)"),
        Param("n_phi", "int", 400, "phase nodes"),
    ],
    "design-gate": _COMMON + [
        Param("n_emitters", "int", 10, "even emitter count of the gate"),
        Param("target_shift", "float", None, "target phase shift in radians, in (-pi, pi]"),
        Param("delta_max", "float", 20.0, "largest usable |detuning| for coverage branches"),
    ],
    "disorder": _COMMON + [
        Param("kind", "str", None, "'position' or 'frequency'"),
        Param("n_emitters", "int", 100, "number of emitters"),
        Param("gamma", "float", 0.0, "non-waveguide loss rate"),
        Param("sigma", "float", None, "disorder strength (radians / waveguide-rate units)"),
        Param("n_realizations", "int", 1000, "ensemble size per grid node"),
        Param("phase_weighting", "str", "uniform",
              "'uniform' or 'transmission' weights in the phase average"),
        Param("delta_min", "float", -20.0, "detuning window start (mean detuning)"),
        Param("delta_max", "float", 20.0, "detuning window end"),
        Param("n_delta", "int", 81, "detuning nodes"),
        Param("phi_min", "float", 0.0, "(mean) phase window start"),
        Param("phi_max", "float", PI, "(mean) phase window end"),
        Param("n_phi", "int", 81, "phase nodes"),
    ],
    "pulse": _COMMON + [
        Param("n_emitters", "int", 4, "number of emitters"),
        Param("omega_e", "float", 100.0, "emitter transition frequency (waveguide-rate units)"),
        Param("gamma", "float", 0.0, "non-waveguide loss rate"),
        Param("bandwidth", "float", 0.1, "pulse spectral width"),
        Param("quad_rtol", "float", 1e-9, "quadrature relative tolerance"),
        Param("include_reference", "bool", True,
              "divide out free propagation in the pulse phase"),
        Param("cubic_weight", "bool", True,
              "weight the phase integrand by the transmission probability"),
        Param("delta_min", "float", -3.0, "central-detuning window start"),
        Param("delta_max", "float", 3.0, "central-detuning window end"),
        Param("n_delta", "int", 40, "central-detuning nodes"),
        Param("phi_min", "float", 0.05 * PI, "central-phase window start"),
        Param("phi_max", "float", 0.95 * PI, "central-phase window end"),
        Param("n_phi", "int", 32, "central-phase nodes"),
    ],
    "two-photon": _COMMON + [
        Param("omega_e", "float", 100.0, "emitter transition frequency"),
        Param("gamma", "float", 0.0, "non-waveguide loss rate"),
        Param("omega_c_offset", "float", 2.0,
              "conserved central frequency minus the transition frequency"),
        Param("delta_in", "float", 0.0, "input photon-photon detuning"),
        Param("delta_out_max", "float", 320.0, "half-width of the output-detuning grid"),
        Param("n_delta_out", "int", 2561, "output-detuning nodes (odd)"),
    ],
    "loss-scaling": _COMMON + [
        Param("n_values", "ints", [10, 20, 40, 80, 160], "emitter counts to scan"),
        Param("gamma_values", "floats", [0.18], "loss rates to scan"),
        Param("threshold", "float", 0.1, "transmission-loss threshold defining the area"),
        Param("delta_min", "float", 0.0, "window start"),
        Param("delta_max", "float", 20.0, "window end"),
        Param("n_delta", "int", 400, "detuning nodes"),
        Param("phi_min", "float", 0.0, "phase window start"),
        Param("phi_max", "float", PI / 2.0, "phase window end"),
        Param("n_phi", "int", 400, "phase nodes"),
    ],
}


def _grid_from(config) -> SweepGrid:
    try:
        return SweepGrid(
            delta_range=(config["delta_min"], config["delta_max"]),
            phi_range=(config["phi_min"], config["phi_max"]),
            resolution=(config["n_delta"], config["n_phi"]),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _validate_positive(config, *names) -> None:
    for name in names:
        if not config[name] > 0:
            raise ConfigError(f"parameter '{name}' must be positive, got {config[name]}")


def _shift_over_pi(x) -> float:
    return x / PI


def cmd_sweep(config, out_path, plot=False):
    _validate_positive(config, "n_emitters")
    if config["gamma"] < 0:
        raise ConfigError(f"parameter 'gamma' must be nonnegative, got {config['gamma']}")
    grid = _grid_from(config)
    field = sweep_response(grid, config["n_emitters"], config["gamma"],
                           threads=config["threads"])
    deltas, phis = grid.deltas(), grid.phis()
    rows = []
    for i, phi in enumerate(phis):
        for j, delta in enumerate(deltas):
            rows.append((delta, phi, field.p_t[i, j], field.phase_shift[i, j],
                         field.flux_deficit[i, j],
                         _shift_over_pi(field.phase_shift[i, j])))
    write_csv(out_path, ["delta_over_gamma", "phi", "p_t", "phase_shift",
                         "flux_deficit", "phase_shift_over_pi"], rows)
    derived = {"singular_nodes": int(field.singular.sum())}
    write_manifest(out_path, "sweep", config, derived, __version__)
    if plot:
        from .plotting import render_sweep
        render_sweep(deltas, phis, field.p_t, field.phase_shift,
                     Path(str(out_path)).with_suffix(".png"),
                     title=f"N={config['n_emitters']}, gamma={config['gamma']:g}")
    return 0


def cmd_design_gate(config, out_path, plot=False):
    n = config["n_emitters"]
    if n % 2 or n < 2:
        raise ConfigError(f"parameter 'n_emitters' must be even and >= 2, got {n}")
    target = config["target_shift"]
    if not -PI < target <= PI:
        raise ConfigError(f"parameter 'target_shift' must lie in (-pi, pi], got {target}")
    _validate_positive(config, "delta_max")
    covering = {b.index: b for b in find_coverage_branches(n, config["delta_max"])}
    rows = []
    for m in range(-n, n + 1):
        phi = PI / 2.0 - (target + 2.0 * PI * m) / n
        if not 0.0 < phi < PI:
            continue
        try:
            point = operating_point(n, phi)
        except NearSingularPhase:
            continue
        p_res, ph_res = verify_operating_point(point)
        lo = PI / 2.0 - (2 * m + 1) * PI / n
        hi = PI / 2.0 - (2 * m - 1) * PI / n
        rows.append({
            "branch_index": m,
            "phi": point.phi,
            "delta_over_gamma": point.delta,
            "predicted_shift": point.predicted_shift,
            "shift_over_pi": _shift_over_pi(point.predicted_shift),
            "p_t_residual": p_res,
            "phase_residual": ph_res,
            "covers_full_range": m in covering,
            "crosses_delta_zero": lo <= 0.0 or hi >= PI,
        })
    if not rows:
        raise NoValidBranch(
            f"no branch realises shift {target!r} with n = {n} emitters")
    rows.sort(key=lambda r: r["branch_index"])
    header = ["branch_index", "phi", "delta_over_gamma", "predicted_shift",
              "shift_over_pi", "p_t_residual", "phase_residual",
              "covers_full_range", "crosses_delta_zero"]
    write_csv(out_path, header, [tuple(r[k] for k in header) for r in rows])
    best = next((r for r in rows if r["covers_full_range"]), None)
    derived = {"n_candidates": len(rows),
               "covering_branch_indices": sorted(covering),
               "selected": best}
    write_manifest(out_path, "design-gate", config, derived, __version__)
    if plot:
        from .plotting import render_design_points
        render_design_points(rows, Path(str(out_path)).with_suffix(".png"),
                             title=f"N={n}, target={target:g} rad")
    return 0


def cmd_disorder(config, out_path, plot=False):
    _validate_positive(config, "n_emitters", "n_realizations")
    if config["kind"] not in ("position", "frequency"):
        raise ConfigError(f"parameter 'kind' must be 'position' or 'frequency', "
                          f"got {config['kind']!r}")
    if config["sigma"] < 0:
        raise ConfigError(f"parameter 'sigma' must be nonnegative, got {config['sigma']}")
    if config["phase_weighting"] not in ("uniform", "transmission"):
        raise ConfigError("parameter 'phase_weighting' must be 'uniform' or 'transmission'")
    grid = _grid_from(config)
    field = disorder_sweep(
        grid.deltas(), grid.phis(), config["n_emitters"], config["kind"],
        config["sigma"], config["n_realizations"], config["seed"],
        gamma_loss=config["gamma"], phase_weighting=config["phase_weighting"],
        threads=config["threads"])
    rows = []
    for i, phi in enumerate(field.phis):
        for j, delta in enumerate(field.deltas):
            rows.append((delta, phi, field.mean_pt[i, j], field.mean_shift[i, j],
                         field.resultant_length[i, j], field.n_effective[i, j],
                         _shift_over_pi(field.mean_shift[i, j])))
    write_csv(out_path, ["delta_over_gamma", "phi_mean", "mean_pt", "mean_shift",
                         "resultant_length", "n_effective", "mean_shift_over_pi"],
              rows)
    write_manifest(out_path, "disorder", config, {}, __version__)
    if plot:
        from .plotting import render_sweep
        render_sweep(field.deltas, field.phis, field.mean_pt, field.mean_shift,
                     Path(str(out_path)).with_suffix(".png"),
                     title=f"{config['kind']} disorder, sigma={config['sigma']:g}")
    return 0


def _pulse_node(args):
    delta_c, phi_c, config = args
    n = config["n_emitters"]
    omega_e = config["omega_e"]
    pulse = GaussianPulse(omega_c=omega_e + delta_c, bandwidth=config["bandwidth"])
    try:
        array = TimedArray.at_operating_point(n, phi_c, delta_c, omega_e,
                                              gamma_loss=config["gamma"])
        t_mono = complex(transmission_at(np.array([pulse.omega_c]), array)[0])
        mono_pt = abs(t_mono) ** 2
        mono_shift = math.atan2(t_mono.imag, t_mono.real)
        p_pulse = pulse_transmission_probability(pulse, array, rtol=config["quad_rtol"])
        s_pulse = pulse_phase_shift(pulse, array, rtol=config["quad_rtol"],
                                    include_reference=config["include_reference"],
                                    cubic_weight=config["cubic_weight"])
    except SingularTransmission:
        return (delta_c, phi_c) + (math.nan,) * 6
    dshift = float(wrap_phase(s_pulse - mono_shift))
    return (delta_c, phi_c, p_pulse, s_pulse, mono_pt, mono_shift,
            p_pulse - mono_pt, dshift)


def cmd_pulse(config, out_path, plot=False):
    _validate_positive(config, "n_emitters", "bandwidth", "quad_rtol", "omega_e")
    grid = _grid_from(config)
    deltas, phis = grid.deltas(), grid.phis()
    jobs = [(float(d), float(p), config) for p in phis for d in deltas]
    threads = config["threads"] if config["threads"] > 0 else 1
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_pulse_node, jobs))
    else:
        results = [_pulse_node(j) for j in jobs]
    header = ["omega_c_detuning", "phi", "pulse_pt", "pulse_shift", "mono_pt",
              "mono_shift", "dp_t", "dshift", "dshift_over_pi"]
    rows = [r + (_shift_over_pi(r[7]),) for r in results]
    write_csv(out_path, header, rows)
    write_manifest(out_path, "pulse", config, {}, __version__)
    if plot:
        from .plotting import render_pulse
        dp = np.array([r[6] for r in results]).reshape(phis.size, deltas.size)
        ds = np.array([r[7] for r in results]).reshape(phis.size, deltas.size)
        render_pulse(deltas, phis, dp, ds, Path(str(out_path)).with_suffix(".png"),
                     title=f"bandwidth={config['bandwidth']:g}")
    return 0


def cmd_two_photon(config, out_path, plot=False):
    _validate_positive(config, "omega_e", "delta_out_max", "n_delta_out")
    if config["n_delta_out"] % 2 == 0:
        raise ConfigError("parameter 'n_delta_out' must be odd so zero is a node")
    emitter = EmitterParams(omega_e=config["omega_e"], gamma_loss=config["gamma"])
    omega_c = config["omega_e"] + config["omega_c_offset"]
    grid = symmetric_grid(config["delta_out_max"], config["n_delta_out"])
    results = inelastic_density(omega_c, config["delta_in"], grid, emitter)
    rows = [(r.delta_out, r.density, r.phase, _shift_over_pi(r.phase))
            for r in results]
    write_csv(out_path, ["delta_out", "density", "phase", "phase_over_pi"], rows)
    dens = np.array([r.density for r in results])
    peak_pos = grid[grid > 0][np.argmax(dens[grid > 0])]
    derived = {"omega_c": omega_c, "delta_in": config["delta_in"],
               "gamma": config["gamma"], "omega_e": config["omega_e"],
               "positive_peak_delta_out": float(peak_pos)}
    write_manifest(out_path, "two-photon", config, derived, __version__)
    if plot:
        from .plotting import render_two_photon
        render_two_photon(grid, dens, [r.phase for r in results],
                          Path(str(out_path)).with_suffix(".png"),
                          title=f"omega_c offset {config['omega_c_offset']:g}")
    return 0


def cmd_loss_scaling(config, out_path, plot=False):
    if not config["n_values"]:
        raise ConfigError("parameter 'n_values' must list at least one emitter count")
    if not config["gamma_values"]:
        raise ConfigError("parameter 'gamma_values' must list at least one loss rate")
    if not 0.0 < config["threshold"] < 1.0:
        raise ConfigError(f"parameter 'threshold' must lie in (0, 1), "
                          f"got {config['threshold']}")
    grid = _grid_from(config)
    samples = loss_scaling_samples(config["n_values"], config["gamma_values"],
                                   grid, config["threshold"],
                                   threads=config["threads"])
    write_csv(out_path, ["n_emitters", "gamma", "a_gamma"], samples)
    summary: list[str] = []
    fits = {}
    derived: dict = {"samples": [list(s) for s in samples]}
    for g in config["gamma_values"]:
        pts = [(n, a) for n, gg, a in samples if gg == g and a > 0]
        if len(pts) >= 4 and len({n for n, _ in pts}) >= 2:
            fit = fit_power_law(pts)
            fits[g] = fit
            summary.append(
                f"gamma={g:g}: A ~ {fit.prefactor:.4g} * N^{fit.exponent:.4f} "
                f"(rms log residual {fit.residual:.3g})")
            derived[f"fit_gamma_{g:g}"] = {
                "exponent": fit.exponent, "prefactor": fit.prefactor,
                "residual": fit.residual}
    for n in config["n_values"]:
        pts = [(gg, a) for nn, gg, a in samples if nn == n and a > 0]
        if len(pts) >= 4 and len({gg for gg, _ in pts}) >= 2:
            fit = fit_power_law(pts)
            summary.append(
                f"N={n}: A ~ {fit.prefactor:.4g} * gamma^{fit.exponent:.4f} "
                f"(rms log residual {fit.residual:.3g})")
            derived[f"fit_n_{n}"] = {
                "exponent": fit.exponent, "prefactor": fit.prefactor,
                "residual": fit.residual}
    if summary:
        append_comment_block(out_path, summary)
        for line in summary:
            print(line)
    write_manifest(out_path, "loss-scaling", config, derived, __version__)
    if plot:
        from .plotting import render_loss_scaling
        render_loss_scaling(samples, fits, Path(str(out_path)).with_suffix(".png"))
    return 0


COMMANDS = {
    "sweep": cmd_sweep,
    "design-gate": cmd_design_gate,
    "disorder": cmd_disorder,
    "pulse": cmd_pulse,
    "two-photon": cmd_two_photon,
    "loss-scaling": cmd_loss_scaling,
}

_ARG_TYPES = {"int": int, "float": float, "str": str, "bool": None,
              "floats": None, "ints": None}


def _add_command_args(sub: argparse.ArgumentParser, params: list[Param]) -> None:
    sub.add_argument("--config", help="flat key = value config file")
    sub.add_argument("--out", help="output CSV path (default <command>.csv)")
    sub.add_argument("--plot", action="store_true",
                     help="render a quick-look PNG next to the CSV")
    for p in params:
        flag = "--" + p.name.replace("_", "-")
        if p.kind == "bool":
            sub.add_argument(flag, default=None,
                             type=lambda s: s.lower() in ("true", "1", "yes", "on"),
                             metavar="BOOL", help=p.help)
        elif p.kind in ("floats", "ints"):
            cast = float if p.kind == "floats" else int
            sub.add_argument(flag, default=None, metavar="LIST",
                             type=lambda s, c=cast: [c(tok) for tok in s.split(",")],
                             help=p.help + " (comma separated)")
        else:
            sub.add_argument(flag, default=None, type=_ARG_TYPES[p.kind],
                             help=p.help)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wgqed",
        description="Photon scattering from 1D emitter arrays: sweeps, gate "
                    "design, disorder ensembles, pulse and two-photon data.")
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)
    for command, params in COMMAND_PARAMS.items():
        sub = subs.add_parser(command, help=f"run the {command} computation")
        _add_command_args(sub, params)
    replay = subs.add_parser("replay", help="re-run a recorded manifest")
    replay.add_argument("manifest", help="path to a .manifest.json file")
    replay.add_argument("--out", help="output CSV path (default <command>.csv)")
    replay.add_argument("--threads", type=int, default=None,
                        help="override the recorded thread count")
    replay.add_argument("--plot", action="store_true")
    return parser


def _run(command: str, config: dict, out: str | None, plot: bool) -> int:
    out_path = Path(out) if out else Path(f"{command.replace('-', '_')}.csv")
    return COMMANDS[command](config, out_path, plot=plot)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "replay":
            doc = load_manifest(args.manifest)
            command = doc["command"]
            if command not in COMMANDS:
                raise ConfigError(f"manifest names unknown command {command!r}")
            params = COMMAND_PARAMS[command]
            stored = {k: v for k, v in doc["config"].items()}
            unknown = set(stored) - {p.name for p in params}
            if unknown:
                raise ConfigError(
                    f"manifest config has unknown key(s): {', '.join(sorted(unknown))}")
            config = resolve_config(params, {}, stored)
            if args.threads is not None:
                config["threads"] = args.threads
            return _run(command, config, args.out, args.plot)

        params = COMMAND_PARAMS[args.command]
        file_values = read_config_file(args.config) if args.config else {}
        overrides = {p.name: getattr(args, p.name, None) for p in params}
        config = resolve_config(params, file_values, overrides)
        return _run(args.command, config, args.out, args.plot)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except WaveguideQEDError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
