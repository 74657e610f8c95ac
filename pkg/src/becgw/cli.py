"""Command line interface: ``becgw <subcommand> [--config PATH] [--f HZ] ...``.

Exit codes: 0 success, 2 invalid configuration or usage, 3 numerical
failure, 4 I/O failure.
"""

import argparse
import json
import math
from pathlib import Path
import sys

from . import __version__
from .config import FIGURE_IDS, parse_config, preset_path
from .csvio import emit_csv, render_csv
from .decoherence import (
    APPROXIMATION_NOTE,
    beliaev_rate,
    decoherence_time,
    decohered_sensitivity,
    optimal_tau,
    squeezing_decay_time,
)
from .errors import ConfigError
from .figures import BUILDERS, plot_script
from .metrology import (
    expand_transform,
    qfi_finite_difference,
    qfi_perturbative,
    r_factor,
    squeezed_cov,
    transform_cov,
)
from .mode_dynamics import BogoliubovPair, GwWaveform, PhononMode, beta_analytic, beta_slope, numeric_bogoliubov
from .sensitivity import PLOTTED_QUANTITY, sweep_curve, total_sensitivity

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

POINT_HEADER = ["f_gw", "delta_eps_sq", "curve_value", "valid"]


def _load(args, default=None):
    src = args.config or default
    if src is None:
        raise ConfigError(["--config is required for this subcommand"])
    if src == "-":
        return parse_config(src)
    p = Path(src)
    if not p.exists() and not p.suffix:
        p = preset_path(src)
    return parse_config(p)


def _need_f(args):
    if args.f is None:
        raise ConfigError(["--f is required for this subcommand"])
    if not (args.f > 0 and math.isfinite(args.f)):
        raise ConfigError([f"--f must be positive and finite, got {args.f}"])
    return args.f


def _wave(cfg, f):
    return GwWaveform.from_frequency(f, cfg.plan.tau)


def _point_row(p):
    return [p.f_gw, p.delta_eps_sq, p.curve_value, p.valid]


def cmd_bogoliubov(cfg, args):
    f = _need_f(args)
    wave = GwWaveform.from_frequency(f, cfg.plan.tau, epsilon=args.epsilon)
    mode = PhononMode.from_omega(0.5 * wave.omega_gw, cfg.bec.sound_speed)
    analytic = beta_analytic(mode, wave)
    numeric = numeric_bogoliubov(mode, wave)
    header = ["f_gw", "omega", "tau", "epsilon", "beta_slope", "beta_analytic", "beta_numeric", "fit_residual"]
    row = [f, mode.omega, wave.tau, wave.epsilon, beta_slope(mode.omega, wave),
           analytic.beta.real, numeric.pair.beta.real, numeric.residual]
    return header, [row], {"mode": "omega = Omega/2 along x"}


def cmd_qfi(cfg, args):
    f = _need_f(args)
    wave = _wave(cfg, f)
    b = beta_slope(0.5 * wave.omega_gw, wave)
    s0 = squeezed_cov(cfg.squeeze)
    exp = expand_transform(s0, b)
    fd = qfi_finite_difference(lambda e: transform_cov(s0, BogoliubovPair(1.0, e * b)))
    header = ["f_gw", "r", "phi", "R", "beta_slope", "qfi_fidelity", "qfi_finite_difference",
              "qfi_finite_difference_error", "qfi_mode_sum"]
    row = [f, cfg.squeeze.r, cfg.squeeze.phi, r_factor(cfg.squeeze), b,
           qfi_perturbative(s0, exp).h_eps, fd.h_eps, fd.abs_error,
           qfi_perturbative(s0, exp, "mode-sum").h_eps]
    return header, [row], {"qfi_units": "per unit projected strain squared"}


def cmd_sensitivity(cfg, args):
    p = total_sensitivity(cfg.bec, _wave(cfg, _need_f(args)), cfg.squeeze, cfg.plan)
    return POINT_HEADER, [_point_row(p)], {"plotted_quantity": PLOTTED_QUANTITY}


def cmd_decoherence(cfg, args):
    f = _need_f(args)
    wave = _wave(cfg, f)
    omega_star = 0.5 * wave.omega_gw
    gamma = cfg.decoherence.gamma_b
    if gamma is None:
        gamma = beliaev_rate(cfg.bec, omega_star)
    dec = cfg.decoherence.params(cfg.squeeze.r, gamma)
    point = decohered_sensitivity(cfg.bec, wave, cfg.squeeze, cfg.plan, dec, cfg.decoherence.gamma_b)
    opt = optimal_tau(dec, wave, tau_max=None if gamma > 0 else cfg.plan.t_obs)
    try:
        t_d = decoherence_time(dec)
    except ValueError:
        t_d = math.nan
    header = ["f_gw", "gamma_b", "t_d", "t_d_order_one", "squeezing_decay_time", "tau_star",
              "tau_star_at_bound", "delta_eps_sq", "curve_value", "valid"]
    row = [f, gamma, t_d, decoherence_time(dec, approximate=True), squeezing_decay_time(dec), opt.tau,
           opt.at_lower or opt.at_upper, point.delta_eps_sq, point.curve_value, point.valid]
    return header, [row], {"approximation": APPROXIMATION_NOTE, "gamma_b_at": "Omega/2"}


def cmd_sweep(cfg, args):
    if cfg.sweep is None:
        raise ConfigError(["sweep needs a [sweep] section"])
    pts = sweep_curve(cfg.bec, cfg.squeeze, cfg.plan, cfg.sweep.grid())
    header = POINT_HEADER + ["error"]
    rows = [_point_row(p) + [p.error] for p in pts]
    return header, rows, {"plotted_quantity": PLOTTED_QUANTITY}


def _write(args, header, rows, meta):
    meta = dict(meta)
    if args.config_source:
        meta.setdefault("config", args.config_source)
    if args.out:
        emit_csv(rows, header, args.out, meta, timestamp=not args.no_metadata)
    else:
        sys.stdout.write(render_csv(rows, header, meta, timestamp=not args.no_metadata))


def run_figure(args):
    if args.id not in FIGURE_IDS:
        raise ConfigError([f"--id must be one of {', '.join(FIGURE_IDS)}"])
    cfg = _load(args, default=f"figure{args.id}")
    data = BUILDERS[args.id](cfg)
    out = Path(args.out or f"figure{args.id}.csv")
    emit_csv(data.rows, data.header, out, data.metadata, timestamp=not args.no_metadata)
    script = out.with_name(out.stem + "_plot.py")
    try:
        script.write_text(plot_script(out), encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {script}: {exc.strerror or exc}") from exc
    print(f"wrote {out} and {script}")


COMMANDS = {
    "bogoliubov": cmd_bogoliubov,
    "qfi": cmd_qfi,
    "sensitivity": cmd_sensitivity,
    "decoherence": cmd_decoherence,
    "sweep": cmd_sweep,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="becgw", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="subcommand")
    helps = {
        "bogoliubov": "Bogoliubov coefficient of the resonant mode, analytic and integrated",
        "qfi": "quantum Fisher information of the resonant mode",
        "sensitivity": "total strain sensitivity at one frequency",
        "decoherence": "damping rate, decoherence times and damped sensitivity at one frequency",
        "figure": "regenerate figure data (CSV plus plotting script)",
        "sweep": "strain sensitivity over the configured frequency grid",
        "validate": "check a configuration and print the resolved parameters",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="TOML or JSON config, '-' for stdin, or a bundled preset name")
        p.add_argument("--f", type=float, help="gravitational-wave frequency in Hz")
        p.add_argument("--id", help="figure id: " + ", ".join(FIGURE_IDS))
        p.add_argument("--out", help="output CSV path (stdout if omitted)")
        p.add_argument("--no-metadata", action="store_true", help="omit the timestamp metadata line")
        if name == "bogoliubov":
            p.add_argument("--epsilon", type=float, default=1e-6, help="strain amplitude for the integration")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    args.config_source = args.config
    try:
        if args.command == "figure":
            run_figure(args)
        elif args.command == "validate":
            cfg = _load(args)
            print(json.dumps(cfg.resolved(), indent=2))
        else:
            cfg = _load(args)
            header, rows, meta = COMMANDS[args.command](cfg, args)
            _write(args, header, rows, meta)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FileNotFoundError, PermissionError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ArithmeticError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
