"""Command-line front end: allocate, sweep, compare, verify, calibrate."""

import argparse
import math
import sys

from .allocator import TradeoffWeight, allocate, continuous_solution
from .channel import ChannelParams, draw_realization, trial_rng
from .config import ConfigError, LinkConfig, parse_config
from .harness import (
    CalibrationError,
    _interference,
    calibrate_interference_scale,
    compare,
    dump_realizations,
    emit_csv,
    sweep_alpha,
    sweep_noise,
)
from .kkt import verification_battery
from .model import compute_cinrs


def _grid(text):
    try:
        values = [float(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("grid is empty")
    return values


def _add_common(parser):
    parser.add_argument("--config", help="path to a key = value config file")
    parser.add_argument("--trials", type=int, help="Monte-Carlo trials per point")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--out", help="output path (default: stdout)")
    parser.add_argument("--alpha", type=float, help="tradeoff weight override")
    parser.add_argument("--sir-db", type=float, help="target average SIR in dB")
    parser.add_argument("--nu", type=int, help="number of affected subcarriers")
    parser.add_argument("--noise", type=float, help="noise variance in microwatt")
    parser.add_argument("--workers", type=int, help="worker threads for trials")


def _load_config(args) -> LinkConfig:
    if args.config:
        with open(args.config) as fh:
            config = parse_config(fh.read())
    else:
        config = LinkConfig().validate()
    overrides = {}
    if args.trials is not None:
        overrides["n_trials"] = args.trials
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.alpha is not None:
        overrides["alpha"] = args.alpha
    if getattr(args, "sir_db", None) is not None:
        overrides["target_sir_db"] = args.sir_db
    if args.nu is not None:
        overrides["n_affected"] = args.nu
    if args.noise is not None:
        overrides["noise_var"] = args.noise
    if args.workers is not None:
        overrides["workers"] = args.workers
    return config.override(**overrides) if overrides else config


def _open_out(args):
    return open(args.out, "w", newline="") if args.out else sys.stdout


def cmd_allocate(args) -> int:
    config = _load_config(args)
    rng = trial_rng(config.master_seed, args.trial)
    params = ChannelParams(config.n_taps, config.decay, config.n_subcarriers)
    realization = draw_realization(params, rng)
    profile = _interference(config)
    cinrs = compute_cinrs(realization.gain_sq, config.noise_var, profile.variances)
    weight = TradeoffWeight(config.alpha)
    alloc = allocate(cinrs, weight, config.ber_target)

    out = _open_out(args)
    try:
        print(
            f"{'i':>4} {'|H|^2':>12} {'interf_uw':>12} {'cinr':>12} "
            f"{'bits_cont':>10} {'bits':>5} {'power_uw':>12}",
            file=out,
        )
        for i in range(config.n_subcarriers):
            sol = continuous_solution(cinrs[i], weight, config.ber_target)
            print(
                f"{i:>4} {realization.gain_sq[i]:>12.6g} "
                f"{profile.variances[i]:>12.6g} {cinrs[i]:>12.6g} "
                f"{sol.bits_cont:>10.4f} {alloc.bits[i]:>5d} {alloc.power[i]:>12.6g}",
                file=out,
            )
        print(
            f"# total_bits={alloc.total_bits} total_power_uw={alloc.total_power:.6g} "
            f"active={alloc.n_active}/{config.n_subcarriers}",
            file=out,
        )
    finally:
        if args.out:
            out.close()
    if args.dump:
        dump_realizations(config, args.trial + 1, args.dump)
    return 0


def cmd_sweep(args) -> int:
    config = _load_config(args)
    if args.alpha_grid is not None:
        records = sweep_alpha(config, args.alpha_grid)
    else:
        records = sweep_noise(config, args.noise_grid)
    out = _open_out(args)
    try:
        emit_csv(records, out)
    finally:
        if args.out:
            out.close()
    return 0


def cmd_compare(args) -> int:
    config = _load_config(args)
    pairs = compare(config, args.noise_grid)
    records = [r for pair in pairs for r in pair]
    out = _open_out(args)
    try:
        emit_csv(records, out)
    finally:
        if args.out:
            out.close()
    return 0


def cmd_verify(args) -> int:
    results = verification_battery(args.triples, args.steps, args.seed or 0)
    failures = 0
    for name, passed, detail in results:
        print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
        failures += 0 if passed else 1
    return 1 if failures else 0


def cmd_calibrate(args) -> int:
    config = _load_config(args)
    target = args.sir_db
    if target is None:
        print("calibrate needs --sir-db", file=sys.stderr)
        return 1
    try:
        scale, achieved = calibrate_interference_scale(
            config, target, n_trials=args.trials or 200
        )
    except CalibrationError as err:
        print(f"calibration failed: {err}", file=sys.stderr)
        return 1
    print(f"interference_scale = {scale:.10g}")
    print(f"achieved_avg_sir_db = {achieved:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bitload",
        description="Joint bit and power loading simulator for OFDM links",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("allocate", help="print one realization's allocation table")
    _add_common(p)
    p.add_argument("--trial", type=int, default=0, help="trial index to draw")
    p.add_argument("--dump", help="also dump the channel realization CSV here")
    p.set_defaults(fn=cmd_allocate)

    p = sub.add_parser("sweep", help="sweep the noise floor (or alpha) and emit CSV")
    _add_common(p)
    p.add_argument("--noise-grid", type=_grid, help="noise variances, comma separated")
    p.add_argument("--alpha-grid", type=_grid, help="tradeoff weights, comma separated")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("compare", help="proposed vs. uniform-power baseline CSV")
    _add_common(p)
    p.add_argument("--noise-grid", type=_grid, required=True)
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("verify", help="run the optimality property battery")
    p.add_argument("--triples", type=int, default=100)
    p.add_argument("--steps", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("calibrate", help="find the interference scale for a target SIR")
    _add_common(p)
    p.set_defaults(fn=cmd_calibrate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.fn is cmd_sweep and args.noise_grid is None and args.alpha_grid is None:
        parser.error("sweep needs --noise-grid or --alpha-grid")
    try:
        return args.fn(args)
    except (ConfigError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
