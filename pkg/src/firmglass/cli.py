"""Command-line interface: run, sweep, meanfield, oracle, reproduce.

Data goes to stdout (or --out); progress and timing go to stderr.
Exit codes: 0 success, 1 configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from .core import ModelParams, RATING_DRIFT_WEIGHTS, f_table_from_weights, zero_f_table
from .experiment import (
    PRESET_NAMES,
    SweepSpec,
    emit,
    preset_spec,
    run_sweep,
)
from .meanfield import (
    closed_form_deviation_grid,
    default_fraction_closed_form,
    default_fraction_markov,
    mean_field_fixed_points,
)


class _ConfigError(Exception):
    """Invalid flag combination or value; maps to exit code 1."""


def _add_model_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n", type=int, default=1000, help="number of firms")
    parser.add_argument("--steps", type=int, default=8, help="time steps")
    parser.add_argument("--rmax", type=int, default=7, help="top rating class")
    parser.add_argument("--sigma-j", type=float, default=0.001,
                        help="coupling standard deviation")
    parser.add_argument("--f-mode", choices=("zero", "constant_table"),
                        default="zero", help="drift term: off, or a constant per-move table")
    parser.add_argument("--f-down", type=float, default=RATING_DRIFT_WEIGHTS[0],
                        help="exp(f) weight of a down move (constant_table mode)")
    parser.add_argument("--f-stay", type=float, default=RATING_DRIFT_WEIGHTS[1],
                        help="exp(f) weight of staying (constant_table mode)")
    parser.add_argument("--f-up", type=float, default=RATING_DRIFT_WEIGHTS[2],
                        help="exp(f) weight of an up move (constant_table mode)")
    parser.add_argument("--selection", choices=("with_replacement", "permutation"),
                        default="with_replacement",
                        help="how firms are picked within a time step")


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--k", type=int, default=1000, help="realizations per ensemble")
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument("--threads", type=int, default=1, help="parallel workers")
    parser.add_argument("--engine", choices=("auto", "numba", "python"),
                        default="auto", help="simulation engine")
    parser.add_argument("--out", type=str, default=None,
                        help="output file (stdout when absent)")
    parser.add_argument("--format", choices=("json", "csv"), default="json",
                        help="output format")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="firmglass",
        description="Potts-glass firm-default simulator and mean-field analytics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="one ensemble at a fixed parameter point")
    _add_model_flags(p_run)
    _add_run_flags(p_run)
    p_run.add_argument("--j0", type=float, default=0.0, help="mean coupling")

    p_sweep = sub.add_parser("sweep", help="ensembles across a range of j0")
    _add_model_flags(p_sweep)
    _add_run_flags(p_sweep)
    p_sweep.add_argument("--j0-min", type=float, required=True)
    p_sweep.add_argument("--j0-max", type=float, required=True)
    p_sweep.add_argument("--j0-points", type=int, default=11)

    p_mf = sub.add_parser("meanfield",
                          help="fixed points and predicted default levels over a beta range")
    p_mf.add_argument("--beta-min", type=float, default=None)
    p_mf.add_argument("--beta-max", type=float, default=None)
    p_mf.add_argument("--beta-points", type=int, default=13)
    p_mf.add_argument("--j0-min", type=float, default=None)
    p_mf.add_argument("--j0-max", type=float, default=None)
    p_mf.add_argument("--j0-points", type=int, default=None)
    p_mf.add_argument("--n", type=int, default=1000,
                      help="firm count used to convert j0 to beta")
    p_mf.add_argument("--beta-scaling", choices=("j0n", "bare"), default="j0n",
                      help="beta = j0*N (default) or bare beta = j0")
    p_mf.add_argument("--steps", type=int, default=8)
    p_mf.add_argument("--rmax", type=int, default=7)
    p_mf.add_argument("--out", type=str, default=None)
    p_mf.add_argument("--format", choices=("json", "csv"), default="json")

    p_or = sub.add_parser("oracle",
                          help="exact chain and closed-form default fractions")
    p_or.add_argument("--p", type=float, default=None, help="per-move up probability")
    p_or.add_argument("--q", type=float, default=None, help="per-move down probability")
    p_or.add_argument("--steps", type=int, default=8)
    p_or.add_argument("--rmax", type=int, default=7)
    p_or.add_argument("--grid", action="store_true",
                      help="emit the chain-vs-closed-form deviation grid as CSV")
    p_or.add_argument("--grid-step", type=float, default=0.1)
    p_or.add_argument("--out", type=str, default=None)

    p_rep = sub.add_parser("reproduce", help="run a published study preset")
    p_rep.add_argument("preset", choices=PRESET_NAMES)
    p_rep.add_argument("--n", type=int, default=1000)
    p_rep.add_argument("--k", type=int, default=1000)
    p_rep.add_argument("--seed", type=int, default=None,
                       help="override the preset master seed")
    p_rep.add_argument("--threads", type=int, default=1)
    p_rep.add_argument("--engine", choices=("auto", "numba", "python"), default="auto")
    p_rep.add_argument("--out", type=str, default=None)
    p_rep.add_argument("--format", choices=("json", "csv"), default="json")

    return parser


def _f_table_from_args(args: argparse.Namespace) -> dict[int, float]:
    if args.f_mode == "zero":
        return zero_f_table()
    try:
        return f_table_from_weights(args.f_down, args.f_stay, args.f_up)
    except ValueError as exc:
        raise _ConfigError(f"--f-down/--f-stay/--f-up: {exc}") from exc


def _params_from_args(args: argparse.Namespace, j0: float) -> ModelParams:
    try:
        return ModelParams(
            n_firms=args.n,
            j0=j0,
            sigma_j=args.sigma_j,
            r_max=args.rmax,
            steps=args.steps,
            f_table=_f_table_from_args(args),
            selection=args.selection,
        )
    except ValueError as exc:
        raise _ConfigError(str(exc)) from exc


def _write_output(payload: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(payload)
    else:
        Path(path).write_text(payload, encoding="utf-8")


def _cmd_run(args: argparse.Namespace) -> int:
    spec = _make_spec(args, (args.j0,), f_mode=args.f_mode)
    result = run_sweep(spec, threads=args.threads, engine=args.engine, progress=True)
    emit(result, format=args.format, path=args.out)
    return 0


def _make_spec(args: argparse.Namespace, values: tuple[float, ...], f_mode: str) -> SweepSpec:
    base = _params_from_args(args, values[0])
    try:
        return SweepSpec(
            base=base,
            sweep_variable="j0",
            values=values,
            k_realizations=args.k,
            master_seed=args.seed,
            f_mode=f_mode,
        )
    except ValueError as exc:
        raise _ConfigError(str(exc)) from exc


def _cmd_sweep(args: argparse.Namespace) -> int:
    if args.j0_max <= args.j0_min:
        raise _ConfigError(
            f"--j0-max ({args.j0_max}) must be greater than --j0-min ({args.j0_min})"
        )
    if args.j0_points < 2:
        raise _ConfigError(f"--j0-points must be >= 2, got {args.j0_points}")
    values = tuple(np.linspace(args.j0_min, args.j0_max, args.j0_points))
    spec = _make_spec(args, values, f_mode=args.f_mode)
    result = run_sweep(spec, threads=args.threads, engine=args.engine, progress=True)
    emit(result, format=args.format, path=args.out)
    return 0


def _meanfield_betas(args: argparse.Namespace) -> list[float]:
    j0_flags = (args.j0_min, args.j0_max, args.j0_points)
    if any(flag is not None for flag in j0_flags):
        if any(flag is None for flag in j0_flags):
            raise _ConfigError(
                "--j0-min, --j0-max and --j0-points must be given together"
            )
        if args.j0_max <= args.j0_min:
            raise _ConfigError(
                f"--j0-max ({args.j0_max}) must be greater than --j0-min ({args.j0_min})"
            )
        scale = args.n if args.beta_scaling == "j0n" else 1.0
        return [j0 * scale for j0 in np.linspace(args.j0_min, args.j0_max, args.j0_points)]
    beta_min = 0.0 if args.beta_min is None else args.beta_min
    beta_max = 6.0 if args.beta_max is None else args.beta_max
    if beta_max <= beta_min:
        raise _ConfigError(
            f"--beta-max ({beta_max}) must be greater than --beta-min ({beta_min})"
        )
    if args.beta_points < 2:
        raise _ConfigError(f"--beta-points must be >= 2, got {args.beta_points}")
    return list(np.linspace(beta_min, beta_max, args.beta_points))


def _cmd_meanfield(args: argparse.Namespace) -> int:
    betas = _meanfield_betas(args)
    if any(beta < 0 for beta in betas):
        raise _ConfigError("beta range must be non-negative")
    records = []
    for beta in betas:
        points = mean_field_fixed_points(beta)
        records.append(
            {
                "beta": beta,
                "fixed_points": [
                    {
                        "p_up": point.p_up,
                        "q_down": point.q_down,
                        "stable": point.stable,
                        "nd_fraction": default_fraction_markov(
                            point.p_up, point.q_down, args.steps, args.rmax
                        ),
                    }
                    for point in points
                ],
            }
        )
    if args.format == "json":
        payload = json.dumps(
            {"beta_scaling": args.beta_scaling, "steps": args.steps,
             "r_max": args.rmax, "betas": records},
            indent=2,
        ) + "\n"
    else:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["beta", "p_up", "q_down", "stable", "nd_fraction"])
        for record in records:
            for point in record["fixed_points"]:
                writer.writerow(
                    [record["beta"], point["p_up"], point["q_down"],
                     point["stable"], point["nd_fraction"]]
                )
        payload = buffer.getvalue()
    _write_output(payload, args.out)
    return 0


def _cmd_oracle(args: argparse.Namespace) -> int:
    if args.grid:
        if not 0 < args.grid_step <= 1:
            raise _ConfigError(f"--grid-step must be in (0, 1], got {args.grid_step}")
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["p_up", "q_down", "markov", "closed_form", "abs_deviation"])
        for row in closed_form_deviation_grid(args.grid_step, args.steps, args.rmax):
            writer.writerow(list(row))
        _write_output(buffer.getvalue(), args.out)
        return 0
    if args.p is None or args.q is None:
        raise _ConfigError("--p and --q are required unless --grid is given")
    if args.p < 0 or args.q < 0 or args.p + args.q > 1 + 1e-9:
        raise _ConfigError(
            f"--p/--q must be >= 0 with p + q <= 1, got ({args.p}, {args.q})"
        )
    markov = default_fraction_markov(args.p, args.q, args.steps, args.rmax)
    lines = [f"markov default fraction: {markov:.6f}"]
    if args.steps == 8 and args.rmax == 7:
        closed = default_fraction_closed_form(args.q, args.p)
        lines.append(f"closed-form default fraction: {closed:.6f}")
    _write_output("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_reproduce(args: argparse.Namespace) -> int:
    kwargs = {"n_firms": args.n, "k_realizations": args.k}
    if args.seed is not None:
        kwargs["master_seed"] = args.seed
    try:
        spec = preset_spec(args.preset, **kwargs)
    except ValueError as exc:
        raise _ConfigError(str(exc)) from exc
    result = run_sweep(spec, threads=args.threads, engine=args.engine, progress=True)
    emit(result, format=args.format, path=args.out)
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "meanfield": _cmd_meanfield,
    "oracle": _cmd_oracle,
    "reproduce": _cmd_reproduce,
}


def cli(argv: list[str] | None = None) -> int:
    """Parse argv and dispatch; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help and 2 for usage errors; fold the
        # latter into the configuration-error code
        return 0 if exc.code == 0 else 1
    try:
        return _COMMANDS[args.command](args)
    except _ConfigError as exc:
        print(f"firmglass: configuration error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"firmglass: runtime failure: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli())


if __name__ == "__main__":
    main()
