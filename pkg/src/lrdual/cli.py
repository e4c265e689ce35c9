"""Command-line surface: batch emitters for CSV tables and static SVG plots.

Every command writes its outputs plus a ``manifest.json`` into ``--out``;
replaying the manifest's argv reproduces the outputs byte for byte. Exit
codes: 1 validation, 2 domain/infeasibility, 3 divergence, 4 I/O.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import __version__
from .designer import rational_schedule, schedule_from_coefficients
from .dual import SmoothingSequence, coefficients_at, iter_coefficient_rows
from .errors import DivergenceError, DomainError, LRDualError, ValidationError
from .fileio import (
    RunManifest,
    fmt17,
    read_multipliers,
    read_points,
    read_target_profile,
    svg_line_plot,
    write_coefficient_matrix_csv,
    write_coefficients_csv,
    write_fit_json,
    write_schedule_csv,
    write_sweep_csv,
    write_text_file,
)
from .oracle import (
    AdamWConfig,
    QuadraticProblem,
    SweepGrid,
    reconstruct_from_updates,
    run_noise_sweep,
    train,
)
from .scaling import fit_power_law
from .schedules import (
    ScheduleKind,
    ScheduleSpec,
    alpha_curve,
    lr_curve,
    steps_from_fraction,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_DOMAIN = 2
EXIT_DIVERGENCE = 3
EXIT_IO = 4


class _ArgumentParser(argparse.ArgumentParser):
    """argparse that reports usage problems as validation errors (exit 1)."""

    def error(self, message):  # noqa: A003 - argparse API
        self.print_usage(sys.stderr)
        raise ValidationError(message)


def _common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", default=".", help="output directory (default: .)")
    parser.add_argument("--seed", type=int, default=0, help="base seed (default: 0)")
    parser.add_argument("--svg", action="store_true", help="also write an SVG plot")


def _schedule_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--kind",
        default="linear",
        choices=[k.value for k in ScheduleKind],
        help="schedule shape (default: linear)",
    )
    parser.add_argument("--steps", type=int, required=True, help="total optimizer steps")
    warm = parser.add_mutually_exclusive_group()
    warm.add_argument("--warmup", type=int, default=None, help="warmup steps")
    warm.add_argument(
        "--warmup-frac",
        type=float,
        default=0.1,
        help="warmup as a fraction of total steps (default: 0.1)",
    )
    parser.add_argument(
        "--peak-base", type=float, default=1.6e-2, help="peak base LR (default: 1.6e-2)"
    )
    parser.add_argument(
        "--rho", type=float, default=1.0, help="width-ratio LR factor (default: 1.0)"
    )
    parser.add_argument(
        "--ratio", type=float, default=0.0, help="decay ratio, min LR / peak (default: 0)"
    )
    parser.add_argument(
        "--wd", type=float, default=0.1, help="weight decay for alpha columns (default: 0.1)"
    )
    parser.add_argument(
        "--milestone-frac", type=float, default=0.9, help="step kind: drop point (default: 0.9)"
    )
    parser.add_argument(
        "--drop-frac", type=float, default=0.001, help="step kind: post-drop LR fraction"
    )
    parser.add_argument(
        "--cooldown-frac", type=float, default=0.225, help="wsd kind: cooldown fraction"
    )
    parser.add_argument("--period", type=int, default=None, help="cyclic kind: period steps")
    parser.add_argument(
        "--multipliers", default=None, help="piecewise kind: file with one multiplier per line"
    )


def _spec_from_args(args) -> ScheduleSpec:
    kind = ScheduleKind(args.kind)
    warmup = (
        args.warmup
        if args.warmup is not None
        else steps_from_fraction(args.warmup_frac, args.steps)
    )
    kind_params = {}
    if kind is ScheduleKind.STEP:
        kind_params = {
            "milestone_fraction": args.milestone_frac,
            "drop_fraction": args.drop_frac,
        }
    elif kind is ScheduleKind.WSD:
        kind_params = {"cooldown_fraction": args.cooldown_frac}
    elif kind is ScheduleKind.CYCLIC:
        if args.period is None:
            raise ValidationError("--period is required for --kind cyclic")
        kind_params = {"period_steps": args.period}
    elif kind is ScheduleKind.RATIONAL:
        kind_params = {"weight_decay": args.wd}
    elif kind is ScheduleKind.PIECEWISE:
        if args.multipliers is None:
            raise ValidationError("--multipliers is required for --kind piecewise")
        kind_params = {"multipliers": read_multipliers(Path(args.multipliers))}
    return ScheduleSpec(
        kind=kind,
        total_steps=args.steps,
        peak_base_lr=args.peak_base,
        warmup_steps=warmup,
        mup_factor=args.rho,
        decay_ratio=args.ratio,
        kind_params=kind_params,
    )


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(args, argv, command: str, config: dict, outputs: List[str]) -> None:
    RunManifest(
        command=command,
        argv=list(argv),
        config=config,
        version=__version__,
        base_seed=args.seed,
        outputs=outputs,
    ).write(_out_dir(args))


def _schedule_config(args) -> dict:
    return {
        "kind": args.kind,
        "steps": args.steps,
        "warmup": args.warmup,
        "warmup_frac": args.warmup_frac,
        "peak_base": args.peak_base,
        "rho": args.rho,
        "ratio": args.ratio,
        "wd": args.wd,
        "milestone_frac": args.milestone_frac,
        "drop_frac": args.drop_frac,
        "cooldown_frac": args.cooldown_frac,
        "period": args.period,
        "multipliers": args.multipliers,
    }


# -- commands ---------------------------------------------------------------------


def _cmd_schedule(args, argv) -> int:
    spec = _spec_from_args(args)
    out = _out_dir(args)
    lrs = lr_curve(spec)
    alphas = alpha_curve(spec, args.wd)
    outputs = ["schedule.csv"]
    write_schedule_csv(out / "schedule.csv", lrs, alphas)
    if args.svg:
        steps = np.arange(1, spec.total_steps + 1)
        svg = svg_line_plot(
            [(spec.kind.value, steps, lrs)],
            title="learning rate schedule",
            x_label="step",
            y_label="learning rate",
        )
        write_text_file(out / "schedule.svg", svg)
        outputs.append("schedule.svg")
    _write_manifest(args, argv, "schedule", _schedule_config(args), outputs)
    return EXIT_OK


def _cmd_dual(args, argv) -> int:
    spec = _spec_from_args(args)
    out = _out_dir(args)
    seq = SmoothingSequence.from_schedule(spec, args.wd)
    config = _schedule_config(args)
    config.update({"at_step": args.at_step, "matrix": args.matrix})
    outputs = []
    if args.matrix:
        write_coefficient_matrix_csv(
            out / "coefficient_matrix.csv", iter_coefficient_rows(seq)
        )
        outputs.append("coefficient_matrix.csv")
    else:
        at = spec.total_steps if args.at_step is None else args.at_step
        if not 1 <= at <= spec.total_steps:
            raise ValidationError(
                f"--at-step {at} outside the schedule range 1..{spec.total_steps}"
            )
        coeffs = coefficients_at(SmoothingSequence(seq.alphas[: at + 1]))
        write_coefficients_csv(out / "coefficients.csv", coeffs)
        outputs.append("coefficients.csv")
        if args.svg:
            idx = np.arange(1, coeffs.t + 1)
            svg = svg_line_plot(
                [(f"{spec.kind.value} duals", idx, coeffs.c)],
                title="update-combination coefficients",
                x_label="input index",
                y_label="coefficient",
                log_y=True,
            )
            write_text_file(out / "dual.svg", svg)
            outputs.append("dual.svg")
    _write_manifest(args, argv, "dual", config, outputs)
    return EXIT_OK


def _cmd_design(args, argv) -> int:
    out = _out_dir(args)
    profile = read_target_profile(Path(args.target))
    designed = schedule_from_coefficients(profile, args.wd, args.rho)
    # lr column holds the realized LR alpha/wd so that lr * wd == alpha; the
    # first row is the initial-weights pseudo-step with alpha = 1.
    lrs = designed.alphas / args.wd
    write_schedule_csv(out / "designed_schedule.csv", lrs, designed.alphas)
    outputs = ["designed_schedule.csv"]
    if args.svg:
        idx = np.arange(1, len(designed.alphas) + 1)
        svg = svg_line_plot(
            [("designed", idx, lrs)],
            title="designed schedule",
            x_label="step",
            y_label="learning rate",
        )
        write_text_file(out / "design.svg", svg)
        outputs.append("design.svg")
    config = {"target": args.target, "wd": args.wd, "rho": args.rho}
    _write_manifest(args, argv, "design", config, outputs)
    return EXIT_OK


def _cmd_rational(args, argv) -> int:
    out = _out_dir(args)
    lrs = rational_schedule(args.peak, args.wd, args.steps, args.warmup)
    alphas = lrs * args.wd
    write_schedule_csv(out / "rational_schedule.csv", lrs, alphas)
    outputs = ["rational_schedule.csv"]
    if args.svg:
        steps = np.arange(1, args.steps + 1)
        svg = svg_line_plot(
            [("rational", steps, lrs)],
            title="rational schedule",
            x_label="step",
            y_label="learning rate",
        )
        write_text_file(out / "rational.svg", svg)
        outputs.append("rational.svg")
    config = {
        "peak": args.peak,
        "wd": args.wd,
        "steps": args.steps,
        "warmup": args.warmup,
    }
    _write_manifest(args, argv, "rational", config, outputs)
    return EXIT_OK


def _cmd_simulate(args, argv) -> int:
    spec = _spec_from_args(args)
    out = _out_dir(args)
    problem = QuadraticProblem(
        dim=args.dim,
        curvature=args.mu,
        noise_var=args.sigma2,
        theta0_dist_sq=args.d0,
        batch_size=args.batch,
    )
    config = AdamWConfig(
        weight_decay=args.wd, beta1=args.beta1, beta2=args.beta2, epsilon=args.eps
    )
    trace = train(problem, spec, config, seed=args.seed)
    dist_sq = np.sum((trace.thetas[1:] - problem.theta_star()) ** 2, axis=1)
    alphas = trace.lrs * args.wd

    lines = ["step,lr,alpha,dist_sq"]
    for step in range(1, spec.total_steps + 1):
        lines.append(
            f"{step},{fmt17(trace.lrs[step - 1])},{fmt17(alphas[step - 1])},"
            f"{fmt17(dist_sq[step - 1])}"
        )
    write_text_file(out / "trace.csv", "\n".join(lines) + "\n")

    if args.wd > 0:
        coeffs = coefficients_at(trace.smoothing())
        _, rel_err = reconstruct_from_updates(trace, coeffs)
        rel_err_text = fmt17(rel_err)
    else:
        rel_err_text = "null"
    tpp_analog = spec.total_steps * args.batch / args.dim
    summary = (
        "{"
        f'"final_dist_sq": {fmt17(dist_sq[-1])}, '
        f'"reconstruction_relative_error": {rel_err_text}, '
        f'"tpp_analog": {fmt17(tpp_analog)}'
        "}\n"
    )
    write_text_file(out / "summary.json", summary)
    outputs = ["trace.csv", "summary.json"]
    if args.svg:
        steps = np.arange(1, spec.total_steps + 1)
        svg = svg_line_plot(
            [("squared distance", steps, dist_sq)],
            title="distance to optimum",
            x_label="step",
            y_label="squared distance",
            log_y=True,
        )
        write_text_file(out / "simulate.svg", svg)
        outputs.append("simulate.svg")
    cli_config = _schedule_config(args)
    cli_config.update(
        {
            "dim": args.dim,
            "mu": args.mu,
            "sigma2": args.sigma2,
            "d0": args.d0,
            "batch": args.batch,
            "beta1": args.beta1,
            "beta2": args.beta2,
            "eps": args.eps,
        }
    )
    _write_manifest(args, argv, "simulate", cli_config, outputs)
    return EXIT_OK


def _cmd_sweep(args, argv) -> int:
    out = _out_dir(args)
    with open(args.config, "r", encoding="utf-8") as fh:
        grid = SweepGrid.from_mapping(json.load(fh))
    results = run_noise_sweep(grid, mode=args.mode, seed=args.seed, jobs=args.jobs)
    write_sweep_csv(out / "sweep.csv", results)
    echo = grid.to_mapping()
    echo.update({"mode": args.mode, "base_seed": args.seed})
    write_text_file(
        out / "sweep_config.json", json.dumps(echo, indent=2, sort_keys=True) + "\n"
    )
    config = {"config": args.config, "mode": args.mode, "jobs": args.jobs}
    _write_manifest(args, argv, "sweep", config, ["sweep.csv", "sweep_config.json"])
    return EXIT_OK


def _cmd_fit(args, argv) -> int:
    out = _out_dir(args)
    points = read_points(Path(args.in_path))
    fit = fit_power_law(points)
    write_fit_json(out / "fit.json", fit)
    outputs = ["fit.json"]
    if args.svg:
        pts = sorted(points)
        xs = np.array([p[0] for p in pts])
        ys = np.array([p[1] for p in pts])
        fitted = fit.coefficient * xs**fit.exponent
        svg = svg_line_plot(
            [("data", xs, ys), ("fit", xs, fitted)],
            title="power-law fit",
            x_label="x",
            y_label="y",
            log_y=True,
        )
        write_text_file(out / "fit.svg", svg)
        outputs.append("fit.svg")
    config = {"in": args.in_path}
    _write_manifest(args, argv, "fit", config, outputs)
    return EXIT_OK


# -- driver ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="lrdual",
        description=(
            "Learning-rate schedules for AdamW and their dual view as convex "
            "combinations of weight updates."
        ),
    )
    parser.add_argument("--version", action="version", version=f"lrdual {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("schedule", help="emit a schedule as CSV (and SVG)")
    _common_flags(p)
    _schedule_flags(p)
    p.set_defaults(handler=_cmd_schedule)

    p = sub.add_parser("dual", help="emit dual coefficients of a schedule")
    _common_flags(p)
    _schedule_flags(p)
    p.add_argument("--at-step", type=int, default=None, help="coefficients after this step")
    p.add_argument("--matrix", action="store_true", help="emit the full per-step table")
    p.set_defaults(handler=_cmd_dual)

    p = sub.add_parser("design", help="invert a target coefficient profile")
    _common_flags(p)
    p.add_argument("--target", required=True, help="CSV with columns i,c")
    p.add_argument("--wd", type=float, default=0.1, help="optimizer weight decay")
    p.add_argument("--rho", type=float, default=1.0, help="width-ratio LR factor")
    p.set_defaults(handler=_cmd_design)

    p = sub.add_parser("rational", help="emit the uniform-coefficients schedule")
    _common_flags(p)
    p.add_argument("--peak", type=float, required=True, help="peak learning rate")
    p.add_argument("--wd", type=float, default=0.1, help="weight decay in the recurrence")
    p.add_argument("--steps", type=int, required=True, help="total optimizer steps")
    p.add_argument("--warmup", type=int, default=0, help="warmup steps (default: 0)")
    p.set_defaults(handler=_cmd_rational)

    p = sub.add_parser("simulate", help="run reference AdamW on a noisy quadratic")
    _common_flags(p)
    _schedule_flags(p)
    p.add_argument("--dim", type=int, default=10, help="problem dimension (default: 10)")
    p.add_argument("--mu", type=float, default=1.0, help="curvature (default: 1.0)")
    p.add_argument("--sigma2", type=float, default=0.0, help="gradient noise variance")
    p.add_argument("--d0", type=float, default=1.0, help="initial squared distance")
    p.add_argument("--batch", type=int, default=1, help="batch size (default: 1)")
    p.add_argument("--beta1", type=float, default=0.9)
    p.add_argument("--beta2", type=float, default=0.95)
    p.add_argument("--eps", type=float, default=1e-8)
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("sweep", help="run a schedule x noise grid")
    _common_flags(p)
    p.add_argument("--config", required=True, help="JSON grid definition")
    p.add_argument(
        "--mode", default="analytic", choices=["analytic", "monte-carlo"]
    )
    p.add_argument("--jobs", type=int, default=1, help="concurrent cells (default: 1)")
    p.set_defaults(handler=_cmd_sweep)

    p = sub.add_parser("fit", help="fit a power law to x,y points")
    _common_flags(p)
    p.add_argument("--in", dest="in_path", required=True, help="CSV with columns x,y")
    p.set_defaults(handler=_cmd_fit)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.seed < 0:
            raise ValidationError(f"--seed must be non-negative, got {args.seed}")
        return args.handler(args, argv)
    except ValidationError as exc:
        print(f"lrdual: validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except DivergenceError as exc:
        print(f"lrdual: divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except DomainError as exc:
        print(f"lrdual: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except LRDualError as exc:  # pragma: no cover - safety net
        print(f"lrdual: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"lrdual: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
