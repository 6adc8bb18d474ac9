"""Command-line interface.

Commands
    select     rank and select variables from a dataset CSV
    simulate   run the seeded Monte Carlo study described by a config file
    criterion  print the subset criterion of a dataset for one subset
    probe      measure how the criterion of a subset scales with sample size

Exit codes: 0 success, 2 usage error, 3 invalid input (dataset, config or
argument values), 4 numerical failure (singular covariance or design
blocks), 5 I/O failure.  The COVSEL_JOBS environment variable sets the
default worker count for parallel studies; --jobs overrides it.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .covariance import (
    SingularSubmatrixError,
    VariableSubset,
    criterion,
    empirical_covariances,
)
from .io import (
    ConfigError,
    DatasetFormatError,
    FORMAT_CSV,
    FORMAT_JSON_LINES,
    emit_report,
    load_simulation_config,
    parse_dataset_csv,
)
from .selection import PENALTY_ARG_LABEL, PENALTY_ARG_RANK, PenaltySchedule, select_variables
from .simulation import SingularDesignError, convergence_probe, run_study

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INVALID = 3
EXIT_NUMERICAL = 4
EXIT_IO = 5

DEFAULT_PROBE_GRID = (250, 1000, 4000)
DEFAULT_PROBE_REPS = 50


def _parse_subset(text: str, p: int) -> VariableSubset:
    try:
        labels = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ValueError(f"--subset must be comma-separated integers, got {text!r}") from None
    return VariableSubset.of(labels, p)


def _parse_int_list(text: str, flag: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ValueError(f"{flag} must be comma-separated integers, got {text!r}") from None


def _add_dataset_args(sub) -> None:
    sub.add_argument("--input", required=True, help="dataset CSV path")
    sub.add_argument("--p", type=int, required=True, help="number of predictor columns")
    sub.add_argument("--q", type=int, required=True, help="number of response columns")
    sub.add_argument("--has-header", action="store_true", help="skip the first line")


def _add_output_args(sub) -> None:
    sub.add_argument("--out", required=True, help="report output path")
    sub.add_argument(
        "--format",
        choices=[FORMAT_CSV, FORMAT_JSON_LINES],
        default=FORMAT_CSV,
        help="report format (default csv)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="covsel",
        description="Covariance-criterion variable selection for multivariate regression.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    p_select = commands.add_parser("select", help="select variables from a dataset CSV")
    _add_dataset_args(p_select)
    p_select.add_argument("--f-rate", type=float, default=0.25)
    p_select.add_argument("--g-rate", type=float, default=0.75)
    p_select.add_argument("--f-shape", default="reciprocal")
    p_select.add_argument("--g-shape", default="linear")
    p_select.add_argument(
        "--penalty-arg", choices=[PENALTY_ARG_LABEL, PENALTY_ARG_RANK], default=PENALTY_ARG_LABEL
    )
    _add_output_args(p_select)
    p_select.set_defaults(func=_cmd_select)

    p_sim = commands.add_parser("simulate", help="run a Monte Carlo study from a config file")
    p_sim.add_argument("--config", required=True, help="study configuration JSON path")
    p_sim.add_argument("--seed", type=int, default=None, help="override the config base seed")
    p_sim.add_argument("--jobs", type=int, default=None, help="worker threads when parallel")
    _add_output_args(p_sim)
    p_sim.set_defaults(func=_cmd_simulate)

    p_crit = commands.add_parser("criterion", help="print the subset criterion of a dataset")
    _add_dataset_args(p_crit)
    p_crit.add_argument("--subset", required=True, help="comma-separated variable labels")
    p_crit.set_defaults(func=_cmd_criterion)

    p_probe = commands.add_parser("probe", help="criterion scaling across sample sizes")
    p_probe.add_argument("--config", required=True, help="study configuration JSON path")
    p_probe.add_argument("--subset", required=True, help="comma-separated variable labels")
    p_probe.add_argument(
        "--n-grid",
        default=",".join(str(n) for n in DEFAULT_PROBE_GRID),
        help="comma-separated sample sizes (default 250,1000,4000)",
    )
    p_probe.add_argument("--reps", type=int, default=DEFAULT_PROBE_REPS)
    p_probe.add_argument("--seed", type=int, default=None, help="override the config base seed")
    _add_output_args(p_probe)
    p_probe.set_defaults(func=_cmd_probe)

    return parser


def _cmd_select(args) -> int:
    data = parse_dataset_csv(args.input, args.p, args.q, has_header=args.has_header)
    pen = PenaltySchedule(
        f_rate=args.f_rate, g_rate=args.g_rate, f_shape=args.f_shape, g_shape=args.g_shape
    )
    result = select_variables(data, pen, penalty_arg=args.penalty_arg)
    emit_report(
        result,
        args.format,
        args.out,
        penalty_arg=args.penalty_arg,
        **pen.describe(),
    )
    print("selected:", ",".join(str(i) for i in result.selected))
    return EXIT_OK


def _cmd_simulate(args) -> int:
    cfg = load_simulation_config(args.config)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, base_seed=args.seed)
    summary = run_study(cfg, max_workers=args.jobs)
    emit_report(
        summary,
        args.format,
        args.out,
        base_seed=cfg.base_seed,
        replications=cfg.replications,
        penalty_arg=cfg.penalty_arg,
        **cfg.pen.describe(),
    )
    for row in summary.rows:
        print(
            f"n={row.n}: mean_pred_error={row.mean_pred_error:.6g} "
            f"correct_rate={row.correct_rate:.3f} failures={row.failures}"
        )
    return EXIT_OK


def _cmd_criterion(args) -> int:
    data = parse_dataset_csv(args.input, args.p, args.q, has_header=args.has_header)
    subset = _parse_subset(args.subset, data.p)
    value = criterion(empirical_covariances(data), subset)
    print(repr(value))
    return EXIT_OK


def _cmd_probe(args) -> int:
    cfg = load_simulation_config(args.config)
    subset = _parse_subset(args.subset, cfg.model.p)
    n_grid = _parse_int_list(args.n_grid, "--n-grid")
    if not n_grid:
        raise ValueError("--n-grid must name at least one sample size")
    seed = args.seed if args.seed is not None else cfg.base_seed
    table = convergence_probe(cfg.model, subset, n_grid, args.reps, seed)
    emit_report(table, args.format, args.out)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SingularSubmatrixError, SingularDesignError) as e:
        print(f"covsel: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (DatasetFormatError, ConfigError, ValueError) as e:
        print(f"covsel: invalid input: {e}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as e:
        print(f"covsel: i/o failure: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
