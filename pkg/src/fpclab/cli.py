"""Command-line entry points.

Subcommands: gen (population file), truth (print enumerated truth), sweep
(variance table), numerical (precision table), all (full report incl. plots),
plot (re-render SVGs from a saved report.json). Exit codes: 0 success,
1 validation error, 2 I/O error, 3 --check threshold failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ExperimentConfig, config_from_json_file
from .errors import (
    ConfigError,
    ParameterError,
    PhaseError,
    PopulationFileError,
    ProvenanceError,
)
from .population import (
    PRESETS,
    enumerate_truth,
    generate_population,
    load_population,
    save_population,
)
from .report import (
    check_report,
    load_report,
    render_csv,
    render_json,
    render_numerical,
    render_plots,
    run_all,
    run_numerical_phase,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_CHECK = 3


class CheckFailure(Exception):
    def __init__(self, problems: list[str]):
        super().__init__(f"{len(problems)} check(s) failed")
        self.problems = problems


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="path to a JSON experiment config")
    common.add_argument("--seed", type=int, help="override the config base seed")
    common.add_argument("--out", help="override the config output directory")
    common.add_argument(
        "--workers",
        type=int,
        default=1,
        help="worker threads for replications (affects speed only, never results)",
    )

    parser = argparse.ArgumentParser(
        prog="fpclab",
        description="Finite-population sampling experiments and their numerical floor",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", parents=[common], help="generate a population file")
    p_gen.add_argument("--preset", choices=sorted(PRESETS), help="population preset")
    p_gen.add_argument("--size-n", type=int, help="population size for --preset")
    p_gen.add_argument("--file", help="output file (default <out>/population.fpop)")

    sub.add_parser("truth", parents=[common], help="print the enumerated truth")

    p_sweep = sub.add_parser(
        "sweep", parents=[common], help="variance-by-fraction table"
    )
    p_sweep.add_argument(
        "--check", action="store_true", help="assert the CI-gate invariants (exit 3 on failure)"
    )

    sub.add_parser("numerical", parents=[common], help="fixed-data numerical study table")

    p_all = sub.add_parser("all", parents=[common], help="full report: tables, JSON, plots")
    p_all.add_argument(
        "--check", action="store_true", help="assert the CI-gate invariants (exit 3 on failure)"
    )

    p_plot = sub.add_parser("plot", parents=[common], help="re-render plots from report.json")
    p_plot.add_argument("--report", help="saved report.json (default <out>/report.json)")

    return parser


def _load_config(args) -> ExperimentConfig:
    config = config_from_json_file(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        if not (0 <= args.seed < 2**64):
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        config.base_seed = args.seed
    if args.out is not None:
        config.output_dir = args.out
    return config


def _population_from_config(config: ExperimentConfig):
    if isinstance(config.population, str):
        return load_population(config.population)
    return generate_population(config.population)


def _cmd_gen(args) -> int:
    config = _load_config(args)
    if args.preset:
        kwargs = {}
        if args.size_n:
            kwargs["size_N"] = args.size_n
        if args.seed is not None:
            kwargs["seed"] = args.seed
        spec = PRESETS[args.preset](**kwargs)
        population = generate_population(spec)
    else:
        population = _population_from_config(config)
    target = Path(args.file) if args.file else Path(config.output_dir) / "population.fpop"
    target.parent.mkdir(parents=True, exist_ok=True)
    save_population(population, target)
    truth = population.truth
    print(
        f"wrote {target} (N={population.size_N}, kind={population.spec.kind}, "
        f"mean={truth.mean_mu!r}, var_pop={truth.var_pop!r})"
    )
    return EXIT_OK


def _cmd_truth(args) -> int:
    config = _load_config(args)
    population = _population_from_config(config)
    truth = enumerate_truth(population.values)
    print(
        json.dumps(
            {
                "N": truth.size_N,
                "mean_mu": truth.mean_mu,
                "var_pop": truth.var_pop,
                "var_srs": truth.var_srs,
                "kind": population.spec.kind,
            },
            indent=2,
            sort_keys=True,
        )
    )
    return EXIT_OK


def _print_table2(report) -> None:
    print(f"{'f':>8} {'n':>10} {'empirical_var':>16} {'fpc_var':>16} {'ratio':>8}")
    for row in report.table2:
        ratio = f"{row.ratio:.4f}" if row.ratio is not None else "-"
        print(
            f"{row.f:>8} {row.n:>10} {row.empirical_var:>16.6e} "
            f"{row.fpc_var:>16.6e} {ratio:>8}"
        )


def _print_table3(report) -> None:
    print(f"{'precision':>9} {'strategy':>24} {'observed_var':>14} {'max_abs_dev':>14}")
    for row in report.table3:
        print(
            f"{row.precision:>9} {row.strategy:>24} {row.observed_var:>14.3e} "
            f"{row.max_abs_dev:>14.3e}"
        )


def _run_and_check(args, emit_plots: bool) -> int:
    config = _load_config(args)
    report = run_all(config, workers=max(1, args.workers))
    render_csv(report, config.output_dir)
    render_json(report, config.output_dir)
    if emit_plots:
        render_plots(report, config.output_dir)
    _print_table2(report)
    print()
    _print_table3(report)
    print(f"\nnumerical floor ({report.metadata['sweep_strategy']}, "
          f"{report.metadata['sweep_precision']}): {report.numerical_floor:.3e}")
    print("regimes: " + ", ".join(f"f={r['f']}: {r['label']}" for r in report.regimes))
    print(f"artifacts in {config.output_dir}")
    if getattr(args, "check", False):
        problems = check_report(report, config)
        if problems:
            raise CheckFailure(problems)
        print("check: all invariants hold")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    return _run_and_check(args, emit_plots=False)


def _cmd_all(args) -> int:
    return _run_and_check(args, emit_plots=True)


def _cmd_numerical(args) -> int:
    config = _load_config(args)
    table1, table3 = run_numerical_phase(config)
    render_numerical(table3, config.output_dir)
    print(f"population: {table1[0]['population']} (N={table1[0]['N']})")
    print(f"{'precision':>9} {'strategy':>24} {'observed_var':>14} {'max_abs_dev':>14}")
    for row in table3:
        print(
            f"{row.precision:>9} {row.strategy:>24} {row.observed_var:>14.3e} "
            f"{row.max_abs_dev:>14.3e}"
        )
    print(f"artifacts in {config.output_dir}")
    return EXIT_OK


def _cmd_plot(args) -> int:
    config = _load_config(args)
    report_path = Path(args.report) if args.report else Path(config.output_dir) / "report.json"
    report = load_report(report_path)
    paths = render_plots(report, config.output_dir)
    print("\n".join(str(p) for p in paths))
    return EXIT_OK


_COMMANDS = {
    "gen": _cmd_gen,
    "truth": _cmd_truth,
    "sweep": _cmd_sweep,
    "numerical": _cmd_numerical,
    "all": _cmd_all,
    "plot": _cmd_plot,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except CheckFailure as exc:
        for problem in exc.problems:
            print(f"check failed: {problem}", file=sys.stderr)
        return EXIT_CHECK
    except (ConfigError, ParameterError, ProvenanceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except PhaseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc.cause, (OSError, PopulationFileError)):
            return EXIT_IO
        return EXIT_VALIDATION
    except (PopulationFileError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
