"""Command line interface.

Subcommands:

* ``run``      execute the scenario matrix and write result CSVs
* ``validate`` check a data directory and config without running anything
* ``tables``   build and write the capacity lookup tables only

Exit codes: 0 success, 2 input validation failure, 3 runtime failure,
4 I/O failure. The environment variable ``BBAND_SIM_CACHE`` overrides the
capacity-table cache directory (default: ``<out>/capacity_cache``).
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from pathlib import Path

from .core import enumerate_runs
from .data_io import load_bundle, load_config, _Collector, _build_sim_params, _build_table_portfolios, _load_se_table, default_se_table_path
from .errors import BbandSimError, InputValidationError
from .pipeline import emit_results, run_pipeline
from .radio import build_capacity_table, save_capacity_tables

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3
EXIT_IO = 4

logger = logging.getLogger("bband_sim")

RUN_FILTER_FIELDS = ("generation", "backhaul", "sharing", "policy", "energy", "capacity", "adoption")


def parse_run_filter(expr: str):
    """Parse ``field=v1|v2,field=v`` into a predicate over (strategy, scenario).

    Fields: generation, backhaul, sharing, policy, energy, capacity,
    adoption. Clauses are ANDed; ``|`` separates alternatives in a clause.
    """
    clauses = []
    for part in expr.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ValueError(f"run filter clause {part!r} must look like field=value")
        field, _, values = part.partition("=")
        field = field.strip()
        if field not in RUN_FILTER_FIELDS:
            raise ValueError(f"unknown run filter field {field!r} (valid: {RUN_FILTER_FIELDS})")
        clauses.append((field, {v.strip() for v in values.split("|")}))

    def accept(strategy, scenario) -> bool:
        lookup = {
            "generation": strategy.generation.value,
            "backhaul": strategy.backhaul.value,
            "sharing": strategy.sharing.value,
            "policy": strategy.policy.value,
            "energy": strategy.energy_strategy.value,
            "capacity": f"{scenario.capacity_gb_month:g}",
            "adoption": scenario.adoption.value,
        }
        return all(lookup[f] in allowed for f, allowed in clauses)

    return accept


def _cmd_validate(args) -> int:
    try:
        load_bundle(args.data, args.config)
    except InputValidationError as err:
        for diag in err.diagnostics:
            print(diag, file=sys.stderr)
        print(f"INVALID: {len(err.diagnostics)} problem(s)", file=sys.stderr)
        return EXIT_VALIDATION
    print("OK")
    return EXIT_OK


def _cmd_run(args) -> int:
    try:
        bundle = load_bundle(args.data, args.config)
    except InputValidationError as err:
        for diag in err.diagnostics:
            print(diag, file=sys.stderr)
        return EXIT_VALIDATION

    if args.seed is not None:
        bundle = dataclasses.replace(
            bundle, sim_params=dataclasses.replace(bundle.sim_params, seed=args.seed)
        )

    runs = enumerate_runs(bundle.strategy_space, bundle.scenario_space)
    if args.runs:
        try:
            accept = parse_run_filter(args.runs)
        except ValueError as err:
            print(f"bad --runs expression: {err}", file=sys.stderr)
            return EXIT_VALIDATION
        runs = [r for r in runs if accept(*r)]
        if not runs:
            print("run filter matched nothing", file=sys.stderr)
            return EXIT_VALIDATION

    out_dir = Path(args.out)
    cache_dir = os.environ.get("BBAND_SIM_CACHE") or out_dir / "capacity_cache"
    try:
        output = run_pipeline(bundle, runs, jobs=args.jobs, cache_dir=cache_dir)
        paths = emit_results(output.results, out_dir)
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return EXIT_IO
    except BbandSimError as err:
        print(f"runtime error: {err}", file=sys.stderr)
        return EXIT_RUNTIME

    for p in paths:
        logger.info("wrote %s", p)
    print(f"{len(runs)} run(s), {len(output.results)} result rows -> {out_dir}")
    if output.failures:
        for f in output.failures:
            print(f"FAILED run {f.strategy} {f.scenario}: {f.error}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def _cmd_tables(args) -> int:
    collector = _Collector()
    config = load_config(args.config, collector)
    sim_params, grid = _build_sim_params(config, collector)
    portfolios = _build_table_portfolios(config, collector)
    if args.seed is not None:
        sim_params = dataclasses.replace(sim_params, seed=args.seed)

    se_path = default_se_table_path()
    if args.data:
        candidate = Path(args.data) / "se_table.csv"
        if candidate.is_file():
            se_path = candidate
    se_table = _load_se_table(se_path, sim_params.mimo_efficiency, collector)
    if collector.diagnostics:
        for diag in collector.diagnostics:
            print(diag, file=sys.stderr)
        return EXIT_VALIDATION

    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        tables = [
            build_capacity_table(sim_params, se_table, fs, grid, jobs=args.jobs)
            for fs in portfolios
        ]
        path = out_dir / "capacity_tables.csv"
        save_capacity_tables(tables, path)
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return EXIT_IO
    except BbandSimError as err:
        print(f"runtime error: {err}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bband-sim",
        description="Universal mobile broadband cost, energy and emissions simulator.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute the scenario matrix")
    run.add_argument("--data", required=True, help="input data directory")
    run.add_argument("--config", required=True, help="YAML config file")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--seed", type=int, default=None, help="override the simulation seed")
    run.add_argument("--jobs", type=int, default=1, help="worker threads")
    run.add_argument("--runs", default=None, help="filter, e.g. 'generation=4G,capacity=30'")
    run.set_defaults(func=_cmd_run)

    val = sub.add_parser("validate", help="validate inputs and exit")
    val.add_argument("--data", required=True)
    val.add_argument("--config", required=True)
    val.set_defaults(func=_cmd_validate)

    tab = sub.add_parser("tables", help="build capacity lookup tables only")
    tab.add_argument("--config", required=True)
    tab.add_argument("--out", required=True)
    tab.add_argument("--data", default=None, help="optional data dir providing se_table.csv")
    tab.add_argument("--seed", type=int, default=None)
    tab.add_argument("--jobs", type=int, default=1)
    tab.set_defaults(func=_cmd_tables)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
