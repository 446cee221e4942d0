"""Command line entry point: run a carbon-tax scenario or calibrate emission intensities.

Usage:
  taxframe run --sectors s.csv --households h.csv --scenario sc.json --out results/ \
      [--population-weights urban=0.56,rural=0.44] [--open-model] [--scope all|urban|rural]
  taxframe calibrate --sectors s.csv --households h.csv --scenario sc.json \
      --target-total 75113.30 [--write emissions_calibrated.csv]
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from .accounts import EMISSIONS_HEADER, load_household_accounts, load_sector_accounts
from .config import Config
from .errors import EXIT_IO, EXIT_OK, TaxFrameError
from .fiscal import calibrate_intensity_scale, load_scenario, prepare_model, run_scenario
from .forms import parse_population_weights
from .inequality import RegionScope, regressivity, scope_distributions
from .report import (
    Precision,
    RunConfig,
    emit_contribution_shares,
    emit_diagnostics,
    emit_impact_table,
    emit_lorenz_gini,
    scope_table,
)

logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    """Usage errors exit 1 like every other validation failure."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _scope(value: str) -> RegionScope:
    try:
        return RegionScope.parse(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _add_inputs(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--sectors", required=True, type=Path, help="IO table CSV")
    parser.add_argument("--households", required=True, type=Path, help="household accounts CSV")
    parser.add_argument("--scenario", required=True, type=Path, help="scenario JSON")
    parser.add_argument(
        "--open-model",
        action="store_true",
        help="drop induced household consumption (K = I)",
    )


def run_pipeline(config: RunConfig) -> dict[str, str]:
    accounts = load_sector_accounts(config.sectors_file)
    households = load_household_accounts(config.households_file, accounts.sector_ids)
    scenario = load_scenario(config.scenario_file, accounts.sector_ids)
    model = prepare_model(accounts, households)
    result = run_scenario(accounts, households, scenario, open_model=config.open_model, model=model)

    outputs = {
        f"impact_{scope.slug}.csv": emit_impact_table(result, scope, config.precision)
        for scope in RegionScope
    }
    outputs["contribution.csv"] = emit_contribution_shares(result, config.precision)

    skipped = []
    distributions = scope_distributions(result, config.population_weights, scopes=(config.scope,))
    if config.scope in distributions:
        before, after = distributions[config.scope]
        outputs[f"lorenz_{config.scope.slug}.json"] = emit_lorenz_gini(before, after, config.scope)
    else:
        skipped.append(config.scope)

    burdens = {}
    for scope in RegionScope:
        pct_dy = scope_table(result, scope)["pct_dy"].to_numpy()
        if pct_dy.size >= 2 and np.isfinite(pct_dy).all():
            burdens[scope] = regressivity(pct_dy)
    outputs["diagnostics.json"] = emit_diagnostics(model, result, burdens, skipped)
    return outputs


def cmd_run(args) -> int:
    config = RunConfig(
        sectors_file=args.sectors,
        households_file=args.households,
        scenario_file=args.scenario,
        output_dir=args.out,
        population_weights=parse_population_weights(args.population_weights),
        open_model=args.open_model,
        scope=args.scope,
        precision=Precision(),
    )
    outputs = run_pipeline(config)
    config.output_dir.mkdir(parents=True, exist_ok=True)
    for name, text in outputs.items():
        (config.output_dir / name).write_text(text, encoding="utf-8")
    logger.info("Wrote %d files to %s", len(outputs), config.output_dir)
    print(f"Wrote {len(outputs)} files to {config.output_dir}")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    accounts = load_sector_accounts(args.sectors)
    households = load_household_accounts(args.households, accounts.sector_ids)
    scenario = load_scenario(args.scenario, accounts.sector_ids)
    scale = calibrate_intensity_scale(
        accounts, households, scenario, args.target_total, open_model=args.open_model
    )
    print(f"scale={scale:.12g}")
    if args.write:
        scaled = scenario.scaled(scale).emissions
        frame = pd.DataFrame({EMISSIONS_HEADER[0]: scaled.sector_ids, EMISSIONS_HEADER[1]: scaled.e})
        args.write.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(args.write, index=False, lineterminator="\n", float_format="%.12g")
        print(f"Wrote calibrated intensities to {args.write}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="taxframe", description="Carbon-tax household income incidence (Miyazawa IO).")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="Run a scenario and write result files")
    _add_inputs(p_run)
    p_run.add_argument("--out", required=True, type=Path, help="output directory")
    p_run.add_argument(
        "--population-weights",
        default=Config.POPULATION_WEIGHTS or None,
        help="urban=..,rural=.. fractions for the combined Gini",
    )
    p_run.add_argument("--scope", type=_scope, default=RegionScope.ALL, help="all, urban or rural")
    p_run.set_defaults(func=cmd_run)

    p_cal = sub.add_parser("calibrate", help="Scale emission intensities to hit a total decline")
    _add_inputs(p_cal)
    p_cal.add_argument("--target-total", required=True, type=float, help="target total DY (million Rp)")
    p_cal.add_argument("--write", type=Path, help="write the scaled emissions CSV here")
    p_cal.set_defaults(func=cmd_calibrate)

    return parser


def cli_main(argv: list[str] | None = None) -> int:
    Config.init_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        return args.func(args)
    except TaxFrameError as exc:
        logger.debug("Run failed", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_IO


def main() -> None:
    raise SystemExit(cli_main())
