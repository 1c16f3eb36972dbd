"""Command-line front end: ``sdstab simulate|check-clf|check-gains|bracket``."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import configure_logging
from .dynamics import bracket, check_clf_implication, lie_derivative
from .errors import DimensionError, SdstabError
from .scenarios import (
    EXIT_CONVERGED,
    EXIT_FAILED,
    EXIT_IO,
    EXIT_VIOLATIONS,
    ScenarioConfig,
    load_config,
    resolve_config,
    run_batch,
    run_scenario,
    scenario_for,
)
from .scenarios.builtin import annulus_points
from .smallgain import check_rank_conditions, check_small_gain

logger = logging.getLogger(__name__)


def _parse_annulus(text: str) -> tuple[float, float, int]:
    try:
        r_min, r_max, count = text.split(":")
        return float(r_min), float(r_max), int(count)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected R_MIN:R_MAX:COUNT, got {text!r}") from exc


def _parse_point(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sdstab", description=__doc__)
    parser.add_argument("--log-level", default=None, help="Logging level (defaults to SDSTAB_LOG_LEVEL or INFO).")
    commands = parser.add_subparsers(dest="command", required=True)

    def add_common(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("scenario", nargs="?", default=None, help="example1, example2 or custom.")
        sub.add_argument("--config", type=Path, default=None, help="JSON scenario document.")
        sub.add_argument("--csv", action="store_true", help="Print machine-readable CSV instead of a table.")

    simulate = commands.add_parser("simulate", help="Run the sampled-data closed loop and write artifacts.")
    add_common(simulate)
    simulate.add_argument("--out", type=Path, default=None, help="Output directory (overrides the config).")
    simulate.add_argument("--batch", type=Path, nargs="+", default=None, metavar="CFG",
                          help="Run several config documents in parallel processes.")
    simulate.add_argument("--workers", type=int, default=None, help="Process count for --batch.")

    check_clf = commands.add_parser("check-clf", help="Check the Lie-bracket CLF implication on a grid.")
    add_common(check_clf)
    check_clf.add_argument("--grid-annulus", type=_parse_annulus, default=(0.2, 3.0, 100),
                           metavar="R_MIN:R_MAX:COUNT", help="Annulus grid (default 0.2:3:100).")

    check_gains = commands.add_parser("check-gains", help="Check the small-gain and Lie rank conditions.")
    add_common(check_gains)
    check_gains.add_argument("--grid-size", type=int, default=50, help="Points on the gain grid.")
    check_gains.add_argument("--rank-points", type=int, default=100, help="Random points for the rank check.")

    show_bracket = commands.add_parser("bracket", help="Print f, g, [f,g] and their Lie derivatives at a point.")
    add_common(show_bracket)
    show_bracket.add_argument("--point", type=_parse_point, required=True, help="Comma-separated state, e.g. 1,-1.")
    return parser


def _print_rows(rows: Sequence[Sequence[object]], as_csv: bool) -> None:
    if as_csv:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerows(rows)
        return
    widths = [max(len(str(row[i])) for row in rows if i < len(row)) for i in range(max(len(r) for r in rows))]
    for row in rows:
        print("  ".join(str(cell).ljust(widths[i]) for i, cell in enumerate(row)).rstrip())


def _fmt(value: float) -> str:
    return format(float(value), ".10g")


def _cmd_simulate(args: argparse.Namespace) -> int:
    if args.batch:
        configs: List[ScenarioConfig] = []
        for path in args.batch:
            with path.open("r", encoding="utf-8") as handle:
                configs.append(load_config(handle.read()))
        results = run_batch(configs, args.workers)
        _print_rows([("output_dir", "exit_code"), *results], args.csv)
        return max(code for _, code in results)

    cfg = resolve_config(args.config, args.scenario)
    if args.out is not None:
        cfg = dataclasses.replace(cfg, output_dir=args.out)
    result = run_scenario(cfg)
    if result.outcome is None:
        print(f"error: {result.error}", file=sys.stderr)
        return result.exit_code
    summary = result.outcome.summary()
    rows = [("key", "value")] + [(key, value) for key, value in summary.items()]
    rows.append(("output_dir", str(cfg.output_dir)))
    _print_rows(rows, args.csv)
    if result.error:
        print(f"error: {result.error}", file=sys.stderr)
    return result.exit_code


def _cmd_check_clf(args: argparse.Namespace) -> int:
    cfg = resolve_config(args.config, args.scenario)
    scenario = scenario_for(cfg)
    if scenario.is_composite:
        raise DimensionError(f"check-clf needs a single-input affine scenario, got {cfg.scenario}")
    r_min, r_max, count = args.grid_annulus
    seed = None if scenario.system.state_dim == 2 else cfg.seed
    grid = annulus_points(r_min, r_max, count, scenario.system.state_dim, seed)
    report = check_clf_implication(scenario.system, scenario.phi, grid, cfg.tolerances.classification_tol)

    if args.csv:
        rows = [("x", "clause", "f_phi", "g_phi", "bracket_phi")]
        rows += [
            (";".join(_fmt(v) for v in item.point), item.clause, _fmt(item.f_phi), _fmt(item.g_phi),
             _fmt(item.bracket_phi))
            for item in report.violations
        ]
        _print_rows(rows, True)
    else:
        print(f"points checked: {report.points_checked}, skipped: {report.points_skipped}, "
              f"singular: {report.singular_points}")
        for item in report.violations:
            print(f"  {item.clause} at {[round(float(v), 6) for v in item.point]}: "
                  f"fPhi={_fmt(item.f_phi)} gPhi={_fmt(item.g_phi)} [f,g]Phi={_fmt(item.bracket_phi)}")
        print(f"{len(report.violations)} violations")
    return EXIT_CONVERGED if report.is_successful else EXIT_VIOLATIONS


def _cmd_check_gains(args: argparse.Namespace) -> int:
    cfg = resolve_config(args.config, args.scenario)
    scenario = scenario_for(cfg)
    if not scenario.is_composite:
        raise DimensionError(f"check-gains needs a composite scenario, got {cfg.scenario}")
    setup, composite = scenario.setup, scenario.composite

    gain_grid = np.geomspace(1e-2, 1e2, args.grid_size)
    gains = check_small_gain(setup, gain_grid)
    rng = np.random.default_rng(cfg.seed)
    points: List[np.ndarray] = []
    while len(points) < args.rank_points:
        direction = rng.standard_normal(composite.system.state_dim)
        candidate = direction / np.linalg.norm(direction) * rng.uniform(0.1, 3.0)
        x, y = composite.split(candidate)
        if np.all(x != 0.0) and np.all(y != 0.0):
            points.append(candidate)
    rank = check_rank_conditions(composite, setup, points)

    rows = [
        ("check", "points", "violations", "status"),
        ("small_gain", gains.points_checked, len(gains.violations), "pass" if gains.is_successful else "FAIL"),
        ("rank", rank.points_checked, len(rank.failures), "pass" if rank.is_successful else "FAIL"),
    ]
    _print_rows(rows, args.csv)
    if not args.csv:
        print(f"min gap upper-lower: {_fmt(gains.min_gap)}")
        if gains.limit_checked:
            print(f"limit check: upper={_fmt(gains.limit_upper)} lower={_fmt(gains.limit_lower)} "
                  f"({'pass' if gains.limit_passed else 'FAIL'})")
        for failure in rank.failures[:10]:
            print(f"  rank {failure.rank} < {failure.required} ({failure.condition}) at "
                  f"{[round(float(v), 6) for v in failure.point]}")
    return EXIT_CONVERGED if gains.is_successful and rank.is_successful else EXIT_VIOLATIONS


def _cmd_bracket(args: argparse.Namespace) -> int:
    cfg = resolve_config(args.config, args.scenario)
    scenario = scenario_for(cfg)
    if scenario.is_composite:
        raise DimensionError(f"bracket needs a single-input affine scenario, got {cfg.scenario}")
    system, phi = scenario.system, scenario.phi
    point = args.point
    if point.shape[0] != system.state_dim:
        raise DimensionError(f"--point has {point.shape[0]} components, {cfg.scenario} has {system.state_dim}")
    fg = bracket(system.f, system.g)

    vectors = [("f", system.f(point)), ("g", system.g(point)), ("[f,g]", fg(point))]
    scalars = [
        ("fPhi", lie_derivative(system.f, phi, point)),
        ("gPhi", lie_derivative(system.g, phi, point)),
        ("[f,g]Phi", lie_derivative(fg, phi, point)),
    ]
    rows = [("quantity", "value")]
    rows += [(name, ";".join(_fmt(v) for v in value)) for name, value in vectors]
    rows += [(name, _fmt(value)) for name, value in scalars]
    _print_rows(rows, args.csv)
    return EXIT_CONVERGED


COMMANDS = {
    "simulate": _cmd_simulate,
    "check-clf": _cmd_check_clf,
    "check-gains": _cmd_check_gains,
    "bracket": _cmd_bracket,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)
    try:
        return COMMANDS[args.command](args)
    except SdstabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover - CLI entry point
    sys.exit(main())
