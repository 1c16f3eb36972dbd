"""Multi-start convergence sweep for a built-in scenario.

Runs the closed loop from random initial states in an annulus, re-checks each
ledger and prints a JSON report. Exits non-zero when any run fails to converge
or any ledger check fails. With ``--allow-budget`` a run that exhausts its
event budget with a clean ledger still counts as a pass.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time

from sdstab import configure_logging
from sdstab.sampled_loop import Verdict, verify_ledger
from sdstab.scenarios import default_config, execute, scenario_for
from sdstab.scenarios.builtin import annulus_points


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("scenario", choices=("example1", "example2"), help="Built-in scenario to sweep.")
    parser.add_argument("--starts", type=int, default=20, help="Number of initial states (defaults to 20).")
    parser.add_argument("--r-min", type=float, default=0.1, help="Inner annulus radius.")
    parser.add_argument("--r-max", type=float, default=5.0, help="Outer annulus radius.")
    parser.add_argument("--stop-phi", type=float, default=1e-4, help="Convergence threshold on the ledger value.")
    parser.add_argument("--max-events", type=int, default=2000, help="Event budget per run.")
    parser.add_argument("--sigma", type=float, default=0.5, help="Maximal dwell.")
    parser.add_argument("--seed", type=int, default=0, help="Seed for the initial states.")
    parser.add_argument(
        "--allow-budget", action="store_true", help="Accept Budget verdicts whose ledger checks pass."
    )
    parser.add_argument("--pretty", action="store_true", help="Indent the JSON report.")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    configure_logging("WARNING")

    base = dataclasses.replace(
        default_config(args.scenario),
        sigma=args.sigma,
        stop_phi=args.stop_phi,
        max_events=args.max_events,
        seed=args.seed,
    )
    scenario = scenario_for(base)
    starts = annulus_points(args.r_min, args.r_max, args.starts, scenario.system.state_dim, args.seed)

    runs = []
    started = time.perf_counter()
    for x0 in starts:
        cfg = dataclasses.replace(base, x0=tuple(float(v) for v in x0))
        _, outcome = execute(cfg, scenario)
        checks = None
        if outcome.ledger.events:
            report = verify_ledger(
                outcome.ledger,
                None if scenario.is_composite else scenario.phi,
                scenario.a1,
                slack=cfg.tolerances.slack,
                trajectory=outcome.trajectory,
            )
            checks = report.as_dict()
        runs.append({"x0": list(cfg.x0), **outcome.summary(), "ledger": checks})

    accepted = {Verdict.CONVERGED.value}
    if args.allow_budget:
        accepted.add(Verdict.BUDGET.value)
    failures = [
        run for run in runs
        if run["verdict"] not in accepted or (run["ledger"] is not None and not run["ledger"]["is_successful"])
    ]
    payload = {
        "scenario": args.scenario,
        "starts": len(runs),
        "converged": sum(1 for run in runs if run["verdict"] == Verdict.CONVERGED.value),
        "max_events_used": max((run["events"] for run in runs), default=0),
        "elapsed_s": round(time.perf_counter() - started, 3),
        "failures": failures,
    }
    print(json.dumps(payload, indent=2 if args.pretty else None, sort_keys=True))
    return 1 if failures else 0


if __name__ == "__main__":  # pragma: no cover - CLI entry point
    sys.exit(main())
