"""Flat-file outputs of a run: CSV tables, a text summary and a phase-plane SVG."""

from __future__ import annotations

import csv
import logging
from pathlib import Path
from typing import Callable, Iterable, List, Mapping, Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ..integrate import Trajectory  # noqa: E402
from ..sampled_loop import LEDGER_COLUMNS, RunOutcome, SampleLedger  # noqa: E402

logger = logging.getLogger(__name__)

TRAJECTORY_FILE = "trajectory.csv"
LEDGER_FILE = "ledger.csv"
SUMMARY_FILE = "summary.txt"
PHASE_FILE = "phase.svg"


def format_float(value: float) -> str:
    return format(float(value), ".17g")


def _format_cell(value: object) -> str:
    if isinstance(value, bool) or not isinstance(value, (int, float, np.floating, np.integer)):
        return str(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format_float(value)


def _write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence[object]]) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_cell(cell) for cell in row])


def trajectory_header(state_dim: int, input_dim: int) -> List[str]:
    return ["t", *(f"x_{i + 1}" for i in range(state_dim)), *(f"u_{j + 1}" for j in range(input_dim)), "phi"]


def write_trajectory_csv(path: Path, trajectory: Trajectory, value: Callable[[np.ndarray], float]) -> Path:
    state_dim = trajectory.states.shape[1]
    input_dim = trajectory.controls.shape[1]
    rows = (
        [t, *state, *control, value(state)]
        for t, state, control in zip(trajectory.times, trajectory.states, trajectory.controls)
    )
    _write_rows(path, trajectory_header(state_dim, input_dim), rows)
    return Path(path)


def write_ledger_csv(path: Path, ledger: SampleLedger) -> Path:
    rows = ([row[column] for column in LEDGER_COLUMNS] for row in ledger.as_rows())
    _write_rows(path, LEDGER_COLUMNS, rows)
    return Path(path)


def read_ledger_csv(path: Path) -> SampleLedger:
    with Path(path).open("r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        missing = set(LEDGER_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path} is missing ledger columns {sorted(missing)}")
        return SampleLedger.from_rows(list(reader))


def write_summary(path: Path, outcome: RunOutcome, extra: Optional[Mapping[str, object]] = None) -> Path:
    summary = outcome.summary()
    lines = [
        f"verdict: {summary['verdict']}",
        f"events: {summary['events']}",
        f"final_phi: {format_float(summary['final_phi']) if summary['final_phi'] is not None else 'n/a'}",
        f"final_time: {format_float(summary['final_time'])}",
    ]
    if summary["cause"]:
        lines.append(f"cause: {summary['cause']}")
    lines.extend(f"{key}: {value}" for key, value in (extra or {}).items())
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return Path(path)


def write_phase_svg(path: Path, trajectory: Trajectory, sample_times: Sequence[float], title: str = "") -> Path:
    """State-plane polyline of a 2-D run with the sampling instants marked."""

    if trajectory.states.shape[1] != 2:
        raise ValueError("phase portraits need a two-dimensional state")
    xs, ys = trajectory.states[:, 0], trajectory.states[:, 1]
    indices = np.searchsorted(trajectory.times, np.asarray(sample_times, dtype=float))
    indices = indices[indices < len(trajectory)]

    with plt.rc_context({"svg.hashsalt": "sdstab", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(5, 5))
        try:
            ax.plot(xs, ys, linewidth=1.2, color="tab:blue")
            ax.plot(xs[indices], ys[indices], linestyle="none", marker="o", markersize=3, color="tab:red")
            ax.plot([0.0], [0.0], marker="+", markersize=8, color="black")
            ax.set_xlabel("x_1")
            ax.set_ylabel("x_2")
            if title:
                ax.set_title(title)
            ax.grid(True, alpha=0.3)
            fig.tight_layout()
            fig.savefig(path, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
    return Path(path)


__all__ = [
    "LEDGER_FILE",
    "PHASE_FILE",
    "SUMMARY_FILE",
    "TRAJECTORY_FILE",
    "format_float",
    "read_ledger_csv",
    "trajectory_header",
    "write_ledger_csv",
    "write_phase_svg",
    "write_summary",
    "write_trajectory_csv",
]
