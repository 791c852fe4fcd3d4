"""
Flat-file artifacts for campaigns: CSV tables, the key=value summary and optional SVG charts.

Artifacts carry no timestamps; floats are written with repr and exact rationals as p/q,
so identical campaigns produce identical bytes.
"""

import csv
import os
from fractions import Fraction
from typing import Dict, Iterable, List, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from core.python.shared.shared_logger import logger  # noqa: E402

SCALING_RUNS_COLUMNS = ["n", "r", "K", "replica", "seed", "iterations", "found"]
SCALING_COLUMNS = ["n", "r", "K", "replicas", "median_iterations", "q1_iterations", "q3_iterations",
                   "success_fraction", "normalized", "comparator", "flagged"]
RUNS_COLUMNS = ["replica", "seed", "n", "r", "K", "objective", "iterations", "found"]
PHASES_COLUMNS = ["replica", "position", "kappa", "start", "end", "skipped", "ratio_start", "ratio_end"]
PHASE_RATIOS_COLUMNS = ["replica", "position", "kappa", "nu", "ratio_start", "ratio_end", "retained"]
DRIFT_COLUMNS = ["replica", "seed", "position", "biased_steps", "random_walk_steps", "mu_start", "mu_end",
                 "max_deviation"]
DECOMPOSED_COLUMNS = ["t", "position", "class", "delta_numerator", "K", "mu_numerator"]
VERIFY_COLUMNS = ["oracle", "parameters-json", "bound", "empirical", "samples", "status"]

# Fixed salt keeps SVG element ids stable between runs
plt.rcParams["svg.hashsalt"] = "rcga-lab"


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if hasattr(value, "item"):
        return format_cell(value.item())
    return str(value)


def write_csv(path: str, columns: Sequence[str], rows: Iterable[Sequence]) -> int:
    """Write a header plus rows; returns the number of data rows."""
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    count = 0
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            if len(row) != len(columns):
                raise ValueError(f"{os.path.basename(path)}: row has {len(row)} fields, expected {len(columns)}")
            writer.writerow([format_cell(value) for value in row])
            count += 1
    logger.info(f"Wrote {count} row(s) to {path}")
    return count


def write_summary(path: str, summary: Dict[str, object]):
    """One `key=value` line per entry, sorted by key."""
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for key in sorted(summary):
            f.write(f"{key}={format_cell(summary[key])}\n")
    logger.info(f"Wrote summary to {path}")


def read_summary(path: str) -> Dict[str, str]:
    with open(path, encoding="utf-8") as f:
        return dict(line.rstrip("\n").split("=", 1) for line in f if "=" in line)


def plot_scaling(rows: List, path: str):
    """Normalized median runtime against n, one line per r."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for r in sorted({row.r for row in rows}):
        series = sorted((row.n, row.normalized) for row in rows if row.r == r)
        ax.plot([n for n, _ in series], [value for _, value in series], marker="o", label=f"r={r}")
    ax.set_xscale("log", base=2)
    ax.set_xlabel("n")
    ax.set_ylabel("median iterations / (K sqrt(n) ln n ln r)")
    ax.grid(True, alpha=0.3)
    ax.legend()
    _save(fig, path)


def plot_phase_retention(relative_retention: Sequence[float], threshold: float, path: str):
    """Histogram of end/start ratio per (position, phase, nu) with the retention threshold."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.hist(list(relative_retention), bins=40, color="steelblue")
    ax.axvline(threshold, color="red", linestyle="--", label=f"(1 - 1/kappa*)^3 = {threshold:.3f}")
    ax.set_xlabel("end-of-phase ratio / start-of-phase ratio")
    ax.set_ylabel("count")
    ax.legend()
    _save(fig, path)


def _save(fig, path: str):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.info(f"Wrote chart to {path}")
