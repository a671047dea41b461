"""File exports: CSV for distributions/curves/heatmaps, Matrix Market for
generators, JSON for scalar results.  Output is deterministic byte for
byte given identical inputs."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import scipy.io

from .solver import Distribution
from .statespace import Generator

__all__ = [
    "write_distribution_csv",
    "write_curve_csv",
    "write_heatmap_csv",
    "write_trajectory_csv",
    "write_generator_mtx",
    "write_json",
]


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_distribution_csv(path, dist: Distribution, names) -> None:
    lines = [",".join(list(names) + ["probability"])]
    for state, p in zip(dist.space.states, dist.p):
        lines.append(",".join([str(int(v)) for v in state] + [_fmt(p)]))
    Path(path).write_text("\n".join(lines) + "\n")


def write_curve_csv(path, ts, values, header=("t", "survival")) -> None:
    lines = [",".join(header)]
    for t, v in zip(ts, values):
        lines.append(f"{_fmt(t)},{_fmt(v)}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_heatmap_csv(path, density: dict, names) -> None:
    lines = [",".join(list(names) + ["frequency"])]
    for state in sorted(density):
        lines.append(",".join([str(int(v)) for v in state] + [_fmt(density[state])]))
    Path(path).write_text("\n".join(lines) + "\n")


def write_trajectory_csv(path, trajectory, names) -> None:
    lines = [",".join(["t"] + list(names))]
    for t, state in zip(trajectory.times, trajectory.states):
        lines.append(",".join([_fmt(t)] + [str(int(v)) for v in state]))
    Path(path).write_text("\n".join(lines) + "\n")


def write_generator_mtx(path, gen: Generator) -> None:
    """Matrix Market coordinate format (sparse, real, general)."""
    scipy.io.mmwrite(str(path), gen.matrix.tocoo())


def write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
