"""Rank and linear correlation metrics, plus the convergence stability point."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np
from scipy.stats import rankdata

from .errors import InvalidInputError, UndefinedCorrelationError

DEFAULT_STABILITY_TOLERANCE = 0.005


@dataclass
class MetricCurve:
    """One metric evaluated at increasing comparison budgets for one method."""

    budgets: list[int]
    values: list[float]
    metric: str  # srcc | plcc
    method: str  # lsq | elo | winrate


def _pair(predicted, ground_truth) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(predicted, dtype=float)
    y = np.asarray(ground_truth, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise InvalidInputError("inputs must be 1-d and of equal length")
    if x.size < 2:
        raise UndefinedCorrelationError("correlation needs at least 2 items")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise InvalidInputError("inputs must be finite")
    return x, y


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    xc = x - x.mean()
    yc = y - y.mean()
    denom = np.sqrt((xc @ xc) * (yc @ yc))
    if denom == 0:
        raise UndefinedCorrelationError("correlation undefined for constant input")
    return float(np.clip((xc @ yc) / denom, -1.0, 1.0))


def plcc(predicted, ground_truth) -> float:
    """Pearson linear correlation of the raw values."""
    return _pearson(*_pair(predicted, ground_truth))


def srcc(predicted, ground_truth) -> float:
    """Spearman rank correlation: Pearson on average ranks (ties averaged)."""
    x, y = _pair(predicted, ground_truth)
    return _pearson(rankdata(x, method="average"), rankdata(y, method="average"))


def stability_point(curve: MetricCurve, tolerance: float = DEFAULT_STABILITY_TOLERANCE) -> int:
    """Smallest budget after which the curve stays within tolerance of its final value."""
    if not curve.budgets:
        raise InvalidInputError("curve is empty")
    if len(curve.budgets) != len(curve.values):
        raise InvalidInputError("budgets and values length mismatch")
    if not tolerance > 0:
        raise InvalidInputError("tolerance must be positive")
    final = curve.values[-1]
    stable_from = len(curve.values) - 1
    for idx in range(len(curve.values) - 1, -1, -1):
        if abs(curve.values[idx] - final) <= tolerance:
            stable_from = idx
        else:
            break
    return curve.budgets[stable_from]


def write_convergence_csv(path: str | Path, curves: Iterable[MetricCurve]) -> None:
    """Write `budget,method,metric,value` rows; correlations use 4 decimals."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["budget", "method", "metric", "value"])
        for curve in curves:
            for budget, value in zip(curve.budgets, curve.values):
                writer.writerow([budget, curve.method, curve.metric, f"{value:.4f}"])
