"""Synthetic margin oracle and budgeted convergence experiments.

A MosTable plays the role of the comparison model's ground truth: the true
margin of a pair is the difference of the two quality scores, and a
configurable noise model (additive Gaussian, optional sign flip, clamping to
the 1-5 scale's gap range) turns it into a predicted margin. The experiment
driver grows a sparse comparison graph batch by batch, refreshes the
sampler's provisional ratings from the accumulated edges, and tracks how
quickly each aggregation method's leaderboard correlations stabilize.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from statistics import median
from typing import Sequence

import numpy as np

from .aggregate import EloConfig, Leaderboard, elo_rank, lsq_recover, winrate_rank
from .errors import DisconnectedGraphWarning, InvalidInputError
from .graph import PairSampler, connected_components
from .metrics import DEFAULT_STABILITY_TOLERANCE, MetricCurve, srcc, plcc, stability_point
from .metrics import write_convergence_csv

METHODS = ("lsq", "elo", "winrate")
METRICS = ("srcc", "plcc")


@dataclass
class MosTable:
    """Per-video ground-truth quality scores."""

    ids: list[str]
    mos: np.ndarray

    def __post_init__(self) -> None:
        self.mos = np.asarray(self.mos, dtype=float)
        if len(self.ids) != self.mos.size:
            raise InvalidInputError("ids and mos lengths differ")
        if len(set(self.ids)) != len(self.ids):
            raise InvalidInputError("video ids must be unique")
        if not np.all(np.isfinite(self.mos)):
            raise InvalidInputError("mos values must be finite")

    def __len__(self) -> int:
        return len(self.ids)

    @classmethod
    def from_csv(cls, path: str | Path, check_scale: bool = True) -> "MosTable":
        ids: list[str] = []
        mos: list[float] = []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip() for h in header[:2]] != ["video_id", "mos"]:
                raise InvalidInputError(f"{path}: expected header 'video_id,mos'")
            for lineno, row in enumerate(reader, start=2):
                if len(row) < 2:
                    raise InvalidInputError(f"{path}: malformed row {lineno}")
                try:
                    value = float(row[1])
                except ValueError as exc:
                    raise InvalidInputError(f"{path}: bad mos at row {lineno}") from exc
                ids.append(row[0])
                mos.append(value)
        table = cls(ids=ids, mos=np.asarray(mos))
        if check_scale and table.mos.size and (
            table.mos.min() < 1.0 or table.mos.max() > 5.0
        ):
            raise InvalidInputError(f"{path}: mos values must lie in [1, 5]")
        return table

    @classmethod
    def synthetic(cls, n: int, seed: int) -> "MosTable":
        """Uniform scores on the 1-5 scale, for experiments without real data."""
        if n < 1:
            raise InvalidInputError("n must be >= 1")
        rng = np.random.default_rng(seed)
        return cls(ids=[f"v{i:04d}" for i in range(n)], mos=rng.uniform(1.0, 5.0, n))


@dataclass
class NoiseModel:
    sigma: float = 0.0
    flip_prob: float = 0.0
    clamp: tuple[float, float] = (-4.0, 4.0)

    def __post_init__(self) -> None:
        if self.sigma < 0:
            raise InvalidInputError("sigma must be >= 0")
        if not 0.0 <= self.flip_prob <= 1.0:
            raise InvalidInputError("flip_prob must be in [0, 1]")
        if not self.clamp[0] < self.clamp[1]:
            raise InvalidInputError("clamp range must be non-empty")


def true_margin(mos_i: float, mos_j: float) -> float:
    return mos_i - mos_j


def predict_margin(
    margin: float, noise: NoiseModel, rng: np.random.Generator
) -> float:
    """Noisy margin prediction: add Gaussian noise, maybe flip sign, clamp.

    Always consumes one normal and one uniform draw so the stream stays
    aligned across noise configurations.
    """
    noisy = margin + rng.normal(0.0, noise.sigma)
    if rng.random() < noise.flip_prob:
        noisy = -noisy
    return float(min(max(noisy, noise.clamp[0]), noise.clamp[1]))


@dataclass
class SeedResult:
    seed: int
    curves: dict[str, dict[str, MetricCurve]]  # method -> metric -> curve
    stability: dict[str, dict[str, int]]
    finals: dict[str, dict[str, float]]
    final_degrees: np.ndarray | None = None
    final_components: int = 1


@dataclass
class ConvergenceReport:
    seeds: list[int]
    per_seed: list[SeedResult]
    budgets: list[int]
    median_curves: dict[str, dict[str, MetricCurve]]
    median_stability: dict[str, dict[str, float]]
    median_finals: dict[str, dict[str, float]]
    methods: tuple[str, ...] = METHODS
    total_budget: int = 0


def run_convergence_experiment(
    mos: MosTable,
    noise: NoiseModel,
    budget_multiplier: float = 5.0,
    batch_size: int = 64,
    methods: Sequence[str] = METHODS,
    seeds: Sequence[int] = (0,),
    stability_tolerance: float = DEFAULT_STABILITY_TOLERANCE,
    elo_config: EloConfig | None = None,
    draw_threshold: float = 0.2,
    rating_refresh: str = "lsq",
    quantile_count: int = 10,
    window_width: float = 0.5,
    workers: int = 1,
) -> ConvergenceReport:
    """Sample comparisons up to ceil(budget_multiplier * N) edges per seed and
    track SRCC/PLCC of each requested aggregator at every batch prefix.

    Seeds run independently (optionally in parallel) and are reduced in seed
    order, so the report is deterministic regardless of worker count.
    """
    n = len(mos)
    if n < 3:
        raise InvalidInputError("need at least 3 videos to run an experiment")
    if not budget_multiplier > 0:
        raise InvalidInputError("budget_multiplier must be positive")
    if batch_size < 1:
        raise InvalidInputError("batch_size must be >= 1")
    methods = tuple(methods)
    if not methods:
        raise InvalidInputError("at least one method is required")
    for method in methods:
        if method not in METHODS:
            raise InvalidInputError(f"unknown method '{method}'")
    if rating_refresh not in ("lsq", "elo"):
        raise InvalidInputError(f"unknown rating refresh '{rating_refresh}'")
    if not seeds:
        raise InvalidInputError("at least one seed is required")
    elo_config = elo_config or EloConfig(draw_threshold=draw_threshold)

    def run_seed(seed: int) -> SeedResult:
        return _run_seed(
            seed, mos, noise, budget_multiplier, batch_size, methods,
            stability_tolerance, elo_config, draw_threshold, rating_refresh,
            quantile_count, window_width,
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_seed = list(pool.map(run_seed, seeds))
    else:
        per_seed = [run_seed(seed) for seed in seeds]

    budgets = per_seed[0].curves[methods[0]]["srcc"].budgets
    median_curves: dict[str, dict[str, MetricCurve]] = {}
    median_stability: dict[str, dict[str, float]] = {}
    median_finals: dict[str, dict[str, float]] = {}
    for method in methods:
        median_curves[method] = {}
        median_stability[method] = {}
        median_finals[method] = {}
        for metric in METRICS:
            stacked = [result.curves[method][metric].values for result in per_seed]
            med_values = [median(col) for col in zip(*stacked)]
            median_curves[method][metric] = MetricCurve(
                budgets=list(budgets), values=med_values, metric=metric, method=method
            )
            median_stability[method][metric] = median(
                result.stability[method][metric] for result in per_seed
            )
            median_finals[method][metric] = median(
                result.finals[method][metric] for result in per_seed
            )
    return ConvergenceReport(
        seeds=list(seeds),
        per_seed=per_seed,
        budgets=list(budgets),
        median_curves=median_curves,
        median_stability=median_stability,
        median_finals=median_finals,
        methods=methods,
        total_budget=math.ceil(budget_multiplier * n),
    )


def _run_seed(
    seed: int,
    mos: MosTable,
    noise: NoiseModel,
    budget_multiplier: float,
    batch_size: int,
    methods: tuple[str, ...],
    stability_tolerance: float,
    elo_config: EloConfig,
    draw_threshold: float,
    rating_refresh: str,
    quantile_count: int,
    window_width: float,
) -> SeedResult:
    n = len(mos)
    total = math.ceil(budget_multiplier * n)
    # Independent sub-streams: changing the noise model never perturbs the
    # sampled graph.
    sample_ss, noise_ss = np.random.SeedSequence(seed).spawn(2)
    sampler = PairSampler(n, sample_ss, quantile_count, window_width)
    noise_rng = np.random.default_rng(noise_ss)

    edges: list[tuple[int, int, float]] = []
    budgets: list[int] = []
    values: dict[str, dict[str, list[float]]] = {
        method: {metric: [] for metric in METRICS} for method in methods
    }
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DisconnectedGraphWarning)
        while len(edges) < total:
            request = min(batch_size, total - len(edges))
            pairs = sampler.sample_batch(request)
            if not pairs:
                break  # all-pairs graph saturated within one batch
            for i, j in pairs:
                margin = predict_margin(true_margin(mos.mos[i], mos.mos[j]), noise, noise_rng)
                edges.append((i, j, margin))
            lsq_board = lsq_recover(n, edges)
            if rating_refresh == "lsq":
                sampler.update_provisional_ratings(lsq_board.scores)
            else:
                sampler.update_provisional_ratings(elo_rank(n, edges, elo_config).scores)
            budgets.append(len(edges))
            for method in methods:
                board = _aggregate(method, n, edges, lsq_board, elo_config, draw_threshold)
                values[method]["srcc"].append(srcc(board.scores, mos.mos))
                values[method]["plcc"].append(plcc(board.scores, mos.mos))

    curves = {
        method: {
            metric: MetricCurve(
                budgets=list(budgets),
                values=values[method][metric],
                metric=metric,
                method=method,
            )
            for metric in METRICS
        }
        for method in methods
    }
    stability = {
        method: {
            metric: stability_point(curves[method][metric], stability_tolerance)
            for metric in METRICS
        }
        for method in methods
    }
    finals = {
        method: {metric: curves[method][metric].values[-1] for metric in METRICS}
        for method in methods
    }
    labels = connected_components(sampler.graph)
    return SeedResult(
        seed=seed,
        curves=curves,
        stability=stability,
        finals=finals,
        final_degrees=sampler.graph.match_counts.copy(),
        final_components=int(labels.max()) + 1,
    )


def _aggregate(
    method: str,
    n: int,
    edges: list[tuple[int, int, float]],
    lsq_board: Leaderboard,
    elo_config: EloConfig,
    draw_threshold: float,
) -> Leaderboard:
    if method == "lsq":
        return lsq_board
    if method == "elo":
        return elo_rank(n, edges, elo_config)
    return winrate_rank(n, edges, draw_threshold)


def report_summary(report: ConvergenceReport) -> dict:
    """JSON-ready summary: per-seed and aggregate stability budgets and finals."""
    def block(stability, finals):
        return {
            method: {
                metric: {
                    "stability_budget": stability[method][metric],
                    "final_value": round(finals[method][metric], 6),
                }
                for metric in METRICS
            }
            for method in report.methods
        }

    return {
        "seeds": {
            str(result.seed): block(result.stability, result.finals)
            for result in report.per_seed
        },
        "aggregate": block(report.median_stability, report.median_finals),
        "total_budget": report.total_budget,
    }


def write_report(report: ConvergenceReport, outdir: str | Path) -> tuple[Path, Path]:
    """Write convergence.csv (median curves) and summary.json; return both paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    csv_path = outdir / "convergence.csv"
    curves = [
        report.median_curves[method][metric]
        for method in report.methods
        for metric in METRICS
    ]
    write_convergence_csv(csv_path, curves)
    json_path = outdir / "summary.json"
    with open(json_path, "w") as fh:
        json.dump(report_summary(report), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return csv_path, json_path
