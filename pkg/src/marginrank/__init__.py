"""marginrank: anchor-free leaderboards from sparse signed pairwise margins."""

from .aggregate import (
    EloConfig,
    Leaderboard,
    elo_rank,
    lsq_recover,
    scores_to_ranks,
    winrate_rank,
    write_leaderboard_csv,
)
from .errors import (
    DisconnectedGraphWarning,
    InvalidInputError,
    MarginMagnitudeWarning,
    UndefinedCorrelationError,
)
from .graph import ComparisonGraph, PairSampler, connected_components
from .metrics import MetricCurve, plcc, srcc, stability_point, write_convergence_csv
from .rewards import (
    RewardConfig,
    RolloutOutcome,
    group_advantages,
    margin_mse,
    rollout_reward,
)
from .simulate import (
    ConvergenceReport,
    MosTable,
    NoiseModel,
    predict_margin,
    report_summary,
    run_convergence_experiment,
    true_margin,
    write_report,
)

__version__ = "0.1.0"

__all__ = [
    "ComparisonGraph",
    "ConvergenceReport",
    "DisconnectedGraphWarning",
    "EloConfig",
    "InvalidInputError",
    "Leaderboard",
    "MarginMagnitudeWarning",
    "MetricCurve",
    "MosTable",
    "NoiseModel",
    "PairSampler",
    "RewardConfig",
    "RolloutOutcome",
    "UndefinedCorrelationError",
    "connected_components",
    "elo_rank",
    "group_advantages",
    "lsq_recover",
    "margin_mse",
    "plcc",
    "predict_margin",
    "report_summary",
    "rollout_reward",
    "run_convergence_experiment",
    "scores_to_ranks",
    "srcc",
    "stability_point",
    "true_margin",
    "winrate_rank",
    "write_convergence_csv",
    "write_leaderboard_csv",
    "write_report",
]
