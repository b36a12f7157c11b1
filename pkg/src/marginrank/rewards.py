"""Scalar reward kernels for group-relative policy optimization.

These are the model-free pieces of the training signal: a squared-error
margin loss, an exponentially shaped per-rollout reward with a format bonus,
and group-normalized advantages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidInputError


@dataclass
class RolloutOutcome:
    predicted_margin: float
    target_margin: float
    format_valid: bool

    def __post_init__(self) -> None:
        if not (math.isfinite(self.predicted_margin) and math.isfinite(self.target_margin)):
            raise InvalidInputError("margins must be finite")


@dataclass
class RewardConfig:
    alpha: float = 1.0
    format_bonus: float = 0.2
    eps_std: float = 1e-4

    def __post_init__(self) -> None:
        if not self.alpha > 0:
            raise InvalidInputError("alpha must be positive")
        if self.format_bonus < 0:
            raise InvalidInputError("format_bonus must be >= 0")
        if not self.eps_std > 0:
            raise InvalidInputError("eps_std must be positive")


def margin_mse(predicted: Sequence[float], targets: Sequence[float]) -> float:
    """Mean squared error between predicted and target margins."""
    predicted = np.asarray(predicted, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if predicted.shape != targets.shape or predicted.ndim != 1 or predicted.size == 0:
        raise InvalidInputError("predicted and targets must be equal-length, non-empty")
    if not (np.all(np.isfinite(predicted)) and np.all(np.isfinite(targets))):
        raise InvalidInputError("margins must be finite")
    return float(np.mean((predicted - targets) ** 2))


def rollout_reward(outcome: RolloutOutcome, config: RewardConfig | None = None) -> float:
    """exp(-alpha * squared margin error), plus the format bonus when valid."""
    config = config or RewardConfig()
    error = outcome.predicted_margin - outcome.target_margin
    reward = math.exp(-config.alpha * error * error)
    if outcome.format_valid:
        reward += config.format_bonus
    return reward


def group_advantages(rewards: Sequence[float], eps_std: float = 1e-4) -> np.ndarray:
    """Standardize rewards within a rollout group: (R - mean) / (std + eps)."""
    if not eps_std > 0:
        raise InvalidInputError("eps_std must be positive")
    rewards = np.asarray(rewards, dtype=float)
    if rewards.ndim != 1 or rewards.size == 0:
        raise InvalidInputError("rewards must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(rewards)):
        raise InvalidInputError("rewards must be finite")
    return (rewards - rewards.mean()) / (rewards.std() + eps_std)
