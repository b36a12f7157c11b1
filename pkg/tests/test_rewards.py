import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from marginrank import (
    InvalidInputError,
    RewardConfig,
    RolloutOutcome,
    group_advantages,
    margin_mse,
    rollout_reward,
)


class TestMarginMse:
    def test_zero_error(self):
        assert margin_mse([0.4, -1.2], [0.4, -1.2]) == 0.0

    def test_hand_computed(self):
        assert margin_mse([1.0, -1.0], [0.0, 0.0]) == pytest.approx(1.0)

    def test_single_term(self):
        assert margin_mse([0.5], [0.0]) == pytest.approx(0.25)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(0)
        pred = rng.normal(size=12)
        tgt = rng.normal(size=12)
        perm = rng.permutation(12)
        assert margin_mse(pred, tgt) == pytest.approx(
            margin_mse(pred[perm], tgt[perm]), abs=1e-15
        )

    def test_length_mismatch_rejected(self):
        with pytest.raises(InvalidInputError):
            margin_mse([1.0, 2.0], [1.0])


class TestRolloutReward:
    def test_zero_error_with_bonus(self):
        outcome = RolloutOutcome(0.7, 0.7, format_valid=True)
        assert rollout_reward(outcome, RewardConfig(format_bonus=0.2)) == 1.2

    def test_unit_error_without_bonus(self):
        outcome = RolloutOutcome(1.0, 0.0, format_valid=False)
        assert rollout_reward(outcome, RewardConfig(alpha=1.0)) == pytest.approx(
            math.exp(-1.0)
        )

    def test_decays_to_bonus_for_huge_error(self):
        far = RolloutOutcome(1e6, 0.0, format_valid=True)
        assert rollout_reward(far, RewardConfig(format_bonus=0.2)) == pytest.approx(0.2)

    def test_strictly_decreasing_in_error(self):
        errors = np.linspace(0.0, 4.0, 100)
        rewards = [
            rollout_reward(RolloutOutcome(e, 0.0, format_valid=False))
            for e in errors
        ]
        assert all(a > b for a, b in zip(rewards, rewards[1:]))

    def test_format_bonus_is_exactly_additive(self):
        cfg = RewardConfig(format_bonus=0.2)
        valid = rollout_reward(RolloutOutcome(1.3, 0.5, True), cfg)
        invalid = rollout_reward(RolloutOutcome(1.3, 0.5, False), cfg)
        assert valid - invalid == pytest.approx(0.2, abs=1e-15)

    def test_nonfinite_margin_rejected(self):
        with pytest.raises(InvalidInputError):
            RolloutOutcome(float("inf"), 0.0, True)

    def test_bad_config_rejected(self):
        with pytest.raises(InvalidInputError):
            RewardConfig(alpha=0.0)
        with pytest.raises(InvalidInputError):
            RewardConfig(format_bonus=-0.1)
        with pytest.raises(InvalidInputError):
            RewardConfig(eps_std=0.0)


class TestGroupAdvantages:
    def test_constant_rewards_give_zero(self):
        assert group_advantages([1.0, 1.0, 1.0, 1.0]).tolist() == [0, 0, 0, 0]

    def test_two_point_group_near_unit(self):
        adv = group_advantages([0.0, 2.0], eps_std=1e-12)
        assert adv == pytest.approx([-1.0, 1.0], abs=1e-9)

    def test_singleton_group(self):
        assert group_advantages([5.0], eps_std=1e-4).tolist() == [0.0]

    def test_empty_rejected(self):
        with pytest.raises(InvalidInputError):
            group_advantages([])

    @given(
        st.lists(st.floats(-10, 10), min_size=1, max_size=16),
        st.floats(-5, 5),
    )
    @settings(max_examples=100, deadline=None)
    def test_mean_zero_and_shift_invariant(self, rewards, shift):
        adv = group_advantages(rewards)
        assert abs(adv.mean()) < 1e-12
        shifted = group_advantages([r + shift for r in rewards])
        assert adv == pytest.approx(shifted, abs=1e-9)

    def test_positive_scaling_preserves_ordering(self):
        rng = np.random.default_rng(1)
        rewards = rng.uniform(0, 2, 8)
        base = np.argsort(group_advantages(rewards))
        for c in (0.5, 3.0, 100.0):
            scaled = np.argsort(group_advantages(c * rewards))
            assert np.array_equal(base, scaled)
            assert np.array_equal(base, np.argsort(rewards))
