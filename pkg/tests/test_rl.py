"""Reward shaping, replay memory, schedules, and the episode loop."""

import dataclasses

import numpy as np
import pytest

from hiverank.encoding import dimension, flatten, unflatten
from hiverank.errors import ConfigError, ShapeError, StateError
from hiverank.params import PolicyParams
from hiverank.rl import (ReplayMemory, TrainConfig, Transition, _td_targets,
                         epsilon_greedy, epsilon_schedule, minority_recall,
                         mse_loss_and_gradients, predict_scores, reward, train,
                         train_mse_baseline)


class TestReward:
    @pytest.mark.parametrize("lam", [0.0, 0.5, 1.0])
    def test_four_cases(self, lam):
        assert reward(1, 1, lam) == (1.0, False)
        assert reward(1, 0, lam) == (-1.0, True)   # the only terminal case
        assert reward(0, 0, lam) == (lam, False)
        assert reward(0, 1, lam) == (-lam, False)

    def test_minority_stakes_dominate(self):
        for lam in (0.0, 0.3, 1.0):
            assert abs(reward(1, 0, lam)[0]) >= abs(reward(0, 1, lam)[0])

    @pytest.mark.parametrize("lam", [-0.1, 1.1])
    def test_rejects_out_of_range_lam(self, lam):
        with pytest.raises(ConfigError):
            reward(1, 1, lam)


class TestEpsilonGreedy:
    def test_zero_epsilon_exploits(self):
        rng = np.random.default_rng(90)
        assert epsilon_greedy(np.array([0.1, 0.9]), 0.0, rng) == 1
        assert epsilon_greedy(np.array([0.9, 0.1]), 0.0, rng) == 0

    def test_exact_tie_resolves_to_action_zero(self):
        rng = np.random.default_rng(91)
        for _ in range(10):
            assert epsilon_greedy(np.array([0.4, 0.4]), 0.0, rng) == 0

    def test_full_exploration_is_uniform(self):
        rng = np.random.default_rng(92)
        draws = [epsilon_greedy(np.array([0.0, 100.0]), 1.0, rng)
                 for _ in range(10_000)]
        assert np.mean(draws) == pytest.approx(0.5, abs=0.02)

    def test_rejects_bad_epsilon(self):
        rng = np.random.default_rng(93)
        with pytest.raises(ConfigError):
            epsilon_greedy(np.zeros(2), 1.5, rng)


class TestReplayMemory:
    def test_fills_then_overwrites_oldest(self):
        mem = ReplayMemory(3)
        items = [Transition(i, 0, 0.0, i, False) for i in range(5)]
        for t in items[:3]:
            mem.push(t)
        assert len(mem) == 3
        mem.push(items[3])  # evicts transition 0
        mem.push(items[4])  # evicts transition 1
        assert len(mem) == 3
        held = {t.state for t in mem.sample(3, np.random.default_rng(0))}
        assert held == {2, 3, 4}

    def test_sample_is_without_replacement(self):
        mem = ReplayMemory(10)
        for i in range(6):
            mem.push(Transition(i, 0, 0.0, i, False))
        got = mem.sample(6, np.random.default_rng(1))
        assert {t.state for t in got} == set(range(6))

    def test_oversampling_raises(self):
        mem = ReplayMemory(4)
        mem.push(Transition(0, 0, 0.0, 0, False))
        with pytest.raises(StateError):
            mem.sample(2, np.random.default_rng(2))

    def test_rejects_zero_capacity(self):
        with pytest.raises(ConfigError):
            ReplayMemory(0)


class TestEpsilonSchedule:
    def test_linear_ramp_then_floor(self):
        cfg = TrainConfig(episodes=100, epsilon_start=1.0, epsilon_end=0.0,
                          epsilon_decay_fraction=0.5)
        assert epsilon_schedule(cfg, 0) == 1.0
        assert epsilon_schedule(cfg, 25) == pytest.approx(0.5)
        assert epsilon_schedule(cfg, 50) == 0.0
        assert epsilon_schedule(cfg, 99) == 0.0

    def test_never_leaves_the_band(self):
        cfg = TrainConfig(episodes=37)
        values = [epsilon_schedule(cfg, e) for e in range(37)]
        assert all(cfg.epsilon_end <= v <= cfg.epsilon_start for v in values)
        assert values == sorted(values, reverse=True)


class TestTrainConfig:
    @pytest.mark.parametrize("kw", [
        dict(lam=1.5),
        dict(gamma=0.0),
        dict(episodes=0),
        dict(batch_size=0),
        dict(batch_size=64, replay_capacity=32),
        dict(target_refresh=0),
        dict(epsilon_start=2.0),
        dict(epsilon_decay_fraction=0.0),
    ])
    def test_rejects_bad_values(self, kw):
        with pytest.raises(ConfigError):
            TrainConfig(**kw)

    def test_to_dict_round_trips(self):
        cfg = TrainConfig(episodes=7, lam=0.3, seed=5)
        assert TrainConfig(**cfg.to_dict()) == cfg


def test_td_targets_bootstrap_and_terminal():
    cfg = TrainConfig(gamma=0.9)
    target_q = np.array([[0.0, 2.0], [1.0, -1.0]])
    batch = [
        Transition(0, 1, 0.5, 0, False),   # 0.5 + 0.9 * max(0, 2) = 2.3
        Transition(0, 0, -1.0, 1, True),   # terminal: just the reward
        Transition(1, 1, 0.5, 1, False),   # 0.5 + 0.9 * max(1, -1) = 1.4
    ]
    np.testing.assert_allclose(_td_targets(batch, target_q, cfg),
                               [2.3, -1.0, 1.4])


def small_train_config(**kw):
    defaults = dict(episodes=3, batch_size=4, replay_capacity=64,
                    target_refresh=5, seed=0)
    defaults.update(kw)
    return TrainConfig(**defaults)


class TestTrain:
    def test_runs_and_counts_steps(self, tiny_cfg, tiny_embedded):
        init = PolicyParams.glorot(tiny_cfg, np.random.default_rng(0))
        result = train(tiny_embedded, init, tiny_cfg, small_train_config())
        assert len(result.episodes) == 3
        n = len(tiny_embedded)
        for record in result.episodes:
            assert 1 <= record.steps <= n
            assert record.epsilon == epsilon_schedule(small_train_config(),
                                                      record.episode)
        assert result.gradient_steps > 0
        assert all(np.isfinite(a).all() for a in result.params.arrays())

    def test_same_seed_is_bit_identical(self, tiny_cfg, tiny_embedded):
        init = PolicyParams.glorot(tiny_cfg, np.random.default_rng(1))
        a = train(tiny_embedded, init, tiny_cfg, small_train_config(seed=3))
        b = train(tiny_embedded, init, tiny_cfg, small_train_config(seed=3))
        np.testing.assert_array_equal(flatten(a.params), flatten(b.params))
        assert [r.cumulative_reward for r in a.episodes] == \
               [r.cumulative_reward for r in b.episodes]

    def test_does_not_mutate_the_init(self, tiny_cfg, tiny_embedded):
        init = PolicyParams.glorot(tiny_cfg, np.random.default_rng(2))
        before = flatten(init).copy()
        train(tiny_embedded, init, tiny_cfg, small_train_config())
        np.testing.assert_array_equal(flatten(init), before)

    def test_accepts_flat_vector_init(self, tiny_cfg, tiny_embedded):
        vec = np.random.default_rng(3).normal(0, 0.1, dimension(tiny_cfg))
        from_vec = train(tiny_embedded, vec, tiny_cfg, small_train_config())
        from_params = train(tiny_embedded, unflatten(vec, tiny_cfg),
                            tiny_cfg, small_train_config())
        np.testing.assert_array_equal(flatten(from_vec.params),
                                      flatten(from_params.params))

    def test_empty_dataset_raises(self, tiny_cfg, tiny_embedded):
        empty = dataclasses.replace(
            tiny_embedded,
            q_emb=tiny_embedded.q_emb[:0], q_len=tiny_embedded.q_len[:0],
            q_mask=tiny_embedded.q_mask[:0], a_emb=tiny_embedded.a_emb[:0],
            a_len=tiny_embedded.a_len[:0], a_mask=tiny_embedded.a_mask[:0],
            labels=tiny_embedded.labels[:0])
        init = PolicyParams.zeros(tiny_cfg)
        with pytest.raises(ShapeError):
            train(empty, init, tiny_cfg, small_train_config())

    def test_checkpoint_fn_runs_every_episode(self, tiny_cfg, tiny_embedded):
        calls = []
        init = PolicyParams.glorot(tiny_cfg, np.random.default_rng(4))
        train(tiny_embedded, init, tiny_cfg, small_train_config(),
              checkpoint_fn=lambda p: calls.append(flatten(p)))
        assert len(calls) == 3

    def test_episode_transition_shape(self, tiny_cfg, tiny_embedded):
        init = PolicyParams.glorot(tiny_cfg, np.random.default_rng(5))
        cfg = small_train_config(episodes=6, lam=0.5)
        result = train(tiny_embedded, init, tiny_cfg, cfg,
                       keep_transitions=True)
        labels = tiny_embedded.labels
        n = len(tiny_embedded)
        assert len(result.transitions) == 6
        for record, episode in zip(result.episodes, result.transitions):
            assert record.steps == len(episode)
            assert record.cumulative_reward == pytest.approx(
                sum(t.reward for t in episode))
            # nothing follows a terminal transition, and the walk ends
            # exactly on a minority miss or on dataset exhaustion
            for t in episode[:-1]:
                assert not t.end
            last = episode[-1]
            minority_miss = labels[last.state] == 1 and last.action == 0
            assert last.end == (minority_miss or len(episode) == n)
            if minority_miss:
                assert last.reward == -1.0


class TestBaselineAndScores:
    def test_baseline_takes_exact_step_count(self, tiny_cfg, tiny_embedded):
        init = PolicyParams.glorot(tiny_cfg, np.random.default_rng(6))
        cfg = small_train_config()
        out = train_mse_baseline(tiny_embedded, init, tiny_cfg, cfg, 5)
        assert not np.array_equal(flatten(out), flatten(init))
        again = train_mse_baseline(tiny_embedded, init, tiny_cfg, cfg, 5)
        np.testing.assert_array_equal(flatten(out), flatten(again))
        untouched = train_mse_baseline(tiny_embedded, init, tiny_cfg, cfg, 0)
        np.testing.assert_array_equal(flatten(untouched), flatten(init))

    def test_mse_loss_is_squared_error(self, tiny_cfg, tiny_embedded):
        params = PolicyParams.zeros(tiny_cfg)
        qb, ab = tiny_embedded.batch([0, 1, 2, 3])
        labels = np.array([1.0, 0.0, 0.0, 0.0])
        loss, _ = mse_loss_and_gradients(params, tiny_cfg, qb, ab, labels)
        # zero weights predict 0.5: four squared errors of 0.25
        assert loss == pytest.approx(1.0)

    def test_predict_scores_chunking_is_invisible(self, tiny_cfg, tiny_embedded):
        params = PolicyParams.glorot(tiny_cfg, np.random.default_rng(7))
        wide = predict_scores(params, tiny_embedded, chunk=512)
        narrow = predict_scores(params, tiny_embedded, chunk=3)
        np.testing.assert_array_equal(wide, narrow)
        assert wide.shape == (len(tiny_embedded),)
        assert np.all((wide > 0.0) & (wide < 1.0))

    def test_minority_recall_thresholds(self, tiny_cfg, tiny_embedded):
        params = PolicyParams.zeros(tiny_cfg)
        # every score is exactly 0.5, so the default threshold catches all
        assert minority_recall(params, tiny_embedded) == 1.0
        assert minority_recall(params, tiny_embedded, threshold=0.6) == 0.0

    def test_minority_recall_needs_positives(self, tiny_cfg, tiny_embedded):
        negatives = dataclasses.replace(
            tiny_embedded, labels=np.zeros_like(tiny_embedded.labels))
        with pytest.raises(ShapeError):
            minority_recall(PolicyParams.zeros(tiny_cfg), negatives)
