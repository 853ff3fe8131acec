"""scikit-learn style wrappers: ``fit`` on offline data, ``predict`` actions for states.

``fit`` accepts a ``Dataset``, sufficient statistics (bandit/CB only), or
arrays: ``X`` holds columns ``(s, a)`` or ``(s, a, s_next)`` (a 1-d ``X`` is
read as bandit actions) and ``y`` the rewards.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from . import algorithms as alg
from .data_gen import NO_STATE, BanditStats, Dataset, PairStats
from .validation import ValidationError


def as_dataset(X, y=None):
    """Coerce ``(X, y)`` into a Dataset; statistics objects pass through."""
    if isinstance(X, (Dataset, BanditStats, PairStats)):
        return X
    X = np.asarray(X)
    if X.ndim == 1:
        X = np.column_stack([np.zeros(X.shape[0], dtype=np.int64), X])
    X = check_array(X, dtype=np.int64)
    if X.shape[1] not in (2, 3):
        raise ValidationError("X needs columns (s, a) or (s, a, s_next)")
    if y is None:
        raise ValidationError("rewards y are required with array input")
    y = check_array(y, ensure_2d=False, dtype=np.float64)
    if y.shape[0] != X.shape[0]:
        raise ValidationError("X and y have different lengths")
    sn = X[:, 2] if X.shape[1] == 3 else np.full(X.shape[0], NO_STATE)
    return Dataset(X[:, 0], X[:, 1], y, sn)


class _PolicyEstimator(BaseEstimator):
    def predict(self, X):
        """Action for each state in ``X``."""
        check_is_fitted(self, "policy_")
        s = check_array(np.asarray(X).reshape(-1, 1), dtype=np.int64).ravel()
        if np.any(s < 0) or np.any(s >= self.policy_.shape[0]):
            raise ValidationError("state index out of range")
        return self.policy_[s]


class BanditLearner(BaseEstimator):
    """Arm selection by ``rule`` (``lcb_mab``, ``empirical_best_arm`` or ``most_played_arm``)."""

    def __init__(self, num_actions=2, rule="lcb_mab", delta=None, override_L=None, clip_penalty=True):
        self.num_actions = num_actions
        self.rule = rule
        self.delta = delta
        self.override_L = override_L
        self.clip_penalty = clip_penalty

    def fit(self, X, y=None):
        data = as_dataset(X, y)
        if self.rule == "lcb_mab":
            self.arm_ = alg.lcb_mab(data, self.num_actions, self.delta, self.override_L, self.clip_penalty)
        elif self.rule == "empirical_best_arm":
            self.arm_ = alg.empirical_best_arm(data, self.num_actions)
        elif self.rule == "most_played_arm":
            self.arm_ = alg.most_played_arm(data, self.num_actions)
        else:
            raise ValidationError(f"unknown bandit rule {self.rule!r}")
        return self

    def predict(self, X=None):
        check_is_fitted(self, "arm_")
        n = 1 if X is None else len(X)
        return np.full(n, self.arm_, dtype=np.int64)


class ContextualLearner(_PolicyEstimator):
    """Per-context policy: ``lcb_cb``, ``behavior_cloning`` or ``empirical_best_cb``."""

    def __init__(self, num_states=2, num_actions=2, rule="lcb_cb", delta=None, override_L=None, clip_penalty=True):
        self.num_states = num_states
        self.num_actions = num_actions
        self.rule = rule
        self.delta = delta
        self.override_L = override_L
        self.clip_penalty = clip_penalty

    def fit(self, X, y=None):
        data = as_dataset(X, y)
        S, A = self.num_states, self.num_actions
        if self.rule == "lcb_cb":
            self.policy_ = alg.lcb_cb(data, S, A, self.delta, self.override_L, self.clip_penalty)
        elif self.rule in ("behavior_cloning", "most_played_cb"):
            self.policy_ = alg.behavior_cloning(data, S, A)
        elif self.rule == "empirical_best_cb":
            self.policy_ = alg.empirical_best_cb(data, S, A)
        else:
            raise ValidationError(f"unknown contextual rule {self.rule!r}")
        return self


class ViLcb(_PolicyEstimator):
    """Discounted VI-LCB; ``trace_`` holds the per-iteration internals."""

    def __init__(self, num_states=2, num_actions=2, gamma=0.9, delta=None, override_L=None, monotone=True, fold_seed=None):
        self.num_states = num_states
        self.num_actions = num_actions
        self.gamma = gamma
        self.delta = delta
        self.override_L = override_L
        self.monotone = monotone
        self.fold_seed = fold_seed

    def fit(self, X, y=None):
        data = as_dataset(X, y)
        if not isinstance(data, Dataset):
            raise ValidationError("VI-LCB needs record-level data")
        shape = alg.MdpShape(self.num_states, self.num_actions, self.gamma)
        self.policy_, self.trace_ = alg.vi_lcb(
            data, shape, self.delta, want_trace=True, override_L=self.override_L,
            monotone=self.monotone, fold_seed=self.fold_seed,
        )
        return self


class EpisodicViLcb(_PolicyEstimator):
    def __init__(self, level_sizes=(2, 2), num_actions=2, delta=None, override_L=None, known_rewards=False):
        self.level_sizes = level_sizes
        self.num_actions = num_actions
        self.delta = delta
        self.override_L = override_L
        self.known_rewards = known_rewards

    def fit(self, X, y=None):
        data = as_dataset(X, y)
        shape = alg.EpisodicShape(tuple(self.level_sizes), self.num_actions)
        self.policy_, self.values_, self.q_ = alg.episodic_vi_lcb(
            data, shape, self.delta, self.override_L, self.known_rewards, return_values=True
        )
        return self
