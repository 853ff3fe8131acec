import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from pessimlab import algorithms as alg
from pessimlab import data_gen as dg
from pessimlab import instances as inst
from pessimlab.estimators import BanditLearner, ContextualLearner, EpisodicViLcb, ViLcb, as_dataset
from pessimlab.rng import generator
from pessimlab.validation import ValidationError


class TestAsDataset:
    def test_one_dimensional_actions(self):
        d = as_dataset(np.array([0, 1, 1]), np.array([0.5, 1.0, 0.0]))
        np.testing.assert_array_equal(d.s, 0)
        np.testing.assert_array_equal(d.s_next, -1)

    def test_three_columns(self):
        d = as_dataset(np.array([[0, 1, 1], [1, 0, 0]]), [0.0, 1.0])
        np.testing.assert_array_equal(d.s_next, [1, 0])

    def test_errors(self):
        with pytest.raises(ValidationError):
            as_dataset(np.array([[0, 1]]))
        with pytest.raises(ValidationError):
            as_dataset(np.array([[0, 1]]), [0.0, 1.0])
        with pytest.raises(ValueError):
            as_dataset(np.array([[0, 1, 2, 3]]), [0.0])


class TestBanditLearner:
    def test_get_params(self):
        est = BanditLearner(num_actions=3, override_L=0.5)
        assert est.get_params() == {
            "num_actions": 3, "rule": "lcb_mab", "delta": None, "override_L": 0.5, "clip_penalty": True,
        }
        assert clone(est).get_params() == est.get_params()

    def test_matches_function(self):
        h = inst.random_bandit(4, generator(1))
        data = dg.sample_dataset(h.env, 300, 2)
        for rule, fn in (("lcb_mab", alg.lcb_mab), ("empirical_best_arm", alg.empirical_best_arm), ("most_played_arm", alg.most_played_arm)):
            est = BanditLearner(num_actions=4, rule=rule).fit(data)
            assert est.arm_ == fn(data, 4)
            np.testing.assert_array_equal(est.predict([0, 0]), [est.arm_] * 2)

    def test_not_fitted(self):
        with pytest.raises(NotFittedError):
            BanditLearner().predict()

    def test_unknown_rule(self):
        with pytest.raises(ValidationError):
            BanditLearner(rule="ucb").fit(np.array([0, 1]), [0.0, 1.0])


class TestContextualLearner:
    def test_matches_function(self):
        h = inst.random_cb(3, 2, generator(3))
        data = dg.sample_dataset(h.env, 500, 4)
        est = ContextualLearner(num_states=3, num_actions=2).fit(np.column_stack([data.s, data.a]), data.r)
        np.testing.assert_array_equal(est.policy_, alg.lcb_cb(data, 3, 2))
        np.testing.assert_array_equal(est.predict([2, 0]), est.policy_[[2, 0]])

    def test_predict_range(self):
        est = ContextualLearner(num_states=2, num_actions=2, rule="behavior_cloning").fit(np.array([[0, 1], [1, 0]]), [0.0, 0.0])
        with pytest.raises(ValidationError):
            est.predict([2])

    def test_set_params(self):
        est = ContextualLearner().set_params(rule="empirical_best_cb")
        assert est.rule == "empirical_best_cb"


class TestViLcb:
    def test_matches_function(self):
        h = inst.random_mdp(3, 2, 0.9, generator(5))
        data = dg.sample_dataset(h.env, 1000, 6, mu=h.mu)
        est = ViLcb(num_states=3, num_actions=2, gamma=0.9, override_L=0.05, fold_seed=11).fit(data)
        pi, _ = alg.vi_lcb(data, alg.MdpShape(3, 2, 0.9), override_L=0.05, fold_seed=11)
        np.testing.assert_array_equal(est.policy_, pi)
        assert est.trace_.T == alg.vi_iterations(1000, 0.9)

    def test_needs_records(self):
        with pytest.raises(ValidationError):
            ViLcb().fit(dg.PairStats(np.ones((2, 2), int), np.zeros((2, 2))))


class TestEpisodicViLcb:
    def test_fit(self):
        h = inst.episodic_h3([0.5, 0.5], np.full((3, 2), 0.2), 1.2)
        data = dg.sample_dataset(h.env, 2000, 1, mu=h.mu)
        est = EpisodicViLcb(level_sizes=(2, 2, 2), num_actions=2).fit(data)
        assert est.policy_.shape == (6,)
        assert len(est.values_) == 3
