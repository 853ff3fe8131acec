import itertools
import math

import numpy as np
import pytest

from pessimlab import data_gen as dg
from pessimlab import env_core as ec
from pessimlab import instances as inst
from pessimlab.rng import generator
from pessimlab.validation import ValidationError


def assert_certified(h):
    rep = inst.certify(h)
    assert rep["c_star_ok"], rep
    assert rep["optimal_ok"], rep


def assert_valid_mu(h):
    mu = np.asarray(h.mu)
    assert np.all(mu >= 0)
    assert abs(mu.sum() - 1.0) <= 1e-12


class TestProp1:
    def test_declarations(self):
        h = inst.prop1_instance(0.1, 500)
        assert h.c_star == 1.1
        assert h.optimal == 0
        assert h.env.num_actions == 500**3
        assert_certified(h)

    def test_gap(self):
        h = inst.prop1_instance(0.1, 500)
        assert h.env.mean(0) - h.env.mean(17) == pytest.approx(0.95 * 0.1)
        assert h.metadata["gap"] == pytest.approx(0.095)

    def test_suboptimal_arms_rarely_repeat(self):
        # every sub-optimal arm drawn at most once, on most datasets
        h = inst.prop1_instance(0.1, 500)
        ok = 0
        for seed in range(500):
            st = dg.sample_stats(h.env, 500, seed)
            ok += int(np.all(st.counts[1:] <= 1))
        assert ok / 500 >= 0.99

    def test_range(self):
        with pytest.raises(ValidationError):
            inst.prop1_instance(0.5, 500)


class TestLecam:
    def test_c2_quarter(self):
        h0, h1 = inst.lecam_two_arm(2.0, 0.25)
        np.testing.assert_allclose(h1.mu, [0.5, 0.5])
        np.testing.assert_allclose(h1.env.means, [0.5, 0.75])
        assert h1.optimal == 1
        for h in (h0, h1):
            assert_certified(h)

    def test_small_c(self):
        for h in inst.lecam_two_arm(1.5, 0.1):
            assert_certified(h)
            assert h.mu[h.optimal] == pytest.approx(1 / 1.5)

    def test_zero_gap_coincide(self):
        h0, h1 = inst.lecam_two_arm(3.0, 0.0)
        assert h0.env.rewards[1] == h1.env.rewards[1]


class TestNonadaptivity:
    def test_behaviour_masses(self):
        a, b = inst.nonadaptivity_pair(2000, 0.1, math.sqrt(2000))
        assert a.mu[a.optimal] == pytest.approx(2 / 3)
        assert b.mu[b.optimal] == pytest.approx(1 / 6)
        assert (a.c_star, b.c_star) == (1.5, 6.0)
        assert_certified(a)
        assert_certified(b)

    def test_gap_formulae(self):
        a, b = inst.nonadaptivity_pair(1000, 2.0, 9.0)
        assert a.metadata["g"] == pytest.approx(math.sqrt(2.0 / (2 * 1000 / 3)))
        assert b.metadata["g"] == pytest.approx(math.sqrt(9.0 / 4000))


class TestGvCode:
    def test_s2(self):
        code = inst.gv_code(2, max_tries=200)
        # distance >= 1 only asks for distinct words, so all four sign patterns fit
        assert len(code) == 4
        assert code.pairwise_min_l1 == 2

    def test_distance_property(self):
        for S in (4, 8, 16):
            code = inst.gv_code(S, max_tries=2000, seed=S)
            w = code.codewords
            for i, j in itertools.combinations(range(len(w)), 2):
                assert np.abs(w[i] - w[j]).sum() >= S / 2
            assert code.pairwise_min_l1 >= S / 2

    def test_deterministic(self):
        a = inst.gv_code(12, max_tries=500, seed=2)
        b = inst.gv_code(12, max_tries=500, seed=2)
        np.testing.assert_array_equal(a.codewords, b.codewords)

    @pytest.mark.slow
    def test_size_at_64(self):
        code = inst.gv_code(64, max_tries=10**6, seed=0, target_size=2981)
        assert len(code) >= math.exp(64 / 8)


class TestCbFano:
    def test_behaviour_mass(self):
        fam = inst.cb_fano_family(4, 2.0, 0.1, seed=1)
        assert len(fam) >= 2
        for h in fam:
            np.testing.assert_allclose(h.mu[:, 1], 1 / 8)
            assert_certified(h)
            assert_valid_mu(h)

    def test_members_differ(self):
        code = inst.gv_code(8, max_tries=3000, seed=3)
        fam = inst.cb_fano_family(8, 2.0, 0.1, code=code)
        for x, y in itertools.combinations(fam, 2):
            assert (np.asarray(x.optimal) != np.asarray(y.optimal)).sum() >= 8 / 4

    def test_small_c_regime(self):
        h = inst.cb_fano_member(3, 1.5, 0.1, [1, -1, 1])
        np.testing.assert_allclose(h.env.rho, [0.5, 0.5 / 3, 0.5 / 3, 0.5 / 3])
        np.testing.assert_allclose(h.mu[0], [0.5 / 1.5, 0.0])
        np.testing.assert_allclose(h.mu[1:], 0.5 / (3 * 1.5))
        assert_certified(h)

    def test_unit_c(self):
        h = inst.cb_fano_member(2, 1.0, 0.1, [1, 1])
        assert_certified(h)

    def test_minimax_gap(self):
        assert inst.cb_minimax_gap(2, 2.0, 1000) == pytest.approx(math.sqrt(4 / 200000))
        assert inst.cb_minimax_gap(64, 2.0, 1) == 1 / 3


class TestMostPlayedFailure:
    def test_modal_action_wrong(self):
        h = inst.cb_most_played_failure(1.5, 0.01)
        assert h.mu[0, 0] < h.mu[0, 1]
        assert h.optimal[0] == 0
        assert_certified(h)
        assert_valid_mu(h)

    def test_asymptotic_failure(self):
        h = inst.cb_most_played_failure(1.5, 0.01)
        # population behaviour cloning picks the modal action at every context
        bc = np.argmax(h.mu, axis=1)
        assert h.suboptimality(bc) >= 1.5 - 1 - 0.01 - 1e-12

    def test_default_eps(self):
        assert inst.cb_most_played_failure(1.05).metadata["eps"] == pytest.approx(0.005)


class TestExpertCb:
    def test_unit_concentrability(self):
        h = inst.cb_expert_instance(5, 200)
        assert_certified(h)
        np.testing.assert_allclose(h.mu, ec.cb_occupancy(h.env, h.optimal))
        assert h.optimal.tolist() == [1] * 5


class TestMdpHard:
    def test_p_q_at_half(self):
        h = inst.mdp_hard(5, 0.5, 2.0, 0.1)
        assert h.metadata["p"] == pytest.approx(2 / 3)
        assert h.metadata["q"] == pytest.approx(0.0)

    @pytest.mark.parametrize("gamma", [0.5, 0.7, 0.9, 0.99])
    def test_s1_occupancy_window(self, gamma):
        S = 17
        h = inst.mdp_hard(S, gamma, 2.0, 0.1)
        d = ec.occupancy(h.env, h.optimal).sum(axis=1)
        s1 = d[1 : S - 1 : 4]
        n_rep = S - 1
        assert np.all(s1 >= (1 - gamma) / n_rep - 1e-12)
        assert np.all(s1 <= 4 * (1 - gamma) / n_rep + 1e-12)

    @pytest.mark.parametrize("C", [1.2, 1.5, 2.0, 4.0])
    def test_certified(self, C):
        h = inst.mdp_hard(9, 0.9, C, 0.1, v=[1, -1])
        assert_certified(h)
        assert_valid_mu(h)
        assert h.mu[3, 0] > 0  # minus state of replica 0

    def test_flip_changes_one_state(self):
        base = inst.mdp_hard(13, 0.9, 2.0, 0.1, v=[1, 1, 1])
        flip = inst.mdp_hard(13, 0.9, 2.0, 0.1, v=[1, -1, 1])
        diff = np.flatnonzero(np.asarray(base.optimal) != np.asarray(flip.optimal))
        assert diff.tolist() == [5]
        assert base.optimal[5] == 1 and flip.optimal[5] == 0

    def test_probabilities_valid_over_ranges(self):
        for gamma, C, d in itertools.product((0.5, 0.75, 0.95), (1.1, 2.0, 8.0), (0.0, 0.1, 0.25)):
            h = inst.mdp_hard(9, gamma, C, d)
            np.testing.assert_allclose(h.env.P.sum(axis=-1), 1.0, atol=1e-12)
            assert np.all(h.env.P >= 0)
            assert_valid_mu(h)

    def test_shape_errors(self):
        with pytest.raises(ValidationError):
            inst.mdp_hard(8, 0.9, 2.0, 0.1)
        with pytest.raises(ValidationError):
            inst.mdp_hard(9, 0.4, 2.0, 0.1)

    def test_minimax_gap(self):
        assert inst.mdp_minimax_gap(16, 2.0, 0.9, 2000) == pytest.approx(math.sqrt(32 / (200 * 0.1 * 2000)))


class TestImitationHard:
    def test_declarations(self):
        h = inst.imitation_hard_mdp(8, 100, gamma=0.9, seed=2)
        assert_certified(h)
        assert h.c_star == 1.0
        assert h.env.rho[-1] == 0.0
        assert ec.expected_value(h.env, h.optimal) == pytest.approx(1 / (1 - 0.9))


class TestEpisodicH3:
    def test_zero_gaps(self):
        h = inst.episodic_h3([0.3, 0.7], np.zeros((3, 2)), 1.2)
        for pi in ec.all_policies(6, 2):
            assert h.suboptimality(np.asarray(pi)) == pytest.approx(0.0, abs=1e-12)

    def test_first_level_occupancy(self):
        h = inst.episodic_h3([0.3, 0.7], np.full((3, 2), 0.2), 1.4)
        d = ec.episodic_occupancy(h.env, h.optimal)
        np.testing.assert_allclose(d[:2, 0], [0.1, 0.7 / 3])

    @pytest.mark.parametrize("C", [1.0, 1.05, 1.2, 1.4, 1.9])
    def test_certified_with_ratio(self, C):
        h = inst.episodic_h3([0.5, 0.5], np.full((3, 2), 0.1), C)
        assert_certified(h)
        assert_valid_mu(h)
        assert np.all(h.mu[:, 0] >= 9 * h.mu[:, 1] - 1e-15)


class TestRandomInstances:
    def test_random_families_certify(self):
        rng = generator(9)
        for _ in range(10):
            assert_certified(inst.random_bandit(4, rng))
            assert_certified(inst.random_cb(3, 2, rng))
            assert_certified(inst.random_mdp(4, 2, 0.9, rng))
            assert_certified(inst.random_episodic((2, 2), 2, rng))

    def test_min_mu_star(self):
        h = inst.random_bandit(6, generator(1), min_mu_star=0.4)
        assert h.mu[h.optimal] >= 0.4
