import json
import math

import numpy as np
import pytest

from pessimlab import env_core as ec
from pessimlab import instances as inst
from pessimlab import oracles
from pessimlab.env_core import DiscountedMdp, EpisodicMdp, RewardDistribution, RewardTable
from pessimlab.rng import generator
from pessimlab.validation import ValidationError

det = RewardDistribution.deterministic
bern = RewardDistribution.bernoulli


def chain_mdp(gamma=0.9):
    # two states, action 0 stays, action 1 swaps; reward 1 only in state 1
    P = np.zeros((2, 2, 2))
    P[0, 0, 0] = P[1, 0, 1] = 1.0
    P[0, 1, 1] = P[1, 1, 0] = 1.0
    R = RewardTable([[det(0.0), det(0.0)], [det(1.0), det(1.0)]])
    return DiscountedMdp(P=P, rewards=R, rho=np.array([1.0, 0.0]), gamma=gamma)


def power_series_occupancy(mdp, pi, T0=2000):
    S = mdp.num_states
    P_pi = mdp.P[np.arange(S), pi]
    d = np.zeros(S)
    x = np.array(mdp.rho, dtype=float)
    for t in range(T0 + 1):
        d += (1 - mdp.gamma) * mdp.gamma**t * x
        x = x @ P_pi
    out = np.zeros((S, mdp.num_actions))
    out[np.arange(S), pi] = d
    return out


class TestRewardDistribution:
    def test_means(self):
        assert det(0.3).mean() == 0.3
        assert bern(0.25).mean() == 0.25
        assert RewardDistribution.discrete((0.0, 0.21), (0.5, 0.5)).mean() == pytest.approx(0.105)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValidationError):
            det(1.5)
        with pytest.raises(ValidationError):
            RewardDistribution.discrete((0.0, 1.0), (0.5, 0.6))

    def test_dict_round_trip(self):
        for d in (det(0.1), bern(1 / 3), RewardDistribution.discrete((0.0, 0.7), (0.2, 0.8))):
            assert RewardDistribution.from_dict(json.loads(json.dumps(d.to_dict()))) == d


class TestPolicyEvaluation:
    def test_constant_reward_fixed_point(self):
        h = inst.random_mdp(4, 3, 0.8, generator(1))
        R = RewardTable.constant((4, 3), det(1.0))
        mdp = DiscountedMdp(P=h.env.P, rewards=R, rho=h.env.rho, gamma=0.8)
        np.testing.assert_allclose(ec.policy_evaluation(mdp, [0, 1, 2, 0]).V, 5.0, rtol=1e-12)

    def test_myopic(self):
        h = inst.random_mdp(5, 2, 0.0, generator(2))
        pi = np.array([0, 1, 1, 0, 1])
        np.testing.assert_allclose(ec.policy_evaluation(h.env, pi).V, h.env.r[np.arange(5), pi])

    def test_chain_values(self):
        mdp = chain_mdp(0.9)
        vt = ec.policy_evaluation(mdp, [1, 0])
        # swap once then collect 1 forever
        np.testing.assert_allclose(vt.V, [9.0, 10.0])
        assert ec.expected_value(mdp, [1, 0]) == pytest.approx(9.0)

    def test_bellman_residual_random(self):
        rng = generator(3)
        for gamma in (0.5, 0.9, 0.99):
            for _ in range(30):
                S, A = int(rng.integers(1, 21)), int(rng.integers(1, 6))
                h = inst.random_mdp(S, A, gamma, rng)
                pi = rng.integers(0, A, size=S)
                vt = ec.policy_evaluation(h.env, pi)
                P_pi = h.env.P[np.arange(S), pi]
                resid = np.abs(h.env.r[np.arange(S), pi] + gamma * P_pi @ vt.V - vt.V).max()
                assert resid <= 1e-10 * h.env.v_max
                assert vt.V.min() >= -1e-12 and vt.V.max() <= h.env.v_max + 1e-9

    def test_uniform_rho_two_states(self):
        mdp = chain_mdp(0.5)
        mdp = DiscountedMdp(P=mdp.P, rewards=mdp.rewards, rho=np.array([0.5, 0.5]), gamma=0.5)
        # V = (0, 2) under "stay"
        assert ec.expected_value(mdp, [0, 0]) == pytest.approx(1.0)

    def test_rejects_bad_policy(self):
        with pytest.raises(ValidationError):
            ec.policy_evaluation(chain_mdp(), [0, 2])

    def test_imitation_hard_value(self):
        h = inst.imitation_hard_mdp(6, 50, gamma=0.9, seed=4)
        assert ec.expected_value(h.env, h.optimal) == pytest.approx(10.0, rel=1e-12)

    def test_matches_monte_carlo(self):
        h = inst.random_mdp(4, 2, 0.9, generator(5))
        pi = np.array([0, 1, 0, 1])
        mc = oracles.mc_policy_value(h.env, pi, reps=20000, seed=6)
        exact = ec.expected_value(h.env, pi)
        assert abs(mc["mean"] - exact) <= 3 * mc["stderr"] + mc["bias_bound"]


class TestOccupancy:
    def test_myopic(self):
        h = inst.random_mdp(3, 2, 0.0, generator(7))
        d = ec.occupancy(h.env, [1, 0, 1])
        expected = np.zeros((3, 2))
        expected[[0, 1, 2], [1, 0, 1]] = h.env.rho
        np.testing.assert_allclose(d, expected, atol=1e-15)

    def test_power_series(self):
        h = inst.random_mdp(5, 3, 0.9, generator(8))
        pi = np.array([2, 0, 1, 1, 0])
        np.testing.assert_allclose(ec.occupancy(h.env, pi), power_series_occupancy(h.env, pi), atol=1e-8)

    def test_flow_identity_and_value(self):
        rng = generator(9)
        for _ in range(50):
            h = inst.random_mdp(int(rng.integers(2, 8)), 2, 0.9, rng)
            pi = rng.integers(0, 2, size=h.env.num_states)
            d = ec.occupancy(h.env, pi)
            S = h.env.num_states
            ds = d.sum(axis=1)
            flow = (1 - 0.9) * h.env.rho + 0.9 * ds @ h.env.P[np.arange(S), pi]
            np.testing.assert_allclose(ds, flow, atol=1e-9)
            assert d.sum() == pytest.approx(1.0, abs=1e-9)
            J = ec.expected_value(h.env, pi)
            assert J == pytest.approx((d * h.env.r).sum() / (1 - 0.9), abs=1e-8)

    def test_hard_replica_first_state(self):
        # the closed form 8/((2+gamma)S) holds when s0 self-loops with p = (1+gamma)/2
        gamma = 0.9
        h = inst.mdp_hard(17, gamma, 2.0, 0.1, p=(1 + gamma) / 2)
        d = ec.occupancy(h.env, h.optimal).sum(axis=1)
        np.testing.assert_allclose(d[0:16:4], 8 / ((2 + gamma) * 16), rtol=1e-12)


class TestKStep:
    def test_k0_and_mass(self):
        h = inst.random_mdp(4, 2, 0.5, generator(10))
        pi = [0, 1, 1, 0]
        nu0 = ec.k_step_occupancy(h.env, pi, 0)
        np.testing.assert_allclose(nu0.sum(axis=1), h.env.rho)
        assert ec.k_step_occupancy(h.env, pi, 1).sum() == pytest.approx(0.5)

    def test_series_sums_to_occupancy(self):
        h = inst.random_mdp(4, 2, 0.9, generator(11))
        pi = np.array([1, 1, 0, 0])
        nus = ec.k_step_occupancies(h.env, pi, 2000)
        np.testing.assert_allclose(nus.sum(axis=0), ec.occupancy(h.env, pi) / (1 - 0.9), atol=1e-8)
        masses = np.cumsum(nus.sum(axis=(1, 2)))
        assert np.all(np.diff(masses) >= 0)

    def test_single_matches_stack(self):
        h = inst.random_mdp(3, 3, 0.7, generator(12))
        pi = [2, 0, 1]
        nus = ec.k_step_occupancies(h.env, pi, 6)
        np.testing.assert_allclose(ec.k_step_occupancy(h.env, pi, 6), nus[6])


class TestOptimalPolicy:
    def test_bandit_as_mdp(self):
        b = ec.BanditInstance(rewards=(bern(0.2), bern(0.7), bern(0.7)), mu=np.full(3, 1 / 3))
        pi, _ = ec.exact_optimal_policy(ec.bandit_as_mdp(b))
        assert pi.tolist() == [1]

    def test_replica_plus_sign(self):
        h = inst.mdp_hard(9, 0.9, 2.0, 0.1, v=[1, -1])
        pi, _ = ec.exact_optimal_policy(h.env)
        assert pi[1] == 1 and pi[5] == 0

    def test_matches_exhaustive(self):
        rng = generator(13)
        for _ in range(200):
            S = int(rng.integers(1, 6))
            A = int(rng.integers(1, 3))
            if S * A > 10 or A**S > 1024:
                continue
            h = inst.random_mdp(S, A, 0.9, rng)
            pi, vt = ec.exact_optimal_policy(h.env)
            assert np.array_equal(pi, oracles.exhaustive_optimal_policy(h.env))
            assert ec.bellman_optimality_residual(h.env, vt.V) <= 1e-10 * h.env.v_max

    def test_dominates_all_policies(self):
        h = inst.random_mdp(4, 3, 0.95, generator(14))
        _, vt = ec.exact_optimal_policy(h.env)
        for pi in ec.all_policies(4, 3):
            assert np.all(vt.V >= ec.policy_evaluation(h.env, pi).V - 1e-9)

    def test_ties_to_lowest(self):
        R = RewardTable.constant((2, 3), det(0.5))
        mdp = DiscountedMdp(P=np.full((2, 3, 2), 0.5), rewards=R, rho=np.array([0.5, 0.5]), gamma=0.9)
        assert ec.exact_optimal_policy(mdp)[0].tolist() == [0, 0]

    def test_iterative_solver_path(self):
        # S*A > 2000 goes through fixed-point iteration
        h = inst.random_mdp(50, 41, 0.9, generator(15))
        pi = np.zeros(50, dtype=int)
        vt = ec.policy_evaluation(h.env, pi)
        P_pi = h.env.P[np.arange(50), pi]
        direct = np.linalg.solve(np.eye(50) - 0.9 * P_pi, h.env.r[np.arange(50), pi])
        np.testing.assert_allclose(vt.V, direct, atol=1e-9 * h.env.v_max)


class TestEpisodic:
    def test_horizon_one(self):
        R = (RewardTable([[det(0.2), det(0.9)], [det(0.4), det(0.1)]]),)
        e = EpisodicMdp(level_sizes=(2,), P=(), rewards=R, rho=np.array([0.3, 0.7]))
        vt = ec.episodic_policy_evaluation(e, [1, 0])
        np.testing.assert_allclose(vt[0].V, [0.9, 0.4])
        d = ec.episodic_occupancy(e, [1, 0])
        np.testing.assert_allclose(d, [[0.0, 0.3], [0.7, 0.0]])

    def test_all_ones(self):
        h = inst.random_episodic((2, 3, 2), 2, generator(16))
        R = tuple(RewardTable.constant((n, 2), det(1.0)) for n in (2, 3, 2))
        e = EpisodicMdp(level_sizes=(2, 3, 2), P=h.env.P, rewards=R, rho=h.env.rho)
        np.testing.assert_allclose(ec.episodic_policy_evaluation(e, np.zeros(7, int))[0].V, 3.0)

    def test_level_marginals(self):
        h = inst.random_episodic((2, 3, 2), 3, generator(17))
        pi = np.array([0, 1, 2, 0, 1, 2, 0])
        d = ec.episodic_occupancy(h.env, pi)
        for lvl in range(3):
            assert d[h.env.level_slice(lvl)].sum() == pytest.approx(1 / 3)

    def test_three_level_first_occupancy(self):
        h = inst.episodic_h3([0.25, 0.75], np.full((3, 2), 0.1), 1.2)
        d = ec.episodic_occupancy(h.env, h.optimal)
        np.testing.assert_allclose(d[:2, 0], [0.25 / 3, 0.75 / 3])

    def test_three_level_matches_rollouts(self):
        h = inst.episodic_h3([0.4, 0.6], [[0.3, 0.2], [0.1, 0.4], [0.5, 0.1]], 1.1)
        mc = oracles.mc_policy_value(h.env, np.ones(6, int), reps=20000, seed=3)
        exact = ec.episodic_expected_value(h.env, np.ones(6, int))
        assert abs(mc["mean"] - exact) <= 3 * mc["stderr"] + 1e-12

    def test_optimal_matches_enumeration(self):
        h = inst.random_episodic((2, 2, 2), 2, generator(18))
        pi, _ = ec.episodic_optimal_policy(h.env)
        best = max(ec.episodic_expected_value(h.env, p) for p in ec.all_policies(6, 2))
        assert ec.episodic_expected_value(h.env, pi) == pytest.approx(best, abs=1e-12)


class TestSerialisation:
    @pytest.mark.parametrize("make", [
        lambda: inst.random_mdp(3, 2, 0.9, generator(19)).env,
        lambda: inst.random_episodic((2, 3), 2, generator(20)).env,
        lambda: inst.prop1_instance(0.1, 500).env,
        lambda: inst.cb_most_played_failure(1.5).env,
    ])
    def test_round_trip_bit_exact(self, make):
        env = make()
        doc = json.dumps(ec.env_to_dict(env))
        again = ec.env_from_dict(json.loads(doc))
        assert ec.env_to_dict(again) == ec.env_to_dict(env)

    def test_unknown_type(self):
        with pytest.raises(ValidationError):
            ec.env_from_dict({"type": "pomdp"})


def test_gamma_one_rejected():
    with pytest.raises(ValidationError):
        chain_mdp(1.0)


def test_fixed_point_cap_value():
    assert ec.fixed_point_cap(0.9) == math.ceil(math.log(1e13) / 0.1)
