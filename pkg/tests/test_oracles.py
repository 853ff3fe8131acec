import math

import numpy as np
import pytest
from scipy.stats import binom

from pessimlab import algorithms as alg
from pessimlab import data_gen as dg
from pessimlab import env_core as ec
from pessimlab import instances as inst
from pessimlab import oracles
from pessimlab.env_core import BanditInstance, DiscountedMdp, RewardDistribution, RewardTable
from pessimlab.rng import generator
from pessimlab.validation import ValidationError

bern = RewardDistribution.bernoulli
det = RewardDistribution.deterministic

KL_HALF_TWO_THIRDS = math.log(1.5 / 2) + math.log(1 / 0.5) / 2


def mc_subopt(h, rule, N, reps, seed=0, **kw):
    n = np.empty((reps, 2), dtype=np.int64)
    t = np.empty((reps, 2))
    for i in range(reps):
        st = dg.sample_stats(h.env, N, seed * 1_000_003 + i)
        n[i], t[i] = st.dense()
    choice = alg.mab_choice(n, t, rule, **kw)
    loss = h.env.means.max() - h.env.means[choice]
    return loss.mean(), loss.std(ddof=1) / math.sqrt(reps)


class TestExactTwoArm:
    def test_oracle_rule(self):
        h, _ = inst.lecam_two_arm(1.5, 0.2)
        assert oracles.exact_two_arm_subopt(h.env, lambda n, t: np.zeros(len(n), int), 40) == 0.0

    def test_most_played_closed_form(self):
        # C* = 1.5: the wrong arm is chosen iff the optimal arm has fewer than N/2 draws
        h, _ = inst.lecam_two_arm(1.5, 0.2)
        exact = oracles.exact_two_arm_subopt(h.env, "most_played_arm", 60)
        assert exact == pytest.approx(0.2 * binom.cdf(29, 60, 2 / 3), rel=1e-12)
        _, h2 = inst.lecam_two_arm(2.0, 0.25)
        exact = oracles.exact_two_arm_subopt(h2.env, "most_played_arm", 60)
        assert exact == pytest.approx(0.25 * binom.sf(29, 60, 0.5), rel=1e-12)

    def test_frozen_value(self):
        h, _ = inst.lecam_two_arm(1.5, 0.2)
        assert oracles.exact_two_arm_subopt(h.env, "most_played_arm", 60) == pytest.approx(5.114909e-4, rel=1e-6)

    @pytest.mark.parametrize("N", [20, 60, 120, 200])
    def test_exponential_bound(self, N):
        h = inst._bandit("two_arm", (det(1.0), det(0.0)), (2 / 3, 1 / 3), 1.5, True, {})
        exact = oracles.exact_two_arm_subopt(h.env, "most_played_arm", N)
        assert exact <= math.exp(-N * KL_HALF_TWO_THIRDS)

    def test_kl_constant(self):
        assert KL_HALF_TWO_THIRDS == pytest.approx(0.0589, abs=5e-5)

    @pytest.mark.parametrize("rule", ["lcb_mab", "empirical_best_arm", "most_played_arm"])
    def test_matches_monte_carlo(self, rule):
        h, _ = inst.lecam_two_arm(1.5, 0.2)
        exact = oracles.exact_two_arm_subopt(h.env, rule, 30)
        mean, se = mc_subopt(h, rule, 30, 20000, seed=1)
        assert abs(mean - exact) <= 3 * se + 1e-12

    def test_mass_sums_to_one(self):
        for C, d in ((1.5, 0.1), (3.0, 0.25)):
            for h in inst.lecam_two_arm(C, d):
                for N in (1, 17, 80):
                    assert oracles.outcome_mass(h.env, N) == pytest.approx(1.0, abs=1e-12)
        a, b = inst.nonadaptivity_pair(200, 0.1, math.sqrt(200))
        assert oracles.outcome_mass(a.env, 200) == pytest.approx(1.0, abs=1e-12)
        assert oracles.outcome_mass(b.env, 200) == pytest.approx(1.0, abs=1e-12)

    def test_rejects_unsupported(self):
        three = BanditInstance(rewards=(bern(0.1), bern(0.2), bern(0.3)), mu=np.full(3, 1 / 3))
        with pytest.raises(ValidationError):
            oracles.exact_two_arm_subopt(three, "lcb_mab", 10)
        disc = BanditInstance(rewards=(RewardDistribution.discrete((0, 1), (0.5, 0.5)), bern(0.2)), mu=np.full(2, 0.5))
        with pytest.raises(ValidationError):
            oracles.exact_two_arm_subopt(disc, "lcb_mab", 10)

    def test_seed_free(self):
        h, _ = inst.lecam_two_arm(2.0, 0.1)
        a = oracles.exact_two_arm_subopt(h.env, "lcb_mab", 50)
        b = oracles.exact_two_arm_subopt(h.env, "lcb_mab", 50)
        assert a == b


class TestExhaustive:
    def test_single_state(self):
        b = BanditInstance(rewards=(bern(0.1), bern(0.6), bern(0.3)), mu=np.full(3, 1 / 3))
        assert oracles.exhaustive_optimal_policy(ec.bandit_as_mdp(b)).tolist() == [1]

    def test_agrees_on_random_mdps(self):
        rng = generator(21)
        for _ in range(300):
            h = inst.random_mdp(3, 2, 0.9, rng)
            np.testing.assert_array_equal(oracles.exhaustive_optimal_policy(h.env), ec.exact_optimal_policy(h.env)[0])

    def test_recovers_replica_optimum(self):
        h = inst.mdp_hard(5, 0.9, 2.0, 0.1, v=[-1])
        np.testing.assert_array_equal(oracles.exhaustive_optimal_policy(h.env), h.optimal)

    def test_limit(self):
        h = inst.random_mdp(13, 2, 0.9, generator(0))
        with pytest.raises(ValidationError):
            oracles.exhaustive_optimal_policy(h.env)


class TestMonteCarlo:
    def test_deterministic_chain(self):
        P = np.zeros((1, 1, 1))
        P[0, 0, 0] = 1.0
        mdp = DiscountedMdp(P=P, rewards=RewardTable([[det(1.0)]]), rho=np.ones(1), gamma=0.9)
        out = oracles.mc_policy_value(mdp, [0], reps=10, horizon_cap=100, seed=0)
        assert abs(out["mean"] - 10.0) <= out["bias_bound"] + 1e-9
        assert out["bias_bound"] == pytest.approx(0.9**100 / 0.1)

    def test_random_mdps(self):
        rng = generator(22)
        for i in range(20):
            h = inst.random_mdp(4, 2, 0.8, rng)
            pi = rng.integers(0, 2, size=4)
            out = oracles.mc_policy_value(h.env, pi, reps=4000, seed=i)
            assert abs(out["mean"] - ec.expected_value(h.env, pi)) <= 3 * out["stderr"] + out["bias_bound"] + 0.01

    def test_zero_reps(self):
        with pytest.raises(ValidationError):
            oracles.mc_policy_value(inst.random_mdp(2, 2, 0.5, generator(0)).env, [0, 0], reps=0)

    def test_seeded(self):
        h = inst.random_mdp(3, 2, 0.9, generator(1))
        a = oracles.mc_policy_value(h.env, [0, 1, 0], reps=100, seed=5)
        b = oracles.mc_policy_value(h.env, [0, 1, 0], reps=100, seed=5)
        assert a == b


class TestInverseMoments:
    def test_constant(self):
        assert oracles.inverse_moment_constant(0.5) == pytest.approx(15.88509, abs=1e-5)
        assert oracles.inverse_moment_constant(0.5) <= oracles.PROOF_C_HALF

    @pytest.mark.parametrize("k", [0.5, 1, 2])
    def test_p_one(self, k):
        out = oracles.inverse_moment_check(40, 1.0, k, reps=50)
        assert out["estimate"] == pytest.approx(40.0 ** (-k))
        assert oracles.inverse_moment_exact(40, 1.0, k) == pytest.approx(40.0 ** (-k))

    def test_example_point(self):
        out = oracles.inverse_moment_check(100, 0.5, 0.5, reps=20000, seed=3)
        assert out["bound"] == pytest.approx(16 / math.sqrt(50))
        assert out["estimate"] <= out["bound"]

    @pytest.mark.parametrize("N,p", [(10, 0.05), (100, 0.2), (1000, 0.5), (10_000, 0.01)])
    def test_exact_matches_mc(self, N, p):
        out = oracles.inverse_moment_check(N, p, 0.5, reps=50000, seed=N)
        assert abs(out["estimate"] - oracles.inverse_moment_exact(N, p, 0.5)) <= 3 * out["stderr"] + 1e-12

    def test_errors(self):
        with pytest.raises(ValidationError):
            oracles.inverse_moment_check(10, 0.0, 0.5, reps=10)
        with pytest.raises(ValidationError):
            oracles.inverse_moment_check(10, 0.5, 3, reps=10)


class TestCleanEvent:
    def test_deterministic_rewards(self):
        b = BanditInstance(rewards=(det(0.2), det(0.7)), mu=np.array([0.5, 0.5]))
        data = dg.sample_dataset(b, 50, 0)
        assert oracles.clean_event_indicator("mab", b, alg.mab_terms(data, 2))

    def test_detects_violation(self):
        b = BanditInstance(rewards=(det(0.2), det(0.7)), mu=np.array([0.5, 0.5]))
        assert not oracles.clean_event_indicator("mab", b, (np.array([0.2, 0.1]), np.array([0.1, 0.1])))

    def test_cb(self):
        h = inst.random_cb(3, 2, generator(2))
        data = dg.sample_dataset(h.env, 500, 1)
        rhat, b, _ = alg.cb_terms(data, 3, 2)
        assert oracles.clean_event_indicator("cb", h.env, (rhat, b))
        assert not oracles.clean_event_indicator("cb", h.env, (rhat, np.zeros_like(b)))

    def test_mdp_needs_trace(self):
        h = inst.random_mdp(2, 2, 0.9, generator(3))
        with pytest.raises(ValidationError):
            oracles.clean_event_indicator("mdp", h.env, None)

    def test_mdp_small_penalty_fails(self):
        h = inst.random_mdp(3, 2, 0.9, generator(4))
        data = dg.sample_dataset(h.env, 3000, 2, mu=h.mu)
        _, tr = alg.vi_lcb(data, alg.MdpShape(3, 2, 0.9), want_trace=True, override_L=1e-8)
        assert not oracles.clean_event_indicator("mdp", h.env, tr)
        _, tr = alg.vi_lcb(data, alg.MdpShape(3, 2, 0.9), want_trace=True)
        assert oracles.clean_event_indicator("mdp", h.env, tr)
