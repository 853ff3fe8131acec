"""Hard instances from the lower-bound constructions, plus random instance generators.

Each constructor returns a ``HardInstance``: an environment, its behaviour
distribution, the declared concentrability of the optimal policy and the
declared optimal policy. ``certify`` recomputes both from scratch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

import numpy as np

from . import env_core as ec
from .data_gen import concentrability
from .env_core import (
    BanditInstance,
    CbInstance,
    DiscountedMdp,
    EpisodicMdp,
    RewardDistribution,
    RewardTable,
)
from .rng import STREAM_CODE, STREAM_INSTANCE, generator
from .validation import ValidationError, check_count, check_discount

CERT_TOL = 1e-9
MDP_GAP_CONSTANT = 200.0
CB_GAP_CONSTANT = 200.0


@dataclass(frozen=True, eq=False)
class HardInstance:
    """Environment + behaviour distribution + declared optimum and C*.

    ``exact_c_star`` is True when the construction pins C* exactly; otherwise
    the instance only claims membership (measured C* <= declared).
    """

    id: str
    env: Any
    mu: np.ndarray
    c_star: float
    optimal: Any
    metadata: dict = field(default_factory=dict)
    exact_c_star: bool = True

    @property
    def kind(self) -> str:
        if isinstance(self.env, BanditInstance):
            return "bandit"
        if isinstance(self.env, CbInstance):
            return "cb"
        if isinstance(self.env, DiscountedMdp):
            return "mdp"
        return "episodic"

    @property
    def num_actions(self) -> int:
        return self.env.num_actions

    @property
    def num_states(self) -> int:
        return 1 if self.kind == "bandit" else self.env.num_states

    @property
    def max_subopt(self) -> float:
        if self.kind == "mdp":
            return self.env.v_max
        if self.kind == "episodic":
            return float(self.env.horizon)
        return 1.0

    @cached_property
    def optimal_value(self) -> float:
        return value_of(self, self.optimal)

    def suboptimality(self, choice) -> float:
        """Exact ``J(pi*) - J(choice)``."""
        return self.optimal_value - value_of(self, choice)


def value_of(inst: HardInstance, choice) -> float:
    env = inst.env
    if inst.kind == "bandit":
        return env.mean(int(choice))
    if inst.kind == "cb":
        return ec.cb_value(env, choice)
    if inst.kind == "mdp":
        return ec.expected_value(env, choice)
    return ec.episodic_expected_value(env, choice)


def exact_optimum(inst: HardInstance):
    env = inst.env
    if inst.kind == "bandit":
        return env.optimal_arm()
    if inst.kind == "cb":
        return ec.cb_optimal_policy(env)
    if inst.kind == "mdp":
        return ec.exact_optimal_policy(env)[0]
    return ec.episodic_optimal_policy(env)[0]


def optimal_occupancy(inst: HardInstance, policy=None) -> np.ndarray:
    env = inst.env
    policy = inst.optimal if policy is None else policy
    if inst.kind == "bandit":
        d = np.zeros(env.num_explicit)
        d[int(policy)] = 1.0
        return d
    if inst.kind == "cb":
        return ec.cb_occupancy(env, policy)
    if inst.kind == "mdp":
        return ec.occupancy(env, policy)
    return ec.episodic_occupancy(env, policy)


def certify(inst: HardInstance) -> dict:
    """Recompute C* and the optimal policy; report whether the declarations hold."""
    if inst.kind == "bandit" and inst.env.is_sparse:
        a = int(inst.optimal)
        mu_a = inst.env.mu[a] if a < inst.env.num_explicit else inst.env.tail_mu
        measured = 1.0 / mu_a if mu_a > 0 else math.inf
    else:
        measured = concentrability(optimal_occupancy(inst), inst.mu)
    opt = exact_optimum(inst)
    opt_ok = bool(np.array_equal(np.asarray(opt), np.asarray(inst.optimal)))
    # ties: an equally good declared optimum also passes
    if not opt_ok:
        opt_ok = abs(value_of(inst, opt) - inst.optimal_value) <= CERT_TOL
    if inst.exact_c_star:
        c_ok = abs(measured - inst.c_star) <= CERT_TOL * max(1.0, inst.c_star)
    else:
        c_ok = measured <= inst.c_star + CERT_TOL * max(1.0, inst.c_star)
    return {"id": inst.id, "declared": inst.c_star, "measured": measured, "c_star_ok": bool(c_ok), "optimal_ok": opt_ok}


# ---------------------------------------------------------------- bandits

det = RewardDistribution.deterministic
bern = RewardDistribution.bernoulli


def prop1_instance(eps: float = 0.1, N: int = 500) -> HardInstance:
    """Wide bandit where the empirical best arm fails: |A| = N^3, one deterministic good arm."""
    eps = float(eps)
    N = check_count(N, "N", 500)
    if not 0.0 < eps < 0.3:
        raise ValidationError(f"eps must lie in (0, 0.3), got {eps}")
    A = N**3
    mu0 = 1.0 / 1.1
    env = BanditInstance(
        rewards=(det(2 * eps),),
        mu=np.array([mu0]),
        num_actions=A,
        tail=RewardDistribution.discrete((0.0, 2.1 * eps), (0.5, 0.5)),
        tail_mu=(1.0 - mu0) / (A - 1),
    )
    return HardInstance("prop1", env, env.mu, 1.1, 0, {"eps": eps, "N": N, "gap": 0.95 * eps})


def _bandit(id_, rewards, mu, c_star, exact, meta) -> HardInstance:
    env = BanditInstance(rewards=tuple(rewards), mu=np.asarray(mu, dtype=float))
    return HardInstance(id_, env, env.mu, float(c_star), env.optimal_arm(), meta, exact_c_star=exact)


def lecam_two_arm(c_star: float, delta_g: float) -> tuple[HardInstance, HardInstance]:
    """The two-point pair used for the two-arm lower bound."""
    C = float(c_star)
    d = float(delta_g)
    if C <= 1:
        raise ValidationError(f"C* must exceed 1, got {C}")
    if not 0.0 <= d <= 0.25:
        raise ValidationError(f"gap must lie in [0, 1/4], got {d}")
    meta = {"c_star": C, "delta_g": d}
    if C >= 2:
        mu = (1 - 1 / C, 1 / C)
        return (
            _bandit("lecam_two_arm", (bern(0.5), bern(0.5 - d)), mu, C, False, {**meta, "member": 0}),
            _bandit("lecam_two_arm", (bern(0.5), bern(0.5 + d)), mu, C, d > 0, {**meta, "member": 1}),
        )
    return (
        _bandit("lecam_two_arm", (bern(0.5 + d), bern(0.5)), (1 / C, 1 - 1 / C), C, True, {**meta, "member": 0}),
        _bandit("lecam_two_arm", (bern(0.5), bern(0.5 + d)), (1 - 1 / C, 1 / C), C, d > 0, {**meta, "member": 1}),
    )


def nonadaptivity_pair(N: int, L: float, L_b: float | None = None) -> tuple[HardInstance, HardInstance]:
    """Instance A (C* = 1.5) and instance B (C* = 6) whose gaps depend on (N, L).

    ``L_b`` sets the scale of instance B separately (defaults to ``L``).
    """
    N = check_count(N, "N", 1)
    L = float(L)
    L_b = L if L_b is None else float(L_b)
    if L < 0 or L_b < 0:
        raise ValidationError("L must be nonnegative")
    mu_a = 1 - 1 / 1.5
    g_a = min(1 / 3, math.sqrt(L / (2 * N * mu_a)))
    inst_a = _bandit(
        "nonadaptivity", (det(0.5), bern(0.5 - g_a)), (1 / 1.5, mu_a), 1.5, True,
        {"member": 0, "N": N, "L": L, "g": g_a},
    )
    g_b = min(math.sqrt(L_b / (4 * N)), 0.5)
    inst_b = _bandit(
        "nonadaptivity", (bern(0.5), det(0.5 - g_b)), (1 / 6, 1 - 1 / 6), 6.0, True,
        {"member": 1, "N": N, "L": L_b, "g": g_b},
    )
    return inst_a, inst_b


def random_bandit(num_actions: int, rng: np.random.Generator, min_mu_star: float = 0.0) -> HardInstance:
    """Bernoulli arms with uniform means; ``mu`` Dirichlet, resampled until ``mu(a*) >= min_mu_star``."""
    A = check_count(num_actions, "num_actions", 1)
    means = rng.random(A)
    a_star = int(np.argmax(means))
    for _ in range(10_000):
        mu = rng.dirichlet(np.ones(A))
        if mu[a_star] >= min_mu_star:
            break
    else:
        raise ValidationError("could not meet min_mu_star")
    rewards = tuple(bern(m) for m in means)
    return _bandit("random_bandit", rewards, mu, 1.0 / mu[a_star], True, {"A": A})


# ---------------------------------------------------------------- GV code


@dataclass(frozen=True, eq=False)
class GvCode:
    codewords: np.ndarray
    pairwise_min_l1: float
    tries: int

    def __len__(self) -> int:
        return int(self.codewords.shape[0])


def gv_code(S: int, max_tries: int = 10_000, seed: int = 0, target_size: int | None = None, block: int = 1024) -> GvCode:
    """Greedy rejection sampling of +-1 vectors at pairwise l1 distance >= S/2.

    Stops after ``max_tries`` candidates, or earlier once ``target_size``
    codewords are accepted. Candidates are processed in order, in blocks.
    """
    S = check_count(S, "S", 2)
    max_tries = check_count(max_tries, "max_tries", 1)
    rng = generator(seed, STREAM_CODE)
    # l1 = S - <u, v> for +-1 vectors, so l1 >= S/2 <=> <u, v> <= S/2
    limit = S / 2.0
    words = np.zeros((0, S))
    tried = 0
    while tried < max_tries and (target_size is None or len(words) < target_size):
        k = min(block, max_tries - tried)
        cand = rng.choice(np.array([-1.0, 1.0]), size=(k, S))
        ok = np.all(cand @ words.T <= limit, axis=1) if len(words) else np.ones(k, dtype=bool)
        accepted = []
        for i in np.flatnonzero(ok):
            tried_i = tried + i + 1
            if accepted and np.any(cand[accepted] @ cand[i] > limit):
                continue
            accepted.append(i)
            if target_size is not None and len(words) + len(accepted) >= target_size:
                k = i + 1
                break
        words = np.vstack([words, cand[accepted]])
        tried += k
    if len(words) > 1:
        gram = words @ words.T
        np.fill_diagonal(gram, -np.inf)
        min_l1 = float(S - gram.max())
    else:
        min_l1 = math.inf
    return GvCode(words.astype(np.int64), min_l1, tried)


# ---------------------------------------------------------------- contextual bandits


def cb_minimax_gap(S: int, c_star: float, N: int) -> float:
    """Gap scale of the CB lower bound at sample size N."""
    C = float(c_star)
    if C >= 2:
        return min(1 / 3, math.sqrt(S * C / (CB_GAP_CONSTANT * N)))
    return min(1 / 3, math.sqrt(S * C / (CB_GAP_CONSTANT * (C - 1) * N)))


def _cb(id_, rho, rewards, mu, c_star, exact, meta) -> HardInstance:
    env = CbInstance(rho=np.asarray(rho, dtype=float), rewards=rewards, mu=np.asarray(mu, dtype=float))
    return HardInstance(id_, env, env.mu, float(c_star), ec.cb_optimal_policy(env), meta, exact_c_star=exact)


def cb_fano_member(S: int, c_star: float, delta_g: float, v) -> HardInstance:
    """One member of the CB family, indexed by a +-1 vector ``v`` of length S."""
    S = check_count(S, "S", 2)
    C = float(c_star)
    d = float(delta_g)
    v = np.asarray(v, dtype=int)
    if C < 1:
        raise ValidationError(f"C* must be >= 1, got {C}")
    if v.shape != (S,) or not np.all(np.abs(v) == 1):
        raise ValidationError("v must be a +-1 vector of length S")
    if not 0.0 <= d < 1 / 3:
        raise ValidationError(f"gap must lie in [0, 1/3), got {d}")
    meta = {"S": S, "c_star": C, "delta_g": d, "v": v.tolist()}
    arms = [[bern(0.5), bern(0.5 + vs * d)] for vs in v]
    if C >= 2:
        rho = np.full(S, 1.0 / S)
        mu = np.column_stack([np.full(S, 1 / S - 1 / (S * C)), np.full(S, 1 / (S * C))])
        return _cb("cb_fano", rho, RewardTable(arms), mu, C, d > 0 and bool(np.any(v == 1)), meta)
    rho = np.concatenate([[2 - C], np.full(S, (C - 1) / S)])
    mu = np.vstack([[(2 - C) / C, 0.0], np.full((S, 2), (C - 1) / (S * C))])
    rewards = RewardTable([[det(0.0), det(0.0)]] + arms)
    return _cb("cb_fano", rho, rewards, mu, C, True, meta)


def cb_fano_family(S: int, c_star: float, delta_g: float, code: GvCode | None = None, seed: int = 0, max_tries: int = 4096) -> list[HardInstance]:
    """One CB instance per codeword of a GV code over S contexts."""
    code = code if code is not None else gv_code(S, max_tries=max_tries, seed=seed)
    return [cb_fano_member(S, c_star, delta_g, v) for v in code.codewords]


def cb_most_played_failure(c_star: float = 1.5, eps: float | None = None) -> HardInstance:
    """Two contexts where the modal action at the rewarding context is wrong."""
    C = float(c_star)
    if not 1 < C < 2:
        raise ValidationError(f"C* must lie in (1, 2), got {C}")
    eps = min(0.01, (C - 1) / 10) if eps is None else float(eps)
    if not 0 < eps < C - 1:
        raise ValidationError(f"eps must lie in (0, C*-1), got {eps}")
    rho = np.array([C - 1 - eps, 2 - C + eps])
    mu = np.array([[(C - 1 - eps) / C, (C - 1) / C], [(2 - C + eps) / C, 0.0]])
    rewards = RewardTable([[det(1.0), det(0.0)], [det(0.0), det(0.0)]])
    return _cb("cb_most_played_failure", rho, rewards, mu, C, True, {"c_star": C, "eps": eps})


def cb_expert_instance(S: int, N_design: int, num_actions: int = 2, optimal_actions=None) -> HardInstance:
    """Expert-data CB (mu = d*, C* = 1) whose rare contexts have mass 1/(N_design+1).

    Reward is 1 for the expert action, 0 otherwise. The expert action
    defaults to the last index, so a learner that falls back to action 0 on
    an unseen context pays the full missing mass.
    """
    S = check_count(S, "S", 2)
    A = check_count(num_actions, "num_actions", 2)
    N = check_count(N_design, "N_design", 1)
    zeta = 1.0 / (N + 1)
    if (S - 1) * zeta >= 1:
        raise ValidationError("N_design too small for S contexts")
    rho = np.concatenate([np.full(S - 1, zeta), [1 - (S - 1) * zeta]])
    acts = np.full(S, A - 1) if optimal_actions is None else np.asarray(optimal_actions, dtype=int)
    rewards = RewardTable([[det(1.0 if a == acts[s] else 0.0) for a in range(A)] for s in range(S)])
    mu = np.zeros((S, A))
    mu[np.arange(S), acts] = rho
    return _cb("cb_expert", rho, rewards, mu, 1.0, True, {"S": S, "N_design": N, "zeta": zeta})


def random_cb(S: int, A: int, rng: np.random.Generator) -> HardInstance:
    rho = rng.dirichlet(np.ones(S))
    means = rng.random((S, A))
    mu = rng.dirichlet(np.ones(S * A)).reshape(S, A)
    rewards = RewardTable([[bern(x) for x in row] for row in means])
    env = CbInstance(rho=rho, rewards=rewards, mu=mu)
    pi = ec.cb_optimal_policy(env)
    c = concentrability(ec.cb_occupancy(env, pi), mu)
    return HardInstance("random_cb", env, mu, c, pi, {"S": S, "A": A})


# ---------------------------------------------------------------- discounted MDPs


def mdp_minimax_gap(S: int, c_star: float, gamma: float, N: int) -> float:
    """Gap scale of the MDP lower bound (S counts replica states, i.e. excludes the sink)."""
    C = float(c_star)
    if C >= 2:
        x = S * C / (MDP_GAP_CONSTANT * (1 - gamma) * N)
    else:
        x = S * C / (MDP_GAP_CONSTANT * (1 - gamma) * (C - 1) * N)
    return min(0.25, math.sqrt(x))


def mdp_hard(S: int, gamma: float, c_star: float, delta_g: float, v=None, p: float | None = None) -> HardInstance:
    """Replicated four-state gadget plus an absorbing sink; ``S = 4J + 1`` states in total.

    Replica j uses states 4j (s0), 4j+1 (s1), 4j+2 (plus), 4j+3 (minus); the
    sink is the last state. Only s1 has two distinct actions; elsewhere both
    actions are identical and mu only uses action 0.
    ``p`` defaults to 1/(2 - gamma); ``q = (2 gamma - 1)/gamma``.
    """
    S = check_count(S, "S", 5)
    if (S - 1) % 4:
        raise ValidationError("S must be a multiple of 4 plus 1")
    gamma = check_discount(gamma)
    if gamma < 0.5:
        raise ValidationError("gamma must be >= 1/2")
    C = float(c_star)
    if C <= 1:
        raise ValidationError("C* must exceed 1")
    d = float(delta_g)
    if not 0.0 <= d <= 0.25:
        raise ValidationError(f"gap must lie in [0, 1/4], got {d}")
    J = (S - 1) // 4
    v = np.ones(J, dtype=int) if v is None else np.asarray(v, dtype=int)
    if v.shape != (J,) or not np.all(np.abs(v) == 1):
        raise ValidationError(f"v must be a +-1 vector of length {J}")
    p = 1.0 / (2.0 - gamma) if p is None else float(p)
    q = (2.0 * gamma - 1.0) / gamma
    sink = S - 1

    P = np.zeros((S, 2, S))
    R = [[det(0.0), det(0.0)] for _ in range(S)]
    for j in range(J):
        s0, s1, sp, sm = 4 * j, 4 * j + 1, 4 * j + 2, 4 * j + 3
        P[s0, :, s0] = p
        P[s0, :, s1] = 1 - p
        P[s1, 0, sp] = P[s1, 0, sm] = 0.5
        P[s1, 1, sp] = 0.5 + v[j] * d
        P[s1, 1, sm] = 0.5 - v[j] * d
        for s in (sp, sm):
            P[s, :, s] = q
            P[s, :, s1] = 1 - q
        R[sp] = [det(1.0), det(1.0)]
    P[sink, :, sink] = 1.0

    rho = np.zeros(S)
    if C >= 2:
        rho[0:sink:4] = 4.0 / (S - 1)
    else:
        rho[0:sink:4] = 4.0 * (C - 1) / (S - 1)
        rho[sink] = 2 - C
    env = DiscountedMdp(P=P, rewards=RewardTable(R), rho=rho, gamma=gamma)
    pi, _ = ec.exact_optimal_policy(env)
    dstar = ec.occupancy(env, pi).sum(axis=1)

    mu = np.zeros((S, 2))
    k = gamma / (2 * (1 - gamma))
    for j in range(J):
        s0, s1, sp, sm = 4 * j, 4 * j + 1, 4 * j + 2, 4 * j + 3
        mu[s0, 0] = dstar[s0] / C
        if C >= 2:
            mu[s1, 1] = dstar[s1] / C
            mu[s1, 0] = dstar[s1] * (1 - 1 / C)
            mu[sp, 0] = 0.75 * k * dstar[s1] / C
            mu[sm, 0] = 0.5 * k * dstar[s1] / C
        else:
            mu[s1, :] = dstar[s1] / C
            mu[sp, 0] = 0.75 * k * dstar[s1]
            mu[sm, 0] = 0.5 * k * dstar[s1]
    mu[sink, 0] = 1.0 - mu.sum()
    if mu[sink, 0] <= 0:
        raise ValidationError("construction leaves no behaviour mass on the sink")
    meta = {"S": S, "gamma": gamma, "c_star": C, "delta_g": d, "v": v.tolist(), "p": p, "q": q}
    return HardInstance("mdp_hard", env, mu, C, pi, meta)


def imitation_hard_mdp(S: int, N_design: int, gamma: float = 0.9, num_actions: int = 2, seed: int = 0) -> HardInstance:
    """Expert-data MDP (mu = d*) with a zero-reward absorbing bad state (the last index).

    The expert action at each good state renews from ``rho`` with reward 1;
    every other action falls into the bad state. Expert actions are drawn
    uniformly per state from the ``(seed, instance)`` stream.
    """
    S = check_count(S, "S", 3)
    N = check_count(N_design, "N_design", 1)
    A = check_count(num_actions, "num_actions", 2)
    gamma = check_discount(gamma)
    zeta = 1.0 / (N + 1)
    if (S - 2) * zeta >= 1:
        raise ValidationError("N_design too small for S states")
    bad = S - 1
    rho = np.concatenate([np.full(S - 2, zeta), [1 - (S - 2) * zeta, 0.0]])
    acts = generator(seed, STREAM_INSTANCE).integers(0, A, size=S - 1)
    P = np.zeros((S, A, S))
    P[:, :, bad] = 1.0
    R = [[det(0.0)] * A for _ in range(S)]
    for s in range(S - 1):
        P[s, acts[s], :] = rho
        R[s][acts[s]] = det(1.0)
    env = DiscountedMdp(P=P, rewards=RewardTable(R), rho=rho, gamma=gamma)
    pi = np.append(acts, 0).astype(np.int64)
    mu = ec.occupancy(env, pi)
    return HardInstance("imitation_hard", env, mu, 1.0, pi, {"S": S, "N_design": N, "zeta": zeta, "seed": seed})


def random_mdp(S: int, A: int, gamma: float, rng: np.random.Generator, mu_kind: str = "dirichlet") -> HardInstance:
    """Dirichlet transitions, Bernoulli rewards with uniform means, full-support mu."""
    P = rng.dirichlet(np.ones(S), size=(S, A))
    means = rng.random((S, A))
    rho = rng.dirichlet(np.ones(S))
    rewards = RewardTable([[bern(x) for x in row] for row in means])
    env = DiscountedMdp(P=P, rewards=rewards, rho=rho, gamma=gamma)
    if mu_kind == "uniform":
        mu = np.full((S, A), 1.0 / (S * A))
    else:
        mu = rng.dirichlet(np.ones(S * A)).reshape(S, A)
    pi, _ = ec.exact_optimal_policy(env)
    c = concentrability(ec.occupancy(env, pi), mu)
    return HardInstance("random_mdp", env, mu, c, pi, {"S": S, "A": A, "gamma": gamma})


# ---------------------------------------------------------------- episodic


H3_LEVELS = (2, 2, 2)


def episodic_h3(rho, gaps, c_star: float) -> HardInstance:
    """Three-level, two-state-per-level episodic MDP where action 0 is optimal everywhere.

    Action 0 moves to the first state of the next level, action 1 to the
    second. Rewards are deterministic: ``r(s,0) = 1`` and ``r(s,1) = 1 - g``,
    so ``Q*(s,0) - Q*(s,1) = g`` for the gap ``g`` requested at each state
    (``gaps`` has shape (3, 2)). The optimal policy never visits the second
    state of levels 2 and 3; behaviour mass not needed for coverage goes
    there, and every state keeps ``mu(s,0) >= 9 mu(s,1)``.
    """
    C = float(c_star)
    if not 1 <= C < 2:
        raise ValidationError(f"C* must lie in [1, 2), got {C}")
    rho = np.asarray(rho, dtype=float)
    if rho.shape != (2,) or np.any(rho <= 0):
        raise ValidationError("rho must be a positive distribution over the two first-level states")
    g = np.asarray(gaps, dtype=float)
    if g.shape != (3, 2):
        raise ValidationError("gaps must have shape (3, 2)")
    if np.any(g < 0) or np.any(g > 1):
        raise ValidationError("gaps must lie in [0, 1] to be realised by rewards in [0, 1]")
    P = []
    for _h in range(2):
        Ph = np.zeros((2, 2, 2))
        Ph[:, 0, 0] = 1.0
        Ph[:, 1, 1] = 1.0
        P.append(Ph)
    R = tuple(RewardTable([[det(1.0), det(1.0 - g[h, s])] for s in range(2)]) for h in range(3))
    env = EpisodicMdp(level_sizes=H3_LEVELS, P=tuple(P), rewards=R, rho=rho)
    pi = np.zeros(6, dtype=np.int64)
    dstar = ec.episodic_occupancy(env, pi)
    lead = 1.0 - 1.0 / C
    theta = 0.0 if C == 1 else min(0.5, 1.0 / (9.0 * (C - 1)))
    mu = np.zeros((6, 2))
    support = dstar[:, 0] > 0
    mu[support, 0] = dstar[support, 0] / C
    mu[support, 1] = theta * lead * dstar[support, 0]
    spare = (1 - theta) * lead
    off = np.flatnonzero(~support)
    mu[off, 0] = 0.9 * spare / len(off)
    mu[off, 1] = 0.1 * spare / len(off)
    if np.any(mu[:, 0] < 9 * mu[:, 1] - 1e-15):
        raise ValidationError("behaviour distribution violates mu(s,0) >= 9 mu(s,1)")
    meta = {"rho": rho.tolist(), "gaps": g.tolist(), "c_star": C, "theta": theta}
    return HardInstance("episodic_h3", env, mu, C, pi, meta, exact_c_star=True)


def random_episodic(level_sizes, A: int, rng: np.random.Generator) -> HardInstance:
    sizes = tuple(int(x) for x in level_sizes)
    P = tuple(rng.dirichlet(np.ones(sizes[h + 1]), size=(sizes[h], A)) for h in range(len(sizes) - 1))
    R = tuple(RewardTable([[bern(x) for x in row] for row in rng.random((n, A))]) for n in sizes)
    env = EpisodicMdp(level_sizes=sizes, P=P, rewards=R, rho=rng.dirichlet(np.ones(sizes[0])))
    pi, _ = ec.episodic_optimal_policy(env)
    S = env.num_states
    mu = rng.dirichlet(np.ones(S * A)).reshape(S, A)
    c = concentrability(ec.episodic_occupancy(env, pi), mu)
    return HardInstance("random_episodic", env, mu, c, pi, {"level_sizes": list(sizes), "A": A})
