"""Exact tabular environments and exact evaluation.

Environments are immutable containers validated at construction. Policies
are plain integer arrays mapping state index to action index. All the
evaluation routines below are exact up to floating point: they solve the
linear Bellman systems directly (or iterate to a tight residual on large
problems), so they double as ground truth for the rest of the package.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .validation import (
    PROB_TOL,
    ValidationError,
    check_count,
    check_discount,
    check_policy,
    check_probability_table,
    frozen,
)

DENSE_SOLVE_LIMIT = 2000
TIE_TOL = 1e-12


def argmax_lowest(values: np.ndarray, axis: int = -1, tol: float = 0.0) -> np.ndarray:
    """Argmax that resolves ties (within ``tol``) toward the lowest index."""
    values = np.asarray(values, dtype=float)
    if tol == 0.0:
        return np.argmax(values, axis=axis)
    best = np.max(values, axis=axis, keepdims=True)
    return np.argmax(values >= best - tol, axis=axis)


# ---------------------------------------------------------------- rewards


@dataclass(frozen=True)
class RewardDistribution:
    """A reward law on [0, 1] with finite support."""

    kind: str
    values: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        if self.kind not in ("deterministic", "bernoulli", "discrete"):
            raise ValidationError(f"unknown reward kind {self.kind!r}")
        if len(self.values) != len(self.probs) or not self.values:
            raise ValidationError("reward support and probabilities must have equal, nonzero length")
        v = np.asarray(self.values, dtype=float)
        if np.any(v < 0) or np.any(v > 1):
            raise ValidationError("reward support must lie in [0, 1]")
        check_probability_table(self.probs, "reward probabilities")

    @classmethod
    def deterministic(cls, value: float) -> "RewardDistribution":
        return cls("deterministic", (float(value),), (1.0,))

    @classmethod
    def bernoulli(cls, mean: float) -> "RewardDistribution":
        mean = float(mean)
        if not 0.0 <= mean <= 1.0:
            raise ValidationError(f"Bernoulli mean must lie in [0, 1], got {mean}")
        return cls("bernoulli", (0.0, 1.0), (1.0 - mean, mean))

    @classmethod
    def discrete(cls, values: Sequence[float], probs: Sequence[float]) -> "RewardDistribution":
        return cls("discrete", tuple(float(x) for x in values), tuple(float(x) for x in probs))

    def mean(self) -> float:
        if self.kind == "bernoulli":
            return self.probs[1]
        return float(np.dot(self.values, self.probs))

    def to_dict(self) -> dict:
        if self.kind == "deterministic":
            return {"kind": "deterministic", "value": repr(self.values[0])}
        if self.kind == "bernoulli":
            return {"kind": "bernoulli", "mean": repr(self.probs[1])}
        return {
            "kind": "discrete",
            "values": [repr(x) for x in self.values],
            "probs": [repr(x) for x in self.probs],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RewardDistribution":
        kind = d["kind"]
        if kind == "deterministic":
            return cls.deterministic(float(d["value"]))
        if kind == "bernoulli":
            return cls.bernoulli(float(d["mean"]))
        if kind == "discrete":
            return cls.discrete([float(x) for x in d["values"]], [float(x) for x in d["probs"]])
        raise ValidationError(f"unknown reward kind {kind!r}")


class RewardTable:
    """A grid of reward distributions with padded support arrays for vectorized sampling."""

    def __init__(self, distributions):
        flat = list(_flatten(distributions))
        obj = np.empty(len(flat), dtype=object)
        for i, d in enumerate(flat):
            if not isinstance(d, RewardDistribution):
                raise ValidationError("reward table entries must be RewardDistribution")
            obj[i] = d
        self.shape = tuple(_shape_of(distributions))
        self._dists = obj.reshape(self.shape)
        k = max(len(d.values) for d in flat)
        values = np.zeros((len(flat), k))
        probs = np.zeros((len(flat), k))
        for i, d in enumerate(flat):
            values[i, : len(d.values)] = d.values
            probs[i, : len(d.probs)] = d.probs
        self.values = frozen(values.reshape(self.shape + (k,)))
        self.probs = frozen(probs.reshape(self.shape + (k,)))
        self.means = frozen(np.array([d.mean() for d in flat]).reshape(self.shape))
        self.cdf = frozen(np.cumsum(self.probs, axis=-1))

    @classmethod
    def constant(cls, shape, dist: RewardDistribution) -> "RewardTable":
        grid = np.empty(shape, dtype=object)
        grid.fill(dist)
        return cls(grid.tolist())

    def __getitem__(self, idx) -> RewardDistribution:
        return self._dists[idx]

    def kinds(self) -> set[str]:
        return {d.kind for d in self._dists.ravel()}

    def sample(self, rng_u: np.ndarray, cells: tuple) -> np.ndarray:
        """Inverse-CDF draw of one reward per uniform in ``rng_u`` at the given cells."""
        cdf = self.cdf[cells]
        k = (rng_u[:, None] >= cdf).sum(axis=1)
        np.minimum(k, cdf.shape[-1] - 1, out=k)
        return self.values[cells + (k,)]

    def sample_sums(self, rng: np.random.Generator, counts: np.ndarray) -> np.ndarray:
        """Sum of ``counts[c]`` i.i.d. rewards at every cell c."""
        counts = np.asarray(counts, dtype=np.int64)
        hits = rng.multinomial(counts.reshape(-1), self.probs.reshape(-1, self.probs.shape[-1]))
        return (hits * self.values.reshape(hits.shape)).sum(axis=-1).reshape(counts.shape)

    def to_list(self) -> list:
        return [d.to_dict() for d in self._dists.ravel()]

    def __eq__(self, other) -> bool:
        return isinstance(other, RewardTable) and self.shape == other.shape and all(
            a == b for a, b in zip(self._dists.ravel(), other._dists.ravel())
        )

    __hash__ = None


def _flatten(x):
    if isinstance(x, RewardDistribution):
        yield x
        return
    for item in x:
        yield from _flatten(item)


def _shape_of(x):
    if isinstance(x, RewardDistribution):
        return ()
    x = list(x)
    if not x:
        raise ValidationError("empty reward table")
    return (len(x),) + tuple(_shape_of(x[0]))


# ---------------------------------------------------------------- environments


@dataclass(frozen=True, eq=False)
class DiscountedMdp:
    """Finite discounted MDP. ``P`` has shape (S, A, S), ``rewards`` shape (S, A)."""

    P: np.ndarray
    rewards: RewardTable
    rho: np.ndarray
    gamma: float

    def __post_init__(self):
        P = check_probability_table(self.P, "transition kernel")
        if P.ndim != 3 or P.shape[0] != P.shape[2]:
            raise ValidationError(f"transition kernel must have shape (S, A, S), got {P.shape}")
        if self.rewards.shape != P.shape[:2]:
            raise ValidationError("reward table shape must be (S, A)")
        rho = check_probability_table(self.rho, "initial distribution")
        if rho.shape != (P.shape[0],):
            raise ValidationError("initial distribution must have length S")
        object.__setattr__(self, "P", frozen(P))
        object.__setattr__(self, "rho", frozen(rho))
        object.__setattr__(self, "gamma", check_discount(self.gamma))

    @property
    def num_states(self) -> int:
        return self.P.shape[0]

    @property
    def num_actions(self) -> int:
        return self.P.shape[1]

    @property
    def v_max(self) -> float:
        return 1.0 / (1.0 - self.gamma)

    @property
    def r(self) -> np.ndarray:
        return self.rewards.means


@dataclass(frozen=True, eq=False)
class EpisodicMdp:
    """Layered finite-horizon MDP.

    States are numbered globally level after level. ``P[h]`` maps level h to
    level h+1 with shape (n_h, A, n_{h+1}); there are H-1 of them.
    """

    level_sizes: tuple[int, ...]
    P: tuple[np.ndarray, ...]
    rewards: tuple[RewardTable, ...]
    rho: np.ndarray

    def __post_init__(self):
        sizes = tuple(check_count(n, "level size", 1) for n in self.level_sizes)
        H = len(sizes)
        if H < 1:
            raise ValidationError("horizon must be >= 1")
        if len(self.P) != H - 1 or len(self.rewards) != H:
            raise ValidationError("need H-1 transition tables and H reward tables")
        A = self.rewards[0].shape[1]
        Ps = []
        for h, Ph in enumerate(self.P):
            Ph = check_probability_table(Ph, f"transition table at level {h + 1}")
            if Ph.shape != (sizes[h], A, sizes[h + 1]):
                raise ValidationError(f"transition table at level {h + 1} has shape {Ph.shape}")
            Ps.append(frozen(Ph))
        for h, Rh in enumerate(self.rewards):
            if Rh.shape != (sizes[h], A):
                raise ValidationError(f"reward table at level {h + 1} has wrong shape")
        rho = check_probability_table(self.rho, "initial distribution")
        if rho.shape != (sizes[0],):
            raise ValidationError("initial distribution must cover level 1")
        object.__setattr__(self, "level_sizes", sizes)
        object.__setattr__(self, "P", tuple(Ps))
        object.__setattr__(self, "rho", frozen(rho))

    @property
    def horizon(self) -> int:
        return len(self.level_sizes)

    @property
    def num_actions(self) -> int:
        return self.rewards[0].shape[1]

    @property
    def num_states(self) -> int:
        return sum(self.level_sizes)

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        return tuple(int(x) for x in np.concatenate([[0], np.cumsum(self.level_sizes)]))

    def level_slice(self, h: int) -> slice:
        """Global index range of level ``h`` (0-based)."""
        return slice(self.offsets[h], self.offsets[h + 1])

    @cached_property
    def level_of(self) -> np.ndarray:
        return frozen(np.repeat(np.arange(self.horizon), self.level_sizes))

    @cached_property
    def r(self) -> np.ndarray:
        """Mean rewards on the global (S, A) grid."""
        return frozen(np.concatenate([R.means for R in self.rewards], axis=0))


@dataclass(frozen=True, eq=False)
class BanditInstance:
    """Multi-armed bandit with behaviour distribution ``mu``.

    ``rewards``/``mu`` list the explicit arms. Very wide bandits may add a
    shared ``tail`` reward for arms ``len(rewards) .. num_actions-1``, each
    drawn with probability ``tail_mu`` (kept implicit, never materialised).
    """

    rewards: tuple[RewardDistribution, ...]
    mu: np.ndarray
    num_actions: int = 0
    tail: RewardDistribution | None = None
    tail_mu: float = 0.0

    def __post_init__(self):
        rewards = tuple(self.rewards)
        mu = np.asarray(self.mu, dtype=float)
        if mu.shape != (len(rewards),):
            raise ValidationError("mu must have one entry per explicit arm")
        A = self.num_actions or len(rewards)
        k_tail = A - len(rewards)
        if k_tail < 0:
            raise ValidationError("num_actions smaller than the number of explicit arms")
        if k_tail > 0 and self.tail is None:
            raise ValidationError("implicit arms need a tail reward")
        if np.any(mu < 0) or self.tail_mu < 0:
            raise ValidationError("mu has negative entries")
        total = math.fsum(mu.tolist()) + k_tail * float(self.tail_mu)
        if abs(total - 1.0) > PROB_TOL:
            raise ValidationError(f"mu does not sum to 1 (sum {total!r})")
        object.__setattr__(self, "rewards", rewards)
        object.__setattr__(self, "mu", frozen(mu))
        object.__setattr__(self, "num_actions", int(A))
        object.__setattr__(self, "tail_mu", float(self.tail_mu) if k_tail else 0.0)

    @property
    def num_explicit(self) -> int:
        return len(self.rewards)

    @property
    def is_sparse(self) -> bool:
        return self.num_actions > self.num_explicit

    def mean(self, arm: int) -> float:
        if arm < self.num_explicit:
            return self.rewards[arm].mean()
        if arm >= self.num_actions:
            raise ValidationError(f"arm {arm} out of range")
        return self.tail.mean()

    @cached_property
    def means(self) -> np.ndarray:
        return frozen(np.array([d.mean() for d in self.rewards]))

    @cached_property
    def reward_table(self) -> RewardTable:
        return RewardTable([list(self.rewards)])

    def optimal_arm(self) -> int:
        best = int(argmax_lowest(self.means, tol=TIE_TOL))
        if self.is_sparse and self.tail.mean() > self.means[best] + TIE_TOL:
            return self.num_explicit
        return best

    def optimal_value(self) -> float:
        return self.mean(self.optimal_arm())


@dataclass(frozen=True, eq=False)
class CbInstance:
    """Contextual bandit: context law ``rho``, rewards on (S, A), behaviour ``mu`` on (S, A)."""

    rho: np.ndarray
    rewards: RewardTable
    mu: np.ndarray

    def __post_init__(self):
        rho = check_probability_table(self.rho, "context distribution")
        mu = np.asarray(self.mu, dtype=float)
        check_probability_table(mu.reshape(-1), "behaviour distribution")
        if mu.shape != self.rewards.shape or rho.shape != (mu.shape[0],):
            raise ValidationError("rho, rewards and mu shapes disagree")
        object.__setattr__(self, "rho", frozen(rho))
        object.__setattr__(self, "mu", frozen(mu))

    @property
    def num_states(self) -> int:
        return self.mu.shape[0]

    @property
    def num_actions(self) -> int:
        return self.mu.shape[1]

    @property
    def r(self) -> np.ndarray:
        return self.rewards.means


@dataclass(frozen=True)
class ValueTable:
    """State values ``V`` and action values ``Q`` of one policy (or the optimum)."""

    V: np.ndarray
    Q: np.ndarray


# ---------------------------------------------------------------- discounted evaluation


def _policy_matrices(mdp: DiscountedMdp, pi: np.ndarray):
    states = np.arange(mdp.num_states)
    return mdp.P[states, pi], mdp.r[states, pi]


def fixed_point_cap(gamma: float) -> int:
    return math.ceil(math.log(1e12 / (1.0 - gamma)) / (1.0 - gamma))


def _solve_values(mdp: DiscountedMdp, P_pi: np.ndarray, r_pi: np.ndarray) -> np.ndarray:
    S, A = mdp.num_states, mdp.num_actions
    g = mdp.gamma
    if S * A <= DENSE_SOLVE_LIMIT:
        return np.linalg.solve(np.eye(S) - g * P_pi, r_pi)
    tol = 1e-10 * mdp.v_max
    V = np.zeros(S)
    for _ in range(fixed_point_cap(g)):
        V_new = r_pi + g * P_pi @ V
        if np.max(np.abs(V_new - V)) <= tol:
            return V_new
        V = V_new
    return V


def policy_evaluation(mdp: DiscountedMdp, policy) -> ValueTable:
    """Exact ``V^pi`` and ``Q^pi`` of a deterministic policy."""
    pi = check_policy(policy, mdp.num_states, mdp.num_actions)
    P_pi, r_pi = _policy_matrices(mdp, pi)
    V = _solve_values(mdp, P_pi, r_pi)
    Q = mdp.r + mdp.gamma * (mdp.P @ V)
    return ValueTable(V=V, Q=Q)


def expected_value(mdp: DiscountedMdp, policy) -> float:
    """``J(pi) = rho . V^pi``."""
    return float(mdp.rho @ policy_evaluation(mdp, policy).V)


def _state_occupancy(mdp: DiscountedMdp, pi: np.ndarray) -> np.ndarray:
    P_pi, _ = _policy_matrices(mdp, pi)
    g = mdp.gamma
    S = mdp.num_states
    if S * mdp.num_actions <= DENSE_SOLVE_LIMIT:
        return np.linalg.solve((np.eye(S) - g * P_pi).T, (1.0 - g) * mdp.rho)
    d = (1.0 - g) * mdp.rho
    for _ in range(fixed_point_cap(g)):
        d_new = (1.0 - g) * mdp.rho + g * d @ P_pi
        if np.max(np.abs(d_new - d)) <= 1e-13:
            return d_new
        d = d_new
    return d


def _lift(mdp_shape: tuple[int, int], d_state: np.ndarray, pi: np.ndarray) -> np.ndarray:
    S, A = mdp_shape
    out = np.zeros((S, A))
    out[np.arange(S), pi] = d_state
    return out


def occupancy(mdp: DiscountedMdp, policy) -> np.ndarray:
    """Normalised discounted occupancy ``d^pi`` on (S, A)."""
    pi = check_policy(policy, mdp.num_states, mdp.num_actions)
    return _lift((mdp.num_states, mdp.num_actions), _state_occupancy(mdp, pi), pi)


def k_step_occupancy(mdp: DiscountedMdp, policy, k: int) -> np.ndarray:
    """Unnormalised ``nu_k = gamma^k rho^pi (P^pi)^k`` on (S, A); total mass ``gamma^k``."""
    k = check_count(k, "k")
    pi = check_policy(policy, mdp.num_states, mdp.num_actions)
    P_pi, _ = _policy_matrices(mdp, pi)
    d = np.array(mdp.rho, dtype=float)
    for _ in range(k):
        d = mdp.gamma * (d @ P_pi)
    return _lift((mdp.num_states, mdp.num_actions), d, pi)


def k_step_occupancies(mdp: DiscountedMdp, policy, k_max: int) -> np.ndarray:
    """Stack of ``nu_0 .. nu_{k_max}`` with shape (k_max+1, S, A)."""
    pi = check_policy(policy, mdp.num_states, mdp.num_actions)
    P_pi, _ = _policy_matrices(mdp, pi)
    S, A = mdp.num_states, mdp.num_actions
    out = np.zeros((k_max + 1, S, A))
    d = np.array(mdp.rho, dtype=float)
    for k in range(k_max + 1):
        out[k, np.arange(S), pi] = d
        d = mdp.gamma * (d @ P_pi)
    return out


def bellman_optimality_residual(mdp: DiscountedMdp, V: np.ndarray) -> float:
    return float(np.max(np.abs(np.max(mdp.r + mdp.gamma * (mdp.P @ V), axis=1) - V)))


def exact_optimal_policy(mdp: DiscountedMdp) -> tuple[np.ndarray, ValueTable]:
    """Optimal deterministic policy by policy iteration, ties to the lowest action."""
    tol = TIE_TOL * mdp.v_max
    states = np.arange(mdp.num_states)
    pi = argmax_lowest(mdp.r, axis=1, tol=tol)
    for _ in range(10 * mdp.num_states * mdp.num_actions + 100):
        vt = policy_evaluation(mdp, pi)
        greedy = argmax_lowest(vt.Q, axis=1, tol=tol)
        improve = vt.Q[states, greedy] > vt.Q[states, pi] + tol
        if not np.any(improve):
            break
        pi = np.where(improve, greedy, pi)
    vt = policy_evaluation(mdp, pi)
    final = argmax_lowest(vt.Q, axis=1, tol=tol)
    if np.any(final != pi):
        pi = final
        vt = policy_evaluation(mdp, pi)
    return pi.astype(np.int64), vt


def all_policies(num_states: int, num_actions: int):
    """Iterate every deterministic policy as an int array."""
    for combo in itertools.product(range(num_actions), repeat=num_states):
        yield np.array(combo, dtype=np.int64)


# ---------------------------------------------------------------- episodic evaluation


def _episodic_policy(emdp: EpisodicMdp, policy) -> np.ndarray:
    return check_policy(policy, emdp.num_states, emdp.num_actions)


def episodic_policy_evaluation(emdp: EpisodicMdp, policy) -> list[ValueTable]:
    """Backward recursion ``V_h = r_pi + P_{h,pi} V_{h+1}`` with ``V_{H+1} = 0``."""
    pi = _episodic_policy(emdp, policy)
    H = emdp.horizon
    out: list[ValueTable] = [None] * H  # type: ignore[list-item]
    V_next = None
    for h in range(H - 1, -1, -1):
        r_h = emdp.rewards[h].means
        Q = np.array(r_h, dtype=float)
        if h < H - 1:
            Q = Q + emdp.P[h] @ V_next
        pi_h = pi[emdp.level_slice(h)]
        V = Q[np.arange(len(pi_h)), pi_h]
        out[h] = ValueTable(V=V, Q=Q)
        V_next = V
    return out


def episodic_expected_value(emdp: EpisodicMdp, policy) -> float:
    return float(emdp.rho @ episodic_policy_evaluation(emdp, policy)[0].V)


def episodic_occupancy(emdp: EpisodicMdp, policy) -> np.ndarray:
    """``d^pi(s,a) = (1/H) sum_h P(s_h = s, a_h = a)`` on the global (S, A) grid."""
    pi = _episodic_policy(emdp, policy)
    H = emdp.horizon
    d = np.zeros((emdp.num_states, emdp.num_actions))
    dist = np.array(emdp.rho, dtype=float)
    for h in range(H):
        sl = emdp.level_slice(h)
        pi_h = pi[sl]
        idx = np.arange(sl.start, sl.stop)
        d[idx, pi_h] = dist / H
        if h < H - 1:
            dist = dist @ emdp.P[h][np.arange(len(pi_h)), pi_h]
    return d


def episodic_optimal_policy(emdp: EpisodicMdp) -> tuple[np.ndarray, list[ValueTable]]:
    """Backward-induction optimum with lowest-index tie breaking."""
    H = emdp.horizon
    pi = np.zeros(emdp.num_states, dtype=np.int64)
    tol = TIE_TOL * H
    V_next = None
    for h in range(H - 1, -1, -1):
        Q = np.array(emdp.rewards[h].means, dtype=float)
        if h < H - 1:
            Q = Q + emdp.P[h] @ V_next
        a = argmax_lowest(Q, axis=1, tol=tol)
        pi[emdp.level_slice(h)] = a
        V_next = Q[np.arange(len(a)), a]
    return pi, episodic_policy_evaluation(emdp, pi)


# ---------------------------------------------------------------- bandit / CB exact values


def cb_value(cb: CbInstance, policy) -> float:
    pi = check_policy(policy, cb.num_states, cb.num_actions)
    return float(cb.rho @ cb.r[np.arange(cb.num_states), pi])


def cb_optimal_policy(cb: CbInstance) -> np.ndarray:
    return argmax_lowest(cb.r, axis=1, tol=TIE_TOL).astype(np.int64)


def cb_occupancy(cb: CbInstance, policy) -> np.ndarray:
    pi = check_policy(policy, cb.num_states, cb.num_actions)
    return _lift((cb.num_states, cb.num_actions), np.asarray(cb.rho, dtype=float), pi)


def cb_as_mdp(cb: CbInstance) -> DiscountedMdp:
    """The gamma = 0 MDP with next state drawn from ``rho``."""
    S, A = cb.num_states, cb.num_actions
    P = np.broadcast_to(cb.rho, (S, A, S)).copy()
    return DiscountedMdp(P=P, rewards=cb.rewards, rho=cb.rho, gamma=0.0)


def bandit_as_mdp(bandit: BanditInstance) -> DiscountedMdp:
    if bandit.is_sparse:
        raise ValidationError("sparse bandits cannot be expanded to an MDP")
    A = bandit.num_actions
    return DiscountedMdp(P=np.ones((1, A, 1)), rewards=bandit.reward_table, rho=np.ones(1), gamma=0.0)


# ---------------------------------------------------------------- serialisation


def _fs(x) -> list[str]:
    return [repr(float(v)) for v in np.asarray(x, dtype=float).ravel()]


def _ff(xs, shape=None) -> np.ndarray:
    arr = np.array([float(v) for v in xs])
    return arr.reshape(shape) if shape is not None else arr


def _rewards_from(items, shape) -> RewardTable:
    dists = [RewardDistribution.from_dict(d) for d in items]
    grid = np.empty(len(dists), dtype=object)
    for i, d in enumerate(dists):
        grid[i] = d
    return RewardTable(grid.reshape(shape).tolist())


def env_to_dict(env) -> dict:
    """JSON-ready description; reals are stored as decimal strings (``repr``), which round-trip exactly."""
    if isinstance(env, DiscountedMdp):
        return {
            "type": "discounted_mdp",
            "S": env.num_states,
            "A": env.num_actions,
            "gamma": repr(env.gamma),
            "P": _fs(env.P),
            "rewards": env.rewards.to_list(),
            "rho": _fs(env.rho),
        }
    if isinstance(env, EpisodicMdp):
        return {
            "type": "episodic_mdp",
            "A": env.num_actions,
            "H": env.horizon,
            "level_sizes": list(env.level_sizes),
            "P": [_fs(Ph) for Ph in env.P],
            "rewards": [R.to_list() for R in env.rewards],
            "rho": _fs(env.rho),
        }
    if isinstance(env, BanditInstance):
        out = {
            "type": "bandit",
            "A": env.num_actions,
            "rewards": [d.to_dict() for d in env.rewards],
            "mu": _fs(env.mu),
        }
        if env.is_sparse:
            out["tail"] = env.tail.to_dict()
            out["tail_mu"] = repr(env.tail_mu)
        return out
    if isinstance(env, CbInstance):
        return {
            "type": "cb",
            "S": env.num_states,
            "A": env.num_actions,
            "rho": _fs(env.rho),
            "rewards": env.rewards.to_list(),
            "mu": _fs(env.mu),
        }
    raise ValidationError(f"cannot serialise {type(env).__name__}")


def env_from_dict(d: dict):
    kind = d.get("type")
    if kind == "discounted_mdp":
        S, A = int(d["S"]), int(d["A"])
        return DiscountedMdp(
            P=_ff(d["P"], (S, A, S)),
            rewards=_rewards_from(d["rewards"], (S, A)),
            rho=_ff(d["rho"]),
            gamma=float(d["gamma"]),
        )
    if kind == "episodic_mdp":
        sizes = [int(n) for n in d["level_sizes"]]
        A = int(d["A"])
        P = tuple(_ff(p, (sizes[h], A, sizes[h + 1])) for h, p in enumerate(d["P"]))
        R = tuple(_rewards_from(r, (sizes[h], A)) for h, r in enumerate(d["rewards"]))
        return EpisodicMdp(level_sizes=tuple(sizes), P=P, rewards=R, rho=_ff(d["rho"]))
    if kind == "bandit":
        tail = RewardDistribution.from_dict(d["tail"]) if "tail" in d else None
        return BanditInstance(
            rewards=tuple(RewardDistribution.from_dict(x) for x in d["rewards"]),
            mu=_ff(d["mu"]),
            num_actions=int(d["A"]),
            tail=tail,
            tail_mu=float(d.get("tail_mu", "0.0")),
        )
    if kind == "cb":
        S, A = int(d["S"]), int(d["A"])
        return CbInstance(rho=_ff(d["rho"]), rewards=_rewards_from(d["rewards"], (S, A)), mu=_ff(d["mu"], (S, A)))
    raise ValidationError(f"unknown environment type {kind!r}")
