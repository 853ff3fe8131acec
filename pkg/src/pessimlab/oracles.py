"""Independent ground truth: exact two-arm enumeration, exhaustive policy search,
Monte Carlo rollouts, binomial inverse moments and clean-event checks."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy.special import gammaln
from scipy.stats import binom

from .algorithms import ViTrace, mab_choice
from .env_core import (
    BanditInstance,
    DiscountedMdp,
    EpisodicMdp,
    RewardDistribution,
    all_policies,
    policy_evaluation,
)
from .rng import STREAM_MC, generator
from .validation import ValidationError, check_count

EXACT_CELL_BUDGET = 60_000_000
EXHAUSTIVE_LIMIT = 4096


# ---------------------------------------------------------------- exact two-arm oracle


def _log_binom_pmf(k: np.ndarray, n, p: float) -> np.ndarray:
    """``log Bin(k; n, p)`` via log-gamma; exact zeros at p in {0, 1}."""
    k = np.asarray(k, dtype=float)
    n = np.asarray(n, dtype=float)
    out = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = out + np.where(k > 0, k * np.log(p) if p > 0 else -np.inf, 0.0)
        out = out + np.where(n - k > 0, (n - k) * np.log1p(-p) if p < 1 else -np.inf, 0.0)
    return out


def _arm_law(dist: RewardDistribution):
    if dist.kind == "deterministic":
        return "det", dist.values[0]
    if dist.kind == "bernoulli":
        return "bern", dist.probs[1]
    raise ValidationError(f"exact oracle supports deterministic/Bernoulli arms, got {dist.kind}")


def _sum_grid(law, n: int):
    """Possible reward sums and their log-probabilities for ``n`` draws of one arm."""
    kind, x = law
    if kind == "det":
        return np.array([x * n]), np.zeros(1)
    k = np.arange(n + 1)
    return k.astype(float), _log_binom_pmf(k, n, x)


def outcome_table(instance: BanditInstance, N: int):
    """Yield ``(n, t, prob)`` blocks enumerating every reachable (counts, sums) outcome."""
    if instance.is_sparse or instance.num_actions > 2:
        raise ValidationError("exact oracle needs a dense instance with at most 2 arms")
    N = check_count(N, "N", 1)
    laws = [_arm_law(instance.rewards[a]) for a in range(instance.num_actions)]
    if len(laws) == 1:
        t, lp = _sum_grid(laws[0], N)
        yield np.full((t.size, 1), N), t[:, None], np.exp(lp)
        return
    size = [(lambda n: 1) if law[0] == "det" else (lambda n: n + 1) for law in laws]
    cells = sum(size[0](n0) * size[1](N - n0) for n0 in range(N + 1))
    if cells > EXACT_CELL_BUDGET:
        raise ValidationError(f"exact enumeration too large at N = {N}")
    mu0 = float(instance.mu[0])
    n1 = np.arange(N + 1)
    lp_n = _log_binom_pmf(n1, N, mu0)
    for n0 in range(N + 1):
        if not np.isfinite(lp_n[n0]):
            continue
        t0, lp0 = _sum_grid(laws[0], n0)
        t1, lp1 = _sum_grid(laws[1], N - n0)
        T0, T1 = np.meshgrid(t0, t1, indexing="ij")
        lp = lp_n[n0] + lp0[:, None] + lp1[None, :]
        n = np.broadcast_to(np.array([n0, N - n0]), T0.shape + (2,))
        yield n.reshape(-1, 2), np.stack([T0, T1], axis=-1).reshape(-1, 2), np.exp(lp).ravel()


def exact_two_arm_subopt(instance: BanditInstance, rule: str | Callable, N: int, **rule_kw) -> float:
    """Exact ``E[r(a*) - r(a_hat)]`` over all datasets of size N.

    ``rule`` is a bandit rule name understood by ``mab_choice`` (``lcb_mab``,
    ``empirical_best_arm``, ``most_played_arm``) or a callable mapping
    batched ``(counts, sums)`` to chosen arms. Cost is O(N^3) with two
    Bernoulli arms and O(N^2) when an arm is deterministic.
    """
    means = instance.means
    best = float(means.max())
    total = 0.0
    mass = 0.0
    for n, t, prob in outcome_table(instance, N):
        if callable(rule):
            choice = np.asarray(rule(n, t))
        else:
            choice = mab_choice(n, t, rule, **rule_kw)
        total += float(np.dot(prob, best - means[choice]))
        mass += float(prob.sum())
    if abs(mass - 1.0) > 1e-9:
        raise ArithmeticError(f"outcome probabilities sum to {mass}")
    return total


def outcome_mass(instance: BanditInstance, N: int) -> float:
    return float(sum(p.sum() for _, _, p in outcome_table(instance, N)))


# ---------------------------------------------------------------- exhaustive search


def exhaustive_optimal_policy(mdp: DiscountedMdp, tol: float | None = None) -> np.ndarray:
    """Lexicographically first deterministic policy that is pointwise optimal."""
    S, A = mdp.num_states, mdp.num_actions
    if A**S > EXHAUSTIVE_LIMIT:
        raise ValidationError(f"|A|^|S| = {A**S} exceeds {EXHAUSTIVE_LIMIT}")
    tol = 1e-12 * mdp.v_max if tol is None else tol
    pols = list(all_policies(S, A))
    values = np.array([policy_evaluation(mdp, pi).V for pi in pols])
    top = values.max(axis=0)
    for pi, v in zip(pols, values):
        if np.all(v >= top - tol):
            return np.asarray(pi, dtype=np.int64)
    raise ArithmeticError("no pointwise-optimal policy found")  # unreachable for finite MDPs


# ---------------------------------------------------------------- Monte Carlo rollouts


def _step(P_rows_cdf: np.ndarray, u: np.ndarray) -> np.ndarray:
    k = (u[:, None] >= P_rows_cdf).sum(axis=1)
    return np.minimum(k, P_rows_cdf.shape[-1] - 1)


def mc_policy_value(env, policy, reps: int, horizon_cap: int | None = None, seed: int = 0) -> dict:
    """Rollout estimate of ``J(policy)`` with its standard error.

    Discounted rollouts are truncated at ``horizon_cap`` steps; the returned
    ``bias_bound`` is ``gamma^cap / (1 - gamma)``.
    """
    reps = check_count(reps, "reps", 1)
    rng = generator(seed, STREAM_MC)
    pi = np.asarray(policy, dtype=np.int64)
    if isinstance(env, DiscountedMdp):
        cap = int(math.ceil(math.log(1e-6) / math.log(env.gamma))) if horizon_cap is None else check_count(horizon_cap, "horizon_cap", 1)
        cdf = np.cumsum(env.P, axis=-1)
        s = _step(np.cumsum(env.rho)[None, :].repeat(reps, 0), rng.random(reps))
        ret = np.zeros(reps)
        disc = 1.0
        for _ in range(cap):
            a = pi[s]
            u = rng.random((reps, 2))
            ret += disc * env.rewards.sample(u[:, 0], (s, a))
            s = _step(cdf[s, a], u[:, 1])
            disc *= env.gamma
        bias = env.gamma**cap / (1.0 - env.gamma)
    elif isinstance(env, EpisodicMdp):
        s = _step(np.cumsum(env.rho)[None, :].repeat(reps, 0), rng.random(reps))
        ret = np.zeros(reps)
        for h in range(env.horizon):
            off = env.offsets[h]
            a = pi[off + s]
            u = rng.random((reps, 2))
            ret += env.rewards[h].sample(u[:, 0], (s, a))
            if h + 1 < env.horizon:
                s = _step(np.cumsum(env.P[h], axis=-1)[s, a], u[:, 1])
        bias = 0.0
    else:
        raise ValidationError("mc_policy_value needs a DiscountedMdp or EpisodicMdp")
    se = float(ret.std(ddof=1) / math.sqrt(reps)) if reps > 1 else math.inf
    return {"mean": float(ret.mean()), "stderr": se, "bias_bound": float(bias)}


# ---------------------------------------------------------------- binomial inverse moments


def inverse_moment_constant(k: float) -> float:
    """``c_k`` in the bound ``E[1/(n v 1)^k] <= c_k/(Np)^k``."""
    k = float(k)
    return 1 + k * 2 ** (k + 1) + k ** (k + 1) + k * (16 * (k + 1) / math.e) ** (k + 1)


PROOF_C_HALF = 16.0


def _moment_bound(N: int, p: float, k: float) -> float:
    c = PROOF_C_HALF if k == 0.5 else inverse_moment_constant(k)
    return c / (N * p) ** k


def inverse_moment_exact(N: int, p: float, k: float) -> float:
    """``E[1/(n v 1)^k]`` for ``n ~ Bin(N, p)`` by direct summation."""
    N = check_count(N, "N", 1)
    n = np.arange(N + 1)
    w = binom.pmf(n, N, p)
    return float(np.dot(w, np.maximum(n, 1) ** (-float(k))))


def inverse_moment_check(N: int, p: float, k: float, reps: int, seed: int = 0) -> dict:
    """Monte Carlo estimate of ``E[1/(n v 1)^k]`` next to its bound."""
    if k not in (0.5, 1, 2):
        raise ValidationError(f"k must be one of 1/2, 1, 2, got {k}")
    if not N * p > 0:
        raise ValidationError("need N p > 0")
    reps = check_count(reps, "reps", 1)
    n = generator(seed, STREAM_MC).binomial(N, p, size=reps)
    x = np.maximum(n, 1) ** (-float(k))
    se = float(x.std(ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0
    return {"estimate": float(x.mean()), "stderr": se, "bound": _moment_bound(N, p, k)}


# ---------------------------------------------------------------- clean events


def clean_event_indicator(kind: str, true_model, run_artifacts, slack: float = 0.0) -> bool:
    """Whether every penalty covers its estimation error.

    ``mab``: ``true_model`` is a BanditInstance, artifacts ``(r_hat, b)``.
    ``cb``: a CbInstance and ``(r_hat, b)``. ``mdp``: a DiscountedMdp and a
    ``ViTrace``; the check runs over every iteration ``t >= 1``.
    """
    if kind in ("mab", "cb"):
        if run_artifacts is None or len(run_artifacts) < 2:
            raise ValidationError("need (r_hat, b) artifacts")
        r_hat, b = np.asarray(run_artifacts[0]), np.asarray(run_artifacts[1])
        r = true_model.means if kind == "mab" else true_model.r
        return bool(np.all(np.abs(r - r_hat) <= b + slack))
    if kind == "mdp":
        if not isinstance(run_artifacts, ViTrace):
            raise ValidationError("mdp clean event needs a ViTrace")
        tr = run_artifacts
        r, P, g = true_model.r, true_model.P, true_model.gamma
        for t in range(1, tr.T + 1):
            err = r - tr.r_hat[t] + g * ((P - tr.P_hat[t]) @ tr.V[t - 1])
            if np.any(np.abs(err) > tr.b[t] + slack):
                return False
        return True
    raise ValidationError(f"unknown clean-event kind {kind!r}")
