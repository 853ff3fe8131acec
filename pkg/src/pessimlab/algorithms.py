"""Pessimistic offline learners and their non-pessimistic baselines.

Every learner is a pure function of the data (a ``Dataset`` or, for bandit
and contextual-bandit learners, the equivalent sufficient statistics) plus
public parameters. Argmax ties always go to the lowest action index.

Penalty conventions:

* MAB-LCB uses ``b = sqrt(L / N(a))`` with ``L = log(2A/delta) / 2`` unless
  ``override_L`` is given (this is also the parametrisation used for the
  non-adaptivity experiments).
* CB-LCB uses ``b = sqrt(L / N(s,a))`` with ``L = 2000 log(2SA/delta)``.
* Unseen pairs score ``0 - 1``. With ``clip_penalty`` (the default) a seen
  pair's penalty is capped at 1, the range of the reward, so a seen pair is
  never penalised harder than an unseen one; the cap never breaks
  ``|r - r_hat| <= b``.
* ``delta`` defaults to ``1/N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .data_gen import BanditStats, Dataset, bandit_stats, counts, fold_labels, pair_stats
from .env_core import argmax_lowest
from .rng import mix_seed
from .validation import InsufficientDataError, ValidationError, check_count, check_delta, check_discount

CB_CONSTANT = 2000.0


class MdpShape(NamedTuple):
    num_states: int
    num_actions: int
    gamma: float


class EpisodicShape(NamedTuple):
    level_sizes: tuple[int, ...]
    num_actions: int


@dataclass(frozen=True)
class PenaltyParams:
    """Confidence level and (optional) explicit penalty scale."""

    delta: float | None = None
    override_L: float | None = None
    clip_penalty: bool = True

    def __post_init__(self):
        if self.delta is not None:
            check_delta(self.delta)
        if self.override_L is not None and not (self.override_L >= 0 and math.isfinite(self.override_L)):
            raise ValidationError(f"override_L must be a finite nonnegative number, got {self.override_L}")

    def resolve_delta(self, N: int) -> float:
        return self.delta if self.delta is not None else 1.0 / max(N, 1)


def _delta(delta, N):
    if delta is None:
        return 1.0 / max(int(N), 1)
    return check_delta(delta)


def _penalty(n: np.ndarray, L, clip: bool) -> np.ndarray:
    """``sqrt(L/n)`` on seen cells, 1 on unseen cells, optionally capped at 1."""
    n = np.asarray(n)
    b = np.sqrt(np.divide(L, n, out=np.ones(n.shape, dtype=float), where=n > 0))
    b = np.where(n > 0, b, 1.0)
    return np.minimum(b, 1.0) if clip else b


def _means(n, t):
    n = np.asarray(n)
    return np.divide(t, n, out=np.zeros(np.shape(t), dtype=float), where=n > 0)


# ---------------------------------------------------------------- vectorised bandit scores


def mab_scores(n, t, rule: str, num_actions: int | None = None, delta=None, override_L=None, clip_penalty: bool = True):
    """Index of every arm under ``rule`` for counts ``n`` and reward sums ``t`` (last axis = arms).

    Works on batches: leading axes are independent datasets. ``delta = None``
    means ``1/N`` per dataset.
    """
    n = np.asarray(n)
    t = np.asarray(t, dtype=float)
    if rule == "most_played_arm":
        return n.astype(float)
    rhat = _means(n, t)
    if rule == "empirical_best_arm":
        return rhat
    if rule != "lcb_mab":
        raise ValidationError(f"unknown bandit rule {rule!r}")
    A = n.shape[-1] if num_actions is None else num_actions
    if override_L is not None:
        L = np.float64(override_L)
    else:
        N = n.sum(axis=-1, keepdims=True)
        d = 1.0 / np.maximum(N, 1) if delta is None else check_delta(delta)
        L = np.log(2.0 * A / d) / 2.0
    b = _penalty(n, L, clip_penalty)
    return np.where(n > 0, rhat - b, -1.0)


def mab_choice(n, t, rule: str, **kw) -> np.ndarray:
    """Chosen arm per dataset in a batch (dense arms only)."""
    return np.argmax(mab_scores(n, t, rule, **kw), axis=-1)


def _pick(stats: BanditStats, scores: np.ndarray, unseen_score: float) -> int:
    """Lowest-index argmax over all arms when only some arms are listed."""
    listed = stats.arms
    best_listed = int(np.argmax(scores)) if scores.size else -1
    if listed.size == stats.num_actions:
        return int(listed[best_listed])
    # smallest arm index not in the listing
    present = np.zeros(listed.size + 1, dtype=bool)
    small = listed[listed <= listed.size]
    present[small] = True
    first_unlisted = int(np.argmin(present))
    if best_listed < 0:
        return first_unlisted
    top = scores[best_listed]
    if unseen_score > top:
        return first_unlisted
    tied = listed[scores == top].min()
    if unseen_score == top:
        return int(min(tied, first_unlisted))
    return int(tied)


def _bandit_rule(data, A: int, rule: str, **kw) -> int:
    A = check_count(A, "A", 1)
    st = bandit_stats(data, A)
    if st.N == 0 and rule == "lcb_mab":
        raise InsufficientDataError("empty dataset")
    scores = mab_scores(st.counts, st.sums, rule, num_actions=A, **kw) if st.arms.size else np.zeros(0)
    # unlisted arms were never drawn: count 0, empirical mean 0
    return _pick(st, scores, -1.0 if rule == "lcb_mab" else 0.0)


def lcb_mab(data, A: int, delta: float | None = None, override_L: float | None = None, clip_penalty: bool = True) -> int:
    """Pessimistic arm choice ``argmax r_hat(a) - b(a)``."""
    return _bandit_rule(data, A, "lcb_mab", delta=delta, override_L=override_L, clip_penalty=clip_penalty)


def empirical_best_arm(data, A: int) -> int:
    """Arm with the highest empirical mean (unseen arms score 0)."""
    return _bandit_rule(data, A, "empirical_best_arm")


def most_played_arm(data, A: int) -> int:
    """Arm drawn most often in the data."""
    return _bandit_rule(data, A, "most_played_arm")


def mab_terms(data, A: int, delta=None, override_L=None, clip_penalty: bool = True):
    """Empirical means and penalties (dense arrays) used by ``lcb_mab``."""
    st = bandit_stats(data, A)
    n, t = st.dense()
    if override_L is None:
        override_L = math.log(2.0 * A / _delta(delta, st.N)) / 2.0
    return _means(n, t), _penalty(n, override_L, clip_penalty)


# ---------------------------------------------------------------- contextual bandits


def cb_terms(data, S: int, A: int, delta=None, override_L=None, clip_penalty: bool = True):
    """Empirical means ``r_hat`` and penalties ``b`` of CB-LCB on the (S, A) grid."""
    ps = pair_stats(data, S, A)
    L = override_L if override_L is not None else CB_CONSTANT * math.log(2.0 * S * A / _delta(delta, ps.N))
    return ps.means, _penalty(ps.counts, L, clip_penalty), ps.counts


def lcb_cb(data, S: int, A: int, delta: float | None = None, override_L: float | None = None, clip_penalty: bool = True) -> np.ndarray:
    """Per-context pessimistic policy."""
    rhat, b, n = cb_terms(data, S, A, delta, override_L, clip_penalty)
    return np.argmax(np.where(n > 0, rhat - b, -1.0), axis=1).astype(np.int64)


def behavior_cloning(data, S: int, A: int) -> np.ndarray:
    """Most frequent action in every observed state; action 0 elsewhere."""
    n = counts(data, S, A) if isinstance(data, Dataset) else pair_stats(data, S, A).counts
    return np.argmax(n, axis=1).astype(np.int64)


def most_played_cb(data, S: int, A: int) -> np.ndarray:
    """Per-context most played action (same map as behaviour cloning)."""
    return behavior_cloning(data, S, A)


def empirical_best_cb(data, S: int, A: int) -> np.ndarray:
    return np.argmax(pair_stats(data, S, A).means, axis=1).astype(np.int64)


# ---------------------------------------------------------------- VI-LCB


@dataclass(frozen=True, eq=False)
class ViTrace:
    """Per-iteration internals of VI-LCB; index 0 holds the initialisation."""

    T: int
    m: int
    L: float
    fold: np.ndarray
    Q: np.ndarray
    V: np.ndarray
    V_mid: np.ndarray
    pi: np.ndarray
    b: np.ndarray
    counts: np.ndarray
    r_hat: np.ndarray
    P_hat: np.ndarray

    @property
    def iterations(self) -> int:
        return self.T + 1


def vi_iterations(N: int, gamma: float) -> int:
    """``T = ceil(ln N / (1 - gamma))``."""
    return int(math.ceil(math.log(N) / (1.0 - gamma)))


def _fold_seed(data: Dataset, seed) -> int:
    if seed is not None:
        return int(seed)
    return mix_seed(int(data.provenance.get("seed", 0) or 0), 0xF01D)


def vi_lcb(
    data: Dataset,
    shape: MdpShape,
    delta: float | None = None,
    want_trace: bool = False,
    override_L: float | None = None,
    monotone: bool = True,
    fold_seed: int | None = None,
):
    """Offline value iteration with LCB and data splitting.

    Returns ``(policy, trace)``; ``trace`` is ``None`` unless requested.
    Unseen pairs use a uniform next-state row.
    """
    S, A, gamma = int(shape[0]), int(shape[1]), check_discount(shape[2])
    N = len(data)
    if N < 1:
        raise InsufficientDataError("empty dataset")
    T = vi_iterations(N, gamma)
    if N < T + 1:
        raise InsufficientDataError(f"VI-LCB needs N >= T+1 = {T + 1}, got N = {N}")
    v_max = 1.0 / (1.0 - gamma)
    if override_L is None:
        L = CB_CONSTANT * math.log(2.0 * (T + 1) * S * A / _delta(delta, N))
    else:
        L = float(override_L)
    counts(data, S, A)  # index validation
    if np.any(data.s_next < 0):
        raise ValidationError("VI-LCB needs a next state on every record")

    labels = fold_labels(N, T, _fold_seed(data, fold_seed))
    keep = labels >= 0
    f, s, a, sn, r = labels[keep], data.s[keep], data.a[keep], data.s_next[keep], data.r[keep]
    cell = (f * S + s) * A + a
    m_all = np.bincount(cell, minlength=(T + 1) * S * A).reshape(T + 1, S, A)
    r_sum = np.bincount(cell, weights=r, minlength=(T + 1) * S * A).reshape(T + 1, S, A)
    tc = np.bincount(cell * S + sn, minlength=(T + 1) * S * A * S).reshape(T + 1, S, A, S)
    seen = m_all > 0
    r_hat = np.divide(r_sum, m_all, out=np.zeros(r_sum.shape), where=seen)
    P_hat = np.where(seen[..., None], tc / np.maximum(m_all, 1)[..., None], 1.0 / S)
    b = v_max * np.sqrt(L / np.maximum(m_all, 1))
    b[0] = 0.0

    V = np.zeros(S)
    pi = np.argmax(m_all[0], axis=1).astype(np.int64)
    if want_trace:
        Qs = np.zeros((T + 1, S, A))
        Vs = np.zeros((T + 1, S))
        Vm = np.zeros((T + 1, S))
        pis = np.zeros((T + 1, S), dtype=np.int64)
        pis[0] = pi
    for t in range(1, T + 1):
        Q = r_hat[t] - b[t] + gamma * (P_hat[t] @ V)
        pi_mid = np.argmax(Q, axis=1)
        V_mid = Q[np.arange(S), pi_mid]
        if monotone:
            up = V_mid > V
            V = np.where(up, V_mid, V)
            pi = np.where(up, pi_mid, pi)
        else:
            V, pi = V_mid, pi_mid
        if want_trace:
            Qs[t], Vs[t], Vm[t], pis[t] = Q, V, V_mid, pi
    trace = None
    if want_trace:
        trace = ViTrace(
            T=T, m=N // (T + 1), L=L, fold=labels, Q=Qs, V=Vs, V_mid=Vm, pi=pis,
            b=b, counts=m_all, r_hat=r_hat, P_hat=P_hat,
        )
    return pi.astype(np.int64), trace


def empirical_vi(data: Dataset, shape: MdpShape, want_trace: bool = False, fold_seed: int | None = None):
    """The VI-LCB pipeline with zero penalties and no monotone update."""
    return vi_lcb(data, shape, want_trace=want_trace, override_L=0.0, monotone=False, fold_seed=fold_seed)


# ---------------------------------------------------------------- episodic VI-LCB


def episodic_vi_lcb(
    data: Dataset,
    shape: EpisodicShape,
    delta: float | None = None,
    override_L: float | None = None,
    known_rewards: bool = False,
    return_values: bool = False,
):
    """Backward induction with penalties ``H sqrt(L / N(s,a))`` over all H levels.

    With ``known_rewards`` the last level uses ``Q_H = r`` on seen pairs and 0
    on unseen pairs, without penalty (the deterministic-reward variant).
    """
    sizes = tuple(int(x) for x in shape[0])
    A = int(shape[1])
    H = len(sizes)
    S = sum(sizes)
    N = len(data)
    off = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    n = counts(data, S, A)
    rsum = np.bincount(data.s * A + data.a, weights=data.r, minlength=S * A).reshape(S, A)
    rhat = np.divide(rsum, n, out=np.zeros((S, A)), where=n > 0)
    L = override_L if override_L is not None else CB_CONSTANT * math.log(2.0 * S * A / _delta(delta, N))
    b = np.where(n > 0, H * np.sqrt(L / np.maximum(n, 1)), H * math.sqrt(L))
    keep = data.s_next >= 0
    tc = np.bincount((data.s[keep] * A + data.a[keep]) * S + data.s_next[keep], minlength=S * A * S).reshape(S, A, S)

    pi = np.zeros(S, dtype=np.int64)
    values: list[np.ndarray] = [None] * H  # type: ignore[list-item]
    qs: list[np.ndarray] = [None] * H  # type: ignore[list-item]
    V_next = None
    for h in range(H - 1, -1, -1):
        lo, hi = off[h], off[h + 1]
        nh = n[lo:hi]
        if known_rewards and h == H - 1:
            Q = np.where(nh > 0, rhat[lo:hi], 0.0)
        else:
            Q = rhat[lo:hi] - b[lo:hi]
            if h < H - 1:
                nxt = tc[lo:hi, :, off[h + 1] : off[h + 2]]
                P = np.where(nh[..., None] > 0, nxt / np.maximum(nh, 1)[..., None], 1.0 / sizes[h + 1])
                Q = Q + P @ V_next
        a = np.argmax(Q, axis=1)
        pi[lo:hi] = a
        V_next = Q[np.arange(hi - lo), a]
        values[h], qs[h] = V_next, Q
    if return_values:
        return pi, values, qs
    return pi


# ---------------------------------------------------------------- misc


def policy_to_json(policy) -> list[int]:
    return [int(x) for x in np.asarray(policy).ravel()]


def policy_from_json(items) -> np.ndarray:
    return np.asarray([int(x) for x in items], dtype=np.int64)


def greedy(values: np.ndarray) -> np.ndarray:
    return argmax_lowest(values, axis=-1)
