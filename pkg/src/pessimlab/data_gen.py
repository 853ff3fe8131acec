"""Offline datasets: sampling under a behaviour distribution, tallies, folds, coverage."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .env_core import BanditInstance, CbInstance, DiscountedMdp, EpisodicMdp
from .rng import STREAM_DATA, STREAM_FOLDS, generator
from .validation import (
    InsufficientDataError,
    MalformedDatasetError,
    ValidationError,
    check_count,
    check_probability_table,
    frozen,
)

NO_STATE = -1
CSV_HEADER = ["s", "a", "r", "s_next"]


@dataclass(frozen=True, eq=False)
class Dataset:
    """Ordered i.i.d. transitions. ``s_next`` is -1 where it is absent (bandit, CB, last level)."""

    s: np.ndarray
    a: np.ndarray
    r: np.ndarray
    s_next: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        s = np.asarray(self.s, dtype=np.int64)
        n = s.shape[0]
        a = np.asarray(self.a, dtype=np.int64)
        r = np.asarray(self.r, dtype=float)
        sn = np.asarray(self.s_next, dtype=np.int64)
        if not (a.shape == r.shape == sn.shape == (n,)) or s.ndim != 1:
            raise MalformedDatasetError("dataset columns must be 1-d and of equal length")
        for name, arr in (("s", s), ("a", a), ("r", r), ("s_next", sn)):
            object.__setattr__(self, name, frozen(arr))

    def __len__(self) -> int:
        return int(self.s.shape[0])

    @property
    def N(self) -> int:
        return len(self)

    def subset(self, idx: np.ndarray, **extra) -> "Dataset":
        prov = dict(self.provenance)
        prov.update(extra)
        return Dataset(self.s[idx], self.a[idx], self.r[idx], self.s_next[idx], prov)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Dataset)
            and np.array_equal(self.s, other.s)
            and np.array_equal(self.a, other.a)
            and np.array_equal(self.r, other.r)
            and np.array_equal(self.s_next, other.s_next)
        )

    __hash__ = None

    # csv + json sidecar
    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for s, a, r, sn in zip(self.s.tolist(), self.a.tolist(), self.r.tolist(), self.s_next.tolist()):
            w.writerow([s, a, repr(r), "" if sn < 0 else sn])
        return buf.getvalue()

    def sidecar(self) -> str:
        prov = {k: self.provenance.get(k) for k in ("instance_id", "seed", "N")}
        prov["N"] = len(self)
        return json.dumps(prov, sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_csv(cls, text: str, sidecar: str | None = None) -> "Dataset":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != CSV_HEADER:
            raise MalformedDatasetError(f"dataset CSV must start with header {','.join(CSV_HEADER)}")
        body = rows[1:]
        try:
            s = [int(x[0]) for x in body]
            a = [int(x[1]) for x in body]
            r = [float(x[2]) for x in body]
            sn = [int(x[3]) if x[3] != "" else NO_STATE for x in body]
        except (ValueError, IndexError) as exc:
            raise MalformedDatasetError(f"bad dataset row: {exc}") from exc
        prov = json.loads(sidecar) if sidecar else {}
        if prov.get("N") is not None and int(prov["N"]) != len(s):
            raise MalformedDatasetError("sidecar N does not match the number of rows")
        return cls(np.array(s, dtype=np.int64), np.array(a, dtype=np.int64), np.array(r), np.array(sn, dtype=np.int64), prov)


@dataclass(frozen=True, eq=False)
class PairStats:
    """Sufficient statistics of a CB (or bandit, S = 1) dataset."""

    counts: np.ndarray
    sums: np.ndarray

    @property
    def N(self) -> int:
        return int(self.counts.sum())

    @property
    def means(self) -> np.ndarray:
        return np.divide(self.sums, self.counts, out=np.zeros(self.sums.shape), where=self.counts > 0)


@dataclass(frozen=True, eq=False)
class BanditStats:
    """Per-arm tallies, possibly sparse: arms not listed in ``arms`` were never drawn."""

    num_actions: int
    arms: np.ndarray
    counts: np.ndarray
    sums: np.ndarray

    @property
    def N(self) -> int:
        return int(self.counts.sum())

    @property
    def means(self) -> np.ndarray:
        return np.divide(self.sums, self.counts, out=np.zeros(self.sums.shape), where=self.counts > 0)

    def dense(self) -> tuple[np.ndarray, np.ndarray]:
        n = np.zeros(self.num_actions, dtype=np.int64)
        t = np.zeros(self.num_actions)
        n[self.arms] = self.counts
        t[self.arms] = self.sums
        return n, t


# ---------------------------------------------------------------- sampling


def _inverse_cdf(cdf: np.ndarray, u: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, cdf.shape[0] - 1)


def _row_inverse_cdf(cdf_rows: np.ndarray, u: np.ndarray) -> np.ndarray:
    k = (u[:, None] >= cdf_rows).sum(axis=1)
    return np.minimum(k, cdf_rows.shape[1] - 1)


def _check_mu(mu, shape) -> np.ndarray:
    if mu is None:
        raise ValidationError("a behaviour distribution mu is required for MDP sampling")
    mu = np.asarray(mu, dtype=float)
    if mu.shape != shape:
        raise ValidationError(f"mu must have shape {shape}, got {mu.shape}")
    check_probability_table(mu.reshape(-1), "behaviour distribution")
    return mu


def sample_dataset(env, N: int, seed: int, mu=None, instance_id: str = "") -> Dataset:
    """Draw ``N`` i.i.d. records: (s,a) ~ mu, r ~ R(s,a), s' ~ P(.|s,a).

    Bandits and contextual bandits carry their own ``mu``; MDPs need it passed.
    Three uniforms are consumed per record, in record order, from the
    ``(seed, data)`` Philox stream.
    """
    N = check_count(N, "N", 1)
    rng = generator(seed, STREAM_DATA)
    u = rng.random((N, 3))
    prov = {"instance_id": instance_id, "seed": int(seed), "N": N}
    none = np.full(N, NO_STATE, dtype=np.int64)
    zeros = np.zeros(N, dtype=np.int64)

    if isinstance(env, BanditInstance):
        k = env.num_explicit
        weights = np.append(env.mu, env.tail_mu * (env.num_actions - k)) if env.is_sparse else env.mu
        arm = _inverse_cdf(np.cumsum(weights), u[:, 0])
        r = np.empty(N)
        explicit = arm < k
        r[explicit] = env.reward_table.sample(u[explicit, 1], (zeros[explicit], arm[explicit]))
        if env.is_sparse:
            tail = ~explicit
            width = env.num_actions - k
            arm[tail] = k + np.minimum((u[tail, 2] * width).astype(np.int64), width - 1)
            cdf = np.cumsum(env.tail.probs)
            r[tail] = np.asarray(env.tail.values)[_inverse_cdf(cdf, u[tail, 1])]
        return Dataset(zeros, arm, r, none, prov)

    if isinstance(env, CbInstance):
        S, A = env.mu.shape
        pair = _inverse_cdf(np.cumsum(env.mu.reshape(-1)), u[:, 0])
        s, a = np.divmod(pair, A)
        return Dataset(s, a, env.rewards.sample(u[:, 1], (s, a)), none, prov)

    if isinstance(env, DiscountedMdp):
        S, A = env.num_states, env.num_actions
        mu = _check_mu(mu, (S, A))
        pair = _inverse_cdf(np.cumsum(mu.reshape(-1)), u[:, 0])
        s, a = np.divmod(pair, A)
        r = env.rewards.sample(u[:, 1], (s, a))
        cdf = np.cumsum(env.P, axis=-1)[s, a]
        return Dataset(s, a, r, _row_inverse_cdf(cdf, u[:, 2]), prov)

    if isinstance(env, EpisodicMdp):
        S, A = env.num_states, env.num_actions
        mu = _check_mu(mu, (S, A))
        pair = _inverse_cdf(np.cumsum(mu.reshape(-1)), u[:, 0])
        s, a = np.divmod(pair, A)
        r = np.empty(N)
        s_next = none.copy()
        level = env.level_of[s]
        for h in range(env.horizon):
            sel = np.flatnonzero(level == h)
            if sel.size == 0:
                continue
            local = s[sel] - env.offsets[h]
            r[sel] = env.rewards[h].sample(u[sel, 1], (local, a[sel]))
            if h < env.horizon - 1:
                cdf = np.cumsum(env.P[h], axis=-1)[local, a[sel]]
                s_next[sel] = env.offsets[h + 1] + _row_inverse_cdf(cdf, u[sel, 2])
        return Dataset(s, a, r, s_next, prov)

    raise ValidationError(f"cannot sample from {type(env).__name__}")


def sample_stats(env, N: int, seed: int):
    """Sufficient statistics with the same law as tallying ``sample_dataset(env, N, seed)``.

    Counts are multinomial and per-cell reward sums are drawn from the exact
    law of a sum of i.i.d. rewards, so this costs O(cells) instead of O(N).
    The draws differ from the record-level sampler; only the law agrees.
    """
    N = check_count(N, "N", 1)
    rng = generator(seed, STREAM_DATA)
    if isinstance(env, BanditInstance):
        k = env.num_explicit
        if not env.is_sparse:
            n = rng.multinomial(N, env.mu)
            t = env.reward_table.sample_sums(rng, n[None, :])[0]
            return BanditStats(env.num_actions, np.arange(k), n, t)
        width = env.num_actions - k
        n_all = rng.multinomial(N, np.append(env.mu, env.tail_mu * width))
        head_sums = env.reward_table.sample_sums(rng, n_all[None, :k])[0]
        picks = np.sort(rng.integers(k, env.num_actions, size=int(n_all[k])))
        tail_arms, tail_n = np.unique(picks, return_counts=True)
        hits = rng.multinomial(tail_n, np.broadcast_to(env.tail.probs, (tail_n.size, len(env.tail.probs))))
        tail_sums = hits @ np.asarray(env.tail.values)
        return BanditStats(
            env.num_actions,
            np.concatenate([np.arange(k), tail_arms]),
            np.concatenate([n_all[:k], tail_n]),
            np.concatenate([head_sums, tail_sums]),
        )
    if isinstance(env, CbInstance):
        n = rng.multinomial(N, env.mu.reshape(-1)).reshape(env.mu.shape)
        return PairStats(n, env.rewards.sample_sums(rng, n))
    raise ValidationError("sufficient-statistic sampling covers bandits and contextual bandits only")


# ---------------------------------------------------------------- tallies


def _check_indices(dataset: Dataset, S: int, A: int) -> None:
    if len(dataset) == 0:
        return
    if dataset.s.min() < 0 or dataset.s.max() >= S or dataset.a.min() < 0 or dataset.a.max() >= A:
        raise MalformedDatasetError(f"dataset indices fall outside S={S}, A={A}")
    if dataset.s_next.max() >= S or dataset.s_next.min() < NO_STATE:
        raise MalformedDatasetError(f"next-state indices fall outside S={S}")


def counts(dataset: Dataset, S: int, A: int) -> np.ndarray:
    """Exact tally ``N(s,a)`` as an (S, A) integer table."""
    _check_indices(dataset, S, A)
    return np.bincount(dataset.s * A + dataset.a, minlength=S * A).reshape(S, A)


def pair_stats(data, S: int, A: int) -> PairStats:
    if isinstance(data, PairStats):
        if data.counts.shape != (S, A):
            raise MalformedDatasetError(f"statistics have shape {data.counts.shape}, expected ({S}, {A})")
        return data
    if isinstance(data, BanditStats):
        if S != 1:
            raise MalformedDatasetError("bandit statistics have a single state")
        n, t = data.dense()
        return PairStats(n[None, :], t[None, :])
    n = counts(data, S, A)
    t = np.bincount(data.s * A + data.a, weights=data.r, minlength=S * A).reshape(S, A)
    return PairStats(n, t)


def bandit_stats(data, A: int) -> BanditStats:
    """Per-arm tallies from a dataset (or pass-through for existing statistics)."""
    if isinstance(data, BanditStats):
        if data.num_actions != A:
            raise MalformedDatasetError(f"statistics cover {data.num_actions} arms, expected {A}")
        return data
    if isinstance(data, PairStats):
        if data.counts.shape[0] != 1:
            raise MalformedDatasetError("bandit statistics need a single state")
        return BanditStats(A, np.arange(A), data.counts[0], data.sums[0])
    _check_indices(data, 1, A)
    if A <= 1 << 16:
        n = np.bincount(data.a, minlength=A)
        t = np.bincount(data.a, weights=data.r, minlength=A)
        return BanditStats(A, np.arange(A), n, t)
    arms, inv = np.unique(data.a, return_inverse=True)
    return BanditStats(A, arms, np.bincount(inv, minlength=arms.size), np.bincount(inv, weights=data.r, minlength=arms.size))


def transition_counts(dataset: Dataset, S: int, A: int) -> np.ndarray:
    """(S, A, S) tally of observed transitions; records without a next state are skipped."""
    _check_indices(dataset, S, A)
    keep = dataset.s_next >= 0
    flat = (dataset.s[keep] * A + dataset.a[keep]) * S + dataset.s_next[keep]
    return np.bincount(flat, minlength=S * A * S).reshape(S, A, S)


def split_folds(dataset: Dataset, T: int, seed: int) -> list[Dataset]:
    """Random permutation cut into T+1 folds of ``m = N // (T+1)``; the remainder is dropped."""
    perm, m = fold_permutation(len(dataset), T, seed)
    return [dataset.subset(perm[t * m : (t + 1) * m], fold=t) for t in range(T + 1)]


def fold_permutation(N: int, T: int, seed: int) -> tuple[np.ndarray, int]:
    """The permutation and fold size behind ``split_folds``."""
    T = check_count(T, "T")
    if N < T + 1:
        raise InsufficientDataError(f"need at least T+1 = {T + 1} records, got {N}")
    return generator(seed, STREAM_FOLDS).permutation(N), N // (T + 1)


def fold_labels(N: int, T: int, seed: int) -> np.ndarray:
    """Fold index of every record (-1 for discarded leftovers), consistent with ``split_folds``."""
    perm, m = fold_permutation(N, T, seed)
    labels = np.full(N, -1, dtype=np.int64)
    labels[perm[: m * (T + 1)]] = np.repeat(np.arange(T + 1), m)
    return labels


def concentrability(d, mu) -> float:
    """``max d/mu`` with 0/0 = 0 and positive/0 = inf."""
    d = np.asarray(d, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if d.shape != mu.shape:
        raise ValidationError(f"occupancy and behaviour shapes differ: {d.shape} vs {mu.shape}")
    pos = d > 0
    if np.any(pos & (mu <= 0)):
        return math.inf
    if not np.any(pos):
        return 0.0
    return float(np.max(d[pos] / mu[pos]))
