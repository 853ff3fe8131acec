"""Monte Carlo experiment engine: sweeps, summaries, rate fits and invariant suites."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np
from scipy import stats

from . import algorithms as alg
from . import env_core as ec
from . import instances as inst_mod
from . import oracles
from .data_gen import sample_dataset, sample_stats
from .instances import HardInstance
from .rng import STREAM_INSTANCE, generator, mix_seed
from .validation import InsufficientDataError, ValidationError, check_count

RECORD_HEADER = ["instance", "algorithm", "c_star", "n", "rep", "subopt", "seed", "clean_event"]
SUMMARY_HEADER = ["instance", "algorithm", "c_star", "n", "mean", "stderr", "count"]
SUBOPT_SLACK = 1e-9


# ---------------------------------------------------------------- config


@dataclass(frozen=True)
class AlgorithmSpec:
    id: str
    params: dict = field(default_factory=dict)
    label: str = ""

    @property
    def name(self) -> str:
        return self.label or self.id


@dataclass(frozen=True)
class ExperimentConfig:
    instance_id: str
    instance_params: dict
    algorithms: tuple[AlgorithmSpec, ...]
    n_grid: tuple[int, ...]
    reps: int
    root_seed: int = 0
    sampler: str = "auto"
    clean_event: bool = False
    outputs: dict = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        grid = tuple(check_count(n, "N", 1) for n in self.n_grid)
        if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValidationError("N grid must be nonempty and strictly increasing")
        object.__setattr__(self, "n_grid", grid)
        check_count(self.reps, "reps", 1)
        if not self.algorithms:
            raise ValidationError("at least one algorithm is required")
        if self.instance_id not in INSTANCES:
            raise ValidationError(f"unknown instance {self.instance_id!r}; valid: {', '.join(sorted(INSTANCES))}")
        for a in self.algorithms:
            if a.id not in ALGORITHMS:
                raise ValidationError(f"unknown algorithm {a.id!r}; valid: {', '.join(sorted(ALGORITHMS))}")
        names = [a.name for a in self.algorithms]
        if len(set(names)) != len(names):
            raise ValidationError("algorithm labels must be unique")
        if self.sampler not in ("auto", "records", "stats"):
            raise ValidationError(f"unknown sampler {self.sampler!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        try:
            algs = tuple(
                AlgorithmSpec(a["id"], dict(a.get("params", {})), a.get("label", "")) if isinstance(a, dict) else AlgorithmSpec(str(a))
                for a in d["algorithms"]
            )
            return cls(
                instance_id=d["instance"]["id"],
                instance_params=dict(d["instance"].get("params", {})),
                algorithms=algs,
                n_grid=tuple(d["n_grid"]),
                reps=d["reps"],
                root_seed=int(d.get("root_seed", 0)),
                sampler=d.get("sampler", "auto"),
                clean_event=bool(d.get("clean_event", False)),
                outputs=dict(d.get("outputs", {})),
                name=d.get("name", ""),
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed config: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config is not valid JSON: {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "instance": {"id": self.instance_id, "params": self.instance_params},
            "algorithms": [{"id": a.id, "params": a.params, "label": a.label} for a in self.algorithms],
            "n_grid": list(self.n_grid),
            "reps": self.reps,
            "root_seed": self.root_seed,
            "sampler": self.sampler,
            "clean_event": self.clean_event,
            "outputs": self.outputs,
        }


@dataclass(frozen=True)
class RunRecord:
    instance: str
    algorithm: str
    c_star: float
    n: int
    rep: int
    subopt: float | None
    seed: int
    clean_event: bool | None = None
    error: str = ""

    def row(self) -> list[str]:
        ce = "" if self.clean_event is None else str(bool(self.clean_event)).lower()
        sub = "" if self.subopt is None else repr(float(self.subopt))
        return [self.instance, self.algorithm, repr(float(self.c_star)), str(self.n), str(self.rep), sub, str(self.seed), ce]


@dataclass(frozen=True)
class SummaryRow:
    instance: str
    algorithm: str
    c_star: float
    n: int
    mean: float
    stderr: float
    count: int

    def row(self) -> list[str]:
        return [self.instance, self.algorithm, repr(float(self.c_star)), str(self.n), repr(self.mean), repr(self.stderr), str(self.count)]


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    slope_stderr: float
    points: int
    dropped: int


# ---------------------------------------------------------------- parameter resolution


def resolve_L(value, N: int, A: int):
    """``override_L`` may be a number or one of ``sqrt_n``, ``log_2an``, ``n^<x>``."""
    if value is None or isinstance(value, (int, float)):
        return value
    v = str(value).strip().lower()
    if v == "sqrt_n":
        return math.sqrt(N)
    if v == "log_2an":
        return math.log(2 * A * N)
    if v.startswith("n^"):
        return float(N) ** float(v[2:])
    raise ValidationError(f"unknown override_L expression {value!r}")


def resolve_delta(value, N: int):
    if value is None or value == "1/n":
        return None
    return float(value)


def _sub_n(params: dict, N: int) -> dict:
    return {k: (N if v == "@n" else v) for k, v in params.items()}


# ---------------------------------------------------------------- instance registry


def _member(pair, p):
    return pair[int(p.get("member", 0))]


def _fano(p, N):
    S, C = int(p["S"]), float(p["c_star"])
    dg = p.get("delta_g", "minimax")
    dg = inst_mod.cb_minimax_gap(S, C, N) if dg == "minimax" else float(dg)
    if "v" in p:
        v = p["v"]
    else:
        code = inst_mod.gv_code(S, max_tries=int(p.get("max_tries", 4096)), seed=int(p.get("code_seed", 0)))
        v = code.codewords[int(p.get("member", 0))]
    return inst_mod.cb_fano_member(S, C, dg, v)


def _mdp_hard(p, N):
    S, C, g = int(p["S"]), float(p["c_star"]), float(p.get("gamma", 0.9))
    dg = p.get("delta_g", "minimax")
    dg = inst_mod.mdp_minimax_gap(S - 1, C, g, N) if dg == "minimax" else float(dg)
    return inst_mod.mdp_hard(S, g, C, dg, v=p.get("v"), p=p.get("p"))


def _random(builder, *keys):
    def build(p, N):
        rng = generator(int(p.get("seed", 0)), STREAM_INSTANCE)
        return builder(*[p[k] for k in keys], rng)
    return build


INSTANCES: dict[str, Callable[[dict, int], HardInstance]] = {
    "prop1": lambda p, N: inst_mod.prop1_instance(float(p.get("eps", 0.1)), int(p.get("N", N))),
    "lecam_two_arm": lambda p, N: _member(inst_mod.lecam_two_arm(float(p["c_star"]), float(p["delta_g"])), p),
    "nonadaptivity": lambda p, N: _member(
        inst_mod.nonadaptivity_pair(int(p.get("N", N)), resolve_L(p["L"], N, 2), resolve_L(p.get("L_b"), N, 2)), p
    ),
    "cb_fano": _fano,
    "cb_most_played_failure": lambda p, N: inst_mod.cb_most_played_failure(float(p.get("c_star", 1.5)), p.get("eps")),
    "cb_expert": lambda p, N: inst_mod.cb_expert_instance(int(p.get("S", 2)), int(p.get("N_design", N)), int(p.get("A", 2))),
    "mdp_hard": _mdp_hard,
    "imitation_hard": lambda p, N: inst_mod.imitation_hard_mdp(
        int(p.get("S", 5)), int(p.get("N_design", N)), float(p.get("gamma", 0.9)), int(p.get("A", 2)), int(p.get("seed", 0))
    ),
    "episodic_h3": lambda p, N: inst_mod.episodic_h3(p["rho"], p["gaps"], float(p["c_star"])),
    "random_bandit": lambda p, N: inst_mod.random_bandit(
        int(p["A"]), generator(int(p.get("seed", 0)), STREAM_INSTANCE), float(p.get("min_mu_star", 0.0))
    ),
    "random_cb": _random(lambda S, A, rng: inst_mod.random_cb(int(S), int(A), rng), "S", "A"),
    "random_mdp": _random(lambda S, A, g, rng: inst_mod.random_mdp(int(S), int(A), float(g), rng), "S", "A", "gamma"),
}


def build_instance(instance_id: str, params: dict, N: int) -> HardInstance:
    if instance_id not in INSTANCES:
        raise ValidationError(f"unknown instance {instance_id!r}; valid: {', '.join(sorted(INSTANCES))}")
    try:
        return INSTANCES[instance_id](_sub_n(params, N), N)
    except KeyError as exc:
        raise ValidationError(f"instance {instance_id!r} is missing parameter {exc}") from exc


# ---------------------------------------------------------------- algorithm registry


def _bandit_alg(rule):
    def run(h: HardInstance, data, N, p, want_clean):
        A = h.num_actions
        kw = {}
        if rule == "lcb_mab":
            kw = dict(delta=resolve_delta(p.get("delta"), N), override_L=resolve_L(p.get("override_L"), N, A),
                      clip_penalty=bool(p.get("clip_penalty", True)))
        arm = {"lcb_mab": alg.lcb_mab, "empirical_best_arm": alg.empirical_best_arm, "most_played_arm": alg.most_played_arm}[rule](data, A, **kw)
        clean = None
        if want_clean and rule == "lcb_mab" and not h.env.is_sparse:
            clean = oracles.clean_event_indicator("mab", h.env, alg.mab_terms(data, A, **kw))
        return arm, clean
    return run


def _cb_alg(rule):
    def run(h: HardInstance, data, N, p, want_clean):
        S, A = h.num_states, h.num_actions
        if rule == "lcb_cb":
            kw = dict(delta=resolve_delta(p.get("delta"), N), override_L=resolve_L(p.get("override_L"), N, A),
                      clip_penalty=bool(p.get("clip_penalty", True)))
            pi = alg.lcb_cb(data, S, A, **kw)
            clean = oracles.clean_event_indicator("cb", h.env, alg.cb_terms(data, S, A, **kw)) if want_clean else None
            return pi, clean
        fn = {"behavior_cloning": alg.behavior_cloning, "most_played_cb": alg.most_played_cb, "empirical_best_cb": alg.empirical_best_cb}[rule]
        return fn(data, S, A), None
    return run


def _vi_alg(plain: bool):
    def run(h: HardInstance, data, N, p, want_clean):
        shape = alg.MdpShape(h.num_states, h.num_actions, h.env.gamma)
        if plain:
            pi, tr = alg.empirical_vi(data, shape, want_trace=want_clean)
        else:
            pi, tr = alg.vi_lcb(
                data, shape, resolve_delta(p.get("delta"), N), want_trace=want_clean,
                override_L=resolve_L(p.get("override_L"), N, h.num_actions), monotone=bool(p.get("monotone", True)),
            )
        clean = oracles.clean_event_indicator("mdp", h.env, tr) if want_clean else None
        return pi, clean
    return run


def _episodic_alg(h: HardInstance, data, N, p, want_clean):
    shape = alg.EpisodicShape(h.env.level_sizes, h.num_actions)
    pi = alg.episodic_vi_lcb(
        data, shape, resolve_delta(p.get("delta"), N), resolve_L(p.get("override_L"), N, h.num_actions),
        known_rewards=bool(p.get("known_rewards", False)),
    )
    return pi, None


ALGORITHMS: dict[str, tuple[set, Callable]] = {
    "lcb_mab": ({"bandit"}, _bandit_alg("lcb_mab")),
    "empirical_best_arm": ({"bandit"}, _bandit_alg("empirical_best_arm")),
    "most_played_arm": ({"bandit"}, _bandit_alg("most_played_arm")),
    "lcb_cb": ({"cb"}, _cb_alg("lcb_cb")),
    "behavior_cloning": ({"cb"}, _cb_alg("behavior_cloning")),
    "most_played_cb": ({"cb"}, _cb_alg("most_played_cb")),
    "empirical_best_cb": ({"cb"}, _cb_alg("empirical_best_cb")),
    "vi_lcb": ({"mdp"}, _vi_alg(False)),
    "empirical_vi": ({"mdp"}, _vi_alg(True)),
    "episodic_vi_lcb": ({"episodic"}, _episodic_alg),
}


# ---------------------------------------------------------------- sweeps


def cell_seed(root_seed: int, N: int, rep: int) -> int:
    return mix_seed(root_seed, N, rep)


def draw_data(h: HardInstance, N: int, seed: int, sampler: str = "auto"):
    """Dataset (or sufficient statistics) for one replication."""
    use_stats = sampler == "stats" or (sampler == "auto" and h.kind in ("bandit", "cb"))
    if use_stats:
        if h.kind not in ("bandit", "cb"):
            raise ValidationError("the stats sampler covers bandits and contextual bandits only")
        return sample_stats(h.env, N, seed)
    mu = None if h.kind in ("bandit", "cb") else h.mu
    return sample_dataset(h.env, N, seed, mu=mu, instance_id=h.id)


def _run_cell(cfg: ExperimentConfig, h: HardInstance, N: int, rep: int) -> list[RunRecord]:
    seed = cell_seed(cfg.root_seed, N, rep)
    data = draw_data(h, N, seed, cfg.sampler)
    out = []
    for spec in cfg.algorithms:
        kinds, fn = ALGORITHMS[spec.id]
        if h.kind not in kinds:
            raise ValidationError(f"algorithm {spec.id!r} does not apply to {h.kind} instances")
        try:
            choice, clean = fn(h, data, N, spec.params, cfg.clean_event)
        except InsufficientDataError as exc:
            out.append(RunRecord(h.id, spec.name, h.c_star, N, rep, None, seed, None, str(exc)))
            continue
        sub = h.suboptimality(choice)
        if sub < -SUBOPT_SLACK:
            raise ArithmeticError(f"negative sub-optimality {sub} for {spec.name} at N={N}, rep={rep}")
        out.append(RunRecord(h.id, spec.name, h.c_star, N, rep, max(sub, 0.0), seed, clean))
    return out


def _sort_key(r: RunRecord):
    return (r.instance, r.algorithm, r.c_star, r.n, r.rep)


def run_sweep(cfg: ExperimentConfig, threads: int | None = None) -> list[RunRecord]:
    """Every (N, replication) cell; all algorithms share the cell's dataset."""
    if threads is None:
        threads = os.cpu_count() or 1
    threads = check_count(threads, "threads", 1)
    built = {N: build_instance(cfg.instance_id, cfg.instance_params, N) for N in cfg.n_grid}
    cells = [(N, i) for N in cfg.n_grid for i in range(cfg.reps)]

    def work(chunk):
        return [rec for N, i in chunk for rec in _run_cell(cfg, built[N], N, i)]

    if threads == 1:
        records = work(cells)
    else:
        size = max(1, len(cells) // (threads * 8))
        chunks = [cells[k : k + size] for k in range(0, len(cells), size)]
        with ThreadPoolExecutor(max_workers=threads) as ex:
            records = [r for part in ex.map(work, chunks) for r in part]
    return sorted(records, key=_sort_key)


def summarize(records) -> list[SummaryRow]:
    """Group by (instance, algorithm, C*, N); failed records are skipped."""
    groups: dict[tuple, list[float]] = {}
    for r in records:
        if r.subopt is None:
            continue
        groups.setdefault((r.instance, r.algorithm, float(r.c_star), int(r.n)), []).append(float(r.subopt))
    rows = []
    for key in sorted(groups):
        x = np.asarray(groups[key])
        se = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
        rows.append(SummaryRow(*key, float(x.mean()), se, int(x.size)))
    return rows


def fit_loglog(x, y) -> RateFit:
    """OLS of ``ln y`` on ``ln x``; points with ``y <= 0`` are dropped and counted."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = y > 0
    if keep.sum() < 3:
        raise ValidationError(f"rate fit needs >= 3 positive points, got {int(keep.sum())}")
    res = stats.linregress(np.log(x[keep]), np.log(y[keep]))
    return RateFit(float(res.slope), float(res.intercept), float(res.stderr), int(keep.sum()), int((~keep).sum()))


def fit_rate(rows) -> RateFit:
    """Slope of ln mean against ln N for rows of a single (instance, algorithm, C*)."""
    rows = list(rows)
    if len({(r.instance, r.algorithm, r.c_star) for r in rows}) > 1:
        raise ValidationError("fit_rate expects rows of one (instance, algorithm, C*)")
    return fit_loglog([r.n for r in rows], [r.mean for r in rows])


# ---------------------------------------------------------------- CSV


def records_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RECORD_HEADER)
    for r in records:
        w.writerow(r.row())
    return buf.getvalue()


def summary_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_HEADER)
    for r in rows:
        w.writerow(r.row())
    return buf.getvalue()


def read_summary(text: str) -> list[SummaryRow]:
    rd = csv.reader(io.StringIO(text))
    header = next(rd, None)
    if header != SUMMARY_HEADER:
        raise ValidationError(f"summary CSV must start with header {','.join(SUMMARY_HEADER)}")
    try:
        return [SummaryRow(r[0], r[1], float(r[2]), int(r[3]), float(r[4]), float(r[5]), int(r[6])) for r in rd if r]
    except (ValueError, IndexError) as exc:
        raise ValidationError(f"bad summary row: {exc}") from exc


def write_atomic(path, text: str) -> None:
    """Write through a temporary file in the target directory, then rename."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def failures(records) -> list[RunRecord]:
    return [r for r in records if r.subopt is None]


# ---------------------------------------------------------------- invariant checks on VI-LCB traces


def contraction_violations(mdp: ec.DiscountedMdp, trace: alg.ViTrace, policy=None, slack: float = 1e-9) -> int:
    """Count iterations breaking any of the three contraction claims.

    Per t: ``V_{t-1} <= V_t <= V^{pi_t} <= V*``; ``Q_t <= r + gamma P V_{t-1}``;
    ``Q^pi - Q_t <= gamma P (Q^pi - Q_{t-1})(., pi) + 2 b_t`` for the
    comparison policy (``pi*`` by default).
    """
    pi_star, vt_star = ec.exact_optimal_policy(mdp)
    pi = pi_star if policy is None else np.asarray(policy)
    q_pi = ec.policy_evaluation(mdp, pi).Q
    S = mdp.num_states
    idx = np.arange(S)
    g = mdp.gamma
    bad = 0
    for t in range(1, trace.T + 1):
        v_pi_t = ec.policy_evaluation(mdp, trace.pi[t]).V
        chain = (
            np.all(trace.V[t - 1] <= trace.V[t] + slack)
            and np.all(trace.V[t] <= v_pi_t + slack)
            and np.all(v_pi_t <= vt_star.V + slack)
        )
        upper = np.all(trace.Q[t] <= mdp.r + g * (mdp.P @ trace.V[t - 1]) + slack)
        diff = (q_pi - trace.Q[t - 1])[idx, pi]
        recur = np.all(q_pi - trace.Q[t] <= g * (mdp.P @ diff) + 2 * trace.b[t] + slack)
        bad += int(not (chain and upper and recur))
    return bad


def value_difference_violations(mdp: ec.DiscountedMdp, trace: alg.ViTrace, policy=None, slack: float = 1e-9) -> int:
    """Count t with ``J(pi) - J(pi_t) > gamma^t/(1-gamma) + 2 sum_i E_{nu_{t-i}}[b_i]``."""
    pi = ec.exact_optimal_policy(mdp)[0] if policy is None else np.asarray(policy)
    g = mdp.gamma
    J = ec.expected_value(mdp, pi)
    nu = ec.k_step_occupancies(mdp, pi, trace.T)
    # pen[i] = E_{nu_k}[b_i] as a (T+1, T+1) table over (i, k)
    pen = np.einsum("isa,ksa->ik", trace.b, nu)
    bad = 0
    for t in range(1, trace.T + 1):
        bound = g**t / (1 - g) + 2 * sum(pen[i, t - i] for i in range(1, t + 1))
        bad += int(J - ec.expected_value(mdp, trace.pi[t]) > bound + slack)
    return bad


# ---------------------------------------------------------------- verify suites


def _check(name, passed, **detail):
    return {"check": name, "passed": bool(passed), **detail}


def _suite_env(seed):
    rng = generator(seed, STREAM_INSTANCE)
    checks = []
    worst = 0.0
    for _ in range(20):
        h = inst_mod.random_mdp(4, 2, 0.9, rng)
        pi, vt = ec.exact_optimal_policy(h.env)
        worst = max(worst, ec.bellman_optimality_residual(h.env, vt.V))
        ex = oracles.exhaustive_optimal_policy(h.env)
        checks.append(_check("exhaustive_matches_exact", np.array_equal(ex, pi)))
        d = ec.occupancy(h.env, pi)
        checks.append(_check("occupancy_sums_to_one", abs(d.sum() - 1) <= 1e-12, margin=abs(d.sum() - 1)))
        J = ec.expected_value(h.env, pi)
        checks.append(_check("J_equals_reward_under_occupancy", abs(J - (d * h.env.r).sum() / (1 - h.env.gamma)) <= 1e-9))
    checks.append(_check("bellman_residual", worst <= 1e-9, margin=worst))
    return checks


def _random_vi_runs(runs, seed, delta=0.05):
    rng = generator(seed, STREAM_INSTANCE)
    for i in range(runs):
        S = int(rng.integers(2, 9))
        A = int(rng.integers(2, 4))
        h = inst_mod.random_mdp(S, A, 0.9, rng)
        N = int(rng.integers(500, 2001))
        data = sample_dataset(h.env, N, mix_seed(seed, i), mu=h.mu)
        _, tr = alg.vi_lcb(data, alg.MdpShape(S, A, 0.9), delta, want_trace=True)
        yield h, tr


def _suite_contraction(seed, runs=200):
    bad = 0
    clean = 0
    for h, tr in _random_vi_runs(runs, seed):
        if oracles.clean_event_indicator("mdp", h.env, tr):
            clean += 1
            bad += contraction_violations(h.env, tr)
    return [_check("contraction_chain", bad == 0, violations=bad, clean_runs=clean, runs=runs)]


def _suite_value_difference(seed, runs=200):
    bad = 0
    clean = 0
    for h, tr in _random_vi_runs(runs, seed):
        if oracles.clean_event_indicator("mdp", h.env, tr):
            clean += 1
            bad += value_difference_violations(h.env, tr)
    return [_check("value_difference_bound", bad == 0, violations=bad, clean_runs=clean, runs=runs)]


def _suite_clean_events(seed, runs=1000, delta=0.05):
    rng = generator(seed, STREAM_INSTANCE)
    h = inst_mod.random_cb(3, 2, rng)
    hits = 0
    for i in range(runs):
        st = sample_stats(h.env, 500, mix_seed(seed, i))
        hits += oracles.clean_event_indicator("cb", h.env, alg.cb_terms(st, 3, 2, delta))
    freq = hits / runs
    floor = (1 - delta) - 3 * math.sqrt(delta * (1 - delta) / runs)
    return [_check("cb_clean_event_frequency", freq >= floor, frequency=freq, floor=floor)]


def _suite_oracles(seed, reps=20000):
    checks = []
    pairs = [inst_mod.lecam_two_arm(1.5, 0.25)[1], inst_mod.nonadaptivity_pair(40, 1.0)[0]]
    for k, h in enumerate(pairs):
        for rule in ("lcb_mab", "empirical_best_arm", "most_played_arm"):
            N = 40
            exact = oracles.exact_two_arm_subopt(h.env, rule, N)
            x = np.empty(reps)
            for i in range(reps):
                st = sample_stats(h.env, N, mix_seed(seed, k, i))
                x[i] = h.suboptimality(int(alg.mab_choice(st.counts, st.sums, rule)))
            se = x.std(ddof=1) / math.sqrt(reps)
            gap = abs(x.mean() - exact)
            checks.append(_check(f"{h.id}/{rule}", gap <= 3 * se + 1e-12, exact=exact, mc=float(x.mean()), stderr=float(se)))
    for N, p in [(10, 0.05), (100, 0.2), (1000, 0.5)]:
        e = oracles.inverse_moment_exact(N, p, 0.5)
        bound = 16 / math.sqrt(N * p)
        checks.append(_check(f"inverse_moment N={N} p={p}", e <= bound, exact=e, bound=bound))
    return checks


def _suite_instances(seed):
    rng = generator(seed, STREAM_INSTANCE)
    built = [
        inst_mod.prop1_instance(0.1, 500),
        *inst_mod.lecam_two_arm(2.0, 0.25),
        *inst_mod.lecam_two_arm(1.5, 0.2),
        *inst_mod.nonadaptivity_pair(2000, math.log(8000)),
        *inst_mod.cb_fano_family(4, 2.0, 0.1, seed=seed),
        *inst_mod.cb_fano_family(4, 1.5, 0.1, seed=seed),
        inst_mod.cb_most_played_failure(1.5),
        inst_mod.cb_expert_instance(2, 1000),
        inst_mod.mdp_hard(17, 0.9, 2.0, 0.1),
        inst_mod.mdp_hard(9, 0.9, 1.5, 0.05, v=[1, -1]),
        inst_mod.imitation_hard_mdp(5, 100, seed=seed),
        inst_mod.episodic_h3([0.5, 0.5], [[0.3, 0.2], [0.1, 0.1], [0.1, 0.1]], 1.2),
        inst_mod.random_mdp(4, 2, 0.9, rng),
    ]
    checks = []
    for h in built:
        c = inst_mod.certify(h)
        checks.append(_check(f"certify {h.id}", c["c_star_ok"] and c["optimal_ok"], declared=c["declared"], measured=float(c["measured"])))
    code = inst_mod.gv_code(16, max_tries=2000, seed=seed)
    checks.append(_check("gv_distance", code.pairwise_min_l1 >= 8, size=len(code), min_l1=code.pairwise_min_l1))
    return checks


SUITES: dict[str, Callable[[int], list]] = {
    "env": _suite_env,
    "clean_events": _suite_clean_events,
    "contraction": _suite_contraction,
    "value_difference": _suite_value_difference,
    "oracles": _suite_oracles,
    "instances": _suite_instances,
}


def verify_suite(name: str, seed: int = 0) -> dict[str, Any]:
    """Run one invariant suite; the report lists every check and an overall flag."""
    if name not in SUITES:
        raise ValidationError(f"unknown suite {name!r}; valid: {', '.join(sorted(SUITES))}")
    checks = SUITES[name](seed)
    return {"suite": name, "passed": all(c["passed"] for c in checks), "checks": checks}
