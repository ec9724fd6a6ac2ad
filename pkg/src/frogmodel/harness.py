"""Experiment recipes: simulate, compare, shape, death and verify.

Every recipe returns an ``ExperimentResult``: the JSON-lines records (one per
replica and rule and horizon, then summary lines), plot curves for the CSV
emitter, free-form metadata, and an exit code.  Records carry no wall-clock
data, so the same config and seed always give the same bytes; timestamps go
in the metadata sidecar.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .batch import FiniteGraph, count_matrix, run_batch
from .config import ExperimentConfig
from .engine import CappedRunError, FrogModelSpec, run
from .graph import GraphKind
from .init_config import ConfigError, SiteDependentBernoulli, rule_law
from .orders import check_empirical, check_exact, t_grid
from .paths import SRWWithDeath
from .rng import combine
from . import suites

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3

GROWTH_CAVEAT = ("growth labels describe finite-horizon curves of root visits only; "
                 "they are not recurrence or transience verdicts")


class PreconditionError(ConfigError):
    pass


@dataclass
class ExperimentResult:
    records: list = field(default_factory=list)
    curves: dict = field(default_factory=dict)  # csv name -> (header, rows)
    meta: dict = field(default_factory=dict)
    exit_code: int = EXIT_OK

    def lines(self) -> list[str]:
        return [dumps(r) for r in self.records]


def dumps(rec: dict) -> str:
    return json.dumps(rec, sort_keys=True, separators=(",", ":"), default=_json_default)


def _json_default(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    return str(x)


def _num(x):
    """JSON-safe number: infinities become the string 'inf'."""
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return x


# ----------------------------------------------------------------------------
# replica execution


def path_seed(seed: int, replica: int) -> int:
    return combine(seed, replica)


def count_seed(seed: int, replica: int, rule_index: int) -> int:
    # distinct per rule; the path stream is what pairs replicas
    return combine(seed, replica, 0x636F756E74 + rule_index)


@dataclass(frozen=True)
class Replica:
    """Per-replica observables shared by all recipes."""

    index: int
    curve: tuple  # cumulative root visits by step
    activation: dict  # label -> time
    steps: int
    stop_reason: str
    capped: bool

    def r_at(self, t: int) -> int:
        return self.curve[min(t, len(self.curve) - 1)]

    def visited_at(self, t: int, root) -> int:
        return sum(1 for lab, s in self.activation.items() if s <= t and lab != root)


def _batch_ok(gk: GraphKind, walker) -> bool:
    from .paths import BiasedZ, NonbacktrackingStoppedAtLeaves, SRW
    finite = gk.name == "explicit" or (gk.name in ("tree", "regular_tree") and gk.depth_cap is not None)
    return finite and isinstance(walker, (SRW, SRWWithDeath, BiasedZ, NonbacktrackingStoppedAtLeaves))


def _scalar_job(job):
    gk, rule, walker, horizon, pseed, cseed, max_active, kwargs, index = job
    spec = FrogModelSpec(gk, rule, walker, horizon, pseed, cseed, max_active=max_active)
    try:
        out = run(spec, **kwargs)
        capped = False
    except CappedRunError as exc:
        out, capped = exc.outcome, True
    return Replica(index, tuple(out.visits_by_step), dict(out.activation_time), out.steps,
                   out.stop_reason, capped)


def run_replicas(cfg: ExperimentConfig, rule_index: int, walker, horizon: int, *,
                 workers: int = 1, stop_when_idle: bool = True, **kwargs) -> list[Replica]:
    """All replicas of one rule, in replica order whatever the worker count."""
    gk = cfg.graph_kind()
    rule = cfg.rule_objects()[rule_index]
    pseeds = [path_seed(cfg.seed, i) for i in range(cfg.replicas)]
    cseeds = [count_seed(cfg.seed, i, rule_index) for i in range(cfg.replicas)]
    if _batch_ok(gk, walker) and not kwargs:
        fg = FiniteGraph.build(gk.build())
        b = run_batch(fg, count_matrix(fg, rule, cseeds), walker, horizon, pseeds,
                      max_active=cfg.max_active * cfg.replicas)
        out = []
        for i in range(cfg.replicas):
            o = b.outcome(i)
            out.append(Replica(i, tuple(b.curve[i].tolist()), o.activation_time, b.steps,
                               "idle" if b.steps < horizon else "horizon", False))
        return out
    kw = dict(kwargs, stop_when_idle=stop_when_idle)
    jobs = [(gk, rule, walker, horizon, pseeds[i], cseeds[i], cfg.max_active, kw, i)
            for i in range(cfg.replicas)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_scalar_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    return [_scalar_job(j) for j in jobs]


def _base(cfg: ExperimentConfig, **kw) -> dict:
    return {"digest": cfg.digest(), "experiment": cfg.name, **kw}


def _root_label(cfg: ExperimentConfig):
    return cfg.graph_kind().build().label(0)


def _mean_se(x) -> tuple[float, float]:
    x = np.asarray(x, dtype=float)
    se = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
    return float(x.mean()), se


# ----------------------------------------------------------------------------
# simulate


def cmd_simulate(cfg: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    res = ExperimentResult()
    walker = cfg.walker_object()
    root = _root_label(cfg)
    H = max(cfg.horizons)
    rows = []
    growth = {}
    any_capped = False
    for j, rule_text in enumerate(cfg.rules):
        reps = run_replicas(cfg, j, walker, H, workers=workers, stop_when_idle=True)
        for T in sorted(cfg.horizons):
            for rp in reps:
                capped = rp.capped and rp.steps < T
                any_capped |= capped
                res.records.append(_base(cfg, type="run", rule=rule_text, rule_index=j, horizon=T,
                                         replica=rp.index, seed=path_seed(cfg.seed, rp.index),
                                         r=rp.r_at(T), visited=rp.visited_at(T, root),
                                         capped=capped))
        for T in sorted(cfg.horizons):
            ok = [rp for rp in reps if not (rp.capped and rp.steps < T)]
            m, se = _mean_se([rp.r_at(T) for rp in ok]) if ok else (None, None)
            rows.append((rule_text, T, m, se, len(ok)))
            res.records.append(_base(cfg, type="summary", rule=rule_text, horizon=T,
                                     mean_r=None if m is None else round(m, 12),
                                     se=None if se is None else round(se, 12), replicas=len(ok)))
        growth[rule_text] = classify_growth(reps, sorted(cfg.horizons))
        res.records.append(_base(cfg, type="growth", rule=rule_text, label=growth[rule_text],
                                 caveat=GROWTH_CAVEAT))
    res.curves["mean_r"] = (("rule", "horizon", "mean_r", "se", "replicas"), rows)
    res.meta.update(growth=growth, caveat=GROWTH_CAVEAT)
    res.exit_code = EXIT_CAP if any_capped else EXIT_OK
    return res


def classify_growth(reps: list[Replica], horizons: list[int]) -> str:
    """'growing' when r still rises clearly (mean paired increase above three
    standard errors) between the middle and the last horizon, else 'plateau'."""
    if len(horizons) < 2:
        return "single-horizon"
    lo, hi = horizons[0], horizons[-1]
    mid = (lo + hi) // 2
    ok = [rp for rp in reps if not rp.capped]
    if len(ok) < 2:
        return "insufficient"
    late = np.array([rp.r_at(hi) - rp.r_at(mid) for rp in ok], dtype=float)
    m, se = _mean_se(late)
    return "growing" if m > 3 * se and m > 0 else "plateau"


# ----------------------------------------------------------------------------
# compare


def _laws(rule) -> list:
    if isinstance(rule, SiteDependentBernoulli):
        return [rule_law(rule, math.sqrt(n)) for n in range(1, 401)]
    return [rule_law(rule)]


def check_rule_order(cfg: ExperimentConfig) -> dict:
    """Certify the per-vertex count laws of rules[0] <= rules[1] in the configured order."""
    a, b = cfg.rule_objects()
    try:
        la, lb = _laws(a), _laws(b)
    except ConfigError as exc:
        raise PreconditionError(f"cannot certify the rules' order: {exc}") from None
    if len(la) != len(lb):
        la, lb = la * (len(lb) // len(la) or 1), lb * (len(la) // len(lb) or 1)
    for x, y in zip(la, lb):
        v = check_exact(cfg.order_kind, x, y)
        if not v.dominates:
            raise PreconditionError(
                f"count laws are not {cfg.order_kind}-ordered: {x!r} vs {y!r} (witness {v.witness})")
    return {"order": cfg.order_kind, "certified": True}


def cmd_compare(cfg: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    res = ExperimentResult()
    res.meta["precondition"] = check_rule_order(cfg)
    walker = cfg.walker_object()
    root = _root_label(cfg)
    H = max(cfg.horizons)
    reps = [run_replicas(cfg, j, walker, H, workers=workers, stop_when_idle=True) for j in range(2)]
    violated = False
    rows = []
    for T in sorted(cfg.horizons):
        keep = [i for i in range(cfg.replicas)
                if not any(reps[j][i].capped and reps[j][i].steps < T for j in range(2))]
        vals = {}
        for j in range(2):
            for rp in reps[j]:
                capped = rp.capped and rp.steps < T
                res.records.append(_base(cfg, type="run", rule=cfg.rules[j], rule_index=j, horizon=T,
                                         replica=rp.index, seed=path_seed(cfg.seed, rp.index),
                                         r=rp.r_at(T), visited=rp.visited_at(T, root), capped=capped))
            vals[("r", j)] = np.array([reps[j][i].r_at(T) for i in keep], dtype=float)
            vals[("V", j)] = np.array([reps[j][i].visited_at(T, root) for i in keep], dtype=float)
        for stat in ("r", "V"):
            v = check_empirical(cfg.order_kind, vals[(stat, 0)], vals[(stat, 1)],
                                t_points=t_grid(cfg.t_grid), bootstrap_reps=cfg.bootstrap_reps,
                                level=cfg.level, paired=True, seed=combine(cfg.seed, T, ord(stat)))
            violated |= v.violated
            d = v.to_dict()
            res.records.append(_base(cfg, type="verdict", statistic=stat, horizon=T,
                                     replicas=len(keep), status=v.status, order=cfg.order_kind,
                                     min_margin=d["min_margin"], witness=d["witness"], level=v.level,
                                     note=v.note))
            for pt, m in v.margins:
                rows.append((stat, T, _num(pt), m))
    res.curves["margins"] = (("statistic", "horizon", "point", "lower_margin"), rows)
    res.exit_code = EXIT_VIOLATION if violated else EXIT_OK
    return res


# ----------------------------------------------------------------------------
# shape


def simultaneous_mean_band(diff: np.ndarray, level: float, reps: int, seed: int) -> tuple:
    """Paired differences (replicas x points): means with a simultaneous bootstrap band."""
    n = diff.shape[0]
    est = diff.mean(axis=0)
    rng = np.random.default_rng(seed)
    w = rng.multinomial(n, np.full(n, 1.0 / n), size=reps) / n
    boot = w @ diff
    se = boot.std(axis=0, ddof=1)
    safe = np.where(se > 0, se, np.inf)
    crit = float(np.quantile((np.abs(boot - est) / safe).max(axis=1), level))
    return est, crit * se


def cmd_shape(cfg: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    gk = cfg.graph_kind()
    if gk.name != "lattice":
        raise ConfigError("shape experiments need a lattice graph")
    if len(cfg.direction) != gk.d or not any(cfg.direction):
        raise ConfigError(f"direction must be a nonzero vector of length {gk.d}")
    res = ExperimentResult()
    res.meta["precondition"] = check_rule_order(cfg)
    walker = cfg.walker_object()
    H = max(cfg.horizons)
    targets = [tuple(n * c for c in cfg.direction) for n in range(1, cfg.n_max + 1)]
    times = np.zeros((2, cfg.replicas, cfg.n_max))
    censored = np.zeros((2, cfg.n_max), dtype=int)
    clouds = []
    for j in range(2):
        reps = run_replicas(cfg, j, walker, H, workers=workers, stop_when_idle=True, targets=targets)
        for rp in reps:
            tt = [rp.activation.get(x) for x in targets]
            for n, t in enumerate(tt):
                if t is None:
                    censored[j, n] += 1
                times[j, rp.index, n] = H if t is None else t
            res.records.append(_base(cfg, type="run", rule=cfg.rules[j], rule_index=j, replica=rp.index,
                                     seed=path_seed(cfg.seed, rp.index), horizon=H,
                                     times=tt, censored=sum(t is None for t in tt), capped=rp.capped))
        first = reps[0]
        clouds.extend((cfg.rules[j], *lab, t) for lab, t in sorted(first.activation.items()))
    # rules[0] <= rules[1] means rule 1 should be at least as fast: E T_1 <= E T_0
    est, half = simultaneous_mean_band(times[0] - times[1], cfg.level, cfg.bootstrap_reps,
                                       combine(cfg.seed, 0x5A))
    ok = bool(np.all(est + half >= 0))
    rows = []
    for n in range(cfg.n_max):
        m0, m1 = times[0, :, n].mean(), times[1, :, n].mean()
        rows.append((n + 1, m0, m1, m0 / (n + 1), m1 / (n + 1), est[n], half[n],
                     int(censored[0, n]), int(censored[1, n])))
        res.records.append(_base(cfg, type="summary", n=n + 1, mean_T=[float(m0), float(m1)],
                                 mu=[float(m0 / (n + 1)), float(m1 / (n + 1))],
                                 diff=float(est[n]), half_width=float(half[n]),
                                 censored=[int(censored[0, n]), int(censored[1, n])]))
    res.records.append(_base(cfg, type="verdict", check="E T_second <= E T_first + CI at every n",
                             passed=ok, level=cfg.level,
                             worst_n=int(np.argmin(est + half)) + 1))
    res.curves["mu"] = (("n", "mean_T_0", "mean_T_1", "mu_0", "mu_1", "diff", "half_width",
                         "censored_0", "censored_1"), rows)
    res.curves["cloud"] = (("rule",) + tuple(f"x{i + 1}" for i in range(gk.d)) + ("time",), clouds)
    res.meta["censored_any"] = bool(censored.any())
    res.exit_code = EXIT_OK if ok else EXIT_VIOLATION
    return res


# ----------------------------------------------------------------------------
# death


def cmd_death(cfg: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    gk = cfg.graph_kind()
    if gk.name not in ("lattice", "tree", "regular_tree"):
        raise ConfigError("death experiments need a tree or lattice")
    infinite = gk.depth_cap is None
    res = ExperimentResult()
    H = max(cfg.horizons)
    root = _root_label(cfg)
    ps = sorted(cfg.p_list)
    # V per (rule, p, replica); inf when the run reached the visited threshold
    V = np.full((len(cfg.rules), len(ps), cfg.replicas), np.nan)
    flagged = []
    for k, p in enumerate(ps):
        walker = SRWWithDeath(p)
        degenerate = p >= 1.0 and infinite
        for j in range(len(cfg.rules)):
            reps = run_replicas(cfg, j, walker, H, workers=workers, stop_when_idle=True,
                                max_visited=cfg.threshold)
            for rp in reps:
                survived = rp.stop_reason in ("visited_threshold", "horizon") or rp.capped
                excluded = degenerate or rp.capped
                v = math.inf if survived else rp.visited_at(H, root)
                if not excluded:
                    V[j, k, rp.index] = v
                res.records.append(_base(cfg, type="run", rule=cfg.rules[j], rule_index=j, p=p,
                                         replica=rp.index, seed=path_seed(cfg.seed, rp.index),
                                         visited=_num(v), survived=survived,
                                         capped=rp.capped or degenerate, excluded=excluded))
            if degenerate:
                flagged.append({"p": p, "rule": cfg.rules[j], "reason": "no death on an infinite graph"})
    surv_rows = []
    monotone = True
    for j, rule in enumerate(cfg.rules):
        prev = -1.0
        for k, p in enumerate(ps):
            x = V[j, k][~np.isnan(V[j, k])]
            if x.size == 0:
                continue
            s = float(np.isinf(x).mean())
            se = math.sqrt(s * (1 - s) / x.size)
            surv_rows.append((rule, p, s, se, int(x.size)))
            res.records.append(_base(cfg, type="survival", rule=rule, p=p, survival=round(s, 12),
                                     se=round(se, 12), replicas=int(x.size), threshold=cfg.threshold))
            if s < prev:
                monotone = False
            prev = s
    res.records.append(_base(cfg, type="verdict", check="survival nondecreasing in p", passed=monotone))
    violated = False
    rows = []
    if len(cfg.rules) >= 2:
        for k, p in enumerate(ps):
            a, b = V[0, k], V[1, k]
            keep = ~np.isnan(a) & ~np.isnan(b)
            if keep.sum() < 100:
                continue
            v = check_empirical(cfg.order_kind, a[keep], b[keep], t_points=t_grid(cfg.t_grid),
                                bootstrap_reps=cfg.bootstrap_reps, level=cfg.level, paired=True,
                                seed=combine(cfg.seed, k, 0xDEAD))
            violated |= v.violated
            d = v.to_dict()
            res.records.append(_base(cfg, type="verdict", statistic="V", p=p, status=v.status,
                                     order=cfg.order_kind, min_margin=d["min_margin"],
                                     witness=d["witness"], replicas=int(keep.sum())))
            rows.extend(("V", p, _num(pt), m) for pt, m in v.margins)
    res.curves["survival"] = (("rule", "p", "survival", "se", "replicas"), surv_rows)
    res.curves["margins"] = (("statistic", "p", "point", "lower_margin"), rows)
    res.meta["flagged"] = flagged
    res.exit_code = EXIT_VIOLATION if (violated or not monotone) else EXIT_OK
    return res


# ----------------------------------------------------------------------------
# verify


def cmd_verify(suite: str) -> ExperimentResult:
    if suite not in suites.SUITES:
        raise ConfigError(f"unknown suite {suite!r}; choose from {', '.join(suites.SUITES)}")
    rep = suites.run_suite(suite)
    timing = rep.pop("seconds")
    res = ExperimentResult(records=[{"type": "verify", **rep}], meta={"seconds": timing})
    res.exit_code = EXIT_OK if rep["passed"] else EXIT_VIOLATION
    return res


RECIPES = {"simulate": cmd_simulate, "compare": cmd_compare, "shape": cmd_shape, "death": cmd_death}


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    return RECIPES[cfg.kind](cfg, workers=workers)
