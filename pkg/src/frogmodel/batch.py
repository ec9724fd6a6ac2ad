"""Vectorized replicas on finite graphs.

Runs many independent replicas at once with numpy.  Random streams are the
same counter-based ones the scalar engine uses, so replica r here produces
exactly the outcome ``engine.run`` gives for the same seeds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import CappedRunError, SimOutcome
from .graph import Graph
from .init_config import IID, ConfigError, Deterministic, ExplicitCounts, SiteDependentBernoulli
from .paths import BiasedZ, NonbacktrackingStoppedAtLeaves, SRW, SRWWithDeath, check_walker
from .rng import LANE_COUNT, LANE_DEATH, LANE_MOVE, MASK64, splitmix64

_U = np.uint64
_GOLDEN = _U(0x9E3779B97F4A7C15)
_M1 = _U(0xBF58476D1CE4E5B9)
_M2 = _U(0x94D049BB133111EB)
_IV = _U(0x6A09E667F3BCC908)


def splitmix64_vec(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):  # wrapping arithmetic is intended
        x = x + _GOLDEN
        x = (x ^ (x >> _U(30))) * _M1
        x = (x ^ (x >> _U(27))) * _M2
    return x ^ (x >> _U(31))


def combine_vec(*parts) -> np.ndarray:
    h = _IV
    for p in parts:
        h = splitmix64_vec(np.asarray(p, dtype=np.uint64) ^ h)
    return h


def uniform_vec(key: np.ndarray, counter_mix: np.ndarray) -> np.ndarray:
    """Vector form of ``rng.uniform`` given precomputed splitmix64(counter << 2 | lane)."""
    x = splitmix64_vec(key ^ counter_mix)
    return (x >> _U(11)).astype(np.float64) * (1.0 / (1 << 53))


def _counter_mix(n: int, lane: int) -> np.ndarray:
    return np.array([splitmix64((j << 2 | lane) & MASK64) for j in range(n)], dtype=np.uint64)


@dataclass
class FiniteGraph:
    """Dense arrays for a graph whose vertices have all been interned."""

    graph: Graph
    adj: np.ndarray  # (V, maxdeg), padded with -1
    deg: np.ndarray
    absorbing: np.ndarray
    leaf: np.ndarray
    vhash: np.ndarray  # uint64 label hashes

    @property
    def n(self) -> int:
        return len(self.deg)

    @classmethod
    def build(cls, g: Graph, limit: int = 500_000) -> "FiniteGraph":
        seen = {0}
        frontier = [0]
        while frontier:
            nxt = []
            for v in frontier:
                if g.is_absorbing(v):
                    continue
                for w in g.neighbors(v):
                    if w not in seen:
                        seen.add(w)
                        nxt.append(w)
                        if len(seen) > limit:
                            raise ConfigError("graph is too large (or infinite) for batch runs")
            frontier = nxt
        V = len(g)
        if len(seen) != V:
            raise ConfigError("graph has unreachable interned vertices")
        nbrs = [g.neighbors(v) if not g.is_absorbing(v) else [] for v in range(V)]
        maxdeg = max(len(x) for x in nbrs)
        adj = np.full((V, max(maxdeg, 1)), -1, dtype=np.int64)
        for v, row in enumerate(nbrs):
            adj[v, : len(row)] = row
        deg = np.array([len(x) for x in nbrs], dtype=np.int64)
        absorbing = np.array([g.is_absorbing(v) for v in range(V)])
        leaf = np.array([g.is_leaf(v) for v in range(V)])
        vhash = np.array([g.key(v) for v in range(V)], dtype=np.uint64)
        return cls(g, adj, deg, absorbing, leaf, vhash)


def count_matrix(fg: FiniteGraph, rule, count_seeds) -> np.ndarray:
    """Pile sizes, one row per replica; column 0 (the root) is zero."""
    R = len(count_seeds)
    V = fg.n
    g = fg.graph
    if isinstance(rule, Deterministic):
        out = np.full((R, V), rule.k, dtype=np.int64)
    elif isinstance(rule, ExplicitCounts):
        row = np.array([int(rule.counts.get(g._labels[v], 0)) for v in range(V)], dtype=np.int64)
        out = np.tile(row, (R, 1))
    else:
        seeds = np.asarray(count_seeds, dtype=np.uint64)[:, None]
        keys = combine_vec(seeds, fg.vhash[None, :])
        u = uniform_vec(keys, np.uint64(splitmix64((0 << 2 | LANE_COUNT) & MASK64)))
        if isinstance(rule, IID):
            if rule.pmf.p_inf > 0:
                raise ConfigError("batch runs need finite pile sizes")
            cdf = np.asarray(rule.pmf.cdf)
            out = np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1).astype(np.int64)
        elif isinstance(rule, SiteDependentBernoulli):
            norms = np.array([sum(c * c for c in g._labels[v]) if v else 1 for v in range(V)], dtype=float)
            p = np.minimum(1.0, rule.alpha / norms)
            out = (u < p[None, :]).astype(np.int64)
        else:
            raise ConfigError(f"unknown configuration rule {rule!r}")
    out[:, 0] = 0
    return out


@dataclass
class BatchOutcome:
    root_visits: np.ndarray  # (R,)
    curve: np.ndarray  # (R, steps + 1) cumulative root visits
    activation: np.ndarray  # (R, V) activation time or -1
    steps: int
    horizon: int
    labels: list

    def visited_by(self, t: int) -> np.ndarray:
        """Non-root vertices activated at time <= t, per replica."""
        a = self.activation[:, 1:]
        return ((a >= 0) & (a <= t)).sum(axis=1)

    def visits_at(self, t: int) -> np.ndarray:
        return self.curve[:, min(t, self.curve.shape[1] - 1)]

    def outcome(self, r: int) -> SimOutcome:
        """Replica r in the scalar engine's format."""
        act = {self.labels[v]: int(s) for v, s in enumerate(self.activation[r]) if s >= 0}
        curve = self.curve[r].tolist()
        if len(curve) < self.horizon + 1:
            curve += [curve[-1]] * (self.horizon + 1 - len(curve))
        return SimOutcome(int(self.root_visits[r]), act, curve, horizon=self.horizon,
                          steps=self.horizon, root_label=self.labels[0])


def run_batch(fg: FiniteGraph, counts: np.ndarray, walker, horizon: int, path_seeds,
              max_active: int = 10**7) -> BatchOutcome:
    """Simulate ``len(path_seeds)`` replicas for ``horizon`` steps (or until all idle)."""
    check_walker(walker, fg.graph)
    if not isinstance(walker, (SRW, SRWWithDeath, BiasedZ, NonbacktrackingStoppedAtLeaves)):
        raise ConfigError(f"batch runs do not support walker {walker!r}")
    R = len(path_seeds)
    V = fg.n
    seeds = np.asarray(path_seeds, dtype=np.uint64)
    death_p = walker.p if isinstance(walker, SRWWithDeath) else 1.0
    nonback = isinstance(walker, NonbacktrackingStoppedAtLeaves)
    p_right = walker.p_right if isinstance(walker, BiasedZ) else None
    adj, deg, absorbing, leaf, vhash = fg.adj, fg.deg, fg.absorbing, fg.leaf, fg.vhash

    rep = np.arange(R, dtype=np.int64)
    pos = np.zeros(R, dtype=np.int64)
    prev = np.full(R, -1, dtype=np.int64)
    age = np.zeros(R, dtype=np.int64)
    key = combine_vec(seeds, vhash[0], np.uint64(0))
    act = np.full((R, V), -1, dtype=np.int64)
    act[:, 0] = 0
    visits = np.zeros(R, dtype=np.int64)
    curve = [visits.copy()]
    cm = _counter_mix(64, LANE_MOVE)
    cd = _counter_mix(64, LANE_DEATH)
    t = 0
    while t < horizon and pos.size:
        t += 1
        if age.max() >= len(cm):
            cm = _counter_mix(2 * len(cm) + int(age.max()), LANE_MOVE)
            cd = _counter_mix(len(cm), LANE_DEATH)
        alive = ~absorbing[pos]
        if death_p < 1.0:
            alive &= uniform_vec(key, cd[age]) < death_p
        if nonback:
            alive &= ~((age > 0) & leaf[pos])
        if not alive.all():
            rep, pos, prev, age, key = rep[alive], pos[alive], prev[alive], age[alive], key[alive]
        u = uniform_vec(key, cm[age])
        d = deg[pos]
        if p_right is not None:
            idx = np.where(u < p_right, 0, 1)
        elif nonback:
            skip = (prev >= 0) & (d > 1)
            idx = (u * (d - skip)).astype(np.int64)
            slot = (adj[pos] == prev[:, None]).argmax(axis=1)
            idx += skip & (idx >= slot)
        else:
            idx = (u * d).astype(np.int64)
        nxt = adj[pos, idx]
        prev, pos, age = pos, nxt, age + 1
        at_root = pos == 0
        if at_root.any():
            visits += np.bincount(rep[at_root], minlength=R)
        fresh = act[rep, pos] < 0
        if fresh.any():
            cells = np.unique(rep[fresh] * V + pos[fresh])
            fr, fv = cells // V, cells % V
            act[fr, fv] = t
            c = counts[fr, fv]
            has = c > 0
            if has.any():
                fr, fv, c = fr[has], fv[has], c[has]
                total = int(c.sum())
                new_rep = np.repeat(fr, c)
                new_pos = np.repeat(fv, c)
                starts = np.repeat(np.cumsum(c) - c, c)
                new_idx = (np.arange(total) - starts + 1).astype(np.uint64)
                new_key = combine_vec(seeds[new_rep], vhash[new_pos], new_idx)
                rep = np.concatenate((rep, new_rep))
                pos = np.concatenate((pos, new_pos))
                prev = np.concatenate((prev, np.full(total, -1, dtype=np.int64)))
                age = np.concatenate((age, np.zeros(total, dtype=np.int64)))
                key = np.concatenate((key, new_key))
        curve.append(visits.copy())
        if pos.size > max_active:
            raise CappedRunError(f"more than {max_active} active frogs in batch at step {t}", None)
    return BatchOutcome(visits, np.stack(curve, axis=1), act, t, horizon, list(fg.graph._labels))
