"""Frog model dynamics.

Synchronous discrete time.  At step t every active frog makes one move (or
stops).  The first time any frog occupies a vertex, that vertex is activated
at time t and its sleeping frogs start their own paths at step t + 1.  A root
visit is any move that lands on the root; the initial frog sitting on the
root at time 0 is not a visit.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field

from .graph import ExplicitGraph, Graph, GraphKind, ResourceCapError
from .init_config import ConfigError, ExplicitCounts, sample_count
from .paths import (
    BiasedZ,
    ExplicitTable,
    NonbacktrackingStoppedAtLeaves,
    PathError,
    PathTable,
    SRWWithDeath,
    check_walker,
)
from .rng import LANE_DEATH, LANE_MOVE, MASK64, combine, frog_key, splitmix64

DEFAULT_MAX_ACTIVE = 10**7
DEFAULT_MAX_VERTICES = 10**7


class CappedRunError(RuntimeError):
    """A resource cap was hit; ``outcome`` holds the state reached so far."""

    def __init__(self, message: str, outcome: "SimOutcome"):
        super().__init__(message)
        self.outcome = outcome


@dataclass(frozen=True)
class FrogModelSpec:
    graph: GraphKind
    rule: object
    walker: object
    horizon: int
    seed: int
    count_seed: int | None = None  # defaults to a value derived from seed
    max_active: int = DEFAULT_MAX_ACTIVE
    max_vertices: int = DEFAULT_MAX_VERTICES

    def __post_init__(self):
        if self.horizon < 1:
            raise ConfigError("horizon must be >= 1")

    @property
    def path_seed(self) -> int:
        return self.seed & MASK64

    @property
    def effective_count_seed(self) -> int:
        if self.count_seed is not None:
            return self.count_seed & MASK64
        return combine(0x636F756E74, self.seed)

    def digest(self) -> str:
        payload = {
            "graph": self.graph.describe(),
            "rule": self.rule.describe(),
            "walker": self.walker.describe(),
            "horizon": self.horizon,
            "seed": self.seed,
            "count_seed": self.count_seed,
        }
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]


@dataclass
class SimOutcome:
    root_visits: int
    activation_time: dict  # vertex label -> time of first occupation
    visits_by_step: list  # cumulative root visits after each step 0..steps
    root_visits_by_origin: dict = field(default_factory=dict)
    horizon: int = 0
    steps: int = 0  # steps actually simulated (< horizon on early stop)
    stop_reason: str = "horizon"
    frogs_woken: int = 1
    root_label: object = None

    @property
    def visited(self) -> set:
        return set(self.activation_time)

    def activated_by(self, t: int) -> int:
        """Number of non-root vertices activated at time <= t."""
        return sum(1 for lab, s in self.activation_time.items() if s <= t and lab != self.root_label)

    def visits_at(self, t: int) -> int:
        if t >= len(self.visits_by_step):
            return self.visits_by_step[-1]
        return self.visits_by_step[t]

    def to_json(self, seed=None, digest=None, times: bool = False, curve: bool = False) -> str:
        rec = {
            "seed": seed,
            "spec_digest": digest,
            "r": self.root_visits,
            "visited": len(self.activation_time) - 1,
            "steps": self.steps,
            "stop_reason": self.stop_reason,
        }
        if times:
            rec["activation_times"] = {str(k): v for k, v in self.activation_time.items()}
        if curve:
            rec["visits_by_step"] = self.visits_by_step
        return json.dumps(rec, sort_keys=True)


def _counter_table(n: int, lane: int) -> list[int]:
    return [splitmix64((j << 2 | lane) & MASK64) for j in range(n)]


def simulate(g: Graph, count_of, walker, horizon: int, path_seed: int, *,
             stop_when_idle: bool = False, targets=None, max_visited: int | None = None,
             max_active: int = DEFAULT_MAX_ACTIVE, table: PathTable | None = None) -> SimOutcome:
    """Core loop shared by ``run`` and ``run_explicit``.

    ``count_of(handle)`` gives the pile size at a newly activated vertex.
    ``targets`` (handles) and ``max_visited`` end the run early once all
    targets are activated or that many non-root vertices are.
    """
    explicit = isinstance(walker, ExplicitTable)
    death_p = walker.p if isinstance(walker, SRWWithDeath) else 1.0
    biased = walker.p_right if isinstance(walker, BiasedZ) else None
    nonback = isinstance(walker, NonbacktrackingStoppedAtLeaves)
    neighbors = g.neighbors
    is_absorbing = g.is_absorbing
    absorbing_possible = type(g).is_absorbing is not Graph.is_absorbing
    is_leaf = g.is_leaf
    labels = g._labels
    gkey = g.key

    act: dict = {0: 0}
    by_origin: dict = {}
    curve = [0]
    root_visits = 0
    woken = 1
    n_visited = 0
    pending = set(targets) if targets else None
    if pending is not None:
        pending.discard(0)

    # frog state, parallel lists: position, previous position, moves made,
    # stream key (or path tuple for explicit tables), origin handle
    pos = [0]
    prev = [-1]
    age = [0]
    origin = [0]
    if explicit:
        root_label = labels[0]
        seqs = [tuple(g.handle(x) for x in table[(root_label, 0)])]
        if len(seqs[0]) < 2:
            pos, prev, age, origin, seqs = [], [], [], [], []
    else:
        keys = [frog_key(path_seed, gkey(0), 0)]
    cm = _counter_table(64, LANE_MOVE)
    cd = _counter_table(64, LANE_DEATH)

    t = 0
    stop = "horizon"

    def outcome(steps, reason):
        return SimOutcome(
            root_visits=root_visits,
            activation_time={labels[h]: s for h, s in act.items()},
            visits_by_step=curve,
            root_visits_by_origin={labels[h]: c for h, c in by_origin.items()},
            horizon=horizon,
            steps=steps,
            stop_reason=reason,
            frogs_woken=woken,
            root_label=labels[0],
        )

    try:
        while t < horizon:
            if not pos:
                if stop_when_idle:
                    stop = "idle"
                    break
                curve.extend([root_visits] * (horizon - t))
                t = horizon
                break
            t += 1
            n = len(pos)
            npos, nprev, nage, norig = [], [], [], []
            nkey = [] if not explicit else None
            nseq = [] if explicit else None
            newly = []
            if not explicit and (len(cm) <= max(age)):
                cm = _counter_table(2 * len(cm) + max(age), LANE_MOVE)
                cd = _counter_table(len(cm), LANE_DEATH)
            for i in range(n):
                cur = pos[i]
                j = age[i]
                if explicit:
                    seq = seqs[i]
                    if j + 1 >= len(seq):
                        continue
                    nxt = seq[j + 1]
                else:
                    if absorbing_possible and is_absorbing(cur):
                        continue
                    k = keys[i]
                    if death_p < 1.0:
                        x = (k ^ cd[j]) + 0x9E3779B97F4A7C15 & MASK64
                        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9 & MASK64
                        x = (x ^ (x >> 27)) * 0x94D049BB133111EB & MASK64
                        if ((x ^ (x >> 31)) >> 11) * 1.1102230246251565e-16 >= death_p:
                            continue
                    nb = neighbors(cur)
                    if nonback:
                        if j > 0 and is_leaf(cur):
                            continue
                        p = prev[i]
                        if p >= 0 and len(nb) > 1:
                            nb = [w for w in nb if w != p]
                    x = (k ^ cm[j]) + 0x9E3779B97F4A7C15 & MASK64
                    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9 & MASK64
                    x = (x ^ (x >> 27)) * 0x94D049BB133111EB & MASK64
                    u = ((x ^ (x >> 31)) >> 11) * 1.1102230246251565e-16
                    if biased is not None:
                        nxt = nb[0] if u < biased else nb[1]
                    else:
                        nxt = nb[int(u * len(nb))]
                o = origin[i]
                # a replayed path that is used up is dropped now, so the run ends with its last move
                if not explicit or j + 2 < len(seq):
                    npos.append(nxt)
                    nprev.append(cur)
                    nage.append(j + 1)
                    norig.append(o)
                    if explicit:
                        nseq.append(seq)
                    else:
                        nkey.append(k)
                if nxt == 0:
                    root_visits += 1
                    by_origin[o] = by_origin.get(o, 0) + 1
                elif nxt not in act:
                    act[nxt] = t
                    n_visited += 1
                    newly.append(nxt)
                    if pending is not None:
                        pending.discard(nxt)
            for v in newly:
                c = count_of(v)
                if c:
                    woken += c
                    vlab = labels[v]
                    if explicit:
                        for idx in range(1, c + 1):
                            seq = tuple(g.handle(x) for x in table[(vlab, idx)])
                            if len(seq) < 2:
                                continue
                            npos.append(v)
                            nprev.append(-1)
                            nage.append(0)
                            norig.append(v)
                            nseq.append(seq)
                    else:
                        vk = gkey(v)
                        for idx in range(1, c + 1):
                            npos.append(v)
                            nprev.append(-1)
                            nage.append(0)
                            norig.append(v)
                            nkey.append(frog_key(path_seed, vk, idx))
            pos, prev, age, origin = npos, nprev, nage, norig
            if explicit:
                seqs = nseq
            else:
                keys = nkey
            curve.append(root_visits)
            if len(pos) > max_active:
                raise CappedRunError(f"more than {max_active} active frogs at step {t}", outcome(t, "capped"))
            if pending is not None and not pending:
                stop = "targets"
                break
            if max_visited is not None and n_visited >= max_visited:
                stop = "visited_threshold"
                break
    except ResourceCapError as exc:
        raise CappedRunError(str(exc), outcome(t - 1, "capped")) from None
    return outcome(t, stop)


def run(spec: FrogModelSpec, *, stop_when_idle: bool = False, targets=None,
        max_visited: int | None = None, graph: Graph | None = None) -> SimOutcome:
    """Simulate ``spec`` for ``spec.horizon`` steps on a fresh graph.

    ``targets`` are vertex labels; the run stops once all are activated.
    """
    g = graph if graph is not None else spec.graph.build(spec.max_vertices)
    check_walker(spec.walker, g)
    rule = spec.rule
    cseed = spec.effective_count_seed
    labels = g._labels
    gkey = g.key

    def count_of(v):
        return sample_count(rule, v, labels[v], cseed, gkey(v))

    tgt = [g.handle(x) for x in targets] if targets else None
    table = spec.walker.table if isinstance(spec.walker, ExplicitTable) else None
    return simulate(g, count_of, spec.walker, spec.horizon, spec.path_seed,
                    stop_when_idle=stop_when_idle, targets=tgt, max_visited=max_visited,
                    max_active=spec.max_active, table=table)


# ----------------------------------------------------------------------------
# deterministic models


@dataclass
class ExplicitModel:
    """Finite graph, explicit frog counts and explicit paths.

    The root's initial frog has key (root, 0); sleeping frog i at v has key
    (v, i) for 1 <= i <= counts[v].
    """

    graph: ExplicitGraph
    counts: dict
    table: PathTable

    def __post_init__(self):
        self.counts = {k: int(c) for k, c in self.counts.items() if c}
        self.validate()

    @property
    def root(self):
        return self.graph.label(0)

    def validate(self) -> None:
        g = self.graph
        names = set(g.names)
        if self.root in self.counts:
            raise ConfigError("the root carries no sleeping frogs")
        for v, c in self.counts.items():
            if v not in names:
                raise ConfigError(f"count given for unknown vertex {v!r}")
            if c < 0:
                raise ConfigError(f"negative count at {v!r}")
        needed = [(self.root, 0)] + [(v, i) for v, c in self.counts.items() for i in range(1, c + 1)]
        for key in needed:
            if key not in self.table:
                raise PathError(f"path table lacks frog {key!r}")
        self.table.validate(g)

    def frogs(self) -> list:
        return [(self.root, 0)] + [(v, i) for v in self.graph.names for i in range(1, self.counts.get(v, 0) + 1)]

    def digest(self) -> str:
        payload = {
            "edges": sorted(map(list, self.graph.edges())),
            "root": self.root,
            "paths": {f"{o}/{i}": list(self.table[(o, i)]) for o, i in self.frogs()},
        }
        return hashlib.sha256(json.dumps(payload, sort_keys=True, default=str).encode()).hexdigest()[:16]


def run_explicit(m: ExplicitModel, *, horizon: int | None = None) -> SimOutcome:
    """Run a deterministic model until every woken frog has finished its path.

    With ``horizon`` the run is cut at that step instead.
    """
    g = m.graph
    labels = g._labels
    counts = m.counts

    def count_of(v):
        return counts.get(labels[v], 0)

    limit = horizon
    if limit is None:
        # every frog moves at most len(path)-1 times and wakes within the sum
        limit = sum(len(m.table[k]) for k in m.frogs()) + 1
    out = simulate(g, count_of, ExplicitTable(m.table), limit, 0,
                   stop_when_idle=horizon is None, table=m.table)
    if horizon is None:
        out.horizon = out.steps
    return out


def sigma_P(m: ExplicitModel, path) -> ExplicitModel:
    """Add one sleeping frog with path ``path`` at ``path[0]``."""
    path = tuple(path)
    if not path:
        raise PathError("cannot add a frog with an empty path")
    v = path[0]
    if v == m.root:
        raise PathError("frogs cannot be added at the root")
    counts = dict(m.counts)
    counts[v] = counts.get(v, 0) + 1
    table = m.table.copy()
    table[(v, counts[v])] = path
    return ExplicitModel(m.graph, counts, table)


def sigma_U(m: ExplicitModel, paths) -> ExplicitModel:
    for p in paths:
        m = sigma_P(m, p)
    return m


def kappa_v(m: ExplicitModel, v) -> ExplicitModel:
    """Delete every frog that starts at ``v``."""
    if v == m.root:
        raise ConfigError("cannot delete the root's frog")
    counts = dict(m.counts)
    counts.pop(v, None)
    table = PathTable()
    table.paths = {k: s for k, s in m.table.items() if k[0] != v}
    return ExplicitModel(m.graph, counts, table)


def restrict_to_frog(m: ExplicitModel, v, i) -> ExplicitModel:
    """kappa_v(m) with only frog (v, i) put back."""
    return sigma_P(kappa_v(m, v), m.table[(v, i)])


def random_schedule_run(m: ExplicitModel, seed: int = 0) -> tuple[int, set]:
    """Asynchronous run: one uniformly chosen active frog moves at a time.

    Returns (root visits, visited labels) once all frogs are exhausted; used
    to check that these statistics do not depend on the move schedule.
    """
    rng = random.Random(seed)
    root = m.root
    visited = {root}
    active = [[m.table[(root, 0)], 0]]
    visits = 0
    while active:
        i = rng.randrange(len(active))
        seq, j = active[i]
        if j + 1 >= len(seq):
            active[i] = active[-1]
            active.pop()
            continue
        active[i][1] = j + 1
        x = seq[j + 1]
        if x == root:
            visits += 1
        elif x not in visited:
            visited.add(x)
            for idx in range(1, m.counts.get(x, 0) + 1):
                active.append([m.table[(x, idx)], 0])
    return visits, visited


def explicit_counts_rule(m: ExplicitModel) -> ExplicitCounts:
    return ExplicitCounts(dict(m.counts))
