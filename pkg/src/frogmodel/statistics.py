"""Frog model statistics and the frog-addition difference operator.

A statistic is any callable taking a ``SimOutcome`` to a nonnegative integer.
``delta`` evaluates the alternating subset sum

    sum over U of (-1)^(m - |U|) f(sigma_U(model))

for paths P^1..P^m that all start at one non-root vertex.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from itertools import combinations

from .engine import ExplicitModel, SimOutcome, kappa_v, restrict_to_frog, run_explicit, sigma_P, sigma_U
from .graph import ExplicitGraph
from .paths import PathError, PathTable


@dataclass(frozen=True)
class RootVisits:
    def __call__(self, out: SimOutcome) -> int:
        return out.root_visits

    def describe(self) -> str:
        return "r"


@dataclass(frozen=True)
class VisitIndicator:
    u: object
    t: int

    def __call__(self, out: SimOutcome) -> int:
        s = out.activation_time.get(self.u)
        return int(s is not None and s <= self.t)

    def describe(self) -> str:
        return f"a[{self.u},{self.t}]"


@dataclass(frozen=True)
class VisitedCount:
    t: int

    def __call__(self, out: SimOutcome) -> int:
        return out.activated_by(self.t)

    def describe(self) -> str:
        return f"V[{self.t}]"


@dataclass(frozen=True)
class RootVisitsFrom:
    u: object

    def __call__(self, out: SimOutcome) -> int:
        return out.root_visits_by_origin.get(self.u, 0)

    def describe(self) -> str:
        return f"r_{self.u}"


@dataclass(frozen=True)
class Sum:
    parts: tuple

    def __call__(self, out: SimOutcome) -> int:
        return sum(f(out) for f in self.parts)

    def describe(self) -> str:
        return " + ".join(f.describe() for f in self.parts)


@dataclass(frozen=True)
class Squared:
    """f^2, which is not concave under frog addition; used as a negative control."""

    inner: object

    def __call__(self, out: SimOutcome) -> int:
        return self.inner(out) ** 2

    def describe(self) -> str:
        return f"({self.inner.describe()})^2"


def evaluate(stat, m: ExplicitModel) -> int:
    return stat(run_explicit(m))


class IndeterminateDelta(ArithmeticError):
    def __init__(self, subset):
        super().__init__(f"statistic not finite on subset {subset!r}")
        self.subset = subset


def _check_same_origin(m: ExplicitModel, paths) -> None:
    if not paths:
        raise PathError("delta needs at least one path")
    origins = {p[0] for p in paths}
    if len(origins) != 1:
        raise PathError("all added paths must start at the same vertex")
    if m.root in origins:
        raise PathError("added paths cannot start at the root")


def subset_outcomes(m: ExplicitModel, paths) -> dict:
    """``run_explicit(sigma_U(m))`` for every subset U, keyed by index tuple."""
    out = {}
    for size in range(len(paths) + 1):
        for U in combinations(range(len(paths)), size):
            out[U] = run_explicit(sigma_U(m, [paths[i] for i in U]))
    return out


def delta_from_outcomes(stat, outcomes: dict, idx: tuple) -> int:
    total = 0
    m = len(idx)
    for size in range(m + 1):
        for U in combinations(idx, size):
            val = stat(outcomes[U])
            if val is None or val == float("inf"):
                raise IndeterminateDelta(U)
            total += (-1) ** (m - size) * val
    return total


def delta(stat, m: ExplicitModel, paths) -> int:
    """Iterated difference of ``stat`` over the added paths."""
    paths = [tuple(p) for p in paths]
    _check_same_origin(m, paths)
    outs = subset_outcomes(m, paths)
    return delta_from_outcomes(stat, outs, tuple(range(len(paths))))


# ----------------------------------------------------------------------------
# random small instances


def random_walk_path(g: ExplicitGraph, start, length: int, rng: random.Random) -> tuple:
    seq = [start]
    h = g.handle(start)
    for _ in range(length):
        h = rng.choice(g.neighbors(h))
        seq.append(g.label(h))
    return tuple(seq)


def random_explicit_graph(rng: random.Random, max_vertices: int = 6) -> ExplicitGraph:
    """Random connected graph on vertices '0'..'n-1' with root '0'."""
    n = rng.randint(2, max_vertices)
    names = [str(i) for i in range(n)]
    edges = set()
    for i in range(1, n):
        j = rng.randrange(i)
        edges.add((names[j], names[i]))
    for _ in range(rng.randint(0, n)):
        a, b = rng.sample(names, 2)
        if (a, b) not in edges and (b, a) not in edges:
            edges.add((a, b))
    return ExplicitGraph(sorted(edges), "0")


def random_instance(rng: random.Random, m_paths: int = 3, max_vertices: int = 6,
                    max_count: int = 2, max_len: int = 6) -> tuple[ExplicitModel, list]:
    """A random small model plus ``m_paths`` paths sharing a non-root origin."""
    g = random_explicit_graph(rng, max_vertices)
    root = g.label(0)
    table = PathTable()
    table[(root, 0)] = random_walk_path(g, root, rng.randint(1, max_len), rng)
    counts = {}
    for v in g.names[1:]:
        c = rng.randint(0, max_count)
        counts[v] = c
        for i in range(1, c + 1):
            table[(v, i)] = random_walk_path(g, v, rng.randint(0, max_len), rng)
    m = ExplicitModel(g, counts, table)
    v = rng.choice(g.names[1:])
    paths = [random_walk_path(g, v, rng.randint(0, max_len), rng) for _ in range(m_paths)]
    return m, paths


def standard_statistics(m: ExplicitModel, horizons=(1, 2, 3, 4, 6, 10**9)) -> list:
    """RootVisits plus every VisitIndicator / VisitedCount / RootVisitsFrom on m's graph."""
    nonroot = m.graph.names[1:]
    stats = [RootVisits()]
    stats += [VisitIndicator(u, t) for u in nonroot for t in horizons]
    stats += [VisitedCount(t) for t in horizons]
    stats += [RootVisitsFrom(u) for u in nonroot]
    return stats


@dataclass
class ClassReport:
    statistic: str
    m_max: int
    instances: int
    checks: int = 0
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> str:
        return json.dumps({
            "statistic": self.statistic,
            "m_max": self.m_max,
            "instances": self.instances,
            "checks": self.checks,
            "failures": self.failures,
        }, sort_keys=True, default=str)


def verify_statistic_class(stats, generator=None, m_max: int = 3, n_instances: int = 500,
                           seed: int = 0, monotone: bool = True) -> ClassReport:
    """Check (-1)^m Delta f <= 0 for every nonempty subset of up to m_max added paths.

    ``stats`` is a statistic, a list of them, or a callable mapping a model to
    a list (evaluated per instance).  ``generator(rng)`` yields (model, paths);
    the default draws graphs with <= 6 vertices, counts <= 2, paths <= 6.
    With ``monotone`` each statistic is also checked never to decrease when
    any single frog is appended.
    """
    if m_max < 2:
        raise ValueError("m_max must be >= 2")
    rng = random.Random(seed)
    gen = generator or (lambda r: random_instance(r, m_paths=m_max))
    name = _stats_name(stats)
    report = ClassReport(name, m_max, n_instances)
    for _ in range(n_instances):
        m, paths = gen(rng)
        paths = [tuple(p) for p in paths]
        fs = stats(m) if callable(stats) and not hasattr(stats, "describe") else (
            stats if isinstance(stats, (list, tuple)) else [stats])
        outs = subset_outcomes(m, paths)
        for size in range(1, min(m_max, len(paths)) + 1):
            for idx in combinations(range(len(paths)), size):
                for f in fs:
                    d = delta_from_outcomes(f, outs, idx)
                    report.checks += 1
                    if (-1) ** size * d > 0:
                        report.failures.append({
                            "model": m.digest(),
                            "statistic": f.describe(),
                            "paths": [paths[i] for i in idx],
                            "m": size,
                            "value": d,
                        })
        if monotone:
            _check_monotone(m, fs, rng, report)
    return report


def _check_monotone(m: ExplicitModel, fs, rng: random.Random, report: ClassReport) -> None:
    base = run_explicit(m)
    v = rng.choice(m.graph.names[1:])
    extra = random_walk_path(m.graph, v, rng.randint(0, 6), rng)
    bigger = run_explicit(sigma_P(m, extra))
    for f in fs:
        report.checks += 1
        if f(bigger) < f(base):
            report.failures.append({
                "model": m.digest(), "statistic": f.describe(), "paths": [extra],
                "m": 0, "value": f(bigger) - f(base),
            })


def _stats_name(stats) -> str:
    if hasattr(stats, "describe"):
        return stats.describe()
    if isinstance(stats, (list, tuple)):
        return ", ".join(sorted({type(f).__name__ for f in stats}))
    return getattr(stats, "__name__", "statistics")


@dataclass
class BuilderReport:
    instances: int
    max_checks: int = 0
    sum_checks: int = 0
    failures: list = field(default_factory=list)
    linearity: ClassReport | None = None

    @property
    def passed(self) -> bool:
        return not self.failures and (self.linearity is None or self.linearity.passed)


def verify_builder_lemmas(n_instances: int = 200, seed: int = 0) -> BuilderReport:
    """Check the max- and sum-decompositions over frogs at a vertex.

    (a) VisitIndicator(u, t) equals the max over kappa_v(m) and each
        single-frog restriction at v, for every non-root v;
    (b) RootVisitsFrom(u) equals the sum over u's frogs of single-frog
        restrictions at u;
    (c) a sum of the statistics passes verify_statistic_class.
    """
    rng = random.Random(seed)
    rep = BuilderReport(n_instances)
    for _ in range(n_instances):
        m, _paths = random_instance(rng, m_paths=0)
        names = m.graph.names[1:]
        full = run_explicit(m)
        for v in names:
            c = m.counts.get(v, 0)
            k_out = run_explicit(kappa_v(m, v))
            singles = [run_explicit(restrict_to_frog(m, v, i)) for i in range(1, c + 1)]
            for u in names:
                for t in (1, 2, 3, 5, 10**9):
                    f = VisitIndicator(u, t)
                    rhs = max([f(k_out)] + [f(o) for o in singles])
                    rep.max_checks += 1
                    if f(full) != rhs:
                        rep.failures.append({"lemma": "max", "model": m.digest(), "v": v, "u": u, "t": t})
            f = RootVisitsFrom(v)
            rhs = sum(f(o) for o in singles)
            # v's own frogs never affect whether v is woken, so both sides
            # vanish together when v is unvisited
            rhs_ok = f(full) == rhs
            rep.sum_checks += 1
            if not rhs_ok:
                rep.failures.append({"lemma": "sum", "model": m.digest(), "v": v})

    def summed(model):
        parts = tuple(RootVisitsFrom(u) for u in model.graph.names[1:]) + (VisitedCount(10**9), RootVisits())
        return [Sum(parts)]

    rep.linearity = verify_statistic_class(summed, m_max=3, n_instances=max(1, n_instances // 2), seed=seed + 1)
    return rep
