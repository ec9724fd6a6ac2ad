"""Frog path generators.

A frog is identified by ``FrogKey(origin, index)``.  Its j-th move is drawn
from a uniform keyed by (master seed, origin label, index, j), so paths of
distinct frogs are independent and adding a frog never perturbs another one.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .graph import Graph, Lattice
from .rng import LANE_DEATH, LANE_MOVE, frog_key, uniform

STOPPED = -1


class PathError(ValueError):
    pass


@dataclass(frozen=True)
class FrogKey:
    origin: object  # vertex label
    index: int  # 0 for the initial frog at the root, i >= 1 for sleeping frogs

    def __post_init__(self):
        if self.index < 0:
            raise PathError("frog index must be >= 0")


@dataclass(frozen=True)
class SRW:
    def describe(self) -> str:
        return "srw"


@dataclass(frozen=True)
class BiasedZ:
    p_right: float

    def __post_init__(self):
        if not 0.0 < self.p_right < 1.0:
            raise PathError("p_right must lie in (0, 1)")

    def describe(self) -> str:
        return f"biased({self.p_right})"


@dataclass(frozen=True)
class NonbacktrackingStoppedAtLeaves:
    def describe(self) -> str:
        return "nonbacktracking"


@dataclass(frozen=True)
class SRWWithDeath:
    """SRW that dies with probability 1 - p before each move."""

    p: float

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise PathError("survival probability must lie in (0, 1]")

    def describe(self) -> str:
        return f"srw_death({self.p})"


class PathTable:
    """Explicit paths keyed by (origin label, index); index 0 is the root's frog."""

    def __init__(self, paths: dict | None = None):
        self.paths: dict = {}
        for key, seq in (paths or {}).items():
            self[key] = seq

    def __setitem__(self, key, seq) -> None:
        origin, index = key
        seq = tuple(seq)
        if not seq or seq[0] != origin:
            raise PathError(f"path for {key!r} must start at its origin")
        self.paths[(origin, index)] = seq

    def __getitem__(self, key) -> tuple:
        try:
            return self.paths[tuple(key)]
        except KeyError:
            raise PathError(f"no path stored for frog {tuple(key)!r}") from None

    def __contains__(self, key) -> bool:
        return tuple(key) in self.paths

    def __iter__(self):
        return iter(self.paths)

    def __len__(self) -> int:
        return len(self.paths)

    def items(self):
        return self.paths.items()

    def copy(self) -> "PathTable":
        t = PathTable()
        t.paths = dict(self.paths)
        return t

    def validate(self, g: Graph) -> None:
        for key, seq in self.paths.items():
            hs = [g.handle(x) for x in seq]
            for a, b in zip(hs, hs[1:]):
                if b not in g.neighbors(a):
                    raise PathError(f"path {key!r}: {g.label(a)!r} and {g.label(b)!r} not adjacent")

    def dumps(self) -> str:
        lines = []
        for (origin, index), seq in sorted(self.paths.items(), key=lambda kv: (str(kv[0][0]), kv[0][1])):
            lines.append(f"{origin} {index} : " + " ".join(str(x) for x in seq))
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "PathTable":
        """Read lines ``origin index : v0 v1 v2 ...``."""
        table = cls()
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            head, sep, tail = line.partition(":")
            parts = head.split()
            if not sep or len(parts) != 2:
                raise PathError(f"line {lineno}: expected 'origin index : v0 v1 ...'")
            try:
                index = int(parts[1])
            except ValueError:
                raise PathError(f"line {lineno}: bad frog index {parts[1]!r}") from None
            key = (parts[0], index)
            if key in table:
                raise PathError(f"line {lineno}: duplicate frog {key!r}")
            table[key] = tail.split()
        return table

    @classmethod
    def load(cls, path) -> "PathTable":
        return cls.parse(Path(path).read_text())


@dataclass(frozen=True)
class ExplicitTable:
    table: PathTable

    def describe(self) -> str:
        return "explicit_table"

    def __hash__(self):
        return id(self.table)


def check_walker(walker, g: Graph) -> None:
    if isinstance(walker, BiasedZ) and not (isinstance(g, Lattice) and g.d == 1):
        raise PathError("biased walk is only defined on Z^1")


def step(walker, g: Graph, key: FrogKey, current: int, step_index: int, seed: int,
         previous: int | None = None) -> int:
    """Position after move ``step_index + 1``, or STOPPED.

    ``previous`` is the position before ``current``; only the nonbacktracking
    walker looks at it.
    """
    if isinstance(walker, ExplicitTable):
        seq = walker.table[(key.origin, key.index)]
        if step_index + 1 >= len(seq):
            return STOPPED
        return g.handle(seq[step_index + 1])
    k = frog_key(seed, g.key(g.handle(key.origin)), key.index)
    return _random_step(walker, g, k, current, step_index, previous)


def _random_step(walker, g: Graph, k: int, current: int, j: int, previous) -> int:
    if g.is_absorbing(current):
        return STOPPED
    if isinstance(walker, SRWWithDeath):
        if walker.p < 1.0 and uniform(k, j, LANE_DEATH) >= walker.p:
            return STOPPED
    nbrs = g.neighbors(current)
    u = uniform(k, j, LANE_MOVE)
    if isinstance(walker, BiasedZ):
        # Z^1 neighbor order is (+1, -1)
        return nbrs[0] if u < walker.p_right else nbrs[1]
    if isinstance(walker, NonbacktrackingStoppedAtLeaves):
        if j > 0 and g.is_leaf(current):
            return STOPPED
        if previous is not None and len(nbrs) > 1:
            nbrs = [w for w in nbrs if w != previous]
    if not nbrs:
        return STOPPED
    return nbrs[int(u * len(nbrs))]


def prefix(walker, g: Graph, key: FrogKey, length: int, seed: int) -> list[int]:
    """First ``length`` moves of frog ``key`` (fewer if it stops), as handles."""
    if length < 0:
        raise PathError("length must be >= 0")
    cur = g.handle(key.origin)
    out = [cur]
    prev = None
    for j in range(length):
        nxt = step(walker, g, key, cur, j, seed, previous=prev)
        if nxt == STOPPED:
            break
        prev, cur = cur, nxt
        out.append(cur)
    return out
