"""Rooted, locally finite graphs with lazily interned vertices.

Handles are dense integers issued in query order; handle 0 is always the root.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .rng import label_hash


class GraphError(ValueError):
    pass


class ResourceCapError(RuntimeError):
    pass


class Graph:
    """Base class: interning table plus cached adjacency lists."""

    kind = "graph"

    def __init__(self, max_vertices: int = 10**7):
        self.max_vertices = max_vertices
        self._labels: list = []
        self._index: dict = {}
        self._adj: list = []
        self._hash: list = []

    # -- interning -------------------------------------------------------
    def _intern(self, label) -> int:
        h = self._index.get(label)
        if h is None:
            h = len(self._labels)
            if h >= self.max_vertices:
                raise ResourceCapError(f"more than {self.max_vertices} vertices interned")
            self._index[label] = h
            self._labels.append(label)
            self._adj.append(None)
            self._hash.append(None)
        return h

    def _check(self, v: int) -> None:
        if not (isinstance(v, int) and 0 <= v < len(self._labels)):
            raise GraphError(f"unknown vertex handle {v!r}")

    @property
    def root(self) -> int:
        return 0

    def __len__(self) -> int:
        return len(self._labels)

    def handle(self, label) -> int:
        """Handle for a canonical label, interning it if it is a valid vertex."""
        label = self._normalize(label)
        if label not in self._index:
            self._validate_label(label)
        return self._intern(label)

    def label(self, v: int):
        self._check(v)
        return self._labels[v]

    def key(self, v: int) -> int:
        """Stable 64-bit hash of v's label, used to key random streams."""
        h = self._hash[v]
        if h is None:
            h = self._hash[v] = label_hash(self._labels[v])
        return h

    def neighbors(self, v: int) -> list[int]:
        adj = self._adj[v] if 0 <= v < len(self._adj) else None
        if adj is None:
            self._check(v)
            adj = self._adj[v] = [self._intern(lab) for lab in self._neighbor_labels(self._labels[v])]
        return adj

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))

    def coordinates(self, v: int):
        self._check(v)
        return self._format(self._labels[v])

    def is_absorbing(self, v: int) -> bool:
        return False

    def is_leaf(self, v: int) -> bool:
        return self.degree(v) <= 1

    # -- per-kind hooks --------------------------------------------------
    def _normalize(self, label):
        return label

    def _validate_label(self, label) -> None:
        raise GraphError(f"{label!r} is not a vertex of {self.kind}")

    def _neighbor_labels(self, label) -> list:
        raise NotImplementedError

    def _format(self, label):
        return label


class Lattice(Graph):
    """Z^d; neighbors ordered +e1, -e1, +e2, -e2, ..."""

    kind = "lattice"

    def __init__(self, d: int, max_vertices: int = 10**7):
        if d < 1:
            raise GraphError("lattice dimension must be >= 1")
        super().__init__(max_vertices)
        self.d = d
        self._intern((0,) * d)

    def _normalize(self, label):
        return tuple(int(c) for c in label)

    def _validate_label(self, label) -> None:
        if len(label) != self.d:
            raise GraphError(f"expected {self.d} coordinates, got {label!r}")

    def _neighbor_labels(self, x):
        out = []
        for i in range(self.d):
            for s in (1, -1):
                y = list(x)
                y[i] += s
                out.append(tuple(y))
        return out

    def norm(self, v: int) -> float:
        return sum(c * c for c in self._labels[v]) ** 0.5

    def describe(self) -> str:
        return f"lattice({self.d})"


class _Tree(Graph):
    """Rooted tree with labels = tuples of child indices; depth_cap vertices absorb."""

    def __init__(self, d: int, depth_cap: int | None, max_vertices: int):
        super().__init__(max_vertices)
        self.d = d
        self.depth_cap = depth_cap
        self._intern(())

    def _children(self, label) -> int:
        raise NotImplementedError

    def _normalize(self, label):
        if isinstance(label, str):
            if "." in label:
                return tuple(int(c) for c in label.split(".") if c)
            return tuple(int(c) for c in label)
        return tuple(int(c) for c in label)

    def _validate_label(self, label) -> None:
        if self.depth_cap is not None and len(label) > self.depth_cap:
            raise GraphError(f"{label!r} is below the depth cap")
        for depth, c in enumerate(label):
            if not 0 <= c < self._children(label[:depth]):
                raise GraphError(f"{label!r} is not a vertex of {self.kind}")

    def _neighbor_labels(self, label):
        out = [label[:-1]] if label else []
        if self.depth_cap is None or len(label) < self.depth_cap:
            out.extend(label + (i,) for i in range(self._children(label)))
        return out

    def _format(self, label):
        if self.d <= 10:
            return "".join(str(c) for c in label)
        return ".".join(str(c) for c in label)

    def depth(self, v: int) -> int:
        return len(self.label(v))

    def is_absorbing(self, v: int) -> bool:
        return self.depth_cap is not None and len(self._labels[v]) >= self.depth_cap

    def is_leaf(self, v: int) -> bool:
        return self.is_absorbing(v)


class DaryTree(_Tree):
    """T_d: every vertex has d children, so the root has degree d and others d+1."""

    kind = "dary_tree"

    def __init__(self, d: int, depth_cap: int | None = None, max_vertices: int = 10**7):
        if d < 2:
            raise GraphError("d-ary tree needs d >= 2")
        super().__init__(d, depth_cap, max_vertices)

    def _children(self, label) -> int:
        return self.d

    def describe(self) -> str:
        return f"tree({self.d}, depth={self.depth_cap})"


class RegularTree(_Tree):
    """d-regular tree: the root has d children, every other vertex d-1."""

    kind = "regular_tree"

    def __init__(self, d: int, depth_cap: int | None = None, max_vertices: int = 10**7):
        if d < 3:
            raise GraphError("d-regular tree needs d >= 3")
        super().__init__(d, depth_cap, max_vertices)

    def _children(self, label) -> int:
        return self.d if not label else self.d - 1

    def describe(self) -> str:
        return f"regular_tree({self.d}, depth={self.depth_cap})"


class ExplicitGraph(Graph):
    """Finite connected graph given by named edges.

    Handles follow insertion order with the root first, so they are fully
    determined by the edge list and root name.  Leaves are degree-1 vertices.
    """

    kind = "explicit"

    def __init__(self, edges, root, max_vertices: int = 10**7):
        super().__init__(max_vertices)
        adj: dict = {root: []}
        for a, b in edges:
            if a == b:
                raise GraphError(f"self-loop at {a!r}")
            for x in (a, b):
                adj.setdefault(x, [])
            if b not in adj[a]:
                adj[a].append(b)
                adj[b].append(a)
        self._names = adj
        self._intern(root)
        for name in adj:
            self._intern(name)
        for name, nbrs in adj.items():
            self._adj[self._index[name]] = [self._index[n] for n in nbrs]
        self._check_connected()

    def _check_connected(self) -> None:
        seen = {0}
        stack = [0]
        while stack:
            for w in self._adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) != len(self._labels):
            raise GraphError("explicit graph is not connected")

    def _neighbor_labels(self, label):
        return list(self._names[label])

    @property
    def names(self) -> list:
        return list(self._labels)

    def edges(self) -> list[tuple]:
        out = []
        for v, nbrs in enumerate(self._adj):
            out.extend((self._labels[v], self._labels[w]) for w in nbrs if w > v)
        return out

    def describe(self) -> str:
        return "explicit(" + ",".join(f"{a}-{b}" for a, b in self.edges()) + ")"

    @classmethod
    def parse(cls, text: str) -> "ExplicitGraph":
        """Read ``name1 name2`` edge lines and one ``root name`` line."""
        edges, root = [], None
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise GraphError(f"line {lineno}: expected two tokens, got {raw!r}")
            if parts[0] == "root":
                if root is not None:
                    raise GraphError(f"line {lineno}: root given twice")
                root = parts[1]
            else:
                edges.append((parts[0], parts[1]))
        if root is None:
            raise GraphError("no 'root NAME' line")
        return cls(edges, root)

    @classmethod
    def load(cls, path) -> "ExplicitGraph":
        return cls.parse(Path(path).read_text())


def truncated_binary_tree() -> ExplicitGraph:
    """The four-vertex graph o - o' with o' joined to u and v; root o."""
    return ExplicitGraph([("o", "o'"), ("o'", "u"), ("o'", "v")], "o")



@dataclass(frozen=True)
class GraphKind:
    """Recipe for a fresh graph instance; one per simulation worker."""

    name: str  # lattice | tree | regular_tree | explicit
    d: int = 0
    depth_cap: int | None = None
    edges: tuple = ()
    root: str = ""

    def __post_init__(self):
        if self.name not in ("lattice", "tree", "regular_tree", "explicit"):
            raise GraphError(f"unknown graph kind {self.name!r}")

    def build(self, max_vertices: int = 10**7) -> Graph:
        if self.name == "lattice":
            return Lattice(self.d, max_vertices)
        if self.name == "tree":
            return DaryTree(self.d, self.depth_cap, max_vertices)
        if self.name == "regular_tree":
            return RegularTree(self.d, self.depth_cap, max_vertices)
        return ExplicitGraph(self.edges, self.root, max_vertices)

    def describe(self) -> str:
        if self.name == "lattice":
            return f"lattice({self.d})"
        if self.name == "explicit":
            return "explicit(" + ",".join(f"{a}-{b}" for a, b in self.edges) + f"; root={self.root})"
        return f"{self.name}({self.d}, depth={self.depth_cap})"

    @classmethod
    def from_graph(cls, g: ExplicitGraph) -> "GraphKind":
        return cls("explicit", edges=tuple(g.edges()), root=g.label(0))

    @classmethod
    def parse(cls, text: str) -> "GraphKind":
        """``lattice(2)``, ``tree(2, depth=6)``, ``regular_tree(3)``, ``explicit(FILE)``."""
        m = re.fullmatch(r"\s*(\w+)\s*\((.*)\)\s*", text)
        if not m:
            raise GraphError(f"bad graph description {text!r}")
        name, args = m.group(1), m.group(2).strip()
        if name == "explicit":
            g = ExplicitGraph.load(args)
            return cls.from_graph(g)
        d, depth = None, None
        for part in filter(None, (a.strip() for a in args.split(","))):
            if part.startswith("depth"):
                val = part.split("=", 1)[1].strip()
                depth = None if val in ("none", "None", "inf") else int(val)
            else:
                d = int(part)
        if d is None:
            raise GraphError(f"graph {text!r} needs a dimension/degree")
        return cls(name, d, depth)
