import random

import pytest
from hypothesis import given, settings, strategies as st

from frogmodel.graph import (DaryTree, ExplicitGraph, GraphError, GraphKind, Lattice, RegularTree,
                             ResourceCapError, truncated_binary_tree)


def test_lattice_z1_root_neighbors():
    g = Lattice(1)
    nb = g.neighbors(g.root)
    assert [g.coordinates(v) for v in nb] == [(1,), (-1,)]


def test_lattice_z2_coordinates():
    g = Lattice(2)
    assert g.coordinates(0) == (0, 0)
    assert g.coordinates(g.neighbors(0)[0]) == (1, 0)
    assert [g.coordinates(v) for v in g.neighbors(0)] == [(1, 0), (-1, 0), (0, 1), (0, -1)]


def test_binary_tree_root_has_two_children():
    g = DaryTree(2)
    nb = g.neighbors(g.root)
    assert len(nb) == 2
    assert g.coordinates(nb[0]) == "0"
    # parent first, then children left to right
    assert [g.coordinates(v) for v in g.neighbors(nb[0])] == ["", "00", "01"]


def test_explicit_path_graph_neighbors():
    g = ExplicitGraph([("o", "a"), ("a", "b")], "o")
    a = g.handle("a")
    assert [g.label(v) for v in g.neighbors(a)] == ["o", "b"]
    assert g.root == 0 and g.label(0) == "o"


def test_degrees():
    z3 = Lattice(3)
    assert all(z3.degree(v) == 6 for v in [0] + z3.neighbors(0))
    t = DaryTree(3, depth_cap=3)
    assert t.degree(0) == 3
    c = t.neighbors(0)[1]
    assert t.degree(c) == 4
    r = RegularTree(3)
    assert r.degree(0) == 3 and r.degree(r.neighbors(0)[0]) == 3


def test_depth_cap_vertices_absorb():
    t = DaryTree(2, depth_cap=2)
    leaf = t.handle("01")
    assert t.is_absorbing(leaf) and t.is_leaf(leaf)
    assert not t.is_absorbing(t.handle("0"))
    with pytest.raises(GraphError):
        t.handle("010")


def test_unknown_handle_is_usage_error():
    g = Lattice(2)
    with pytest.raises(GraphError):
        g.neighbors(5)
    with pytest.raises(GraphError):
        g.coordinates(-1)


def test_explicit_graph_must_be_connected():
    with pytest.raises(GraphError):
        ExplicitGraph([("o", "a"), ("b", "c")], "o")


def test_explicit_parse_format():
    g = ExplicitGraph.parse("# comment\no a\na b\nroot o\n")
    assert g.names == ["o", "a", "b"]
    with pytest.raises(GraphError):
        ExplicitGraph.parse("o a\n")


def test_handle_determinism():
    def issue(g):
        out = []
        v = 0
        rng = random.Random(4)
        for _ in range(200):
            v = rng.choice(g.neighbors(v))
            out.append(v)
        return out, list(g._labels)

    assert issue(Lattice(2)) == issue(Lattice(2))
    assert issue(DaryTree(3)) == issue(DaryTree(3))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(0, 10**6))
def test_lattice_symmetry_sampled(d, seed):
    g = Lattice(d)
    rng = random.Random(seed)
    v = 0
    for _ in range(50):
        for w in g.neighbors(v):
            assert v in g.neighbors(w)
        v = rng.choice(g.neighbors(v))


@pytest.mark.parametrize("g", [DaryTree(2, 4), RegularTree(3, 3), truncated_binary_tree(),
                               ExplicitGraph([("o", "a"), ("a", "b"), ("b", "o"), ("b", "c")], "o")])
def test_symmetry_exhaustive_on_finite_graphs(g):
    frontier, seen = [0], {0}
    while frontier:
        v = frontier.pop()
        for w in g.neighbors(v):
            if not g.is_absorbing(w):
                assert v in g.neighbors(w)
            if w not in seen:
                seen.add(w)
                frontier.append(w)


def test_vertex_cap():
    g = Lattice(2, max_vertices=3)
    with pytest.raises(ResourceCapError):
        g.neighbors(0)


def test_graph_kind_parse_roundtrip():
    assert GraphKind.parse("lattice(2)") == GraphKind("lattice", 2)
    gk = GraphKind.parse("tree(2, depth=6)")
    assert gk.depth_cap == 6 and isinstance(gk.build(), DaryTree)
    assert GraphKind.parse("regular_tree(3)").build().degree(0) == 3
    with pytest.raises(GraphError):
        GraphKind.parse("torus(3)")


def test_graph_kind_explicit_file(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text("o a\na b\nroot o\n")
    gk = GraphKind.parse(f"explicit({p})")
    g = gk.build()
    assert g.names == ["o", "a", "b"]
