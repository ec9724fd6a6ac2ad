import numpy as np
import pytest

from frogmodel.graph import DaryTree, ExplicitGraph, Lattice, truncated_binary_tree
from frogmodel.paths import (STOPPED, BiasedZ, ExplicitTable, FrogKey, NonbacktrackingStoppedAtLeaves,
                             PathError, PathTable, SRW, SRWWithDeath, check_walker, prefix, step)


def test_srw_on_z1_is_fair():
    g = Lattice(1)
    plus = g.handle((1,))
    n = 10**5
    hits = sum(step(SRW(), g, FrogKey((0,), 0), 0, 0, seed) == plus for seed in range(n))
    assert abs(hits / n - 0.5) < 0.01


def test_biased_walk_frequency():
    g = Lattice(1)
    plus = g.handle((1,))
    n = 20000
    hits = sum(step(BiasedZ(0.7), g, FrogKey((0,), i), 0, 0, 9) == plus for i in range(n))
    assert abs(hits / n - 0.7) < 0.015


def test_biased_walk_needs_z1():
    with pytest.raises(PathError):
        check_walker(BiasedZ(0.6), Lattice(2))
    with pytest.raises(PathError):
        BiasedZ(1.0)


def test_nonbacktracking_from_u_is_forced_to_mid():
    g = truncated_binary_tree()
    u = g.handle("u")
    for seed in range(50):
        nxt = step(NonbacktrackingStoppedAtLeaves(), g, FrogKey("u", 1), u, 0, seed)
        assert g.label(nxt) == "o'"


def test_nonbacktracking_stops_at_leaf_and_never_backtracks():
    g = truncated_binary_tree()
    for seed in range(200):
        for origin in ("u", "v", "o'"):
            path = [g.label(h) for h in prefix(NonbacktrackingStoppedAtLeaves(), g, FrogKey(origin, 1), 10, seed)]
            assert len(path) <= 3
            assert path[-1] in ("o", "u", "v")
            for a, b in zip(path, path[2:]):
                assert a != b


def test_nonbacktracking_on_tree_never_reverses():
    g = DaryTree(2, depth_cap=6)
    for seed in range(100):
        hs = prefix(NonbacktrackingStoppedAtLeaves(), g, FrogKey((), 0), 20, seed)
        for a, b in zip(hs, hs[2:]):
            assert a != b or g.degree(hs[1]) < 2


def test_death_with_p_one_never_stops():
    g = Lattice(2)
    for seed in range(20):
        assert len(prefix(SRWWithDeath(1.0), g, FrogKey((0, 0), 0), 100, seed)) == 101


def test_death_rate():
    g = Lattice(1)
    n = 20000
    stops = sum(step(SRWWithDeath(0.7), g, FrogKey((0,), i), 0, 0, 3) == STOPPED for i in range(n))
    assert abs(stops / n - 0.3) < 0.015


def test_prefix_length_zero_and_determinism():
    g = Lattice(2)
    key = FrogKey((0, 0), 0)
    assert prefix(SRW(), g, key, 0, 1) == [0]
    assert prefix(SRW(), g, key, 40, 11) == prefix(SRW(), Lattice(2), key, 40, 11)


def test_explicit_table_replays_and_stops():
    g = ExplicitGraph([("o", "a"), ("a", "b")], "o")
    t = PathTable({("o", 0): ["o", "a", "b", "a"]})
    hs = prefix(ExplicitTable(t), g, FrogKey("o", 0), 10, 0)
    assert [g.label(h) for h in hs] == ["o", "a", "b", "a"]
    with pytest.raises(PathError):
        step(ExplicitTable(t), g, FrogKey("a", 1), g.handle("a"), 0, 0)


def test_paths_start_at_origin():
    with pytest.raises(PathError):
        PathTable({("a", 1): ["o", "a"]})
    g = Lattice(2)
    for i in range(1, 20):
        key = FrogKey((3, -1), i)
        assert g.label(prefix(SRW(), g, key, 5, 7)[0]) == (3, -1)


def test_path_table_text_roundtrip():
    t = PathTable({("o", 0): ["o", "a"], ("a", 1): ["a", "o", "a"]})
    back = PathTable.parse(t.dumps())
    assert back.paths == t.paths
    with pytest.raises(PathError):
        PathTable.parse("a 1 a o\n")


def test_validate_rejects_non_adjacent_steps():
    g = ExplicitGraph([("o", "a"), ("a", "b")], "o")
    with pytest.raises(PathError):
        PathTable({("o", 0): ["o", "b"]}).validate(g)


def test_common_random_numbers_per_frog():
    # a frog's path depends only on (seed, origin, index): other frogs are irrelevant
    g1, g2 = Lattice(2), Lattice(2)
    prefix(SRW(), g2, FrogKey((1, 0), 5), 30, 2)  # touch g2 differently first
    a = prefix(SRW(), g1, FrogKey((0, 0), 0), 30, 2)
    b = prefix(SRW(), g2, FrogKey((0, 0), 0), 30, 2)
    assert [g1.label(h) for h in a] == [g2.label(h) for h in b]


def test_distinct_frogs_independent_streams():
    g = Lattice(1)
    firsts = np.array([step(SRW(), g, FrogKey((0,), i), 0, 0, 1) for i in range(4000)])
    seconds = np.array([step(SRW(), g, FrogKey((0,), i + 1), 0, 0, 1) for i in range(4000)])
    assert abs(np.corrcoef(firsts, seconds)[0, 1]) < 0.05
