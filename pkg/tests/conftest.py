import itertools
from fractions import Fraction

import pytest

from frogmodel.engine import ExplicitModel, run_explicit
from frogmodel.graph import truncated_binary_tree
from frogmodel.paths import PathTable

ROOT, MID, U, V = "o", "o'", "u", "v"


def brute_force_operator_a(pi: dict) -> dict:
    """Law of frogs ending at the root on the four-vertex tree, by full enumeration.

    Every frog's nonbacktracking path is enumerated separately with its exact
    probability and the resulting deterministic model is run through
    ``run_explicit``.  Exponential in the counts; only for small supports.
    """
    g = truncated_binary_tree()
    root_paths = [((ROOT, MID, U), Fraction(1, 2)), ((ROOT, MID, V), Fraction(1, 2))]
    mid_paths = [((MID, x), Fraction(1, 3)) for x in (ROOT, U, V)]
    u_paths = [((U, MID, x), Fraction(1, 2)) for x in (ROOT, V)]
    v_paths = [((V, MID, x), Fraction(1, 2)) for x in (ROOT, U)]
    law: dict = {}
    for i, pi_i in pi.items():
        for j, pi_j in pi.items():
            weight_ij = Fraction(pi_i) * Fraction(pi_j)
            if weight_ij == 0:
                continue
            choices = [root_paths, mid_paths] + [u_paths] * i + [v_paths] * j
            for combo in itertools.product(*choices):
                w = weight_ij
                table = PathTable()
                table[(ROOT, 0)] = combo[0][0]
                table[(MID, 1)] = combo[1][0]
                for n, (path, p) in enumerate(combo[2:2 + i], 1):
                    table[(U, n)] = path
                for n, (path, p) in enumerate(combo[2 + i:], 1):
                    table[(V, n)] = path
                for _, p in combo:
                    w *= p
                m = ExplicitModel(g, {MID: 1, U: i, V: j}, table)
                r = run_explicit(m).root_visits
                law[r] = law.get(r, 0) + w
    return law


@pytest.fixture
def brute_operator_a():
    return brute_force_operator_a
