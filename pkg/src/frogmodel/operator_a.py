"""Operator A on count laws, from the frog model on a four-vertex tree.

The graph is o - o' with o' joined to u and v.  One frog starts awake at o,
one sleeps at o', and i ~ pi and j ~ pi independent frogs sleep at u and v.
Paths are nonbacktracking walks stopped on reaching a leaf, so each frog
makes at most two moves:

    root frog  o -> o' -> (u or v)
    o' frog    o' -> (o, u or v)
    u frogs    u -> o' -> (o or v)
    v frogs    v -> o' -> (o or u)

A(pi) is the law of the number of frogs that end at o.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binom

from .batch import FiniteGraph, combine_vec, run_batch, uniform_vec
from .graph import truncated_binary_tree
from .init_config import Pmf
from .orders import OrderKind, check_exact, pgf_values, t_grid
from .paths import NonbacktrackingStoppedAtLeaves
from .rng import LANE_COUNT, splitmix64


class SupportCapError(ValueError):
    pass


def _binom(n: int) -> np.ndarray:
    return binom.pmf(np.arange(n + 1), n, 0.5)


def _one_side_woken(i: int, j: int) -> np.ndarray:
    """Law of frogs ending at o when only the i-pile is woken at first.

    The i frogs each pick o or the far leaf; if any picks the far leaf, the
    j-pile wakes and each of its frogs picks o or the near leaf.
    """
    out = np.zeros(i + j + 1)
    bi = _binom(i)
    out[i] += bi[i]  # every frog went to o; the far pile stays asleep
    if i > 0:
        rest = np.convolve(bi[:i], _binom(j))
        out[: len(rest)] += rest
    return out


def _pair_law(i: int, j: int) -> np.ndarray:
    """Law of the final count at o given i frogs at u and j at v."""
    both = np.zeros(i + j + 2)
    both[: i + j + 1] = _binom(i + j)
    u_only = _one_side_woken(i, j)
    v_only = _one_side_woken(j, i)
    out = np.zeros(i + j + 2)
    # root frog to u (1/2): o' frog to o (1/3) -> {u} plus one; to u -> {u}; to v -> both
    out[1: i + j + 2] += u_only / 6
    out[: i + j + 1] += u_only / 6
    out += both / 6
    out[1: i + j + 2] += v_only / 6
    out[: i + j + 1] += v_only / 6
    out += both / 6
    return out


def apply_exact(pi: Pmf, support_cap: int = 12) -> Pmf:
    """Exact law of A(pi)."""
    if pi.p_inf > 0:
        raise SupportCapError("operator A needs finite counts")
    if pi.max_support > support_cap:
        raise SupportCapError(f"support {pi.max_support} exceeds cap {support_cap}")
    K = pi.max_support
    out = np.zeros(2 * K + 2)
    probs = pi.probs
    for i, pi_i in enumerate(probs):
        if pi_i == 0:
            continue
        for j, pi_j in enumerate(probs):
            if pi_j == 0:
                continue
            law = _pair_law(i, j)
            out[: len(law)] += pi_i * pi_j * law
    out = np.clip(out, 0.0, None)
    return Pmf(tuple(out / out.sum()))


def apply_mc(pi: Pmf, reps: int, seed: int = 0) -> np.ndarray:
    """``reps`` simulated counts of frogs ending at o.

    Runs through the vectorized engine; replica r is the same run the scalar
    engine gives with path seed combine(seed, r, 0).
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    fg = _finite_tree()
    g = fg.graph
    mid, u, v = g.handle("o'"), g.handle("u"), g.handle("v")
    r = np.arange(reps, dtype=np.uint64)
    cseed = combine_vec(np.uint64(seed), r, np.uint64(1))
    counts = np.zeros((reps, fg.n), dtype=np.int64)
    counts[:, mid] = 1
    cdf = np.asarray(pi.cdf)
    for h in (u, v):
        x = uniform_vec(combine_vec(cseed, fg.vhash[h]), np.uint64(splitmix64(LANE_COUNT)))
        counts[:, h] = np.minimum(np.searchsorted(cdf, x, side="right"), len(cdf) - 1)
    out = run_batch(fg, counts, NonbacktrackingStoppedAtLeaves(), 8, combine_vec(np.uint64(seed), r, np.uint64(0)))
    return out.root_visits


_TREE = None


def _finite_tree() -> FiniteGraph:
    global _TREE
    if _TREE is None:
        _TREE = FiniteGraph.build(truncated_binary_tree())
    return _TREE


@dataclass
class MonotonicityReport:
    pairs: int = 0
    failures: list = field(default_factory=list)
    skipped: list = field(default_factory=list)
    curves: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> str:
        return json.dumps({"pairs": self.pairs, "failures": self.failures, "skipped": self.skipped,
                           "curves": self.curves}, sort_keys=True, default=str)


def monotonicity_test(pairs, grid: int = 512, keep_curves: bool = False) -> MonotonicityReport:
    """For each (pi, pi2) with pi <= pi2 in pgf order, check A(pi) <= A(pi2).

    Input pairs that are not themselves grid-certified pgf-ordered are
    reported as skipped rather than tested.
    """
    rep = MonotonicityReport()
    for n, (a, b) in enumerate(pairs):
        if not check_exact(OrderKind.PGF, a, b, grid).dominates:
            rep.skipped.append(n)
            continue
        rep.pairs += 1
        fa, fb = apply_exact(a, support_cap=max(12, a.max_support, b.max_support)), apply_exact(
            b, support_cap=max(12, a.max_support, b.max_support))
        verdict = check_exact(OrderKind.PGF, fa, fb, grid)
        if not verdict.dominates:
            rep.failures.append({"pair": n, "input": [a.as_dict(), b.as_dict()], "witness": verdict.witness})
        if keep_curves:
            ts = t_grid(grid)
            rep.curves.append({"pair": n, "t": ts.tolist(), "G_A_pi": pgf_values(fa, ts).tolist(),
                               "G_A_pi2": pgf_values(fb, ts).tolist()})
    return rep


@dataclass
class Iterate:
    pmf: Pmf
    folded_mass: float  # mass moved onto the top atom by the cap
    pgf_curve: list


def fold_tail(x: Pmf, cap: int) -> tuple[Pmf, float]:
    """Move all mass above ``cap`` onto ``cap``."""
    if x.max_support <= cap:
        return x, 0.0
    head = list(x.probs[: cap + 1])
    tail = math.fsum(x.probs[cap + 1:])
    head[cap] += tail
    return Pmf(tuple(head)), tail


def iterate(pi0: Pmf, n: int, cap: int = 64, grid: int = 32) -> list[Iterate]:
    """pi_{k+1} = A(pi_k), capped at ``cap`` with tail mass folded to the top."""
    if n < 1:
        raise ValueError("n must be >= 1")
    ts = t_grid(grid)
    cur = pi0
    out = []
    for _ in range(n):
        nxt = apply_exact(cur, support_cap=max(cap, cur.max_support))
        nxt, folded = fold_tail(nxt, cap)
        out.append(Iterate(nxt, folded, pgf_values(nxt, ts).tolist()))
        cur = nxt
    return out
