"""Fixed-seed property suites behind ``frogmodel verify``.

Each suite returns a plain dict with per-check counts and a ``passed`` flag.
"""

from __future__ import annotations

import random
import time
from fractions import Fraction

import numpy as np

from . import moments as mo
from .init_config import Pmf, point, poisson
from .operator_a import apply_exact, monotonicity_test
from .orders import (OrderKind, check_exact, icv_const_dominator, icv_two_point_dominator,
                     implication_chain_check, pgf_via_thinning, t_grid, thin)
from .statistics import standard_statistics, verify_builder_lemmas, verify_statistic_class

SUITES = ("statistics", "orders", "operator_a", "moments")


# ----------------------------------------------------------------------------
# random pmfs and constructed ordered pairs


def random_pmf(rng: np.random.Generator, max_support: int = 6) -> Pmf:
    K = int(rng.integers(0, max_support + 1))
    w = rng.random(K + 1) ** 2
    w[rng.random(K + 1) < 0.3] = 0.0
    if w.sum() == 0:
        w[int(rng.integers(0, K + 1))] = 1.0
    return Pmf(tuple(w / w.sum()))


def upward_shift(x: Pmf, rng: np.random.Generator, max_support: int = 8) -> Pmf:
    """A law st-above x: move random chunks of mass from k to larger k."""
    probs = list(x.probs) + [0.0] * (max_support + 1 - len(x.probs))
    for _ in range(int(rng.integers(1, 4))):
        k = int(rng.integers(0, max_support))
        j = int(rng.integers(k + 1, max_support + 1))
        moved = probs[k] * float(rng.random())
        probs[k] -= moved
        probs[j] += moved
    return Pmf(tuple(probs))


def st_pairs(n: int, seed: int = 0) -> list:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        x = random_pmf(rng)
        out.append((x, upward_shift(x, rng)))
    return out


def pgf_ordered_pairs(n: int = 100, seed: int = 0, max_support: int = 6) -> list:
    """Thinning pairs, point pairs and (x, icv dominator) pairs, cycling through the three."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        which = len(out) % 3
        if which == 0:
            x = random_pmf(rng, max_support)
            out.append((thin(x, float(rng.uniform(0.05, 0.95))), x))
        elif which == 1:
            a, b = sorted(int(v) for v in rng.integers(0, max_support + 1, size=2))
            out.append((point(a), point(b)))
        else:
            x = random_pmf(rng, max_support - 1)
            dom = icv_two_point_dominator(x) if rng.random() < 0.5 else icv_const_dominator(x)
            out.append((x, dom))
    return out


# ----------------------------------------------------------------------------
# suites


def suite_statistics(n_instances: int = 500, seed: int = 0) -> dict:
    t0 = time.perf_counter()
    rep = verify_statistic_class(standard_statistics, m_max=3, n_instances=n_instances, seed=seed)
    builder = verify_builder_lemmas(n_instances=max(1, n_instances // 5), seed=seed)
    return {
        "suite": "statistics",
        "passed": rep.passed and builder.passed,
        "sign_checks": rep.checks,
        "sign_failures": len(rep.failures),
        "first_failures": rep.failures[:5],
        "max_lemma_checks": builder.max_checks,
        "sum_lemma_checks": builder.sum_checks,
        "linearity_checks": builder.linearity.checks if builder.linearity else 0,
        "builder_failures": len(builder.failures),
        "seconds": round(time.perf_counter() - t0, 3),
    }


def maximals_check(n: int = 200, seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    checks = failures = 0
    for _ in range(n):
        x = random_pmf(rng, 8)
        for dom in (icv_const_dominator(x), icv_two_point_dominator(x)):
            checks += 1
            failures += not check_exact(OrderKind.ICV, x, dom).dominates
    return {"checks": checks, "failures": failures}


def chain_check(n: int = 500, seed: int = 1) -> dict:
    checks = failures = st_ok = 0
    for x, y in st_pairs(n, seed):
        rep = implication_chain_check(x, y)
        checks += 1
        st_ok += rep.st.dominates
        failures += not (rep.holds and rep.st.dominates)
    return {"checks": checks, "failures": failures, "st_certified": st_ok}


def thinning_agreement(n: int = 100, seed: int = 2, grid: int = 512, tol: float = 1e-12) -> dict:
    """check_exact(Pgf) and pgf_via_thinning must agree in verdict and at every grid point."""
    rng = np.random.default_rng(seed)
    ts = t_grid(grid)
    checks = failures = 0
    worst = 0.0
    for i in range(n):
        x = random_pmf(rng)
        y = upward_shift(x, rng) if i % 2 else random_pmf(rng)
        ex = check_exact(OrderKind.PGF, x, y, grid)
        th = pgf_via_thinning(x, y, p_grid=1.0 - ts)
        ex_m = dict(ex.margins)
        th_m = dict(th.margins)
        for t in ts:
            d = abs(ex_m[float(t)] - th_m[float(1.0 - t)])
            worst = max(worst, d)
            checks += 1
            failures += d > tol
        checks += 1
        failures += ex.status != th.status
    return {"checks": checks, "failures": failures, "max_abs_diff": worst}


def suite_orders(seed: int = 0) -> dict:
    t0 = time.perf_counter()
    parts = {
        "maximals": maximals_check(200, seed),
        "chain": chain_check(500, seed + 1),
        "thinning": thinning_agreement(100, seed + 2),
    }
    return {"suite": "orders", "passed": all(p["failures"] == 0 for p in parts.values()),
            **parts, "seconds": round(time.perf_counter() - t0, 3)}


def suite_operator_a(n_pairs: int = 100, seed: int = 0) -> dict:
    t0 = time.perf_counter()
    base = apply_exact(point(0))
    exact_ok = abs(base.mass(1) - 1 / 3) <= 1e-12 and abs(base.mass(0) - 2 / 3) <= 1e-12
    rep = monotonicity_test(pgf_ordered_pairs(n_pairs, seed), grid=512)
    pois = apply_exact(poisson(1.0, 1e-12), support_cap=32)
    return {
        "suite": "operator_a",
        "passed": exact_ok and rep.passed and not rep.skipped,
        "point0_image": base.as_dict(),
        "pairs": rep.pairs,
        "skipped": len(rep.skipped),
        "failures": rep.failures[:5],
        "poisson1_image_mean": pois.mean(),
        "seconds": round(time.perf_counter() - t0, 3),
    }


def random_moment_sequence(rng: random.Random, K: int = 30) -> mo.RationalSeq:
    atoms = [(Fraction(rng.randint(1, 9), rng.randint(1, 9)), Fraction(rng.randint(0, 10), 10))
             for _ in range(rng.randint(1, 3))]
    return mo.moment_sequence(atoms, K)


def random_vertex_table(rng: random.Random, n: int) -> dict:
    from itertools import product
    return {x: Fraction(rng.randint(-20, 20), rng.randint(1, 6)) for x in product((0, 1), repeat=n)}


def suite_moments(seed: int = 0) -> dict:
    t0 = time.perf_counter()
    rng = random.Random(seed)
    haus_fail = 0
    for _ in range(50):
        if not mo.hausdorff_check(random_moment_sequence(rng, 30), n_max=10, k_max=20):
            haus_fail += 1
    lin = mo.hausdorff_check(mo.RationalSeq.from_function(lambda k: k, 20), n_max=10)
    witness_ok = (not lin.passed) and lin.witness[:2] == (1, 0) and lin.witness[2] == -1
    ident_fail = 0
    for _ in range(200):
        n = rng.randint(1, 6)
        g = random_vertex_table(rng, n)
        B = [b for b in range(1, n + 1) if rng.random() < 0.5]
        x = tuple(rng.randint(0, 1) for _ in range(n))
        ident_fail += not mo.verify_derivative_identity(g, B, x)
    ext_fail = 0
    for _ in range(100):
        p = mo.interpolate(random_vertex_table(rng, 3), 3)
        ext_fail += not mo.vertex_extremum_check(p, 7)
    return {
        "suite": "moments",
        "passed": haus_fail == 0 and witness_ok and ident_fail == 0 and ext_fail == 0,
        "hausdorff_sequences": 50,
        "hausdorff_failures": haus_fail,
        "linear_witness": [lin.witness[0], lin.witness[1], str(lin.witness[2])] if lin.witness else None,
        "derivative_checks": 200,
        "derivative_failures": ident_fail,
        "extremum_checks": 100,
        "extremum_failures": ext_fail,
        "seconds": round(time.perf_counter() - t0, 3),
    }


def run_suite(name: str) -> dict:
    if name == "statistics":
        return suite_statistics()
    if name == "orders":
        return suite_orders()
    if name == "operator_a":
        return suite_operator_a()
    if name == "moments":
        return suite_moments()
    raise ValueError(f"unknown suite {name!r}; choose from {SUITES}")
