import json
from fractions import Fraction

import numpy as np
import pytest

from frogmodel.init_config import Pmf, bernoulli, point, poisson
from frogmodel.operator_a import SupportCapError, apply_exact, apply_mc, fold_tail, iterate, monotonicity_test
from frogmodel.orders import OrderKind, check_exact, icv_two_point_dominator, thin
from frogmodel.suites import pgf_ordered_pairs, random_pmf

from conftest import brute_force_operator_a


def _close(pmf: Pmf, law: dict, tol=1e-12):
    K = max(pmf.max_support, max(law))
    for k in range(K + 1):
        got = pmf.probs[k] if k < len(pmf.probs) else 0.0
        assert abs(got - float(law.get(k, 0))) <= tol, (k, got, law.get(k))


def test_point0_is_bernoulli_third():
    out = apply_exact(point(0))
    assert out.mass(1) == pytest.approx(1 / 3, abs=1e-12)
    assert out.mass(0) == pytest.approx(2 / 3, abs=1e-12)
    assert brute_force_operator_a({0: 1}) == {0: Fraction(2, 3), 1: Fraction(1, 3)}


@pytest.mark.parametrize("pi", [
    {1: 1}, {2: 1}, {0: Fraction(1, 2), 1: Fraction(1, 2)}, {0: Fraction(1, 4), 2: Fraction(3, 4)},
    {0: Fraction(1, 5), 1: Fraction(2, 5), 2: Fraction(2, 5)}, {3: 1},
])
def test_exact_matches_brute_force(pi):
    pmf = Pmf.from_dict({k: float(v) for k, v in pi.items()})
    _close(apply_exact(pmf), brute_force_operator_a(pi))


def test_mass_and_support_bound():
    rng = np.random.default_rng(0)
    for _ in range(30):
        x = random_pmf(rng)
        out = apply_exact(x)
        assert sum(out.probs) == pytest.approx(1.0, abs=1e-12)
        assert out.max_support <= 2 + 2 * x.max_support


def test_point_images_increase():
    for k in range(5):
        v = check_exact(OrderKind.PGF, apply_exact(point(k)), apply_exact(point(k + 1)))
        assert v.dominates, (k, v.witness)


def test_support_cap_errors():
    with pytest.raises(SupportCapError):
        apply_exact(point(13))
    with pytest.raises(SupportCapError):
        apply_exact(Pmf((0.5,), 0.5))


def test_mc_point0():
    s = apply_mc(point(0), 10**5, seed=1)
    assert abs(np.mean(s == 1) - 1 / 3) <= 0.01


def test_mc_total_variation():
    pi = bernoulli(0.5)
    s = apply_mc(pi, 10**5, seed=2)
    exact = apply_exact(pi)
    K = max(int(s.max()), exact.max_support)
    emp = np.bincount(s, minlength=K + 1) / s.size
    ex = np.array(list(exact.probs) + [0.0] * (K + 1 - len(exact.probs)))
    assert 0.5 * np.abs(emp - ex).sum() < 0.02


def test_mc_single_rep_and_determinism():
    s = apply_mc(point(2), 1, seed=3)
    assert s.shape == (1,) and 0 <= int(s[0]) <= 2 + 2 + 2
    assert np.array_equal(apply_mc(poisson(1, 1e-9), 500, seed=4), apply_mc(poisson(1, 1e-9), 500, seed=4))
    with pytest.raises(ValueError):
        apply_mc(point(0), 0)


def test_monotonicity_examples():
    p = poisson(0.5, 1e-12)
    pairs = [(point(0), point(1)), (p, icv_two_point_dominator(p))]
    rng = np.random.default_rng(5)
    for _ in range(20):
        x = random_pmf(rng)
        pairs.append((thin(x, float(rng.uniform(0.1, 0.9))), x))
    rep = monotonicity_test(pairs, grid=256, keep_curves=True)
    assert rep.passed and rep.pairs == len(pairs) and not rep.skipped
    assert len(rep.curves) == len(pairs)
    json.loads(rep.to_json())


def test_unordered_pair_is_skipped():
    rep = monotonicity_test([(point(2), point(1))])
    assert rep.skipped == [0] and rep.pairs == 0


def test_constructed_pairs_support():
    pairs = pgf_ordered_pairs(30, seed=1)
    assert len(pairs) == 30
    assert all(max(a.max_support, b.max_support) <= 6 for a, b in pairs)


def test_iterate():
    its = iterate(point(0), 4, cap=64)
    assert its[0].pmf.max_support <= 4
    for it in its:
        assert sum(it.pmf.probs) == pytest.approx(1.0, abs=1e-12)
    lo = iterate(point(0), 3, cap=16)
    hi = iterate(point(1), 3, cap=16)
    for a, b in zip(lo, hi):
        assert all(ga >= gb - 1e-12 for ga, gb in zip(a.pgf_curve, b.pgf_curve))
    with pytest.raises(ValueError):
        iterate(point(0), 0)


def test_fold_tail():
    x, moved = fold_tail(Pmf((0.1, 0.2, 0.3, 0.4)), 1)
    assert x.probs == pytest.approx((0.1, 0.9)) and moved == pytest.approx(0.7)
