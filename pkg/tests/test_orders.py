import math

import numpy as np
import pytest

from frogmodel.init_config import Pmf, bernoulli, point, poisson
from frogmodel.orders import (OrderKind, SampleSizeError, check_empirical, check_exact, icv_const_dominator,
                              icv_two_point_dominator, implication_chain_check, pgf_via_thinning, t_grid, thin)
from frogmodel.suites import chain_check, maximals_check, random_pmf, st_pairs, thinning_agreement


def test_st_points():
    v = check_exact(OrderKind.ST, point(1), point(2))
    assert v.dominates and v.note == "exact"
    assert check_exact(OrderKind.ST, point(2), point(1)).violated


def test_icv_poisson_below_its_mean():
    assert check_exact(OrderKind.ICV, poisson(1, 1e-12), point(1)).dominates


def test_pgf_point_witness():
    v = check_exact(OrderKind.PGF, point(2), point(1))
    assert v.violated
    assert v.witness["point"] == pytest.approx(0.5, abs=1e-6)
    assert v.witness["margin"] == pytest.approx(-0.25, abs=1e-9)
    assert check_exact(OrderKind.PGF, point(1), point(2)).dominates


def test_infinite_atoms():
    x = Pmf((0.5,), 0.5)
    assert check_exact(OrderKind.ST, point(3), x).violated
    assert check_exact(OrderKind.ST, point(0), x).dominates
    assert check_exact(OrderKind.PGF, point(0), x).dominates
    assert check_exact(OrderKind.PGF, x, point(5)).violated


def test_verdict_json_roundtrip():
    import json
    d = json.loads(check_exact(OrderKind.ST, point(0), Pmf((0.5,), 0.5)).to_json())
    assert d["status"] == "dominates" and d["margins"][-1][0] == "inf"


def test_thin_examples():
    assert thin(point(1), 0.5).probs == pytest.approx((0.5, 0.5))
    x = Pmf((0.2, 0.3, 0.5))
    assert thin(x, 1.0).probs == pytest.approx(x.probs)
    assert thin(x, 0.0).probs[0] == pytest.approx(1.0)
    inf = Pmf((0.5,), 0.5)
    assert thin(inf, 0.3).p_inf == 0.5
    assert thin(inf, 0.0).probs[0] == pytest.approx(1.0)


def test_thin_poisson_is_poisson():
    # thinning Poisson(mu) by p gives Poisson(p mu); compare pmfs computed two ways
    t = thin(poisson(3.0, 1e-14), 0.4)
    ref = poisson(1.2, 1e-14)
    k = min(len(t.probs), len(ref.probs))
    assert np.max(np.abs(np.array(t.probs[:k]) - np.array(ref.probs[:k]))) < 1e-10


def test_thinning_identity_and_edges():
    x, y = point(1), point(2)
    assert pgf_via_thinning(x, y).dominates
    assert pgf_via_thinning(y, x).violated
    rng = np.random.default_rng(9)
    for _ in range(20):
        a, b = random_pmf(rng), random_pmf(rng)
        # at p = 0 both thinnings vanish, so that grid point always passes
        v = pgf_via_thinning(a, b, p_grid=[0.0])
        assert dict(v.margins)[0.0] == pytest.approx(0.0, abs=1e-12)
        for p in (0.2, 0.7):
            assert thin(a, p).probs[0] == pytest.approx(a.pgf(1 - p), abs=1e-12)


def test_dominators():
    x = poisson(1, 1e-12)
    assert icv_const_dominator(x) == point(1)
    b = bernoulli(0.3)
    tp = icv_two_point_dominator(b)
    assert tp.probs == pytest.approx(b.probs)
    assert check_exact(OrderKind.ICV, x, icv_two_point_dominator(x)).dominates
    with pytest.raises(ValueError):
        icv_const_dominator(Pmf((0.5,), 0.5))


def test_maximal_suite():
    r = maximals_check(200)
    assert r["failures"] == 0 and r["checks"] == 400


def test_chain():
    for x, y in st_pairs(50, seed=3):
        rep = implication_chain_check(x, y)
        assert rep.st.dominates and rep.holds
    assert chain_check(200)["failures"] == 0
    rep = implication_chain_check(poisson(1, 1e-12), icv_two_point_dominator(poisson(1, 1e-12)))
    assert rep.icv.dominates and rep.pgf.dominates and not rep.st.dominates


def test_thinning_agreement_suite():
    r = thinning_agreement(40)
    assert r["failures"] == 0 and r["max_abs_diff"] < 1e-12


def test_icv_completeness_against_concave_functions():
    # if check_exact says Icv dominates, every increasing concave phi must agree
    rng = np.random.default_rng(11)
    n_dom = 0
    for _ in range(200):
        x = random_pmf(rng)
        y = random_pmf(rng)
        v = check_exact(OrderKind.ICV, x, y)
        K = max(x.max_support, y.max_support) + 1
        for _ in range(20):
            inc = np.sort(rng.random(K + 1))[::-1]  # decreasing positive increments
            phi = np.concatenate(([0.0], np.cumsum(inc)))[: K + 1]
            ex = sum(p * phi[k] for k, p in enumerate(x.probs))
            ey = sum(p * phi[k] for k, p in enumerate(y.probs))
            if v.dominates:
                assert ex <= ey + 1e-9
        n_dom += v.dominates
    assert n_dom > 10


def test_t_grid_interior():
    ts = t_grid(4)
    assert ts.tolist() == [0.2, 0.4, 0.6, 0.8]


def test_empirical_points():
    xs = np.ones(500)
    ys = np.full(500, 2.0)
    for kind in OrderKind:
        assert check_empirical(kind, xs, ys, bootstrap_reps=200).dominates
    v = check_empirical(OrderKind.PGF, ys, xs, bootstrap_reps=200)
    assert v.violated


def test_empirical_infinite_samples():
    xs = np.ones(300)
    ys = np.where(np.arange(300) % 2, 1.0, math.inf)
    assert check_empirical(OrderKind.ST, xs, ys, bootstrap_reps=200).dominates
    assert check_empirical(OrderKind.ST, ys, xs, bootstrap_reps=200).violated


def test_empirical_sample_size():
    with pytest.raises(SampleSizeError):
        check_empirical(OrderKind.PGF, [1] * 10, [1] * 10)
    with pytest.raises(ValueError):
        check_empirical(OrderKind.PGF, [1] * 200, [1] * 201, paired=True)


def test_empirical_null_calibration():
    # both samples from the same law: Violated at level 0.99 in at most 5% of experiments
    pmf = poisson(1.5, 1e-12)
    rng = np.random.default_rng(0)
    violated = 0
    runs = 100
    for i in range(runs):
        xs = rng.choice(len(pmf.probs), size=300, p=np.array(pmf.probs) / sum(pmf.probs))
        ys = rng.choice(len(pmf.probs), size=300, p=np.array(pmf.probs) / sum(pmf.probs))
        v = check_empirical(OrderKind.PGF, xs, ys, t_points=t_grid(32), bootstrap_reps=300, level=0.99, seed=i)
        violated += v.violated
    assert violated <= 0.05 * runs


def test_empirical_paired_is_sharper():
    rng = np.random.default_rng(1)
    base = rng.poisson(3.0, size=400).astype(float)
    xs, ys = base, base + (rng.random(400) < 0.1)
    assert check_empirical(OrderKind.ST, xs, ys, paired=True, bootstrap_reps=500).status != "violated"
    assert check_empirical(OrderKind.PGF, xs, ys, paired=True, bootstrap_reps=500).status != "violated"
