"""Standard, increasing-concave and pgf stochastic orders on extended integers.

Every check answers "is x dominated by y?".  Exact checks work on ``Pmf``
objects; empirical checks work on integer samples (``math.inf`` allowed) with
bootstrap confidence bands.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.stats import binom

from .init_config import Pmf, point, two_point

EXACT_TOL = 1e-9


class OrderKind(str, Enum):
    ST = "st"
    ICV = "icv"
    PGF = "pgf"


DOMINATES = "dominates"
VIOLATED = "violated"
INCONCLUSIVE = "inconclusive"


@dataclass
class OrderVerdict:
    status: str
    kind: OrderKind
    witness: dict | None = None
    # (test point, margin) pairs; margin >= 0 where the required inequality holds
    margins: list = field(default_factory=list)
    min_margin: float = 0.0
    level: float | None = None
    note: str = ""

    @property
    def dominates(self) -> bool:
        return self.status == DOMINATES

    @property
    def violated(self) -> bool:
        return self.status == VIOLATED

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "kind": self.kind.value,
            "witness": self.witness,
            "min_margin": self.min_margin,
            "level": self.level,
            "note": self.note,
            "margins": [[_json_point(p), m] for p, m in self.margins],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _json_point(p):
    if isinstance(p, float) and math.isinf(p):
        return "inf"
    return p


def t_grid(size: int) -> np.ndarray:
    """``size`` equally spaced points strictly inside (0, 1)."""
    return np.arange(1, size + 1) / (size + 1)




# ----------------------------------------------------------------------------
# exact checks


def survival(x: Pmf, k: int) -> float:
    """P[X > k], counting the atom at infinity."""
    return math.fsum(x.probs[k + 1:]) + x.p_inf


def min_mean(x: Pmf, k: int) -> float:
    """E[min(X, k)] with min(inf, k) = k."""
    return math.fsum(min(j, k) * p for j, p in enumerate(x.probs)) + k * x.p_inf


def check_exact(kind, x: Pmf, y: Pmf, t_grid_size: int = 512, tol: float = EXACT_TOL) -> OrderVerdict:
    """Decide x <= y in the given order.

    St compares survival functions at every support point.  Icv compares
    E min(X, k) for k = 0..K+1 and the atoms at infinity; these functionals
    span the bounded increasing concave functions on the integers.  Pgf
    compares generating functions on a grid in (0, 1) plus the limits
    P[X = 0] (t -> 0) and P[X < inf] (t -> 1); a Dominates verdict is only
    grid-certified.
    """
    kind = OrderKind(kind)
    K = max(x.max_support, y.max_support)
    margins = []
    if kind is OrderKind.ST:
        for k in range(K + 1):
            margins.append((k, survival(y, k) - survival(x, k)))
        margins.append((math.inf, y.p_inf - x.p_inf))
    elif kind is OrderKind.ICV:
        for k in range(K + 2):
            margins.append((k, min_mean(y, k) - min_mean(x, k)))
        margins.append((math.inf, y.p_inf - x.p_inf))
    else:
        ts = t_grid(t_grid_size)
        gx = pgf_values(x, ts)
        gy = pgf_values(y, ts)
        margins.append((0.0, x.probs[0] - y.probs[0]))
        margins.extend(zip(ts.tolist(), (gx - gy).tolist()))
        margins.append((1.0, (1.0 - x.p_inf) - (1.0 - y.p_inf)))
    worst_point, worst = min(margins, key=lambda pm: pm[1])
    if worst >= -tol:
        note = "grid-certified" if kind is OrderKind.PGF else "exact"
        return OrderVerdict(DOMINATES, kind, margins=margins, min_margin=worst, note=note)
    witness = {"point": worst_point, "margin": worst}
    if kind is OrderKind.PGF and 0.0 < worst_point < 1.0:
        witness = _refine_pgf_witness(x, y, worst_point, 1.0 / (t_grid_size + 1))
    else:
        witness["x"], witness["y"] = _functional_values(kind, x, y, worst_point)
    return OrderVerdict(VIOLATED, kind, witness=witness, margins=margins, min_margin=worst)


def _functional_values(kind, x, y, pt):
    if pt == math.inf:
        return x.p_inf, y.p_inf
    if kind is OrderKind.ST:
        return survival(x, pt), survival(y, pt)
    if kind is OrderKind.ICV:
        return min_mean(x, pt), min_mean(y, pt)
    if pt == 0.0:
        return x.probs[0], y.probs[0]
    return 1.0 - x.p_inf, 1.0 - y.p_inf


def _refine_pgf_witness(x: Pmf, y: Pmf, t0: float, h: float) -> dict:
    lo, hi = max(t0 - h, 1e-12), min(t0 + h, 1 - 1e-12)
    res = minimize_scalar(lambda t: x.pgf(t) - y.pgf(t), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-10})
    t = float(res.x) if res.fun <= x.pgf(t0) - y.pgf(t0) else t0
    return {"point": t, "margin": x.pgf(t) - y.pgf(t), "x": x.pgf(t), "y": y.pgf(t)}


def pgf_values(x: Pmf, ts) -> np.ndarray:
    """G_X(t) = sum_k P[X=k] t^k at each t (the infinite atom contributes 0)."""
    ts = np.asarray(ts, dtype=float)
    acc = np.zeros_like(ts)
    for p in reversed(x.probs):
        acc = acc * ts + p
    return acc


# ----------------------------------------------------------------------------
# thinning


def thin(x: Pmf, p: float) -> Pmf:
    """Law of Bin(N, p) given N ~ x; an infinite N stays infinite for p > 0."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("thinning probability outside [0, 1]")
    K = x.max_support
    ks = np.arange(K + 1)
    # mat[k, j] = P[Bin(k, p) = j]
    mat = binom.pmf(ks[None, :], ks[:, None], p)
    out = np.asarray(x.probs) @ mat
    p_inf = x.p_inf
    if p == 0.0:
        out[0] += p_inf
        p_inf = 0.0
    if p_inf >= 1.0:
        return Pmf((0.0,), 1.0)
    out = np.clip(out, 0.0, None)
    out *= (1.0 - p_inf) / out.sum()
    return Pmf(tuple(out), p_inf)


def thinned_zero_probability(x: Pmf, p: float) -> float:
    return thin(x, p).probs[0]


def pgf_via_thinning(x: Pmf, y: Pmf, p_grid=None, tol: float = EXACT_TOL) -> OrderVerdict:
    """x <= y in pgf order iff every p-thinning of x is at least as likely to be 0.

    The default grid is p = 1 - t over ``t_grid(512)``; p = 1 (P[X=0]) and
    the p -> 0+ limit (P[X < inf]) are always included.
    """
    if p_grid is None:
        p_grid = 1.0 - t_grid(512)
    margins = [(1.0, thinned_zero_probability(x, 1.0) - thinned_zero_probability(y, 1.0))]
    for p in sorted(float(q) for q in p_grid):
        margins.append((p, thinned_zero_probability(x, p) - thinned_zero_probability(y, p)))
    margins.append((0.0, (1.0 - x.p_inf) - (1.0 - y.p_inf)))
    worst_point, worst = min(margins, key=lambda pm: pm[1])
    if worst >= -tol:
        return OrderVerdict(DOMINATES, OrderKind.PGF, margins=margins, min_margin=worst,
                            note="grid-certified via thinning")
    return OrderVerdict(VIOLATED, OrderKind.PGF, witness={"p": worst_point, "margin": worst},
                        margins=margins, min_margin=worst)


# ----------------------------------------------------------------------------
# maximal distributions


def icv_const_dominator(x: Pmf) -> Pmf:
    """Point mass at the least integer >= E X."""
    if x.p_inf > 0:
        raise ValueError("dominator needs a finite mean")
    m = x.mean()
    c = math.ceil(m)
    if c - m > 1 - 1e-12:
        c -= 1  # m sits on an integer up to rounding
    return point(max(c, 0))


def icv_two_point_dominator(x: Pmf) -> Pmf:
    """Law on {floor(m), floor(m)+1} with mean m = E X."""
    if x.p_inf > 0:
        raise ValueError("dominator needs a finite mean")
    m = x.mean()
    k = math.floor(m + 1e-12)
    q = min(max(m - k, 0.0), 1.0)
    return two_point(k, k + 1, q)


@dataclass
class ChainReport:
    st: OrderVerdict
    icv: OrderVerdict
    pgf: OrderVerdict

    @property
    def holds(self) -> bool:
        if self.st.dominates and not self.icv.dominates:
            return False
        if self.icv.dominates and not self.pgf.dominates:
            return False
        return True

    def to_dict(self) -> dict:
        return {"st": self.st.status, "icv": self.icv.status, "pgf": self.pgf.status, "holds": self.holds}


def implication_chain_check(x: Pmf, y: Pmf, t_grid_size: int = 512) -> ChainReport:
    """St-dominance must imply icv-dominance, which must imply pgf-dominance."""
    return ChainReport(
        check_exact(OrderKind.ST, x, y),
        check_exact(OrderKind.ICV, x, y),
        check_exact(OrderKind.PGF, x, y, t_grid_size),
    )


# ----------------------------------------------------------------------------
# empirical checks


class SampleSizeError(ValueError):
    pass


def _as_samples(s) -> np.ndarray:
    a = np.asarray(s, dtype=float)
    if a.ndim != 1:
        raise ValueError("samples must be one-dimensional")
    if np.any(np.isnan(a)) or np.any(a < 0):
        raise ValueError("samples must be nonnegative")
    return a


def _basis(kind: OrderKind, values: np.ndarray, points: np.ndarray) -> np.ndarray:
    """phi_point(value) for the order's test functionals, shape (values, points)."""
    v = values[:, None]
    pts = points[None, :]
    finite = np.isfinite(v)
    if kind is OrderKind.ST:
        # indicator of X > k; the infinite point tests the atom at infinity
        return np.where(np.isinf(pts), np.isinf(v), v > pts).astype(float)
    if kind is OrderKind.ICV:
        vv = np.where(finite, v, np.inf)
        out = np.minimum(vv, pts)
        return np.where(np.isinf(pts), np.isinf(v).astype(float), out)
    # pgf: t^X with t^inf = 0; t = 0 gives the indicator of X = 0, t = 1 of X < inf
    with np.errstate(invalid="ignore", over="ignore"):
        vv = np.where(finite, v, 0.0)
        powers = np.where(pts == 0.0, (vv == 0).astype(float), np.power(pts, vv))
    return np.where(finite, powers, 0.0)


def _test_points(kind: OrderKind, xs: np.ndarray, ys: np.ndarray, t_points) -> np.ndarray:
    if kind is OrderKind.PGF:
        return np.concatenate(([0.0], np.asarray(t_points, dtype=float), [1.0]))
    fin = np.concatenate((xs[np.isfinite(xs)], ys[np.isfinite(ys)]))
    top = int(fin.max()) if fin.size else 0
    ks = np.arange(0, top + 2, dtype=float)
    return np.concatenate((ks, [np.inf]))


def _sign(kind: OrderKind) -> float:
    # margin = sign * (E phi(Y) - E phi(X)); pgf asks for E t^X >= E t^Y
    return -1.0 if kind is OrderKind.PGF else 1.0


def _bootstrap_means(values: np.ndarray, basis: np.ndarray, reps: int, rng) -> np.ndarray:
    """Bootstrap replicates of the column means of ``basis[sample]``.

    Resampling n draws from the empirical law is a multinomial over the
    distinct values, which keeps this O(reps * distinct * points).
    """
    uniq, inv, counts = np.unique(values, return_inverse=True, return_counts=True)
    n = values.size
    boot_counts = rng.multinomial(n, counts / n, size=reps)
    return boot_counts @ basis[_first_index(inv, len(uniq))] / n


def _first_index(inv: np.ndarray, k: int) -> np.ndarray:
    idx = np.empty(k, dtype=int)
    idx[inv[::-1]] = np.arange(inv.size)[::-1]
    return idx


def check_empirical(kind, samples_x, samples_y, t_points=None, bootstrap_reps: int = 2000,
                    level: float = 0.95, paired: bool = False, seed: int = 0,
                    min_samples: int = 100, tol: float = 1e-12) -> OrderVerdict:
    """Plug-in order check with simultaneous bootstrap bands.

    For every test functional the margin d = (required side) - (other side)
    is estimated together with a band d +/- c*se, where c is the ``level``
    quantile of the bootstrap maximum of |d* - d|/se over all test points
    (a percentile band for the whole curve at once).  Dominates when the
    lower band is >= 0 everywhere, Violated when the upper band is < 0
    somewhere, Inconclusive otherwise.  ``paired`` resamples (x_i, y_i)
    jointly, as for common-random-number replicas.
    """
    kind = OrderKind(kind)
    xs = _as_samples(samples_x)
    ys = _as_samples(samples_y)
    if xs.size < min_samples or ys.size < min_samples:
        raise SampleSizeError(f"need at least {min_samples} samples per side")
    if t_points is None:
        t_points = t_grid(64)
    pts = _test_points(kind, xs, ys, t_points)
    sgn = _sign(kind)
    bx = _basis(kind, xs, pts)
    by = _basis(kind, ys, pts)
    est = sgn * (by.mean(axis=0) - bx.mean(axis=0))
    rng = np.random.default_rng(seed)
    if paired:
        if xs.size != ys.size:
            raise ValueError("paired samples need equal sizes")
        diff = sgn * (by - bx)
        keys = np.unique(np.stack([xs, ys], axis=1), axis=0, return_inverse=True)[1].ravel()
        boot = _bootstrap_means(keys.astype(float), diff, bootstrap_reps, rng)
    else:
        boot = sgn * (_bootstrap_means(ys, by, bootstrap_reps, rng) - _bootstrap_means(xs, bx, bootstrap_reps, rng))
    se = boot.std(axis=0, ddof=1)
    dev = np.abs(boot - est[None, :])
    safe = np.where(se > 0, se, np.inf)
    crit = float(np.quantile((dev / safe[None, :]).max(axis=1), level)) if bootstrap_reps else 0.0
    half = crit * se
    lower = est - half
    upper = est + half
    margins = [(_pt(p), float(m)) for p, m in zip(pts, lower)]
    worst_i = int(np.argmin(upper))
    if upper[worst_i] < -tol:
        p = _pt(pts[worst_i])
        return OrderVerdict(VIOLATED, kind, witness={"point": p, "estimate": float(est[worst_i]),
                                                    "upper": float(upper[worst_i])},
                            margins=margins, min_margin=float(lower.min()), level=level)
    status = DOMINATES if lower.min() >= -tol else INCONCLUSIVE
    low_i = int(np.argmin(lower))
    return OrderVerdict(status, kind, margins=margins, min_margin=float(lower[low_i]), level=level,
                        witness=None if status == DOMINATES else {"point": _pt(pts[low_i]),
                                                                   "estimate": float(est[low_i])},
                        note=f"simultaneous band, critical value {crit:.3f}")


def _pt(p) -> float:
    return float(p)
