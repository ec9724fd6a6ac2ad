"""Sleeping-frog count laws and initial-configuration rules."""

from __future__ import annotations

import ast
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from itertools import accumulate

from .rng import LANE_COUNT, combine, uniform

MASS_TOL = 1e-12


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Pmf:
    """Law on {0, 1, ..., K} plus an optional atom at infinity.

    ``probs[k]`` is P[X = k]; ``p_inf`` is P[X = inf].
    """

    probs: tuple
    p_inf: float = 0.0

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probs)
        # trailing zeros carry no information
        while len(probs) > 1 and probs[-1] == 0.0:
            probs = probs[:-1]
        if not probs:
            probs = (0.0,)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "p_inf", float(self.p_inf))
        if any(p < 0 or math.isnan(p) for p in probs) or self.p_inf < 0:
            raise ConfigError("negative probability mass")
        total = math.fsum(probs) + self.p_inf
        if abs(total - 1.0) > MASS_TOL:
            raise ConfigError(f"masses sum to {total!r}, not 1")

    @classmethod
    def from_dict(cls, mass: dict, normalize: bool = False) -> "Pmf":
        p_inf = 0.0
        finite = {}
        for k, p in mass.items():
            if k == math.inf or k == "inf":
                p_inf += float(p)
            else:
                if int(k) != k or k < 0:
                    raise ConfigError(f"support point {k!r} is not a nonnegative integer")
                finite[int(k)] = finite.get(int(k), 0.0) + float(p)
        top = max(finite, default=0)
        probs = [finite.get(k, 0.0) for k in range(top + 1)]
        if normalize:
            z = math.fsum(probs) + p_inf
            probs = [p / z for p in probs]
            p_inf /= z
        return cls(tuple(probs), p_inf)

    @classmethod
    def parse(cls, text: str) -> "Pmf":
        """Parse a literal such as ``{0: 0.5, 2: 0.5}`` (key ``inf`` allowed)."""
        try:
            tree = ast.parse(text.strip(), mode="eval").body
        except SyntaxError as exc:
            raise ConfigError(f"bad pmf literal {text!r}") from exc
        if not isinstance(tree, ast.Dict):
            raise ConfigError(f"pmf literal must be a dict: {text!r}")
        mass = {}
        for k, v in zip(tree.keys, tree.values):
            if isinstance(k, ast.Name) and k.id == "inf":
                key = math.inf
            else:
                key = ast.literal_eval(k)
            mass[key] = float(ast.literal_eval(v))
        return cls.from_dict(mass)

    def mass(self, k) -> float:
        if k == math.inf:
            return self.p_inf
        return self.probs[k] if 0 <= k < len(self.probs) else 0.0

    def as_dict(self) -> dict:
        out = {k: p for k, p in enumerate(self.probs) if p > 0}
        if self.p_inf > 0:
            out[math.inf] = self.p_inf
        return out

    @property
    def max_support(self) -> int:
        """Largest finite support point."""
        return len(self.probs) - 1

    def mean(self) -> float:
        if self.p_inf > 0:
            return math.inf
        return math.fsum(k * p for k, p in enumerate(self.probs))

    def pgf(self, t: float) -> float:
        """E t^X with t^inf = 0, evaluated by Horner's rule."""
        acc = 0.0
        for p in reversed(self.probs):
            acc = acc * t + p
        return acc

    @property
    def cdf(self) -> tuple:
        return tuple(accumulate(self.probs))

    def quantile(self, u: float) -> int:
        """Inverse-CDF draw for a finite-support pmf."""
        if self.p_inf > 0:
            raise ConfigError("cannot sample a count law with mass at infinity")
        cdf = self._cdf_cache
        k = bisect_right(cdf, u)
        return min(k, len(cdf) - 1)

    @property
    def _cdf_cache(self) -> tuple:
        c = self.__dict__.get("_cdf")
        if c is None:
            c = self.cdf
            object.__setattr__(self, "_cdf", c)
        return c

    def __repr__(self) -> str:
        body = ", ".join(f"{k}: {p:.6g}" for k, p in self.as_dict().items())
        return "Pmf({" + body + "})"


def point(k: int) -> Pmf:
    if k < 0:
        raise ConfigError("point mass needs k >= 0")
    return Pmf(tuple([0.0] * k + [1.0]))


def bernoulli(p: float) -> Pmf:
    if not 0.0 <= p <= 1.0:
        raise ConfigError("bernoulli parameter outside [0, 1]")
    return Pmf((1.0 - p, p))


def two_point(k: int, k1: int, q: float) -> Pmf:
    """Mass 1-q at k and q at k+1."""
    if k1 != k + 1:
        raise ConfigError("two_point support must be {k, k+1}")
    if not 0.0 <= q <= 1.0 or k < 0:
        raise ConfigError("bad two_point parameters")
    return Pmf(tuple([0.0] * k + [1.0 - q, q]))


def poisson(mu: float, tail_eps: float = 1e-12) -> Pmf:
    """Poisson(mu) cut at the first N with P[X > N] < tail_eps, renormalized."""
    if mu < 0 or tail_eps <= 0:
        raise ConfigError("poisson needs mu >= 0 and tail_eps > 0")
    if mu == 0:
        return point(0)
    probs = []
    term = math.exp(-mu)
    k = 0
    while True:
        probs.append(term)
        # the complement 1 - cdf is too noisy below ~1e-15
        if _poisson_tail(mu, k) < tail_eps:
            break
        k += 1
        term *= mu / k
    z = math.fsum(probs)
    return Pmf(tuple(p / z for p in probs))


def _poisson_tail(mu: float, n: int) -> float:
    """P[Poisson(mu) > n], summed upward from n+1."""
    term = math.exp(-mu)
    for j in range(1, n + 2):
        term *= mu / j
    total = 0.0
    j = n + 1
    while term > 0:
        total += term
        j += 1
        term *= mu / j
        if j > mu and term < total * 1e-17:
            break
    return total


# ----------------------------------------------------------------------------
# configuration rules


@dataclass(frozen=True)
class Deterministic:
    k: int

    def __post_init__(self):
        if self.k < 0:
            raise ConfigError("deterministic count must be >= 0")

    def describe(self) -> str:
        return f"deterministic({self.k})"


@dataclass(frozen=True)
class IID:
    pmf: Pmf

    def __post_init__(self):
        if self.pmf.p_inf > 0:
            raise ConfigError("i.i.d. count law has mass at infinity; counts must be finite")

    def describe(self) -> str:
        return f"iid({self.pmf.as_dict()})"


@dataclass(frozen=True)
class SiteDependentBernoulli:
    """One frog with probability min(1, alpha / |x|^2), |x| the Euclidean norm."""

    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ConfigError("alpha must be positive")

    def describe(self) -> str:
        return f"site_bernoulli({self.alpha})"


@dataclass(frozen=True)
class ExplicitCounts:
    counts: dict = field(default_factory=dict)

    def __hash__(self):
        return hash(tuple(sorted(self.counts.items(), key=repr)))

    def describe(self) -> str:
        return f"explicit({dict(sorted(self.counts.items(), key=repr))})"


def rule_law(rule, v_norm: float | None = None) -> Pmf:
    """Per-vertex count law of a rule (at distance ``v_norm`` for site rules)."""
    if isinstance(rule, Deterministic):
        return point(rule.k)
    if isinstance(rule, IID):
        return rule.pmf
    if isinstance(rule, SiteDependentBernoulli):
        if v_norm is None:
            raise ConfigError("site-dependent rule needs a norm")
        return bernoulli(min(1.0, rule.alpha / (v_norm * v_norm)))
    raise ConfigError(f"rule {rule!r} has no single per-vertex law")


def _norm(coords) -> float:
    if isinstance(coords, tuple):
        return math.sqrt(sum(c * c for c in coords))
    raise ConfigError("site-dependent rule requires lattice coordinates")


def count_uniform(seed: int, vertex_hash: int) -> float:
    return uniform(combine(seed, vertex_hash), 0, LANE_COUNT)


def sample_count(rule, v: int, coords, seed: int, vertex_hash: int | None = None) -> int:
    """Number of sleeping frogs at non-root vertex ``v``.

    The draw is keyed by (seed, vertex label), so it does not depend on the
    order in which vertices are discovered.
    """
    if v == 0:
        raise ConfigError("the root carries no sleeping frogs")
    if isinstance(rule, Deterministic):
        return rule.k
    if isinstance(rule, ExplicitCounts):
        return int(rule.counts.get(coords, 0))
    if vertex_hash is None:
        from .rng import label_hash

        vertex_hash = label_hash(coords)
    u = count_uniform(seed, vertex_hash)
    if isinstance(rule, IID):
        return rule.pmf.quantile(u)
    if isinstance(rule, SiteDependentBernoulli):
        r = _norm(coords)
        p = min(1.0, rule.alpha / (r * r))
        return 1 if u < p else 0
    raise ConfigError(f"unknown configuration rule {rule!r}")
