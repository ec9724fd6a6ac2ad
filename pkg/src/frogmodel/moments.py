"""Iterated differences, complete monotonicity and multilinear interpolation.

Everything here is exact: values are ``fractions.Fraction`` and sign checks
never touch floating point.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb

MAX_INTERP_VARS = 20
MAX_GRID_VARS = 8


class MomentsError(ValueError):
    pass


def _q(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class RationalSeq:
    values: tuple

    def __post_init__(self):
        if not self.values:
            raise MomentsError("sequence needs at least one term")
        object.__setattr__(self, "values", tuple(_q(v) for v in self.values))

    @property
    def K(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, k: int) -> Fraction:
        return self.values[k]

    def __len__(self) -> int:
        return len(self.values)

    @classmethod
    def from_function(cls, f, K: int) -> "RationalSeq":
        return cls(tuple(f(k) for k in range(K + 1)))

    @classmethod
    def parse(cls, text: str) -> "RationalSeq":
        """``k value`` lines; every k from 0 to the largest must appear once."""
        vals = {}
        for ln, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise MomentsError(f"line {ln}: expected 'k value'")
            k = int(parts[0])
            if k < 0 or k in vals:
                raise MomentsError(f"line {ln}: bad or repeated index {k}")
            vals[k] = Fraction(parts[1])
        if not vals or sorted(vals) != list(range(max(vals) + 1)):
            raise MomentsError("sequence indices must be exactly 0..K")
        return cls(tuple(vals[k] for k in range(len(vals))))


def iterated_difference(f: RationalSeq, n: int, k: int) -> Fraction:
    """D^n f(k) = sum_i (-1)^(n-i) C(n, i) f(k + i)."""
    if n < 0 or k < 0 or k + n > f.K:
        raise MomentsError(f"D^{n} f({k}) needs f up to index {k + n}, have {f.K}")
    return sum(((-1) ** (n - i) * comb(n, i) * f[k + i] for i in range(n + 1)), Fraction(0))


@dataclass
class HausdorffResult:
    passed: bool
    checks: int
    witness: tuple | None = None  # (n, k, (-1)^n D^n f(k))

    def __bool__(self) -> bool:
        return self.passed


def hausdorff_check(f: RationalSeq, n_max: int, k_max: int | None = None) -> HausdorffResult:
    """Check (-1)^n D^n f(k) >= 0 for n <= n_max and k <= min(k_max, K - n).

    The witness is the first violation in (n, k) order.
    """
    if n_max < 0 or n_max > f.K:
        raise MomentsError(f"n_max={n_max} outside 0..{f.K}")
    k_max = f.K if k_max is None else k_max
    row = list(f.values)  # row n holds (-1)^n D^n f
    checks = 0
    for n in range(n_max + 1):
        for k in range(min(k_max, len(row) - 1) + 1):
            checks += 1
            if row[k] < 0:
                return HausdorffResult(False, checks, (n, k, row[k]))
        row = [row[k] - row[k + 1] for k in range(len(row) - 1)]
    return HausdorffResult(True, checks)


def moment_sequence(atoms, K: int) -> RationalSeq:
    """f(k) = sum_j w_j u_j^k for rational weights w_j >= 0 and points u_j in [0, 1]."""
    atoms = [(_q(w), _q(u)) for w, u in atoms]
    if any(w < 0 or not 0 <= u <= 1 for w, u in atoms):
        raise MomentsError("moment atoms need w >= 0 and u in [0, 1]")
    return RationalSeq(tuple(sum((w * u ** k for w, u in atoms), Fraction(0)) for k in range(K + 1)))


# ----------------------------------------------------------------------------
# multilinear polynomials
#
# A vertex x in {0,1}^n is encoded as the bitmask with bit i set iff x_(i+1) = 1;
# coefficient coeffs[S] multiplies the product of x_(i+1) over bits i of S.


def _vertex_mask(x) -> int:
    return sum(1 << i for i, b in enumerate(x) if b)


@dataclass(frozen=True)
class MultilinearPoly:
    n: int
    coeffs: tuple

    def __post_init__(self):
        if len(self.coeffs) != 1 << self.n:
            raise MomentsError(f"need {1 << self.n} coefficients for n={self.n}")
        object.__setattr__(self, "coeffs", tuple(_q(c) for c in self.coeffs))

    def __call__(self, x) -> Fraction:
        return evaluate(self, x)

    def __add__(self, other: "MultilinearPoly") -> "MultilinearPoly":
        if self.n != other.n:
            raise MomentsError("dimension mismatch")
        return MultilinearPoly(self.n, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def vertex_values(self) -> dict:
        return {x: evaluate(self, x) for x in itertools.product((0, 1), repeat=self.n)}

    def describe(self) -> str:
        terms = []
        for S, c in enumerate(self.coeffs):
            if c:
                mono = "*".join(f"x{i + 1}" for i in range(self.n) if S >> i & 1)
                terms.append(f"{c}" + (f"*{mono}" if mono else ""))
        return " + ".join(terms) or "0"


def evaluate(p: MultilinearPoly, x) -> Fraction:
    if len(x) != p.n:
        raise MomentsError(f"point has {len(x)} coordinates, polynomial has {p.n}")
    x = [_q(v) for v in x]
    total = Fraction(0)
    for S, c in enumerate(p.coeffs):
        if c:
            term = c
            for i in range(p.n):
                if S >> i & 1:
                    term *= x[i]
            total += term
    return total


def interpolate(g: dict, n: int | None = None) -> MultilinearPoly:
    """The multilinear polynomial agreeing with ``g`` on {0,1}^n.

    ``g`` maps 0/1 tuples to rationals.  Expanding the tensor product
    sum_v g(v) prod_i (x_i if v_i else 1 - x_i) gives the coefficient of
    x_S as the Moebius sum over subsets T of S of (-1)^(|S|-|T|) g(T).
    """
    if n is None:
        if not g:
            raise MomentsError("empty vertex table")
        n = len(next(iter(g)))
    if n > MAX_INTERP_VARS:
        raise MomentsError(f"n={n} exceeds {MAX_INTERP_VARS}")
    a = [None] * (1 << n)
    for x, val in g.items():
        if len(x) != n or any(b not in (0, 1) for b in x):
            raise MomentsError(f"bad vertex {x!r}")
        a[_vertex_mask(x)] = _q(val)
    missing = [m for m, v in enumerate(a) if v is None]
    if missing:
        raise MomentsError(f"missing vertex value for {tuple(missing[0] >> i & 1 for i in range(n))}")
    for i in range(n):
        bit = 1 << i
        for S in range(1 << n):
            if S & bit:
                a[S] -= a[S ^ bit]
    return MultilinearPoly(n, tuple(a))


def mixed_partial(p: MultilinearPoly, B) -> MultilinearPoly:
    """d/dx_b for every b in B (1-based).  Variables in B no longer appear."""
    mask = _subset_mask(B, p.n)
    coeffs = [p.coeffs[S | mask] if not S & mask else Fraction(0) for S in range(1 << p.n)]
    return MultilinearPoly(p.n, tuple(coeffs))


def _subset_mask(B, n: int) -> int:
    mask = 0
    for b in B:
        if not 1 <= b <= n:
            raise MomentsError(f"variable {b} not in 1..{n}")
        mask |= 1 << (b - 1)
    return mask


def finite_difference(g: dict, B, x, n: int) -> Fraction:
    """Delta_B g at x with the coordinates in B first set to zero."""
    mask = _subset_mask(B, n)
    base = _vertex_mask(x) & ~mask
    members = [1 << i for i in range(n) if mask >> i & 1]
    total = Fraction(0)
    for size in range(len(members) + 1):
        for T in itertools.combinations(members, size):
            v = base | sum(T)
            total += (-1) ** (len(members) - size) * _q(g[tuple(v >> i & 1 for i in range(n))])
    return total


def verify_derivative_identity(g: dict, B, x) -> bool:
    """The mixed partial of interpolate(g) over B, evaluated at the vertex x,
    equals the finite difference of g over B at x with B's coordinates zeroed."""
    n = len(x)
    p = interpolate(g, n)
    return evaluate(mixed_partial(p, B), x) == finite_difference(g, B, x, n)


@dataclass
class ExtremumResult:
    passed: bool
    grid_min: Fraction
    grid_max: Fraction
    vertex_min: Fraction
    vertex_max: Fraction

    def __bool__(self) -> bool:
        return self.passed


def vertex_extremum_check(p: MultilinearPoly, grid_per_axis: int = 11) -> ExtremumResult:
    """Compare extremes of p over a uniform grid of [0,1]^n with those over the vertices."""
    if p.n > MAX_GRID_VARS:
        raise MomentsError(f"n={p.n} exceeds {MAX_GRID_VARS}")
    if grid_per_axis < 2:
        raise MomentsError("grid needs at least 2 points per axis")
    axis = [Fraction(j, grid_per_axis - 1) for j in range(grid_per_axis)]
    grid = [evaluate(p, x) for x in itertools.product(axis, repeat=p.n)]
    verts = list(p.vertex_values().values())
    gmin, gmax, vmin, vmax = min(grid), max(grid), min(verts), max(verts)
    return ExtremumResult(gmax <= vmax and gmin >= vmin, gmin, gmax, vmin, vmax)


def parse_vertex_table(text: str) -> dict:
    """``bitstring value`` lines, e.g. ``101 3/4``; the first character is x1."""
    out = {}
    n = None
    for ln, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2 or set(parts[0]) - {"0", "1"}:
            raise MomentsError(f"line {ln}: expected 'bitstring value'")
        x = tuple(int(c) for c in parts[0])
        if n is None:
            n = len(x)
        if len(x) != n or x in out:
            raise MomentsError(f"line {ln}: inconsistent or repeated vertex {parts[0]}")
        out[x] = Fraction(parts[1])
    return out
