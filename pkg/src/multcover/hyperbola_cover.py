"""Dyadic hypercube covers of M(r) = {x : |x_i| <= 1, prod |x_i| <= r}.

For r = 2^-N the cover is indexed by exponent vectors k >= 0 with
sum(k) = N - d.  Each box B(k) = prod [-2^-k_i, 2^-k_i] is cut into cubes of
side 2^-k_max, giving prod 2^(k_max - k_i + 1) = 2^(d k_max - N + 2d) cubes.
Diameters are taken in the max norm, so diam(cube) = side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Callable, Iterator, NamedTuple, Sequence, Union

import numpy as np

from .errors import CapExceeded, CoverOverflow, DomainError, OutOfRange
from .functions import DimensionFunction, exact

CostSpec = Union[float, Fraction, DimensionFunction, Callable[[float], float]]


def _ratio(v) -> tuple:
    """(numerator, denominator) of an int, float or Fraction, exactly."""
    if isinstance(v, Fraction):
        return v.numerator, v.denominator
    if isinstance(v, float):
        return v.as_integer_ratio()
    if isinstance(v, int):
        return v, 1
    return Fraction(v).as_integer_ratio()


def floor_log2(v: Fraction) -> int:
    """floor(log2 v) for a positive rational, exactly."""
    return _floor_log2_ratio(v.numerator, v.denominator)


def _floor_log2_ratio(p: int, q: int) -> int:
    n = p.bit_length() - q.bit_length()
    # 2^n * q <= p < 2^(n+1) * q, compared without leaving the integers
    def le(m):
        return (q << m) <= p if m >= 0 else q <= (p << -m)
    while not le(n):
        n -= 1
    while le(n + 1):
        n += 1
    return n


def dyadic_exponent(r) -> int:
    """Largest integer N with r <= 2^-N (exact for floats and Fractions)."""
    if not r > 0:
        raise DomainError(f"need r > 0, got {r}")
    return floor_log2(1 / Fraction(r))


@dataclass(frozen=True)
class HyperbolaRegion:
    d: int
    N: int

    def __post_init__(self):
        if self.d < 2:
            raise DomainError("d must be >= 2")
        if self.N < self.d:
            raise DomainError(f"need N >= d, got N={self.N}, d={self.d}")

    @classmethod
    def from_r(cls, r: float, d: int) -> "HyperbolaRegion":
        N = dyadic_exponent(r)
        if N < d:
            raise DomainError(f"r={r} exceeds 2^-{d}; only the trivial whole-cube cover applies")
        return cls(d, N)

    @property
    def r(self) -> Fraction:
        return Fraction(1, 2 ** self.N)

    def contains(self, x: Sequence) -> bool:
        if len(x) != self.d:
            raise DomainError(f"point has {len(x)} coordinates, region has d={self.d}")
        rs = [_ratio(v) for v in x]
        if any(abs(n) > m for n, m in rs):
            return False
        return math.prod(abs(n) for n, _ in rs) << self.N <= math.prod(m for _, m in rs)


@dataclass(frozen=True)
class ExponentVector:
    k: tuple
    N: int

    def __post_init__(self):
        if any(v < 0 for v in self.k):
            raise DomainError(f"negative exponent in {self.k}")
        if sum(self.k) != self.N - len(self.k):
            raise DomainError(f"sum{self.k} != N - d = {self.N - len(self.k)}")

    @property
    def d(self) -> int:
        return len(self.k)

    @property
    def k_max(self) -> int:
        return max(self.k)

    @property
    def count_exponent(self) -> int:
        return self.d * self.k_max - self.N + 2 * self.d

    @property
    def cube_count(self) -> int:
        return 1 << self.count_exponent

    @property
    def side(self) -> Fraction:
        return Fraction(1, 2 ** self.k_max)

    def box_contains(self, x: Sequence) -> bool:
        return all(abs(n) << ki <= m for (n, m), ki in zip(map(_ratio, x), self.k))


def exponent_set(N: int, d: int) -> Iterator[ExponentVector]:
    """All k >= 0 with sum N - d, lexicographically decreasing in k_1 first.

    Order follows the descending-lexicographic convention, e.g. N=5, d=2 gives
    (3,0), (2,1), (1,2), (0,3).
    """
    if d < 1:
        raise DomainError("d must be >= 1")
    if N < d:
        raise DomainError(f"need N >= d, got N={N}, d={d}")
    T = N - d

    def rec(remaining, slots):
        if slots == 1:
            yield (remaining,)
            return
        for first in range(remaining, -1, -1):
            for rest in rec(remaining - first, slots - 1):
                yield (first,) + rest

    for k in rec(T, d):
        yield ExponentVector(k, N)


def exponent_set_size(N: int, d: int) -> int:
    return comb(N - 1, d - 1)


def compositions_with_max_at_most(T: int, d: int, m: int) -> int:
    """Number of k in Z_{>=0}^d with sum T and every k_i <= m (inclusion-exclusion)."""
    if m < 0:
        return 0
    total = 0
    for j in range(d + 1):
        rest = T - j * (m + 1)
        if rest < 0:
            break
        total += (-1) ** j * comb(d, j) * comb(rest + d - 1, d - 1)
    return total


def vectors_by_kmax(N: int, d: int) -> dict:
    """k_max -> number of exponent vectors with that maximum."""
    T = N - d
    out = {}
    for m in range(T + 1):
        n = compositions_with_max_at_most(T, d, m) - compositions_with_max_at_most(T, d, m - 1)
        if n:
            out[m] = n
    return out


def _cost_function(cost: CostSpec, d: int) -> Callable[[float], float]:
    if isinstance(cost, DimensionFunction):
        return cost.evaluate
    if callable(cost):
        return cost
    s = exact(cost)
    if not d - 1 < s < d:
        raise OutOfRange(f"s={float(s)} is outside ({d - 1}, {d})", s=s, d=d)
    sf = float(s)
    return lambda side: side ** sf


@dataclass(frozen=True)
class CoverCost:
    N: int
    d: int
    total: float
    by_kmax: dict = field(repr=False)
    vectors_by_kmax: dict = field(repr=False)
    cube_total: int = 0

    def profile(self):
        """Contributions ordered by distance l = N - d - k_max from the top scale."""
        T = self.N - self.d
        return [(T - k, self.by_kmax[k]) for k in sorted(self.by_kmax, reverse=True)]


def cover_cost(N: int, d: int, cost: CostSpec) -> CoverCost:
    """Sum over the cover of cost(side), grouped by k_max, without materialising.

    ``cost`` is an exponent s (cost = side^s), a DimensionFunction, or any
    callable of the side length.
    """
    if d < 2:
        raise DomainError("d must be >= 2")
    if N < d:
        raise DomainError(f"need N >= d, got N={N}, d={d}")
    fn = _cost_function(cost, d)
    counts = vectors_by_kmax(N, d)
    by_kmax = {}
    cubes = 0
    for k, nvec in counts.items():
        e = d * k - N + 2 * d
        side = math.ldexp(1.0, -k)
        per_cube = fn(side) if side > 0 else 0.0
        term = nvec * math.ldexp(per_cube, e)
        if not (per_cube > 0 and 0 < term < math.inf):
            raise CoverOverflow(f"cost term 2^{e} * cost(2^-{k}) leaves the float range "
                                f"at k_max={k}")
        by_kmax[k] = term
        cubes += nvec << e
    return CoverCost(N, d, math.fsum(by_kmax.values()), by_kmax, counts, cubes)


def cover_cube_total(N: int, d: int) -> int:
    return sum(n << (d * k - N + 2 * d) for k, n in vectors_by_kmax(N, d).items())


class Cube(NamedTuple):
    """Cube with centre nums[i] / 2^(k_max+1) and side 2^-k_max."""

    nums: tuple
    k_max: int

    @property
    def side(self) -> Fraction:
        return Fraction(1, 2 ** self.k_max)

    @property
    def center(self) -> tuple:
        den = 2 ** (self.k_max + 1)
        return tuple(Fraction(n, den) for n in self.nums)

    def contains(self, x: Sequence) -> bool:
        # |v - c/2^(K+1)| <= 2^-(K+1), cleared of denominators
        e = self.k_max + 1
        return all(abs((n << e) - c * m) <= m for (n, m), c in zip(map(_ratio, x), self.nums))

    def center_strings(self) -> list:
        m = self.k_max + 1
        return [f"{n}/2^{m}" for n in self.nums]


def _axis_nums(k_i: int, K: int) -> range:
    # tiles [-2^-k_i, 2^-k_i] by 2^(K-k_i+1) intervals of length 2^-K
    n = 1 << (K - k_i + 1)
    start = 1 - (1 << (K - k_i + 1))
    return range(start, start + 2 * n, 2)


def cubes_of(vec: ExponentVector) -> Iterator[Cube]:
    K = vec.k_max
    axes = [_axis_nums(ki, K) for ki in vec.k]

    def rec(i, prefix):
        if i == len(axes):
            yield Cube(prefix, K)
            return
        for n in axes[i]:
            yield from rec(i + 1, prefix + (n,))

    yield from rec(0, ())


def materialize_cover(N: int, d: int, cap: int = 10**7) -> list:
    """Explicit cube list; raises CapExceeded naming the exact count."""
    total = cover_cube_total(N, d)
    if total > cap:
        raise CapExceeded(total, cap)
    out = []
    for vec in exponent_set(N, d):
        out.extend(cubes_of(vec))
    return out


def per_coordinate_exponents(x: Sequence, N: int) -> tuple:
    """Largest k_i with |x_i| <= 2^-k_i, capped at N - d (zero coordinates hit the cap)."""
    d = len(x)
    cap = N - d
    ks = []
    for v in x:
        n, m = _ratio(v)
        if n == 0:
            ks.append(cap)
            continue
        ks.append(min(_floor_log2_ratio(m, abs(n)), cap))
    return tuple(ks)


def reduce_to_S(ks: Sequence, N: int) -> tuple:
    """Decrement largest coordinates (lowest index on ties) until sum = N - d."""
    d = len(ks)
    ks = list(ks)
    excess = sum(ks) - (N - d)
    if excess < 0:
        raise DomainError(f"exponents {tuple(ks)} sum below N - d; point is not in M(2^-{N})")
    while excess:
        top = max(ks)
        i = ks.index(top)
        # drop the leader straight to the runner-up level in one step
        others = [v for j, v in enumerate(ks) if j != i]
        runner = max(others) if others else 0
        step = min(excess, max(top - runner, 1))
        ks[i] -= step
        excess -= step
    return tuple(ks)


def point_to_box(x: Sequence, region: HyperbolaRegion) -> ExponentVector:
    """Exponent vector k' in S with x in B(k')."""
    if not region.contains(x):
        raise DomainError(f"point {tuple(x)} is not in M(2^-{region.N})")
    ks = per_coordinate_exponents(x, region.N)
    vec = ExponentVector(reduce_to_S(ks, region.N), region.N)
    assert vec.box_contains(x), (x, vec.k)
    return vec


def locate_cube(x: Sequence, vec: ExponentVector) -> Cube:
    """The cube of B(vec)'s subdivision containing x (upper cube on shared faces)."""
    K = vec.k_max
    nums = []
    for v, ki in zip(x, vec.k):
        n, m = _ratio(v)
        n_int = 1 << (K - ki + 1)
        # floor((v + 2^-ki) * 2^K) in integers
        j = ((n << K) + (m << (K - ki))) // m
        j = min(max(j, 0), n_int - 1)
        nums.append(2 * j + 1 - n_int)
    return Cube(tuple(nums), K)


# --------------------------------------------------------------------------
# scaling diagnostics
# --------------------------------------------------------------------------


@dataclass
class ScalingReport:
    d: int
    s: float
    rows: list          # (N, cost, ratio, slope_so_far)
    slope: float
    ratio_sup: float
    ratio_inf: float
    profile: list       # (l, contribution) for the largest N
    decay_ratios: list  # successive contribution ratios along the profile

    @property
    def ratio_spread(self) -> float:
        return self.ratio_sup / self.ratio_inf


def _slope(Ns, costs) -> float:
    if len(Ns) < 2:
        return float("nan")
    return float(np.polyfit(-np.asarray(Ns, float), np.log2(costs), 1)[0])


def cost_scaling_report(d: int, s: float, N_range: Sequence[int]) -> ScalingReport:
    """cost(N), cost / r^(s-d+1) with r = 2^-N, and the log2-cost vs -N slope."""
    s_exact = exact(s)
    if not d - 1 < s_exact < d:
        raise OutOfRange(f"s={float(s_exact)} is outside ({d - 1}, {d})", s=s_exact, d=d)
    Ns = list(N_range)
    w = float(s_exact) - d + 1
    rows, costs, last = [], [], None
    for i, N in enumerate(Ns):
        cc = cover_cost(N, d, s_exact)
        costs.append(cc.total)
        ratio = cc.total / math.ldexp(1.0, -N) ** w
        rows.append((N, cc.total, ratio, _slope(Ns[: i + 1], costs)))
        last = cc
    ratios = [r[2] for r in rows]
    profile = last.profile()
    decay = [profile[i + 1][1] / profile[i][1] for i in range(len(profile) - 1)]
    return ScalingReport(d, float(s_exact), rows, _slope(Ns, costs), max(ratios),
                         min(ratios), profile, decay)
