"""Desk-scale probes of the lim-sup sets on finite q-windows.

Everything here is a truncated proxy: windows [Q1, Q2] stand in for the tail
of the lim-sup, and box counting stands in for Hausdorff dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from statistics import NormalDist
from typing import Optional, Sequence

import numpy as np

from ._parallel import ordered_map
from .errors import BudgetExceeded, DomainError
from .functions import ApproximatingFunction

DEFAULT_BUDGET = 1 << 30
_CHUNK = 1 << 15


def nearest_int_distance(y: Fraction) -> Fraction:
    """||y||; Python's round() on a Fraction is round-half-even."""
    return abs(y - round(y))


@dataclass
class HitRecord:
    x: tuple
    theta: tuple
    Q: int
    hits: list = field(default_factory=list)
    products: list = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.hits)


def count_hits(x: Sequence, theta: Sequence, psi: ApproximatingFunction, Q: int) -> HitRecord:
    """All q <= Q with prod ||q x_i - theta_i|| < psi(q), in exact rational arithmetic."""
    if Q < 1:
        raise DomainError("Q must be >= 1")
    if len(x) != len(theta):
        raise DomainError("x and theta must have the same length")
    xs = [Fraction(v) for v in x]
    ts = [Fraction(t) for t in theta]
    rec = HitRecord(tuple(xs), tuple(ts), Q)
    for q in range(1, Q + 1):
        prod = Fraction(1)
        for xi, ti in zip(xs, ts):
            prod *= nearest_int_distance(q * xi - ti)
            if prod == 0:
                break
        if prod < Fraction(psi(q)):
            rec.hits.append(q)
            rec.products.append(prod)
    return rec


def single_q_area(psi_q: float, d: int) -> float:
    """Lebesgue measure of {x in I^d : prod ||q x_i - theta_i|| < psi_q}.

    x -> q x - theta is measure preserving on the torus, so this is
    P(prod V_i < 2^d psi_q) with V_i iid uniform on [0, 1].
    """
    t = psi_q * 2 ** d
    if t >= 1:
        return 1.0
    if t <= 0:
        return 0.0
    L = -math.log(t)
    return t * math.fsum(L ** k / math.factorial(k) for k in range(d))


def wilson_interval(hits: int, n: int, level: float = 0.95):
    z = NormalDist().inv_cdf(0.5 + level / 2)
    p = hits / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass
class TailEstimate:
    estimate: float
    ci: tuple
    hits: int
    samples: int
    union_bound: float
    window: tuple
    seed: int
    label: str = "truncated proxy"


def _dist(y: np.ndarray) -> np.ndarray:
    return np.abs(y - np.rint(y))


def _tail_chunk(args):
    seq, n, d, qs, psis, theta = args
    x = np.random.default_rng(seq).random((n, d))
    hit = np.zeros(n, dtype=bool)
    for q, p in zip(qs, psis):
        live = ~hit
        if not live.any():
            break
        prod = np.ones(int(live.sum()))
        xl = x[live]
        for i in range(d):
            prod *= _dist(q * xl[:, i] - theta[i])
        hit[np.flatnonzero(live)[prod < p]] = True
    return int(hit.sum())


def lebesgue_tail_estimate(psi: ApproximatingFunction, theta: Sequence, d: int,
                           Q1: int, Q2: int, samples: int = 10**5, seed: int = 0) -> TailEstimate:
    """Monte Carlo measure of the union over Q1 <= q <= Q2, with a Wilson 95% interval.

    Samples are drawn in fixed-size chunks, each from its own stream spawned
    from ``seed``, so the result does not depend on the thread count.
    """
    if not Q1 <= Q2:
        raise DomainError("need Q1 <= Q2")
    if samples < 10**4:
        raise DomainError("need at least 10^4 samples")
    if len(theta) != d:
        raise DomainError(f"theta has {len(theta)} coordinates, expected {d}")
    theta = tuple(float(Fraction(t) - math.floor(Fraction(t))) for t in theta)
    qs = np.arange(Q1, Q2 + 1)
    psis = psi.evaluate_array(qs)
    n_chunks = -(-samples // _CHUNK)
    seqs = np.random.SeedSequence(seed).spawn(n_chunks)
    sizes = [_CHUNK] * (n_chunks - 1) + [samples - _CHUNK * (n_chunks - 1)]
    hits = sum(ordered_map(_tail_chunk, [(s, n, d, qs, psis, theta) for s, n in zip(seqs, sizes)]))
    union = math.fsum(single_q_area(float(p), d) for p in psis)
    return TailEstimate(hits / samples, wilson_interval(hits, samples), hits, samples,
                        min(1.0, union), (Q1, Q2), seed)


# --------------------------------------------------------------------------
# box counting
# --------------------------------------------------------------------------


@dataclass
class BoxCountResult:
    js: list
    counts: list
    dimension: float
    window: tuple
    d: int
    seed: Optional[int] = None
    label: str = "truncated proxy"

    @property
    def resolutions(self) -> list:
        return [2.0 ** -j for j in self.js]


def axis_min_distance(q: int, theta_i: float, n: int) -> np.ndarray:
    """min of ||q x - theta_i|| over each of the n intervals [a/n, (a+1)/n]."""
    a = np.arange(n, dtype=float)
    lo = q * a / n - theta_i
    hi = lo + q / n
    contains = np.floor(hi) >= np.ceil(lo)
    return np.where(contains, 0.0, np.minimum(_dist(lo), _dist(hi)))


def occupied_grid(psi: ApproximatingFunction, theta: Sequence, d: int, Q1: int, Q2: int,
                  j: int, budget_bytes: int = DEFAULT_BUDGET) -> np.ndarray:
    """Boolean grid of the 2^(jd) boxes meeting the union over Q1 <= q <= Q2.

    A closed box meets {prod ||q x_i - theta_i|| < psi(q)} iff the product of
    per-axis minima of ||q x_i - theta_i|| over the box is below psi(q).
    """
    n = 1 << j
    rest_cells = n ** (d - 1)
    rows = max(1, min(n, (1 << 22) // max(rest_cells, 1)))
    required = n ** d + 9 * rows * rest_cells + 8 * rest_cells
    if required > budget_bytes:
        raise BudgetExceeded(required, budget_bytes)
    theta = [float(t) % 1.0 for t in theta]
    grid = np.zeros((n, rest_cells), dtype=bool)
    for q in range(Q1, Q2 + 1):
        p = psi(q)
        mins = [axis_min_distance(q, theta[i], n) for i in range(d)]
        rest = mins[1]
        for m in mins[2:]:
            rest = np.multiply.outer(rest, m).ravel()
        m0 = mins[0]
        # rows whose first-axis minimum is 0 are wholly occupied
        grid[m0 == 0] = True
        nz = np.flatnonzero(m0 > 0)
        # a row can only gain boxes where rest < p / m0
        for start in range(0, len(nz), rows):
            idx = nz[start:start + rows]
            grid[idx] |= (m0[idx, None] * rest[None, :]) < p
    return grid.reshape((n,) * d)


def _pool(grid: np.ndarray, d: int) -> np.ndarray:
    n = grid.shape[0] // 2
    shape = []
    for _ in range(d):
        shape += [n, 2]
    return grid.reshape(shape).any(axis=tuple(range(1, 2 * d, 2)))


def box_dimension_estimate(psi: ApproximatingFunction, theta: Sequence, d: int, Q1: int, Q2: int,
                           j_range: Sequence[int], seed: Optional[int] = None,
                           budget_bytes: int = DEFAULT_BUDGET) -> BoxCountResult:
    """Occupied-box counts at 2^-j for j in j_range and the fitted log2 slope.

    Occupancy is decided analytically at the finest level and OR-pooled
    upwards, so coarser counts are exactly consistent.  ``seed`` is unused by
    the analytic test and only recorded.
    """
    js = sorted(set(j_range))
    if not js or js[0] < 0:
        raise DomainError("j_range must be non-empty and non-negative")
    if d not in (2, 3):
        raise DomainError("box counting supports d = 2 and d = 3")
    if len(theta) != d:
        raise DomainError(f"theta has {len(theta)} coordinates, expected {d}")
    if not 1 <= Q1 <= Q2:
        raise DomainError("need 1 <= Q1 <= Q2")
    grid = occupied_grid(psi, theta, d, Q1, Q2, js[-1], budget_bytes)
    counts = {js[-1]: int(grid.sum())}
    for j in range(js[-1] - 1, js[0] - 1, -1):
        grid = _pool(grid, d)
        if j in js:
            counts[j] = int(grid.sum())
    cs = [counts[j] for j in js]
    slope = float(np.polyfit(js, np.log2(cs), 1)[0]) if len(js) > 1 else float("nan")
    return BoxCountResult(js, cs, slope, (Q1, Q2), d, seed)
