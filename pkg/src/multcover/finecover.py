"""f-dimensional cost of the fine cover built from scaled hyperbola covers.

Singly metric: for every q the set {x in I^d : prod ||q x_i - theta_i|| < psi(q)}
sits inside the translates (p + theta + M(psi(q))) / q, p in Z_q, and each
translate is covered by a scaled copy of the dyadic cover of M(psi(q)).

Doubly metric: each cube is thickened by a grid of theta-cells of side
side/q, and costs are measured with F(x) = x^d f(x) in the max norm on R^2d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from ._parallel import ordered_map
from .errors import DomainError
from .functions import (ApproximatingFunction, DimensionFunction, GeometricGrid,
                        check_condition_I, check_condition_II, f_doubling_ratio)
from .hyperbola_cover import cover_cost, dyadic_exponent, vectors_by_kmax


@dataclass(frozen=True)
class InhomogeneousShift:
    theta: tuple

    def __post_init__(self):
        reduced = []
        for t in self.theta:
            t = Fraction(t)
            reduced.append(t - math.floor(t))
        object.__setattr__(self, "theta", tuple(reduced))

    @property
    def d(self) -> int:
        return len(self.theta)

    def as_floats(self) -> tuple:
        return tuple(float(t) for t in self.theta)


def resonant_count(q: int, shift: InhomogeneousShift) -> int:
    """|Z_q| with Z_q = {p : -1 <= p_i + theta_i < q + 1}, counted per axis."""
    total = 1
    for t in shift.theta:
        total *= math.ceil(q + 1 - t) - math.ceil(-1 - t)
    return total


@dataclass(frozen=True)
class ResonantCellFamily:
    q: int
    shift: InhomogeneousShift

    @property
    def p_count(self) -> int:
        return resonant_count(self.q, self.shift)

    @property
    def scale(self) -> Fraction:
        return Fraction(1, self.q)


@dataclass
class CostLedger:
    """Per-q cost terms of a truncated fine cover plus the comparison series."""

    mode: str
    d: int
    Q: int
    rows: list = field(default_factory=list)     # (q, term, running_total, comparison_term)
    total: float = 0.0
    comparison_total: float = 0.0
    K_lower: float = math.inf
    K_upper: float = 0.0
    trivial_q: list = field(default_factory=list)
    count_discrepancies: list = field(default_factory=list)
    collapse_range: Optional[tuple] = None
    trend: str = "undetermined"

    @property
    def ratio(self) -> float:
        return self.total / self.comparison_total

    @property
    def terms(self) -> list:
        return [r[1] for r in self.rows]


def comparison_term(psi: ApproximatingFunction, f: DimensionFunction, d: int, q: int) -> float:
    """q^d psi(q)^(1-d) f(psi(q)/q)."""
    p = psi(q)
    return q ** d * p ** (1 - d) * f(p / q)


def _trend(terms: Sequence[float]) -> str:
    # compare the partial-sum increments over (Q/4, Q/2] and (Q/2, Q]
    n = len(terms)
    if n < 8:
        return "undetermined"
    a = math.fsum(terms[n // 4: n // 2])
    b = math.fsum(terms[n // 2:])
    if a == 0:
        return "undetermined"
    return "divergent trend" if b / a >= 0.9 else "convergent trend"


def _check_f(f: DimensionFunction, d: int) -> None:
    check_condition_I(f, d)
    ii = check_condition_II(f, d)
    if not ii.holds:
        raise DomainError(f"{f.describe()} fails condition (II) for d={d} (witness {ii.witness})")


def _cover_exponent(psi_q: float, d: int):
    N = dyadic_exponent(psi_q)
    return (d, True) if N < d else (N, False)


def finecover_cost_truncated(psi: ApproximatingFunction, f: DimensionFunction, d: int,
                             theta: Sequence, Q: int, check: bool = True) -> CostLedger:
    """Partial f-cost of the fine cover over q <= Q, with the comparison series."""
    if Q < 2:
        raise DomainError("Q must be >= 2")
    shift = theta if isinstance(theta, InhomogeneousShift) else InhomogeneousShift(tuple(theta))
    if shift.d != d:
        raise DomainError(f"theta has {shift.d} coordinates, expected {d}")
    if check:
        _check_f(f, d)

    def per_q(q):
        p = psi(q)
        N, trivial = _cover_exponent(p, d)
        cc = cover_cost(N, d, lambda side: f(side / q))
        zq = resonant_count(q, shift)
        return q, zq * cc.total, comparison_term(psi, f, d, q), trivial, zq

    ledger = CostLedger("single", d, Q)
    running = []
    for q, term, comp, trivial, zq in ordered_map(per_q, range(1, Q + 1)):
        running.append(term)
        ledger.rows.append((q, term, math.fsum(running), comp))
        if trivial:
            ledger.trivial_q.append(q)
        if zq != (q + 2) ** d:
            ledger.count_discrepancies.append((q, zq))
        ledger.K_lower = min(ledger.K_lower, term / comp)
        ledger.K_upper = max(ledger.K_upper, term / comp)
    ledger.total = ledger.rows[-1][2]
    ledger.comparison_total = math.fsum(r[3] for r in ledger.rows)
    ledger.trend = _trend(ledger.terms)
    return ledger


@dataclass(frozen=True)
class DoublyCell:
    """One k_max-group of theta-cells at a given q."""

    q: int
    k_max: int
    cubes: int
    grid_count: int
    diameter: float
    collapse: float   # grid_count * F(diameter) / f(diameter) = grid_count * diameter^d


def doubly_cells(q: int, N: int, d: int):
    for k, nvec in sorted(vectors_by_kmax(N, d).items()):
        e = d * k - N + 2 * d
        side = Fraction(1, 2 ** k)
        delta0 = side / q
        grid_per_axis = math.ceil(1 / delta0)
        delta = max(delta0, (delta0 + side) / q)
        collapse = grid_per_axis ** d * delta ** d
        yield DoublyCell(q, k, nvec << e, grid_per_axis ** d, float(delta), float(collapse))


def doubly_metric_cost_truncated(psi: ApproximatingFunction, f: DimensionFunction, d: int,
                                 Q: int, check: bool = True) -> CostLedger:
    """Partial F-cost, F(x) = x^d f(x), of the doubly metric fine cover over q <= Q."""
    if Q < 2:
        raise DomainError("Q must be >= 2")
    if check:
        _check_f(f, d)

    def per_q(q):
        N, trivial = _cover_exponent(psi(q), d)
        cells = list(doubly_cells(q, N, d))
        # (q+2)^d * cubes * grid * F(delta) with the grid * delta^d factor kept exact
        parts = [c.cubes * c.collapse * f(c.diameter) for c in cells]
        return q, (q + 2) ** d * math.fsum(parts), comparison_term(psi, f, d, q), trivial, cells

    ledger = CostLedger("double", d, Q)
    running = []
    lo, hi = math.inf, 0.0
    for q, term, comp, trivial, cells in ordered_map(per_q, range(1, Q + 1)):
        running.append(term)
        ledger.rows.append((q, term, math.fsum(running), comp))
        if trivial:
            ledger.trivial_q.append(q)
        for c in cells:
            lo, hi = min(lo, c.collapse), max(hi, c.collapse)
        ledger.K_lower = min(ledger.K_lower, term / comp)
        ledger.K_upper = max(ledger.K_upper, term / comp)
    ledger.total = ledger.rows[-1][2]
    ledger.comparison_total = math.fsum(r[3] for r in ledger.rows)
    ledger.collapse_range = (lo, hi)
    ledger.trend = _trend(ledger.terms)
    return ledger


@dataclass(frozen=True)
class DoublingResult:
    holds: bool
    ratio_bound: float
    limit: float


def f_doubling_check(f: DimensionFunction, grid: GeometricGrid = GeometricGrid()) -> DoublingResult:
    """f(2r) comparable to f(r): sup of the two-sided ratio over r <= x0."""
    bound = f_doubling_ratio(f, grid)
    return DoublingResult(math.isfinite(bound), bound, 2.0 ** float(f.s))
