"""Exact classification of the power-log series and the verdict engine.

Every series criterion reduces, for symbolic psi and f, to a single term
T(q) = scale * q^e * (log q)^h * (log log q)^h2 whose convergence follows the
integral test.  Exponents are Fractions, so the boundary e = -1 is decided
exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Optional, Union

import numpy as np

from .errors import DomainError, OutOfRange
from .functions import (ApproximatingFunction, DimensionFunction, Number,
                        check_condition_I, check_condition_II, exact, lower_order_tau)


class Series(str, Enum):
    GALLAGHER = "Gallagher"
    BV_CONV = "BV_conv"
    BV_DIV = "BV_div"
    MAIN = "Main"
    BUGEAUD = "Bugeaud"
    DOUBLY_LEBESGUE = "DoublyLebesgue"
    MULTI_EQCON = "MultiEqcon"
    MULTI_PSICONV = "MultiPsiConv"


class Classification(str, Enum):
    CONVERGENT = "Convergent"
    DIVERGENT = "Divergent"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class PowerLogTerm:
    e: Fraction
    h: Fraction = Fraction(0)
    h2: Fraction = Fraction(0)
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "e", exact(self.e))
        object.__setattr__(self, "h", exact(self.h))
        object.__setattr__(self, "h2", exact(self.h2))

    def log_value(self, log_q):
        """log T as a function of log q (valid for q > e)."""
        log_q = np.asarray(log_q, dtype=float)
        out = math.log(self.scale) + float(self.e) * log_q
        if self.h:
            out = out + float(self.h) * np.log(log_q)
        if self.h2:
            out = out + float(self.h2) * np.log(np.log(log_q))
        return out

    def __call__(self, q: float) -> float:
        return float(np.exp(self.log_value(math.log(q))))

    def describe(self) -> str:
        parts = [f"q^{_s(self.e)}"]
        if self.h:
            parts.append(f"(log q)^{_s(self.h)}")
        if self.h2:
            parts.append(f"(log log q)^{_s(self.h2)}")
        return "*".join(parts)


def _s(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{float(v):g}"


@dataclass(frozen=True)
class SeriesClassification:
    verdict: Classification
    mode: str                          # "exact" | "heuristic"
    evidence: dict = field(default_factory=dict)

    @property
    def converges(self) -> bool:
        return self.verdict is Classification.CONVERGENT


def classify_powerlog(T: PowerLogTerm) -> SeriesClassification:
    """Integral test on the exponent triple."""
    conv = (T.e < -1 or (T.e == -1 and T.h < -1)
            or (T.e == -1 and T.h == -1 and T.h2 < -1))
    verdict = Classification.CONVERGENT if conv else Classification.DIVERGENT
    return SeriesClassification(verdict, "exact", {"e": T.e, "h": T.h, "h2": T.h2})


def _logsumexp(v: np.ndarray) -> float:
    m = float(np.max(v))
    return m + math.log(float(np.sum(np.exp(v - m))))


def classify_condensed(log_term: Callable, K: int = 4096, start: int = 8) -> SeriesClassification:
    """Numeric oracle: Cauchy condensation evaluated in log space.

    For eventually monotone T, sum T(q) converges iff sum 2^k T(2^k) does.
    The condensed partial sums are compared over the blocks (K, 2K] and
    (2K, 4K]; a shrinking tail block means convergence.  Only evaluations of
    ``log_term(log q)`` are used, never the exponents.
    """
    k1 = np.arange(K + 1, 2 * K + 1, dtype=float)
    k2 = np.arange(2 * K + 1, 4 * K + 1, dtype=float)
    ln2 = math.log(2.0)
    b1 = _logsumexp(k1 * ln2 + log_term(k1 * ln2))
    b2 = _logsumexp(k2 * ln2 + log_term(k2 * ln2))
    head = _logsumexp(np.arange(start, K + 1) * ln2 + log_term(np.arange(start, K + 1) * ln2))
    if b2 < b1 - 1.0 and b2 < head:
        verdict = Classification.CONVERGENT
    elif b2 >= b1:
        verdict = Classification.DIVERGENT
    else:
        verdict = Classification.UNKNOWN
    return SeriesClassification(verdict, "heuristic",
                                {"log_block_1": b1, "log_block_2": b2, "K": K})


def classify_heuristic(term: Callable[[int], float], Q: int = 4096,
                       monotone: bool = False) -> SeriesClassification:
    """Partial sums at Q, 2Q, 4Q for opaque terms; Unknown when signals conflict."""
    qs = np.arange(1, 4 * Q + 1)
    vals = np.array([float(term(int(q))) for q in qs])
    S1, S2, S4 = (math.fsum(vals[:n]) for n in (Q, 2 * Q, 4 * Q))
    inc1, inc2 = S2 - S1, S4 - S2
    evidence = {"S_Q": S1, "S_2Q": S2, "S_4Q": S4}
    signals = []
    if inc1 > 0:
        signals.append(inc2 / inc1 < 0.9)
    if monotone:
        # condensation: 2^k T(2^k) must shrink geometrically for convergence
        ks = [k for k in range(1, int(math.log2(4 * Q)) + 1)]
        cond = [2 ** k * vals[2 ** k - 1] for k in ks]
        if len(cond) >= 4 and cond[-2] > 0:
            signals.append(cond[-1] / cond[-2] < 0.95)
    if not signals or len(set(signals)) > 1:
        return SeriesClassification(Classification.UNKNOWN, "heuristic", evidence)
    verdict = Classification.CONVERGENT if signals[0] else Classification.DIVERGENT
    return SeriesClassification(verdict, "heuristic", evidence)


# --------------------------------------------------------------------------
# term construction
# --------------------------------------------------------------------------


class UnsupportedSeries(DomainError):
    pass


def _f_at_psi_over_q(psi: ApproximatingFunction, f: DimensionFunction):
    """Exponents (e, h, h2) and scale of f(psi(q)/q) as q -> infinity."""
    a, b, s = psi.a, psi.b, f.s
    alpha, beta = f.alpha, f.beta
    A = a + 1      # psi(q)/q = c q^-A (log q)^-b
    if A > 0:
        return -A * s, -b * s + alpha, beta, psi.c ** float(s) * float(A) ** float(alpha)
    if A == 0 and b > 0:
        if beta:
            raise UnsupportedSeries("f(psi(q)/q) needs a triple-log factor")
        return Fraction(0), -b * s, alpha, psi.c ** float(s) * float(b) ** float(alpha)
    # psi(q)/q does not tend to 0: f is evaluated in its clamped range, x^s times a constant
    if A == 0 and b == 0 and not f.is_pure_power:
        return Fraction(0), Fraction(0), Fraction(0), f(psi.c)
    return -A * s, -b * s, Fraction(0), psi.c ** float(s)


def build_series_term(which: Union[Series, str], psi: ApproximatingFunction,
                      f: Optional[Union[DimensionFunction, Number]] = None,
                      d: int = 2, m: int = 1) -> PowerLogTerm:
    """Exact power-log term of the named series for symbolic psi and f.

    ``f`` may be a DimensionFunction or a bare exponent s (meaning x^s).  For
    the multivariable series the sum over Z^m \\ {0} is taken radially with
    shell counts (2Q+1)^m - (2Q-1)^m ~ m 2^m Q^(m-1).
    """
    which = Series(which)
    if not psi.is_symbolic:
        raise UnsupportedSeries("raw psi: use the heuristic classifier")
    if f is not None and not isinstance(f, DimensionFunction):
        f = DimensionFunction(s=exact(f))
    a, b, c = psi.a, psi.b, psi.c
    if which in (Series.GALLAGHER, Series.DOUBLY_LEBESGUE):
        return PowerLogTerm(-a, -b + d - 1, 0, c)
    if which is Series.MULTI_EQCON:
        return PowerLogTerm(m - 1 - m * a, -m * b + d - 1, 0, m * 2.0 ** m * c ** m)
    if f is None:
        raise DomainError(f"{which.value} needs a dimension function or exponent s")
    s = f.s
    if which in (Series.BV_CONV, Series.BV_DIV):
        if not f.is_pure_power:
            raise DomainError(f"{which.value} is an s-volume series; pass a pure power")
        w = s - d + 1
        h = -b * w + (d - 2 if which is Series.BV_CONV else 0)
        return PowerLogTerm(d - s - a * w, h, 0, c ** float(w))
    fe, fh, fh2, fscale = _f_at_psi_over_q(psi, f)
    if which is Series.MAIN:
        # q^d psi^(1-d) f(psi/q)
        return PowerLogTerm(d + a * (d - 1) + fe, b * (d - 1) + fh, fh2, c ** (1 - d) * fscale)
    if which is Series.BUGEAUD:
        # r g(psi(r)/r) with f(x) = x^(d-1) g(x)
        g = DimensionFunction(s=s - (d - 1), alpha=f.alpha, beta=f.beta, x0=f.x0)
        ge, gh, gh2, gscale = _f_at_psi_over_q(psi, g)
        return PowerLogTerm(1 + ge, gh, gh2, gscale)
    if which is Series.MULTI_PSICONV:
        md = m * d
        return PowerLogTerm(m - 1 + md + a * (md - 1) + fe, b * (md - 1) + fh, fh2,
                            m * 2.0 ** m * c ** (1 - md) * fscale)
    raise AssertionError(which)


def classify_series(which, psi, f=None, d=2, m=1) -> SeriesClassification:
    """Exact classification for symbolic inputs, numeric heuristic for raw psi."""
    if psi.is_symbolic:
        try:
            return classify_powerlog(build_series_term(which, psi, f, d, m))
        except UnsupportedSeries:
            pass
    fn = _numeric_term(Series(which), psi, f, d, m)
    return classify_heuristic(fn, monotone=psi.is_monotone)


def _numeric_term(which: Series, psi, f, d, m):
    if f is not None and not isinstance(f, DimensionFunction):
        f = DimensionFunction(s=exact(f))
    lg = lambda q: math.log(max(q, 2))
    shell = lambda q: (2 * q + 1) ** m - (2 * q - 1) ** m
    if which in (Series.GALLAGHER, Series.DOUBLY_LEBESGUE):
        return lambda q: psi(q) * lg(q) ** (d - 1)
    if which is Series.MULTI_EQCON:
        return lambda q: shell(q) * psi(q) ** m * lg(q) ** (d - 1)
    w = float(f.s) - d + 1
    if which is Series.BV_CONV:
        return lambda q: q ** (d - float(f.s)) * psi(q) ** w * lg(q) ** (d - 2)
    if which is Series.BV_DIV:
        return lambda q: q ** (d - float(f.s)) * psi(q) ** w
    if which in (Series.MAIN, Series.BUGEAUD):
        return lambda q: q ** d * psi(q) ** (1 - d) * f(psi(q) / q)
    md = m * d
    return lambda q: shell(q) * q ** md * psi(q) ** (1 - md) * f(psi(q) / q)


# --------------------------------------------------------------------------
# dimension and verdicts
# --------------------------------------------------------------------------


def hausdorff_dimension(psi: ApproximatingFunction, d: int, mode: str = "single",
                        Q: int = 10**4):
    """d (or 2d) if tau <= 1, else d + (1 - tau)/(1 + tau) (resp. 2d + ...).

    Returns (value, exact flag); the value is a Fraction when tau is exact.
    """
    tau = lower_order_tau(psi, Q)
    base = d if mode == "single" else 2 * d
    if mode not in ("single", "double"):
        raise DomainError(f"unknown dimension mode {mode!r}")
    t = tau.value
    if t <= 1:
        return (Fraction(base) if tau.exact else float(base)), tau.exact
    return base + (1 - t) / (1 + t), tau.exact


class MeasureKind(str, Enum):
    LEBESGUE = "Lebesgue_d"
    HAUSDORFF_F = "Hausdorff_f"
    HAUSDORFF_S = "Hausdorff_s"
    DOUBLY_F = "Doubly_F"


class Value(str, Enum):
    ZERO = "Zero"
    ONE = "One"
    INFINITE = "Infinite"
    CONJECTURAL_ONE = "Conjectural_One"
    CONJECTURAL_INFINITE = "Conjectural_Infinite"
    OUT_OF_RANGE_INFINITE = "OutOfRange_Infinite"
    OUT_OF_RANGE_ZERO = "OutOfRange_Zero"
    UNDETERMINED = "Undetermined"


@dataclass
class SeriesReport:
    name: str
    term: Optional[PowerLogTerm]
    classification: SeriesClassification

    def to_json(self) -> dict:
        t = self.term
        return {
            "name": self.name,
            "e": None if t is None else _num(t.e),
            "h": None if t is None else _num(t.h),
            "h2": None if t is None else _num(t.h2),
            "classification": self.classification.verdict.value,
            "mode": self.classification.mode,
        }


def _num(v):
    if isinstance(v, Fraction):
        return int(v) if v.denominator == 1 else float(v)
    return v


@dataclass
class Verdict:
    measure_kind: MeasureKind
    value: Value
    provenance: str
    monotonicity: str = "not required"
    series: list = field(default_factory=list)
    dim_H: Optional[Union[Fraction, float]] = None
    dim_exact: bool = True
    notes: list = field(default_factory=list)
    heuristic: bool = False

    def series_named(self, name) -> SeriesReport:
        name = Series(name).value
        return next(r for r in self.series if r.name == name)

    def to_json(self) -> dict:
        return {
            "measure_kind": self.measure_kind.value,
            "value": self.value.value,
            "provenance": self.provenance,
            "monotonicity": self.monotonicity,
            "dim_H": None if self.dim_H is None else float(self.dim_H),
            "dim_H_exact": (str(self.dim_H) if isinstance(self.dim_H, Fraction) else None),
            "series": [r.to_json() for r in self.series],
            "notes": list(self.notes),
            "heuristic": self.heuristic,
        }


def _report(which, psi, f, d, m=1) -> SeriesReport:
    term = None
    if psi.is_symbolic:
        try:
            term = build_series_term(which, psi, f, d, m)
        except UnsupportedSeries:
            term = None
    cls = classify_powerlog(term) if term is not None else classify_series(which, psi, f, d, m)
    return SeriesReport(Series(which).value, term, cls)


def verdict(psi: ApproximatingFunction, f: Optional[Union[DimensionFunction, Number]] = None,
            d: int = 2, mode: str = "homogeneous", m: int = 1,
            theta=None) -> Verdict:
    """Measure statement the theorems give for (psi, f or s, d, mode).

    ``mode`` is one of homogeneous, inhomogeneous, doubly, multivariable.
    ``f=None`` asks for the Lebesgue statement; a bare number means f = x^s.
    """
    if d < 2:
        raise DomainError("d must be >= 2")
    if mode not in ("homogeneous", "inhomogeneous", "doubly", "multivariable"):
        raise DomainError(f"unknown mode {mode!r}")
    if mode == "multivariable" and m < 1:
        raise DomainError("m must be >= 1")
    s_mode = f is not None and not isinstance(f, DimensionFunction)
    if s_mode:
        f = DimensionFunction(s=exact(f))
    heuristic = not psi.is_symbolic
    if f is None:
        v = _lebesgue_verdict(psi, d, mode, m)
    else:
        v = _hausdorff_verdict(psi, f, d, mode, m, s_mode)
    v.heuristic = heuristic or any(r.classification.mode == "heuristic" for r in v.series)
    if mode in ("homogeneous", "inhomogeneous", "doubly"):
        dim, ex = hausdorff_dimension(psi, d, "double" if mode == "doubly" else "single")
        v.dim_H, v.dim_exact = dim, ex
        if ex and mode != "doubly" and dim < d:
            at_s0 = classify_powerlog(build_series_term(Series.MAIN, psi, dim, d))
            value = "infinity" if not at_s0.converges else "0"
            v.notes.append(f"at s0 = dim_H = {dim}: Main series is "
                           f"{at_s0.verdict.value}, so H^s0 = {value}")
    return v


def _lebesgue_verdict(psi, d, mode, m) -> Verdict:
    if mode == "multivariable":
        rep = _report(Series.MULTI_EQCON, psi, None, d, m)
        if rep.classification.converges:
            return Verdict(MeasureKind.LEBESGUE, Value.ZERO,
                           "multivariable convergence (first Borel-Cantelli)", series=[rep])
        if rep.classification.verdict is Classification.UNKNOWN:
            return Verdict(MeasureKind.LEBESGUE, Value.UNDETERMINED, "series unclassified", series=[rep])
        if psi.is_monotone:
            return Verdict(MeasureKind.LEBESGUE, Value.CONJECTURAL_ONE,
                           "Conjecture 1 (radial monotone Psi)", "satisfied", series=[rep])
        return Verdict(MeasureKind.LEBESGUE, Value.UNDETERMINED,
                       "Conjecture 1 requires monotone psi", "violated", series=[rep])
    which = Series.DOUBLY_LEBESGUE if mode == "doubly" else Series.GALLAGHER
    rep = _report(which, psi, None, d)
    if rep.classification.verdict is Classification.UNKNOWN:
        return Verdict(MeasureKind.LEBESGUE, Value.UNDETERMINED, "series unclassified", series=[rep])
    conv = rep.classification.converges
    if mode == "homogeneous":
        return Verdict(MeasureKind.LEBESGUE, Value.ZERO if conv else Value.ONE,
                       "Theorem 1 (Gallagher)", series=[rep])
    if mode == "doubly":
        return Verdict(MeasureKind.LEBESGUE, Value.ZERO if conv else Value.ONE,
                       "doubly metric zero-one law (Cassels-type Borel-Cantelli)", series=[rep])
    if conv:
        return Verdict(MeasureKind.LEBESGUE, Value.ZERO,
                       "inhomogeneous first Borel-Cantelli", series=[rep])
    return Verdict(MeasureKind.LEBESGUE, Value.CONJECTURAL_ONE,
                   "Beresnevich-Haynes-Velani conjecture", series=[rep])


def _window_check(s: Fraction, dim: int):
    if s == dim:
        raise OutOfRange(
            f"s = {dim}: the Beresnevich-Haynes-Velani conjecture contradicts the s-volume "
            "zero-infinity law at s = d, so no statement is made", s=s, d=dim)
    if s <= dim - 1:
        return Value.OUT_OF_RANGE_INFINITE, f"s <= {dim - 1}: H^s = infinity irrespective of psi"
    if s > dim:
        return Value.OUT_OF_RANGE_ZERO, f"s > {dim}: H^s = 0 irrespective of psi"
    return None


def _hausdorff_verdict(psi, f, d, mode, m, s_mode) -> Verdict:
    kind = (MeasureKind.DOUBLY_F if mode == "doubly"
            else MeasureKind.HAUSDORFF_S if s_mode else MeasureKind.HAUSDORFF_F)
    dim = m * d if mode == "multivariable" else d
    out = _window_check(f.s, dim)
    if out is not None:
        return Verdict(kind, out[0], out[1])
    notes = []
    cond_I = check_condition_I(f, dim)
    cond_II = check_condition_II(f, dim)
    if not s_mode:
        notes.append(f"condition (I) C_est = {cond_I.C_est:.6g}")
        if not cond_II.holds:
            notes.append(f"condition (II) fails (witness {cond_II.witness})")

    if mode == "multivariable":
        main = _report(Series.MULTI_PSICONV, psi, f, d, m)
        series = [main, _report(Series.MULTI_EQCON, psi, None, d, m)]
    else:
        main = _report(Series.MAIN, psi, f, d)
        series = [_report(Series.GALLAGHER, psi, None, d)]
        if f.is_pure_power:
            series += [_report(Series.BV_CONV, psi, f, d), _report(Series.BV_DIV, psi, f, d)]
        series += [main, _report(Series.BUGEAUD, psi, f, d)]
        if f.is_pure_power and mode != "doubly":
            bc = series[1].classification.verdict
            bd = series[2].classification.verdict
            if bc is Classification.DIVERGENT and bd is Classification.CONVERGENT:
                notes.append("Theorem 2 (Beresnevich-Velani) inconclusive: "
                             "convergence sum diverges, divergence sum converges")

    tag = {"doubly": "Theorem 6", "multivariable": "multivariable convergence case"}.get(
        mode, "Corollary 3" if s_mode else "Theorem 3")
    cls = main.classification.verdict
    if cls is Classification.UNKNOWN:
        return Verdict(kind, Value.UNDETERMINED, f"{tag}: series unclassified", series=series, notes=notes)
    if cls is Classification.CONVERGENT:
        return Verdict(kind, Value.ZERO, f"{tag} (convergence case, no monotonicity needed)",
                       "not required", series=series, notes=notes)
    # divergence
    mono = psi.is_monotone
    if mode == "multivariable":
        if mono and cond_II.holds:
            return Verdict(kind, Value.CONJECTURAL_INFINITE, "Conjecture 2 (radial monotone psi)",
                           "satisfied", series=series, notes=notes)
        if cond_II.holds:
            # Conjecture 3 drops monotonicity only for the doubly metric set
            notes.append("Conjecture 2 needs monotone psi")
        return Verdict(kind, Value.UNDETERMINED, "Conjecture 2 hypotheses not met",
                       "violated" if not mono else "satisfied", series=series, notes=notes)
    if not cond_II.holds:
        return Verdict(kind, Value.UNDETERMINED, f"{tag}: divergence needs condition (II)",
                       "satisfied" if mono else "violated", series=series, notes=notes)
    if mono:
        return Verdict(kind, Value.INFINITE, f"{tag} (divergence case, Slicing Lemma + Bugeaud)",
                       "satisfied", series=series, notes=notes)
    if mode == "doubly":
        return Verdict(kind, Value.CONJECTURAL_INFINITE,
                       "Conjecture 3 (doubly metric, monotonicity dropped)", "violated",
                       series=series, notes=notes)
    notes.append("divergence without monotone psi is open")
    return Verdict(kind, Value.UNDETERMINED, f"{tag}: divergence requires monotone psi",
                   "violated", series=series, notes=notes)
