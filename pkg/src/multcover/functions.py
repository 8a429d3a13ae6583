"""Approximating functions, dimension functions and the checks they must pass.

Both families are power-log symbolic objects; exponents are stored as exact
``Fraction`` values so that series classification downstream never has to
compare floats against the critical exponent -1.
"""

from __future__ import annotations

import json
import math
import re
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Union

import numpy as np

from .errors import OutOfRange, ParseError

Number = Union[int, float, Fraction]

X0_DEFAULT = math.exp(-2.0)


def exact(value: Number) -> Fraction:
    """Exact rational from user input; floats go through their shortest repr."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if not math.isfinite(value):
        raise ParseError(f"non-finite exponent {value!r}")
    return Fraction(repr(float(value)))


def _fmt(v: Fraction) -> Union[int, float]:
    if v.denominator == 1:
        return int(v)
    return float(v)


# --------------------------------------------------------------------------
# approximating functions
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ApproximatingFunction:
    """psi(q) = c * q^-a * (log q)^-b, clamped to its value at ``lower_cutoff``.

    ``raw`` switches to numeric-only mode: evaluation delegates to the callable
    and every downstream result is flagged heuristic.  ``monotone`` overrides
    the monotonicity used by the verdict engine (symbolic families are
    eventually monotone; raw callables are assumed not to be unless declared).
    """

    c: float = 1.0
    a: Fraction = Fraction(0)
    b: Fraction = Fraction(0)
    lower_cutoff: int = 2
    raw: Optional[Callable[[int], float]] = field(default=None, compare=False)
    monotone: Optional[bool] = None
    label: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "a", exact(self.a))
        object.__setattr__(self, "b", exact(self.b))
        object.__setattr__(self, "c", float(self.c))
        if not self.c > 0:
            raise ParseError(f"psi scale must be positive, got {self.c}")
        if self.lower_cutoff < 2:
            raise ParseError("lower_cutoff must be >= 2")

    @classmethod
    def power(cls, a: Number, b: Number = 0, c: float = 1.0) -> "ApproximatingFunction":
        return cls(c=c, a=exact(a), b=exact(b))

    @classmethod
    def from_callable(cls, fn: Callable[[int], float], monotone: bool = False,
                      label: Optional[str] = None) -> "ApproximatingFunction":
        return cls(raw=fn, monotone=monotone, label=label)

    @classmethod
    def gap_family(cls, d: int, s: Number, alpha: Number) -> "ApproximatingFunction":
        """(q^(d-s+1) log^alpha q)^(-1/(s-d+1)), the family Theorem-2-type sums miss."""
        s, alpha = exact(s), exact(alpha)
        w = s - d + 1
        if w <= 0:
            raise OutOfRange(f"gap family needs s > d-1 (s={s}, d={d})", s=s, d=d)
        return cls(a=(d - s + 1) / w, b=alpha / w,
                   label=f"gap:alpha={_fmt(alpha)}")

    @property
    def is_symbolic(self) -> bool:
        return self.raw is None

    @property
    def monotone_decreasing_to_zero(self) -> bool:
        if not self.is_symbolic:
            return bool(self.monotone)
        return self.a > 0 or (self.a == 0 and self.b > 0)

    @property
    def is_monotone(self) -> bool:
        if self.monotone is not None:
            return self.monotone
        # every q^-a (log q)^-b is eventually monotone; only the tail matters
        return self.is_symbolic

    def evaluate(self, q: int) -> float:
        if q < 1:
            raise ValueError(f"psi is defined on q >= 1, got {q}")
        if self.raw is not None:
            return float(self.raw(q))
        q = max(q, self.lower_cutoff)
        v = self.c
        if self.a:
            v *= float(q) ** (-float(self.a))
        if self.b:
            v *= math.log(q) ** (-float(self.b))
        return v

    __call__ = evaluate

    def evaluate_array(self, qs) -> np.ndarray:
        qs = np.asarray(qs)
        if self.raw is not None:
            return np.array([float(self.raw(int(q))) for q in qs])
        qe = np.maximum(qs, self.lower_cutoff).astype(float)
        v = np.full(qe.shape, self.c)
        if self.a:
            v = v * qe ** (-float(self.a))
        if self.b:
            v = v * np.log(qe) ** (-float(self.b))
        return v

    def to_json(self) -> dict:
        if not self.is_symbolic:
            raise ParseError("raw approximating functions are not serialisable")
        return {"kind": "psi", "c": self.c, "a": _fmt(self.a), "b": _fmt(self.b)}

    @classmethod
    def from_json(cls, obj: dict) -> "ApproximatingFunction":
        if obj.get("kind", "psi") != "psi":
            raise ParseError(f"expected kind 'psi', got {obj.get('kind')!r}")
        return cls(c=obj.get("c", 1.0), a=exact(obj.get("a", 0)), b=exact(obj.get("b", 0)))

    def describe(self) -> str:
        if self.label:
            return self.label
        if not self.is_symbolic:
            return "<raw>"
        parts = []
        if self.c != 1.0:
            parts.append(repr(self.c))
        if self.a:
            parts.append(f"q^{_fmt(-self.a)}")
        if self.b:
            parts.append(f"log^{_fmt(-self.b)}")
        return "*".join(parts) or "1"


# --------------------------------------------------------------------------
# dimension functions
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DimensionFunction:
    """f(x) = x^s (log 1/x)^alpha (log log 1/x)^beta.

    The log factors are frozen at their value at ``x0`` for x >= x0, which
    keeps log log 1/x positive; below x0 the family is the textbook one.
    """

    s: Fraction
    alpha: Fraction = Fraction(0)
    beta: Fraction = Fraction(0)
    x0: float = X0_DEFAULT
    C: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "s", exact(self.s))
        object.__setattr__(self, "alpha", exact(self.alpha))
        object.__setattr__(self, "beta", exact(self.beta))
        if not 0 < self.x0 < 1 / math.e:
            raise ParseError("x0 must lie in (0, 1/e) so that log log 1/x0 > 0")
        if self.is_pure_power and self.C is None:
            object.__setattr__(self, "C", 1.0)

    @property
    def is_pure_power(self) -> bool:
        return self.alpha == 0 and self.beta == 0

    def evaluate(self, x: float) -> float:
        if x <= 0:
            raise ValueError(f"dimension function needs x > 0, got {x}")
        v = x ** float(self.s)
        if self.is_pure_power:
            return v
        L = math.log(1.0 / min(x, self.x0))
        if self.alpha:
            v *= L ** float(self.alpha)
        if self.beta:
            v *= math.log(L) ** float(self.beta)
        return v

    __call__ = evaluate

    def log_evaluate(self, x) -> np.ndarray:
        """Natural log of f on an array (stable far below 2^-1000)."""
        x = np.asarray(x, dtype=float)
        out = float(self.s) * np.log(x)
        if self.is_pure_power:
            return out
        L = np.log(1.0 / np.minimum(x, self.x0))
        if self.alpha:
            out = out + float(self.alpha) * np.log(L)
        if self.beta:
            out = out + float(self.beta) * np.log(np.log(L))
        return out

    def sliced(self, d: int) -> "SlicedDimensionFunction":
        return SlicedDimensionFunction(self, d)

    def to_json(self) -> dict:
        return {"kind": "f", "s": _fmt(self.s), "alpha": _fmt(self.alpha),
                "beta": _fmt(self.beta)}

    @classmethod
    def from_json(cls, obj: dict) -> "DimensionFunction":
        if obj.get("kind", "f") != "f":
            raise ParseError(f"expected kind 'f', got {obj.get('kind')!r}")
        if "s" not in obj:
            raise ParseError("dimension function JSON needs 's'")
        return cls(s=exact(obj["s"]), alpha=exact(obj.get("alpha", 0)),
                   beta=exact(obj.get("beta", 0)))

    def describe(self) -> str:
        parts = [f"x^{_fmt(self.s)}"]
        if self.alpha:
            parts.append(f"log^{_fmt(self.alpha)}")
        if self.beta:
            parts.append(f"loglog^{_fmt(self.beta)}")
        return "*".join(parts)


@dataclass(frozen=True)
class SlicedDimensionFunction:
    """g with f(r) = r^(d-1) g(r)."""

    parent: DimensionFunction
    d: int

    def evaluate_g(self, r: float) -> float:
        return self.as_dimension_function().evaluate(r)

    def as_dimension_function(self) -> DimensionFunction:
        p = self.parent
        return DimensionFunction(s=p.s - (self.d - 1), alpha=p.alpha, beta=p.beta, x0=p.x0)


# --------------------------------------------------------------------------
# parsing
# --------------------------------------------------------------------------

_NUM = r"[-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?(?:/\d+)?"
_FACTOR = re.compile(rf"^(?P<base>q|x|loglog|log)(?:\^\(?(?P<exp>{_NUM})\)?)?$")
_SCALAR = re.compile(rf"^{_NUM}$")


def _factors(text: str):
    text = text.replace(" ", "").replace("**", "^")
    if not text:
        raise ParseError("empty function expression")
    for tok in text.split("*"):
        if _SCALAR.match(tok):
            yield "const", exact(tok)
            continue
        m = _FACTOR.match(tok)
        if not m:
            raise ParseError(f"cannot parse factor {tok!r}")
        yield m.group("base"), exact(m.group("exp") or "1")


def parse_psi(text: str, d: Optional[int] = None, s: Optional[Number] = None) -> ApproximatingFunction:
    """Parse JSON or shorthand like ``q^-2*log^-1``, ``0.5*q^-3`` or ``gap:alpha=1.5``."""
    text = text.strip()
    if text.startswith("{"):
        return ApproximatingFunction.from_json(json.loads(text))
    if text.startswith("gap:"):
        m = re.match(rf"^gap:alpha=({_NUM})$", text.replace(" ", ""))
        if not m:
            raise ParseError(f"bad gap-family spec {text!r}")
        if d is None or s is None:
            raise ParseError("gap family needs both d and s")
        return ApproximatingFunction.gap_family(d, s, exact(m.group(1)))
    c, a, b = Fraction(1), Fraction(0), Fraction(0)
    for base, e in _factors(text):
        if base == "const":
            c *= e
        elif base == "q":
            a -= e
        elif base == "log":
            b -= e
        else:
            raise ParseError(f"factor {base!r} not allowed in psi")
    return ApproximatingFunction(c=float(c), a=a, b=b, label=text)


def parse_dimfn(text: str) -> DimensionFunction:
    """Parse JSON or shorthand like ``x^1.5*log^1*loglog^-2`` (logs are of 1/x)."""
    text = text.strip()
    if text.startswith("{"):
        return DimensionFunction.from_json(json.loads(text))
    s, alpha, beta, seen_x = Fraction(0), Fraction(0), Fraction(0), False
    for base, e in _factors(text):
        if base == "x":
            s += e
            seen_x = True
        elif base == "log":
            alpha += e
        elif base == "loglog":
            beta += e
        else:
            raise ParseError(f"factor {base!r} not allowed in a dimension function")
    if not seen_x:
        raise ParseError("dimension function needs an x^s factor")
    return DimensionFunction(s=s, alpha=alpha, beta=beta)


# --------------------------------------------------------------------------
# conditions (I), (II) and the lower order at infinity
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GeometricGrid:
    """Points 2^(-k/per_octave) for k = 0 .. lo_exp*per_octave, ascending."""

    lo_exp: int = 60
    per_octave: int = 8

    def points(self) -> np.ndarray:
        k = np.arange(self.lo_exp * self.per_octave, -1, -1)
        return np.exp2(-k / self.per_octave)


@dataclass(frozen=True)
class ConditionIResult:
    holds: bool
    s: Fraction
    C_est: float
    witness: Optional[tuple] = None


@dataclass(frozen=True)
class ConditionIIResult:
    holds: bool
    symbolic: bool
    witness: Optional[tuple] = None


def _require_window(s: Fraction, d: int, what: str = "s") -> None:
    if not d - 1 < s < d:
        raise OutOfRange(f"{what}={_fmt(s)} is outside ({d - 1}, {d})", s=s, d=d)


def check_condition_I(f: DimensionFunction, d: int, grid: GeometricGrid = GeometricGrid()) -> ConditionIResult:
    """f(y) <= C (y/x)^s f(x) for x < y, certified on the sample grid.

    C_est is the grid supremum of f(y)(x/y)^s / f(x), i.e. of L(y)/L(x) for the
    log-correction L = f / x^s.  The witness is the pair attaining it.
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    _require_window(f.s, d)
    x = grid.points()
    h = f.log_evaluate(x) - float(f.s) * np.log(x)
    if f.is_pure_power:
        h = np.zeros_like(x)
    prefix_min = np.minimum.accumulate(h[:-1])
    prefix_arg = np.zeros(len(prefix_min), dtype=int)
    for i in range(1, len(prefix_min)):
        prefix_arg[i] = i if h[i] < prefix_min[i - 1] else prefix_arg[i - 1]
    gaps = h[1:] - prefix_min
    j = int(np.argmax(gaps))
    C_est = float(np.exp(gaps[j]))
    witness = (float(x[prefix_arg[j]]), float(x[j + 1]))
    if not math.isfinite(C_est):
        return ConditionIResult(False, f.s, C_est, witness)
    return ConditionIResult(True, f.s, C_est, witness)


def _condition_II_symbolic(f: DimensionFunction, d: int) -> bool:
    e = f.s - d + 1
    if e != 0:
        return e > 0
    # x^0 times logs of 1/x: increasing in x iff the leading log exponent is negative
    if f.alpha != 0:
        return f.alpha < 0
    return f.beta <= 0


def check_condition_II(f: DimensionFunction, d: int, grid: GeometricGrid = GeometricGrid()) -> ConditionIIResult:
    """x -> x^(1-d) f(x) increasing: exponent rule plus a grid scan."""
    if d < 2:
        raise ValueError("d must be >= 2")
    symbolic = _condition_II_symbolic(f, d)
    x = grid.points()
    k = f.log_evaluate(x) - (d - 1) * np.log(x)
    drops = np.nonzero(k[1:] < k[:-1] - 1e-12 * np.maximum(1.0, np.abs(k[:-1])))[0]
    witness = None
    if len(drops):
        i = int(drops[0])
        witness = (float(x[i]), float(x[i + 1]))
    return ConditionIIResult(symbolic and witness is None, symbolic, witness)


def f_doubling_ratio(f: DimensionFunction, grid: GeometricGrid = GeometricGrid()) -> float:
    """sup over grid r <= x0 of max(f(2r)/f(r), f(r)/f(2r))."""
    r = grid.points()
    r = r[r <= f.x0]
    lr = f.log_evaluate(2 * r) - f.log_evaluate(r)
    return float(np.exp(np.max(np.abs(lr))))


@dataclass(frozen=True)
class TauEstimate:
    value: Union[Fraction, float]
    exact: bool


def lower_order_tau(psi: ApproximatingFunction, Q: int = 10**4, samples: int = 64) -> TauEstimate:
    """liminf log(1/psi(q)) / log q.  Exact for symbolic psi (log factors drop out)."""
    if Q < 100:
        raise ValueError("Q must be >= 100")
    if psi.is_symbolic:
        return TauEstimate(psi.a, True)
    qs = np.unique(np.geomspace(max(2, Q // 10), Q, samples).astype(int))
    vals = psi.evaluate_array(qs)
    if np.any(vals >= 1):
        warnings.warn("psi is not eventually < 1 on the sample window; tau is unreliable")
    with np.errstate(divide="ignore"):
        ratios = np.log(1.0 / vals) / np.log(qs)
    return TauEstimate(float(np.min(ratios)), False)
