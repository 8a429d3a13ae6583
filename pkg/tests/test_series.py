import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from scipy import integrate

from multcover.errors import DomainError, OutOfRange
from multcover.functions import ApproximatingFunction, DimensionFunction, parse_dimfn, parse_psi
from multcover.series import (Classification, PowerLogTerm, Series, Value, build_series_term,
                              classify_condensed, classify_heuristic, classify_powerlog,
                              classify_series, hausdorff_dimension, verdict)

CONV, DIV = Classification.CONVERGENT, Classification.DIVERGENT


def _integral_oracle(e, h, U):
    # integral of q^e (log q)^h dq over [e^1, e^U], substituted q = e^u
    val, _ = integrate.quad(lambda u: math.exp((e + 1) * u) * u ** h, 1, U, limit=500)
    return val


@pytest.mark.parametrize("e,h,expected", [(-1.1, 0, CONV), (-1, -1.5, CONV), (-1, -1, DIV)])
def test_classify_examples_against_integral_test(e, h, expected):
    assert classify_powerlog(PowerLogTerm(e, h)).verdict is expected
    # the integral either saturates or keeps growing between u = 10^3 and 10^5
    a, b = _integral_oracle(e, h, 1e3), _integral_oracle(e, h, 1e5)
    grows = (b - a) > 0.5 * a
    assert grows is (expected is DIV)


def test_log_log_boundary():
    assert classify_powerlog(PowerLogTerm(-1, -1, Fraction(-3, 2))).verdict is CONV
    assert classify_powerlog(PowerLogTerm(-1, -1, -1)).verdict is DIV
    assert classify_powerlog(PowerLogTerm(-1, -1, 0)).verdict is DIV


def test_heuristic_on_clear_cut_terms():
    assert classify_heuristic(lambda q: q ** -2.0, Q=1024, monotone=True).verdict is CONV
    assert classify_heuristic(lambda q: 1.0 / q ** 0.5, Q=1024, monotone=True).verdict is DIV
    assert classify_heuristic(lambda q: 1.0, Q=256).verdict is DIV


def test_build_series_term_examples():
    T = build_series_term("Main", parse_psi("q^-2"), 1.6, 2)
    assert (T.e, T.h, T.h2) == (Fraction(-4, 5), 0, 0)
    assert classify_powerlog(T).verdict is DIV
    T = build_series_term("Gallagher", parse_psi("q^-1*log^-3"), None, 3)
    assert (T.e, T.h) == (-1, -1)
    assert classify_powerlog(T).verdict is DIV
    T = build_series_term("Bugeaud", parse_psi("q^-2"), 1.5, 2)
    assert T.e == Fraction(-1, 2)


@pytest.mark.parametrize("which,psi_text,s,d", [
    ("Main", "q^-2", 1.6, 2), ("Main", "0.3*q^-3*log^1", 2.5, 3),
    ("BV_conv", "q^-2*log^2", 1.5, 2), ("BV_div", "q^-1", 2.2, 3),
    ("Bugeaud", "q^-2", 1.5, 2), ("Gallagher", "q^-1*log^-3", None, 3)])
def test_term_matches_direct_evaluation(which, psi_text, s, d):
    # substitute-and-simplify oracle: the exact term vs the numeric definition at large q
    psi = parse_psi(psi_text)
    T = build_series_term(which, psi, s, d)
    f = DimensionFunction(s=Fraction(repr(s))) if s is not None else None
    direct = {
        "Main": lambda q: q ** d * psi(q) ** (1 - d) * f(psi(q) / q),
        "BV_conv": lambda q: q ** (d - s) * psi(q) ** (s - d + 1) * math.log(q) ** (d - 2),
        "BV_div": lambda q: q ** (d - s) * psi(q) ** (s - d + 1),
        "Bugeaud": lambda q: q * (psi(q) / q) ** (s - d + 1),
        "Gallagher": lambda q: psi(q) * math.log(q) ** (d - 1),
    }[which]
    for q in (10**3, 10**5, 10**7):
        assert T(q) == pytest.approx(direct(q), rel=1e-9)


def test_log_corrected_main_term_matches_definition():
    # log(q/psi(q)) = 3 log q + log log q, so the exact term is off by a factor
    # (1 + log log q / (3 log q)) that must shrink as q grows
    psi, f = parse_psi("q^-2*log^-1"), parse_dimfn("x^1.7*log^1")
    T = build_series_term("Main", psi, f, 2)
    errs = []
    for q in (10**4, 10**8, 10**16, 10**32):
        direct = q ** 2 * psi(q) ** -1 * f(psi(q) / q)
        L = math.log(q)
        err = abs(T(q) / direct - 1)
        assert err <= 1.2 * math.log(L) / (3 * L)
        errs.append(err)
    assert errs == sorted(errs, reverse=True)


def test_verdict_examples():
    v = verdict(parse_psi("q^-1"), None, 2)
    assert v.value is Value.ONE and "Theorem 1" in v.provenance
    assert verdict(parse_psi("q^-2"), 1.7, 2).value is Value.ZERO
    assert verdict(parse_psi("q^-2"), 1.6, 2).value is Value.INFINITE
    assert verdict(parse_psi("q^-2"), 1.6, 2).dim_H == Fraction(5, 3)


def test_gap_family_example_d3():
    psi = ApproximatingFunction.gap_family(3, 2.5, 1.5)
    v = verdict(psi, 2.5, 3, "inhomogeneous")
    assert v.series_named("BV_conv").classification.verdict is DIV
    assert v.series_named("BV_div").classification.verdict is CONV
    main = v.series_named("Main")
    assert (main.term.e, main.term.h) == (-1, Fraction(-3, 2))
    assert v.value is Value.ZERO and "Corollary 3" in v.provenance
    assert any("inconclusive" in n for n in v.notes)


def test_out_of_range_and_contradictory_s():
    assert verdict(parse_psi("q^-2"), 2.5, 2).value is Value.OUT_OF_RANGE_ZERO
    assert verdict(parse_psi("q^-2"), 0.9, 2).value is Value.OUT_OF_RANGE_INFINITE
    with pytest.raises(OutOfRange):
        verdict(parse_psi("q^-2"), 2, 2)


def test_inhomogeneous_and_multivariable_are_conjectural():
    assert verdict(parse_psi("q^-1"), None, 2, "inhomogeneous").value is Value.CONJECTURAL_ONE
    v = verdict(parse_psi("q^-1"), None, 2, "multivariable", m=2)
    assert v.value is Value.CONJECTURAL_ONE
    assert verdict(parse_psi("q^-3"), None, 2, "multivariable", m=2).value is Value.ZERO


def test_non_monotone_divergence():
    raw = ApproximatingFunction.from_callable(lambda q: q ** -2.0)
    v = verdict(raw, 1.6, 2)
    assert v.value is Value.UNDETERMINED and v.heuristic
    v = verdict(raw, 1.8, 2, "doubly")
    assert v.value in (Value.CONJECTURAL_INFINITE, Value.ZERO)


def test_condition_II_failure_blocks_infinite():
    v = verdict(parse_psi("q^-1"), parse_dimfn("x^1*log^1"), 2)
    assert v.value is not Value.INFINITE


def test_dimension_examples():
    assert hausdorff_dimension(parse_psi("q^-2"), 2) == (Fraction(5, 3), True)
    assert hausdorff_dimension(parse_psi("q^-1"), 2) == (2, True)
    assert hausdorff_dimension(parse_psi("q^-3"), 2, "double") == (Fraction(7, 2), True)
    # tends to 2d - 1 as tau grows
    assert 3 < hausdorff_dimension(parse_psi("q^-1000"), 2, "double")[0] < 3.01


@pytest.mark.parametrize("tau", [Fraction(3, 2), 2, 3])
@pytest.mark.parametrize("d", [2, 3])
def test_dimension_series_consistency(tau, d):
    psi = ApproximatingFunction.power(tau)
    s0 = d + (1 - Fraction(tau)) / (1 + Fraction(tau))
    assert hausdorff_dimension(psi, d)[0] == s0
    for ds in (Fraction(1, 100), Fraction(1, 10), Fraction(1, 3)):
        if s0 - ds > d - 1:
            assert classify_series("Main", psi, s0 - ds, d).verdict is DIV
        assert classify_series("Main", psi, s0 + ds, d).verdict is CONV


def _exps():
    return st.fractions(-4, 2, max_denominator=20)


@settings(max_examples=60, deadline=None)
@given(e=_exps(), h=_exps(), h2=_exps())
def test_exact_agrees_with_condensation(e, h, h2):
    assume(abs(e + 1) >= Fraction(1, 20))
    T = PowerLogTerm(e, h, h2)
    assert classify_condensed(T.log_value).verdict is classify_powerlog(T).verdict


def _draw(data):
    d = data.draw(st.integers(2, 5))
    s = data.draw(st.fractions(d - 1, d, max_denominator=50).filter(lambda v: d - 1 < v < d))
    a = data.draw(st.fractions(0, 4, max_denominator=20))
    b = data.draw(st.fractions(-4, 4, max_denominator=20))
    return d, s, ApproximatingFunction.power(a, b)


@settings(max_examples=100, deadline=None)
@given(data=st.data(), c=st.floats(0.01, 100))
def test_scale_invariance(data, c):
    d, s, psi = _draw(data)
    scaled = ApproximatingFunction(c=c, a=psi.a, b=psi.b)
    for which in Series:
        kw = {"m": 2} if which.name.startswith("MULTI") else {}
        f = None if which in (Series.GALLAGHER, Series.DOUBLY_LEBESGUE, Series.MULTI_EQCON) else s
        assert (classify_series(which, psi, f, d, **kw).verdict
                is classify_series(which, scaled, f, d, **kw).verdict)


@settings(max_examples=200, deadline=None)
@given(data=st.data())
def test_theorem_dominance(data):
    d, s, psi = _draw(data)
    bc = classify_series("BV_conv", psi, s, d).verdict
    bd = classify_series("BV_div", psi, s, d).verdict
    main = classify_series("Main", psi, s, d).verdict
    if bc is CONV:
        assert main is CONV
    if main is DIV:
        assert bd is DIV


@settings(max_examples=60, deadline=None)
@given(d=st.integers(3, 6), data=st.data())
def test_gap_family_resolved(d, data):
    s = data.draw(st.fractions(d - 1, d, max_denominator=40).filter(lambda v: d - 1 < v < d))
    alpha = data.draw(st.fractions(1, d - 1, max_denominator=40).filter(lambda v: v > 1))
    v = verdict(ApproximatingFunction.gap_family(d, s, alpha), s, d)
    assert v.series_named("BV_conv").classification.verdict is DIV
    assert v.series_named("BV_div").classification.verdict is CONV
    assert v.value is Value.ZERO


def test_raw_psi_is_heuristic():
    raw = ApproximatingFunction.from_callable(lambda q: q ** -3.0, monotone=True)
    v = verdict(raw, 1.7, 2)
    assert v.heuristic and v.value is Value.ZERO


def test_verdict_json_schema():
    out = verdict(parse_psi("q^-2"), 1.7, 2).to_json()
    assert {"measure_kind", "value", "provenance", "dim_H", "series"} <= set(out)
    assert out["value"] == "Zero" and out["dim_H_exact"] == "5/3"
    assert all({"name", "e", "h", "h2", "classification"} <= set(r) for r in out["series"])


def test_bad_mode():
    with pytest.raises(DomainError):
        verdict(parse_psi("q^-2"), 1.7, 2, "sideways")
