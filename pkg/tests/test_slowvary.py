import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from modtail.errors import DomainError
from modtail.slowvary import (Constant, IterLogPower, LogPower, Product,
                              format_sv, limit_at_infinity_is_zero, parse_sv,
                              sv_eval, sv_log_deriv)


def random_tree(draw_depth=0):
    return st.recursive(
        st.one_of(
            st.floats(0.01, 100.0).map(Constant),
            st.floats(-3.0, 3.0).map(LogPower),
            st.floats(-3.0, 3.0).map(IterLogPower),
        ),
        lambda children: st.tuples(children, children).map(lambda t: Product(*t)),
        max_leaves=6,
    )


def reference_eval(v, y):
    # independent transcription of the grammar formulas
    if isinstance(v, Constant):
        return v.c
    if isinstance(v, LogPower):
        return (1.0 + math.log(1.0 + y)) ** v.r
    if isinstance(v, IterLogPower):
        return (1.0 + math.log(1.0 + math.log(1.0 + y))) ** v.r
    return reference_eval(v.left, y) * reference_eval(v.right, y)


def test_constant_eval():
    assert sv_eval(Constant(1.0), 100.0) == 1.0


def test_zero_exponent():
    assert sv_eval(LogPower(0.0), 7.0) == 1.0


def test_logpower_plugin():
    # at y = e - 1 the inner log is 1, so (1 + 1)**2 = 4
    assert sv_eval(LogPower(2.0), math.e - 1.0) == pytest.approx(4.0, rel=1e-14)


def test_eval_rejects_bad_input():
    with pytest.raises(DomainError):
        sv_eval(Constant(1.0), -1.0)
    with pytest.raises(DomainError):
        sv_eval(Constant(1.0), math.inf)


def test_constant_must_be_positive():
    with pytest.raises(DomainError):
        Constant(0.0)
    with pytest.raises(DomainError):
        Constant(-2.0)


@given(random_tree(), st.floats(0.0, 1e12))
@settings(max_examples=300)
def test_positivity(v, y):
    assert sv_eval(v, y) > 0


@given(random_tree(), st.floats(0.0, 1e8))
@settings(max_examples=200)
def test_matches_reference(v, y):
    assert sv_eval(v, y) == pytest.approx(reference_eval(v, y), rel=1e-12)


@given(random_tree())
@settings(max_examples=100)
def test_slow_variation_ratio(v):
    # ln V(lam y) - ln V(y) is the integral of the log-derivative, which
    # decays in y, so |ln ratio| <= (lam - 1) y |slope(y)| and the ratio
    # approaches 1 as y grows
    for lam in (2.0, 10.0):
        prev = None
        for y in (1e6, 1e9, 1e12):
            log_ratio = abs(math.log(sv_eval(v, lam * y) / sv_eval(v, y)))
            cap = (lam - 1.0) * y * abs(sv_log_deriv(v, y)) + 1e-12
            assert log_ratio <= cap
            if prev is not None:
                assert log_ratio <= prev + 1e-12
            prev = log_ratio


@given(random_tree(), st.floats(1.0, 1e6))
@settings(max_examples=100)
def test_log_deriv_matches_finite_difference(v, y):
    h = 1e-5 * max(1.0, y)
    fd = (math.log(sv_eval(v, y + h)) - math.log(sv_eval(v, y - h))) / (2 * h)
    assert sv_log_deriv(v, y) == pytest.approx(fd, rel=1e-4, abs=1e-10)


def test_limit_trivial_cases():
    assert not limit_at_infinity_is_zero(Constant(1.0))
    assert limit_at_infinity_is_zero(LogPower(-2.0))


def test_limit_symbolic_vs_numeric():
    # cancelling log powers, decided by the iterated-log factor
    v = Product(Product(LogPower(1.0), LogPower(-1.0)), IterLogPower(-1.0))
    assert limit_at_infinity_is_zero(v)
    vals = [sv_eval(v, y) for y in (1e6, 1e9, 1e12)]
    assert vals[0] > vals[1] > vals[2]


def test_parse_roundtrip():
    expr = "c(1)*lp(2)*ilp(-1)"
    v = parse_sv(expr)
    assert format_sv(v) == expr
    assert sv_eval(v, 0.0) == pytest.approx(1.0)


def test_parse_rejects_garbage():
    for bad in ("", "foo(1)", "lp(x)", "c(1)+lp(2)"):
        with pytest.raises(DomainError):
            parse_sv(bad)
