import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from energia import (
    LogPowerTerm,
    Status,
    UnsupportedForm,
    classify_at_infinity,
    classify_at_zero,
    multiply,
    parse_term,
    substitute_at_zero,
)
from energia.logpow import ConvergenceVerdict, DivergenceRate, exact

# exponents on a 1/100 lattice so the boundary a = -1, b = -1 is hit exactly
lattice = st.integers(-400, 200).map(lambda k: Fraction(k, 100))


def test_inverse_square_tail():
    v = classify_at_infinity(LogPowerTerm(1, -2, 0), 1.0)
    assert v.status is Status.CONVERGES
    assert v.value == 1.0


def test_harmonic_tail_diverges_logarithmically():
    v = classify_at_infinity(LogPowerTerm(1, -1, 0), math.e)
    assert v.status is Status.DIVERGES
    assert str(v.rate) == "LogDivergence"


def test_radial_exponent_n2_p06_converges():
    n, p = 2, Fraction(3, 5)
    v = classify_at_infinity(LogPowerTerm(1, (n + 1) * p - n - 1, 0), 1.0)
    assert v.converges


def test_log_power_closed_form_at_e():
    v = classify_at_infinity(LogPowerTerm(1, -1, Fraction(-3, 2)), math.e)
    assert v.value == pytest.approx(2.0, rel=1e-15)


def test_at_zero_examples():
    v = classify_at_zero(LogPowerTerm(1, -1, Fraction(-3, 2)), 0.5)
    assert v.value == pytest.approx(2.4022448175728996, rel=1e-14)
    assert not classify_at_zero(LogPowerTerm(1, -1, -1), 0.5).converges
    v = classify_at_zero(LogPowerTerm(1, -1, Fraction(-3, 2)), math.exp(-1))
    assert v.value == pytest.approx(2.0, rel=1e-14)


def test_substitution_map():
    t = substitute_at_zero(LogPowerTerm(3, Fraction(1, 2), Fraction(-2)))
    assert (t.coeff, t.a, t.b) == (3.0, Fraction(-5, 2), Fraction(-2))


def test_multiply_examples():
    t = multiply(LogPowerTerm(1, -1, 0), LogPowerTerm(1, 0, Fraction(-3, 2)))
    assert (t.coeff, t.a, t.b) == (1.0, -1, Fraction(-3, 2))
    t = LogPowerTerm(2, 1, 0) * LogPowerTerm(3, -3, 1)
    assert (t.coeff, t.a, t.b) == (6.0, -2, 1)
    alpha = Fraction(3, 5)
    t = LogPowerTerm(1, Fraction(1, 2), 0) * LogPowerTerm(1, -1 - alpha, 0)
    assert t.a == Fraction(-1, 2) - alpha


def test_general_case_value_matches_incomplete_gamma():
    # int_e^inf t^-2 log(t)^3 dt = Gamma(4, 1)
    v = classify_at_infinity(LogPowerTerm(1, -2, 3), math.e)
    assert v.details["value_method"] == "quadrature"
    assert v.value == pytest.approx(5.886071058743077, rel=1e-8)


def test_boundary_pair_diverges():
    v = classify_at_infinity(LogPowerTerm(1, -1, -1), 3.0)
    assert v.status is Status.DIVERGES
    assert v.rate == DivergenceRate("log", 0.0)


def test_divergence_rates():
    assert classify_at_infinity(LogPowerTerm(1, Fraction(-1, 2), 0), 2.0).rate == DivergenceRate("power", 0.5)
    assert str(classify_at_infinity(LogPowerTerm(1, -1, Fraction(-1, 2)), 2.0).rate) == "LogDivergence"


def test_domain_checks():
    with pytest.raises(ValueError):
        classify_at_infinity(LogPowerTerm(1, -2, 1), 1.0)
    with pytest.raises(ValueError):
        classify_at_zero(LogPowerTerm(1, -1, -2), 1.0)
    with pytest.raises(ValueError):
        LogPowerTerm(0, -2, 0)
    with pytest.raises(ValueError):
        LogPowerTerm(1, float("nan"), 0)


def test_verdict_invariants():
    with pytest.raises(ValueError):
        ConvergenceVerdict(Status.CONVERGES)
    with pytest.raises(ValueError):
        ConvergenceVerdict(Status.CONVERGES, value=math.inf)
    with pytest.raises(ValueError):
        ConvergenceVerdict(Status.DIVERGES)


def test_exact_snaps_floats():
    assert exact(0.6) == Fraction(3, 5)
    assert exact(2 / 3) == Fraction(2, 3)
    assert exact(1 / 3 + 2 / 3 * 0.5) == Fraction(2, 3)


def test_parse_term():
    term, form = parse_term("2*t^-1*log(t)^-1.5")
    assert (term.coeff, term.a, term.b, form) == (2.0, -1, Fraction(-3, 2), "infinity")
    term, form = parse_term("r^-1 * (-log(r))^(-3/2)")
    assert (term.a, term.b, form) == (-1, Fraction(-3, 2), "zero")
    term, _ = parse_term("t**-2")
    assert term.a == -2 and term.b == 0


@pytest.mark.parametrize("expr", ["t^-1*log(log(t))^-2", "r^-1*log((-log(r)))", "t^-1*s^2"])
def test_parse_rejects_unsupported(expr):
    with pytest.raises(UnsupportedForm):
        parse_term(expr)


def test_parse_rejects_garbage():
    with pytest.raises(ValueError):
        parse_term("sin(t)")


@given(lattice, lattice)
def test_dichotomy(a, b):
    v = classify_at_infinity(LogPowerTerm(1, a, b), 3.0)
    expected = a < -1 or (a == -1 and b < -1)
    assert v.converges == expected
    assert (v.value is not None) == v.converges
    assert (v.rate is not None) != v.converges


@given(lattice, lattice, st.floats(0.05, 0.95))
def test_substitution_consistency(a, b, upper):
    term = LogPowerTerm(1.5, a, b)
    z = classify_at_zero(term, upper)
    i = classify_at_infinity(substitute_at_zero(term), 1 / upper)
    assert z.status == i.status
    assert z.value == i.value


@given(lattice, lattice, lattice, lattice)
def test_monotone_under_domination(a1, b1, a2, b2):
    lo_a, hi_a = sorted((a1, a2))
    lo_b, hi_b = sorted((b1, b2))
    if classify_at_infinity(LogPowerTerm(1, hi_a, hi_b), 3.0).converges:
        assert classify_at_infinity(LogPowerTerm(1, lo_a, lo_b), 3.0).converges


@settings(max_examples=60, deadline=None)
@given(
    st.integers(-300, -105).map(lambda k: Fraction(k, 100)),
    st.integers(-200, 200).map(lambda k: Fraction(k, 100)),
    st.floats(1.5, 10.0),
)
def test_quadrature_value_matches_incomplete_gamma(a, b, lower):
    # int_L^inf t^a log(t)^b dt = k^-(b+1) Gamma(b+1, k log L), k = -(a+1)
    v = classify_at_infinity(LogPowerTerm(1, a, b), lower)
    k = -float(a + 1)
    ref = float(mpmath.gammainc(float(b) + 1, k * math.log(lower)) * mpmath.mpf(k) ** (-float(b) - 1))
    assert v.value == pytest.approx(ref, rel=1e-6)
