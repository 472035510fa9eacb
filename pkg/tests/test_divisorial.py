from fractions import Fraction

import pytest

from energia.divisorial import (
    CUTOFF,
    DivisorialDensity,
    barrier_energy,
    classify,
    critical_pairing,
    entropy_integral,
    mass_integral,
)
from energia.quadrature import integrate_tail
from energia.radial import PowerLog, dirichlet_energy

ALPHAS = [Fraction(k, 20) for k in range(1, 41)]  # 0.05 .. 2.0
SHAPES = [(n, b) for n in (1, 2, 3) for b in (1.0, 10.0, 100.0)]


def tail(b):
    # int_0^{1/e} r^-1 (-log r)^b dr in s = -log r
    return integrate_tail(lambda s: s**b, 1.0, budget=1000)


@pytest.mark.parametrize("alpha, value", [(1, 1.0), (0.5, 2.0)])
def test_mass_examples(alpha, value):
    v = mass_integral(DivisorialDensity(alpha))
    assert v.converges and v.value == pytest.approx(value, rel=1e-14)


def test_mass_bounds_scale_with_components():
    v = mass_integral(DivisorialDensity(0.5, components=3, B=10))
    assert v.details["total_lower"] == pytest.approx(8 / 10)
    assert v.details["total_upper"] == pytest.approx(80)
    assert v.factor == "c"


def test_constructor_rejects():
    for bad in ({"alpha": 0}, {"alpha": -1}, {"alpha": 1, "B": 0.5}, {"alpha": 1, "components": 0}):
        with pytest.raises(ValueError):
            DivisorialDensity(**bad)


@pytest.mark.parametrize("alpha, finite", [(1.5, True), (1, False), (0.75, False)])
def test_entropy_examples(alpha, finite):
    assert entropy_integral(DivisorialDensity(alpha)).converges is finite


def test_entropy_energy_gap():
    d = DivisorialDensity(0.75)
    assert classify(d).converges and not entropy_integral(d).converges


def test_entropy_model_value():
    v = entropy_integral(DivisorialDensity(1.5))
    assert v.value == pytest.approx(2.0, rel=1e-14)
    # int_1^inf (2s - 2.5 log s) s^-2.5 ds, frozen from mpmath
    assert v.details["model_value"] == pytest.approx(2.888888888888889, rel=1e-12)
    num = integrate_tail(lambda s: (2 * s - 2.5 * __import__("math").log(s)) * s**-2.5, 1.0)
    assert num == pytest.approx(v.details["model_value"], rel=1e-6)


@pytest.mark.parametrize("alpha, finite", [(0.6, True), (0.5, False), (2, True)])
def test_pairing_examples(alpha, finite):
    assert critical_pairing(DivisorialDensity(alpha)).converges is finite


@pytest.mark.parametrize("p, finite", [(0.4, True), (0.5, False), (0.6, False)])
def test_barrier_examples(p, finite):
    assert barrier_energy(p).converges is finite


def test_classify_examples():
    v = classify(DivisorialDensity(Fraction(51, 100)))
    assert v.converges
    assert v.details["barrier_window"] == pytest.approx([0.49, 0.5])
    assert "obstruction_window" not in v.details
    assert not classify(DivisorialDensity(0.5)).converges
    v = classify(DivisorialDensity(Fraction(49, 100)))
    assert not v.converges
    assert v.details["obstruction_window"] == pytest.approx([0.5, 0.51])


def test_threshold_scan():
    for a in ALPHAS:
        d = DivisorialDensity(a)
        energy, entropy = classify(d).converges, entropy_integral(d).converges
        assert energy is (a > Fraction(1, 2))
        assert entropy is (a > 1)
        assert not entropy or energy


def test_independent_of_components_and_bound():
    for a in ALPHAS:
        ref = [f(DivisorialDensity(a)).status for f in (classify, entropy_integral, mass_integral)]
        for n, b in SHAPES:
            d = DivisorialDensity(a, n, b)
            assert [f(d).status for f in (classify, entropy_integral, mass_integral)] == ref


def test_barrier_matches_dirichlet():
    for k in range(1, 100):
        p = Fraction(k, 100)
        assert barrier_energy(p).status is dirichlet_energy(PowerLog(p)).status


def test_closed_forms_match_quadrature():
    for a in ALPHAS:
        d = DivisorialDensity(a)
        af = float(a)
        assert mass_integral(d).value == pytest.approx(tail(-1 - af), rel=1e-6)
        if a > Fraction(1, 2):
            assert af - 0.5 == pytest.approx(1 / tail(-0.5 - af), rel=1e-6)
            assert critical_pairing(d).value == pytest.approx(1 / (af - 0.5), rel=1e-12)
        if a > 1:
            assert entropy_integral(d).value == pytest.approx(tail(-af), rel=1e-6)


def test_cutoff():
    assert CUTOFF == pytest.approx(0.36787944117144233)
