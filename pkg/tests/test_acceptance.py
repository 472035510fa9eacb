"""The nine acceptance criteria, each at its stated tolerance.

A summary line per criterion is printed at the end of the run (see
``conftest.py``).
"""

import math
import os
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from weights import non_power_weights

from energia import cli
from energia.blowup import BOUNDARY, density_reduction, pairing_integral, region_grid
from energia.convex import SampledConvexFunction, biconjugate, brute_force_conjugate, legendre_transform, subgradient_image
from energia.divisorial import DivisorialDensity, classify, critical_pairing, entropy_integral, mass_integral
from energia.logpow import LogPowerTerm, classify_at_infinity, classify_at_zero, substitute_at_zero
from energia.oracle import cross_check
from energia.quadrature import empirical_convergence, integrate_tail
from energia.radial import (
    PowerLog,
    classify_energy,
    dirichlet_energy,
    energy_integrand,
    lp_membership,
    perturbed_weight,
)
from energia.report import ordered_map
from energia.toric import (
    ToricModel,
    beta_star,
    classify_toric_energy,
    moment_integral,
    sobolev_chain,
    verify_sobolev,
)

P_SCAN = [Fraction(k, 100) for k in range(5, 96)]


def test_criterion_1_radial_threshold():
    for n in (1, 2, 3):
        thr = Fraction(n, n + 1)
        for p in P_SCAN:
            w = PowerLog(p)
            sym = classify_energy(w, n)
            assert sym.converges is (p < thr), (n, p)
            if abs(p - thr) < Fraction(5, 100):
                continue
            f = energy_integrand(w, n)
            assert empirical_convergence(f, w.lower).status is sym.status, (n, p)
            if sym.converges:
                num = integrate_tail(f, w.lower, budget=1000)
                assert math.isclose(num, sym.value, rel_tol=1e-6), (n, p, num, sym.value)


def test_criterion_2_n1_equivalence():
    for p in P_SCAN:
        w = PowerLog(p)
        assert dirichlet_energy(w).status is classify_energy(w, 1).status, p
    weights = non_power_weights()
    assert len(weights) == 20
    for label, w, _ in weights:
        assert dirichlet_energy(w).status is classify_energy(w, 1).status, label


def test_criterion_3_lp_counterexample():
    for n, gamma, p, q, p_prime in [
        (2, Fraction(2, 3), Fraction(1, 3), Fraction(3, 2), Fraction(2, 3)),
        (3, Fraction(3, 4), Fraction(1, 2), Fraction(4, 3), Fraction(3, 4)),
    ]:
        w = PowerLog(p)
        assert lp_membership(gamma, w, n, q).converges
        w2 = perturbed_weight(gamma, w, n)
        assert w2.p == p_prime
        assert not classify_energy(w2, n).converges


def test_criterion_4_legendre_correctness():
    x = np.linspace(-5, 5, 2001)
    quad = SampledConvexFunction(x, x**2 / 2)
    p = np.linspace(-4, 4, 2001)
    assert np.max(np.abs(legendre_transform(quad, p).values - p**2 / 2)) <= 5e-5
    assert np.max(np.abs(biconjugate(quad)(x) - quad.values)) <= 1e-4

    xs = np.linspace(-20, 20, 100_001)
    phi = SampledConvexFunction(xs, 0.5 * np.logaddexp(0.0, 2 * xs))
    ps = np.linspace(1e-3, 1 - 1e-3, 2001)
    fast = legendre_transform(phi, ps).values
    assert np.max(np.abs(fast - brute_force_conjugate(xs, phi.values, ps))) <= 1e-4
    lo, hi = subgradient_image(phi)
    assert abs(lo - 0.0) <= 1e-6 and abs(hi - 1.0) <= 1e-6


def test_criterion_5_toric_beta_threshold():
    for k in range(1, 20):
        beta = round(0.05 * k, 2)
        m = ToricModel.beta_family(beta)
        energy = classify_toric_energy(m, 1)
        assert energy.converges is (beta < 0.5), beta
        fstar = m.conjugate()
        inside = (fstar.grid >= 0.01) & (fstar.grid <= 0.99)
        ref = fstar.grid[inside] ** -float(beta_star(beta))
        assert np.max(np.abs(fstar.values[inside] / ref - 1)) <= 1e-3, beta
        assert not moment_integral(m, 1).converges, beta
        assert moment_integral(m, 0.5).status is energy.status, beta


def test_criterion_6_sobolev_chain():
    expect = {(1, 2): 2, (1, 3): Fraction(3, 2), (2, 3): 6}
    for (q, n), qs in expect.items():
        assert sobolev_chain(q, n) == qs
        chk = verify_sobolev(q, n)
        assert len(chk.ratios) == 10
        C = chk.fitted_constant
        assert all(r <= C for r in chk.ratios.values())
        assert chk.holds, (q, n, C, chk.sharp_constant)


def test_criterion_7_divisorial_thresholds():
    alphas = [Fraction(k, 20) for k in range(1, 41)]
    for a in alphas:
        ref = None
        for n in (1, 2, 3):
            for B in (1, 10, 100):
                d = DivisorialDensity(a, n, B)
                got = (classify(d).status, entropy_integral(d).status)
                ref = ref or got
                assert got == ref, (a, n, B)
        assert classify(DivisorialDensity(a)).converges is (a > Fraction(1, 2)), a
        assert entropy_integral(DivisorialDensity(a)).converges is (a > 1), a
        tail = lambda b: integrate_tail(lambda s: s**b, 1.0, budget=1000)  # noqa: E731
        d, af = DivisorialDensity(a), float(a)
        assert math.isclose(mass_integral(d).value, tail(-1 - af), rel_tol=1e-6)
        assert math.isclose(mass_integral(d).value, 1 / af, rel_tol=1e-12)
        if a > Fraction(1, 2):
            assert math.isclose(critical_pairing(d).value, tail(-0.5 - af), rel_tol=1e-6)
            assert math.isclose(critical_pairing(d).value, 1 / (af - 0.5), rel_tol=1e-12)
        if a > 1:
            assert math.isclose(entropy_integral(d).value, tail(-af), rel_tol=1e-6)
            assert math.isclose(entropy_integral(d).value, 1 / (af - 1), rel_tol=1e-12)
    assert not classify(DivisorialDensity(Fraction(1, 2))).converges
    assert not entropy_integral(DivisorialDensity(1)).converges


def _empirical_pairing(scn):
    v = empirical_convergence(scn.integrand_s, math.log(2))
    return v.status is pairing_integral(scn).status


def test_criterion_8_blowup_counterexample():
    grid = region_grid(100)
    assert len(grid) == 10_000
    for scn in grid:
        assert (not pairing_integral(scn).converges) is (scn.delta + scn.delta_prime <= BOUNDARY)
    rng = random.Random(2024)
    for _ in range(1000):
        from energia.blowup import BlowupScenario

        scn = BlowupScenario(rng.uniform(1e-9, 0.5 - 1e-9), rng.uniform(1e-9, 2 / 3 - 1e-9))
        b = density_reduction(scn).b
        assert b == -(2 - scn.p - scn.eps)
        assert abs(float(b) + (2 - float(scn.p) - float(scn.eps))) <= 4 * np.finfo(float).eps
    off = [s for s in grid if abs(s.delta + s.delta_prime - BOUNDARY) >= Fraction(2, 100)]
    agree = ordered_map(_empirical_pairing, off, jobs=os.cpu_count() or 1)
    assert all(agree), sum(not a for a in agree)


lattice = st.integers(-400, 200).map(lambda k: Fraction(k, 100))


@settings(max_examples=10_000, deadline=None, suppress_health_check=list(HealthCheck))
@given(lattice, lattice, lattice, lattice)
def test_criterion_9_classifier_soundness(a, b, a2, b2):
    term = LogPowerTerm(1.0, a, b)
    v = classify_at_infinity(term, 3.0)
    assert v.converges is (a < -1 or (a == -1 and b < -1))
    assert (v.value is not None) is v.converges
    z = classify_at_zero(term, 0.25)
    zi = classify_at_infinity(substitute_at_zero(term), 4.0)
    assert z.status is zi.status and z.value == zi.value
    if classify_at_infinity(LogPowerTerm(1.0, max(a, a2), max(b, b2)), 3.0).converges:
        assert classify_at_infinity(LogPowerTerm(1.0, min(a, a2), min(b, b2)), 3.0).converges
    if v.converges:
        chk = cross_check(term, "infinity", 3.0)  # raises OracleDisagreement on a mismatch
        assert chk.numeric_value is None or math.isclose(chk.numeric_value, v.value, rel_tol=1e-6)


def test_criterion_9_disagreement_exits_3(monkeypatch, capsys):
    import energia.oracle as oracle
    from energia.logpow import ConvergenceVerdict, DivergenceRate, Status

    def lying(*args, **kwargs):
        return ConvergenceVerdict(Status.DIVERGES, rate=DivergenceRate("power", 1.0), provenance="numeric")

    monkeypatch.setattr(oracle, "empirical_convergence", lying)
    assert cli.main(["classify-integral", "--a", "-2", "--b", "0"]) == 3
    assert "disagreement" in capsys.readouterr().err
