"""Radial potentials ``phi = chi(log ||z||)`` on a small ball in C^n.

For ``mu = (dd^c phi)^n`` the density in the variable ``s = log ||z||`` is
``c_n * chi'(s)**(n-1) * chi''(s)`` after polar coordinates, so finiteness of
the energy reduces to the one-dimensional integral
``int_{-inf}^{log r} -chi * chi'**(n-1) * chi'' ds``. All integrals are written
in ``t = -s``, which runs over ``[-log r, inf)``. The dimensional constant
``c_n`` is carried as an opaque symbol.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import integrate

from .errors import FitUnstable, Inconclusive, NonConvex, OutOfFamily
from .logpow import (
    ConvergenceVerdict,
    DivergenceRate,
    LogPowerTerm,
    Status,
    classify_at_infinity,
    exact,
)
from .quadrature import DEFAULT_PANELS, DEFAULT_TOL, TailFit
from .textio import load_columns

DEFAULT_TOP = -1.0  # log r with r = 1/e, so -log r >= 1
CONVEXITY_TOL = 1e-10
SLOPE_AT_MINUS_INF_TOL = 1e-6


@dataclass(frozen=True)
class PowerLog:
    """``chi_p(s) = -(-s)**p`` with ``0 < p < 1``."""

    p: Fraction
    domain_top: float = DEFAULT_TOP

    def __post_init__(self):
        p = exact(self.p)
        if not 0 < p < 1:
            raise OutOfFamily(f"p must lie in (0, 1), got {float(p)}")
        if not self.domain_top < 0:
            raise ValueError("domain_top must be negative (log of a radius below 1)")
        object.__setattr__(self, "p", p)

    @property
    def lower(self) -> float:
        return -self.domain_top

    def chi(self, s):
        return -((-s) ** float(self.p))

    def dchi(self, s):
        p = float(self.p)
        return p * (-s) ** (p - 1)

    def d2chi(self, s):
        p = float(self.p)
        return p * (1 - p) * (-s) ** (p - 2)


def second_difference(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Three-point second derivative on a nonuniform grid.

    Interior points use the centered stencil; each boundary reuses the
    one-sided stencil through its three nearest points.
    """
    h0 = np.diff(x)[:-1]
    h1 = np.diff(x)[1:]
    d0 = (y[1:-1] - y[:-2]) / h0
    d1 = (y[2:] - y[1:-1]) / h1
    inner = 2.0 * (d1 - d0) / (h0 + h1)
    return np.concatenate([inner[:1], inner, inner[-1:]])


@dataclass(frozen=True, eq=False)
class SampledWeight:
    """A convex increasing ``chi`` given on a grid of ``s`` values."""

    s: np.ndarray
    chi: np.ndarray
    dchi: np.ndarray = field(default=None)
    d2chi: np.ndarray = field(default=None)
    domain_top: float = DEFAULT_TOP
    tail_decades: float = 1.0

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        chi = np.asarray(self.chi, dtype=float)
        if s.ndim != 1 or s.shape != chi.shape or s.size < 3:
            raise ValueError("s and chi must be 1-D arrays of equal length >= 3")
        if np.any(np.diff(s) <= 0):
            raise ValueError("s grid must be strictly increasing")
        if not s[0] < self.domain_top <= s[-1] + 1e-12:
            raise ValueError("grid must extend from below domain_top up to it")
        dchi = np.gradient(chi, s, edge_order=2) if self.dchi is None else np.asarray(self.dchi, float)
        d2chi = second_difference(s, chi) if self.d2chi is None else np.asarray(self.d2chi, float)
        for name, arr in (("s", s), ("chi", chi), ("dchi", dchi), ("d2chi", d2chi)):
            object.__setattr__(self, name, arr)
        self._validate()

    @classmethod
    def from_file(cls, path, domain_top: float = DEFAULT_TOP) -> SampledWeight:
        _, s, chi, _meta = load_columns(path)
        return cls(s, chi, domain_top=domain_top)

    def _validate(self):
        if np.any(self.dchi < -CONVEXITY_TOL):
            raise NonConvex("chi must be increasing (chi' >= 0 on the grid)")
        if np.any(self.d2chi < -CONVEXITY_TOL):
            raise NonConvex("chi must be convex (chi'' >= 0 on the grid)")
        # chi'(-inf) = 0: either already negligible at the left end, or
        # visibly decaying there on a log-log scale
        if self.dchi[0] >= SLOPE_AT_MINUS_INF_TOL:
            idx = self.tail_indices()
            t = -self.s[idx]
            if np.any(self.dchi[idx] <= 0):
                raise NonConvex("cannot confirm chi'(-inf) = 0 from the samples")
            fit = TailFit.fit(np.log(t), np.log(self.dchi[idx]))
            if not fit.slope < 0:
                raise NonConvex("chi' does not decay towards s = -inf")

    @property
    def lower(self) -> float:
        return -self.domain_top

    def mask(self) -> np.ndarray:
        return self.s <= self.domain_top + 1e-12

    def tail_indices(self) -> np.ndarray:
        """Grid indices used for the ``s -> -inf`` power-law fit.

        The leftmost ``tail_decades`` of ``t = -s`` (at least 10 points),
        skipping the boundary point whose derivatives are one-sided.
        """
        t = -self.s
        if t[0] <= 0:
            raise NonConvex("grid must reach negative s to probe s -> -inf")
        cut = t[0] / 10.0**self.tail_decades
        n = max(int(np.count_nonzero((t >= cut) & (t > 0))), 11)
        n = min(n, int(np.count_nonzero(self.mask())))
        return np.arange(1, n)


RadialWeight = PowerLog | SampledWeight


def _check_dimension(n: int) -> int:
    if int(n) != n or n < 1:
        raise ValueError(f"dimension must be a positive integer, got {n}")
    return int(n)


def ma_profile(w: RadialWeight, n: int):
    """Density ``chi'**(n-1) * chi''`` of ``(dd^c chi(log||z||))^n`` in ``t = -s``.

    Returns a :class:`LogPowerTerm` (symbol ``c_n``) for :class:`PowerLog`
    weights and a pointwise array over the grid for sampled ones.
    """
    n = _check_dimension(n)
    if isinstance(w, PowerLog):
        p = w.p
        return LogPowerTerm(float(p**n * (1 - p)), n * p - n - 1, 0, symbol="c_n")
    return w.dchi ** (n - 1) * w.d2chi


def energy_term(w: PowerLog, n: int) -> LogPowerTerm:
    """``-chi * chi'**(n-1) * chi''`` for ``chi_p``: exponent ``(n+1)p - n - 1``."""
    n = _check_dimension(n)
    return LogPowerTerm(1.0, w.p, 0) * ma_profile(w, n)


def energy_integrand(w: RadialWeight, n: int):
    """Callable ``t -> -chi(-t) chi'(-t)**(n-1) chi''(-t)`` for numeric oracles."""
    n = _check_dimension(n)
    if not isinstance(w, PowerLog):
        raise TypeError("energy_integrand needs an analytic weight")
    return lambda t: -w.chi(-t) * w.dchi(-t) ** (n - 1) * w.d2chi(-t)


def _threshold(n: int) -> Fraction:
    return Fraction(n, n + 1)


def _sampled_verdict(
    w: SampledWeight, integrand: np.ndarray, boundary_band: float = 0.02
) -> ConvergenceVerdict:
    """Verdict for ``int_{-inf}^{top} integrand ds`` from grid samples.

    The interior is integrated by the trapezoid rule; the missing part
    ``s < s_min`` by a power law in ``t = -s`` fitted on
    :meth:`SampledWeight.tail_indices`.
    """
    m = w.mask()
    s, g = w.s[m], integrand[m]
    body = float(integrate.trapezoid(g, s))
    idx = w.tail_indices()
    t, gt = -s[idx], g[idx]
    if np.all(gt == 0):
        return ConvergenceVerdict(
            Status.CONVERGES, value=body, provenance="numeric", details={"tail_exponent": None}
        )
    if np.any(gt <= 0) or np.any(t <= 0):
        raise FitUnstable("integrand changes sign in the tail window")
    fit = TailFit.fit(np.log(t), np.log(gt))
    a = fit.slope
    details = {"tail_exponent": a, "tail_residual": fit.residual}
    if fit.residual > 0.05:
        raise FitUnstable(f"tail power-law fit residual {fit.residual:.3g} > 0.05")
    if abs(a + 1) < boundary_band:
        raise Inconclusive(f"sampled tail exponent {a:.4f} too close to -1 to decide")
    if a > -1:
        return ConvergenceVerdict(
            Status.DIVERGES,
            rate=DivergenceRate("power", a + 1),
            provenance="numeric",
            details=details,
        )
    tail = float(np.exp(fit.intercept) * (-s[0]) ** (a + 1) / (-a - 1))
    return ConvergenceVerdict(
        Status.CONVERGES, value=body + tail, provenance="numeric", details=details
    )


def classify_energy(
    w: RadialWeight, n: int, *, tol: float = DEFAULT_TOL, panels: int = DEFAULT_PANELS
) -> ConvergenceVerdict:
    """Finiteness of ``int -chi * chi'**(n-1) * chi''`` over ``(-inf, log r]``.

    For ``chi_p`` this converges iff ``p < n/(n+1)``.
    """
    n = _check_dimension(n)
    if isinstance(w, PowerLog):
        v = classify_at_infinity(energy_term(w, n), w.lower, tol=tol, panels=panels)
        return _with(v, threshold=float(_threshold(n)), exponent=float(energy_term(w, n).a))
    return _sampled_verdict(w, -w.chi * ma_profile(w, n))


def dirichlet_energy(
    w: RadialWeight, *, tol: float = DEFAULT_TOL, panels: int = DEFAULT_PANELS
) -> ConvergenceVerdict:
    """Finiteness of ``int chi'(s)**2 ds`` (the ``W^{1,2}`` test for ``n = 1``)."""
    if isinstance(w, PowerLog):
        p = w.p
        term = LogPowerTerm(float(p * p), 2 * p - 2, 0)
        v = classify_at_infinity(term, w.lower, tol=tol, panels=panels)
        return _with(v, threshold=0.5, exponent=float(term.a))
    return _sampled_verdict(w, w.dchi**2)


def lp_term(gamma, w: PowerLog, n: int, q) -> LogPowerTerm:
    """``g**q`` against ``mu_p`` with ``g = (-log||z||)**gamma``."""
    q, gamma = exact(q), exact(gamma)
    if q < 0:
        raise ValueError("q must be nonnegative")
    return LogPowerTerm(1.0, q * gamma, 0) * ma_profile(w, n)


def lp_membership(
    gamma, w: PowerLog, n: int, q, *, tol: float = DEFAULT_TOL, panels: int = DEFAULT_PANELS
) -> ConvergenceVerdict:
    """Is ``(-log||z||)**gamma`` in ``L^q(mu_p)``? Exponent ``q*gamma + np - n - 1``."""
    term = lp_term(gamma, w, n, q)
    v = classify_at_infinity(term, w.lower, tol=tol, panels=panels)
    return _with(v, exponent=float(term.a))


def perturbed_weight(gamma, w: PowerLog, n: int) -> PowerLog:
    """The ``chi_{p'}`` with ``g * mu_p ~ mu_{p'}``, i.e. ``p' = p + gamma/n``.

    Raises :class:`OutOfFamily` when ``p'`` leaves ``(0, 1)``.
    """
    n = _check_dimension(n)
    p_new = w.p + exact(gamma) / n
    if not 0 < p_new < 1:
        raise OutOfFamily(f"perturbed exponent p' = {float(p_new):.6g} is outside (0, 1)")
    return PowerLog(p_new, w.domain_top)


def _with(v: ConvergenceVerdict, **extra) -> ConvergenceVerdict:
    d = dict(v.details)
    d.update(extra)
    return ConvergenceVerdict(v.status, v.value, v.rate, v.factor, v.provenance, d)


def sample_power_log(p, n_points: int = 10_000, t_max: float = 1e6, top: float = DEFAULT_TOP):
    """Sample ``chi_p`` on a grid geometric in ``t = -s`` over ``[-top, t_max]``."""
    t = np.geomspace(t_max, -top, n_points)
    s = -t
    return SampledWeight(s, -(t ** float(exact(p))), domain_top=top)


__all__ = [
    "PowerLog",
    "SampledWeight",
    "RadialWeight",
    "ma_profile",
    "energy_term",
    "energy_integrand",
    "classify_energy",
    "dirichlet_energy",
    "lp_term",
    "lp_membership",
    "perturbed_weight",
    "second_difference",
    "sample_power_log",
]

