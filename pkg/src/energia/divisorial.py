"""Model densities with log-type poles along a simple normal crossing divisor.

Locally ``f = h / prod_j |z_j|^2 (-log|z_j|)^(1+alpha)`` on the polydisc
``|z_j| <= 1/e``, with ``1/B <= h <= B``. Polar coordinates in each factor
turn ``|z|^-2 dV`` into ``dr / r`` (the angular ``2 pi`` is absorbed into
``h``), so every integral is a product of one-variable integrals of the form
``int_0^{1/e} r^-1 (-log r)^b dr``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .logpow import (
    ConvergenceVerdict,
    LogPowerTerm,
    classify_at_infinity,
    classify_at_zero,
    exact,
)

CUTOFF = math.exp(-1.0)
CRITICAL_WEIGHT = Fraction(1, 2)


@dataclass(frozen=True)
class DivisorialDensity:
    alpha: Fraction
    components: int = 1
    B: float = 1.0

    def __post_init__(self):
        a = exact(self.alpha)
        if not a > 0:
            raise ValueError(f"alpha must be positive (the density has infinite mass otherwise), got {self.alpha}")
        if int(self.components) != self.components or self.components < 1:
            raise ValueError(f"need at least one component, got {self.components}")
        if not float(self.B) >= 1:
            raise ValueError(f"the bound B must be >= 1, got {self.B}")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "components", int(self.components))
        object.__setattr__(self, "B", float(self.B))

    def factor_term(self) -> LogPowerTerm:
        """One factor of the density in polar form: ``r^-1 (-log r)^(-1-alpha)``."""
        return LogPowerTerm(1.0, -1, -1 - self.alpha)

    def mass_bounds(self, per_factor: float) -> tuple[float, float]:
        total = per_factor**self.components
        return total / self.B, total * self.B

    def parameters(self) -> dict:
        return {"alpha": float(self.alpha), "components": self.components, "B": self.B}


def mass_term(d: DivisorialDensity) -> LogPowerTerm:
    return d.factor_term()


def entropy_term(d: DivisorialDensity) -> LogPowerTerm:
    """Leading part of ``f log f`` per factor: ``r^-1 (-log r)^-alpha``."""
    return LogPowerTerm(1.0, -1, -d.alpha)


def pairing_term(d: DivisorialDensity) -> LogPowerTerm:
    return d.factor_term() * LogPowerTerm(1.0, 0, CRITICAL_WEIGHT)


def _with_bounds(d: DivisorialDensity, v: ConvergenceVerdict, **extra) -> ConvergenceVerdict:
    details = dict(v.details) | extra
    if v.converges:
        lo, hi = d.mass_bounds(v.value)
        details.update(total_lower=lo, total_upper=hi)
    return ConvergenceVerdict(v.status, v.value, v.rate, v.factor or "c", v.provenance, details)


def mass_integral(d: DivisorialDensity) -> ConvergenceVerdict:
    """Total mass: per factor ``int_0^{1/e} dr / (r (-log r)^(1+alpha)) = 1/alpha``.

    The total lies in ``[alpha^-N / B, B alpha^-N]`` times the symbolic
    normalisation ``c``; both ends are in the details.
    """
    v = classify_at_zero(mass_term(d), CUTOFF)
    return _with_bounds(d, v, exponent=float(-1 - d.alpha))


def entropy_integral(d: DivisorialDensity) -> ConvergenceVerdict:
    """``int f log f``: in each factor ``log f = 2s - (1+alpha) log s + O(1)``, ``s = -log r``.

    The leading piece ``2 s`` multiplies the density ``s^-1-alpha`` to give
    ``s^-alpha``, so the verdict is finite iff ``alpha > 1``. The value is
    that leading integral ``int_1^inf s^-alpha ds = 1/(alpha - 1)``. The
    details also give the one-factor model value of
    ``int (2s - (1+alpha) log s) s^-1-alpha ds``, which is ``2/(alpha-1) - (1+alpha)/alpha^2``.
    """
    a = d.alpha
    lead = classify_at_zero(entropy_term(d), CUTOFF)
    extra = {"exponent": float(-a)}
    if lead.converges:
        af = float(a)
        extra["model_value"] = 2.0 / (af - 1.0) - (1.0 + af) / af**2
    return _with_bounds(d, lead, **extra)


def critical_pairing(d: DivisorialDensity) -> ConvergenceVerdict:
    """``int (-log|z_j|)^{1/2} dmu`` per factor; exponent ``-1/2 - alpha``, finite iff ``alpha > 1/2``.

    The weight ``(-log|z|)^{1/2}`` is the borderline barrier: its own energy
    just fails to be finite (see :func:`barrier_energy`), so a measure pairs
    finitely with it exactly when it has finite energy in this model.
    """
    v = classify_at_zero(pairing_term(d), CUTOFF)
    return _with_bounds(d, v, exponent=float(-CRITICAL_WEIGHT - d.alpha))


def barrier_energy(p) -> ConvergenceVerdict:
    """Transverse energy of ``u_p = -(-log|z|)^p``: ``int_1^inf s^p s^(p-2) ds``.

    Finite iff ``2p - 2 < -1``, i.e. ``p < 1/2``.
    """
    p = exact(p)
    if not 0 < p < 1:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    term = LogPowerTerm(float(p * (1 - p)), 2 * p - 2, 0)
    v = classify_at_infinity(term, 1.0)
    return ConvergenceVerdict(
        v.status, v.value, v.rate, v.factor, v.provenance, {"p": float(p), "exponent": float(2 * p - 2)}
    )


def classify(d: DivisorialDensity) -> ConvergenceVerdict:
    """Finite energy of ``mu = f dV``: the critical-pairing verdict.

    Write ``mu = MA(phi)``. When ``alpha > 1/2`` the potential ``phi`` sits
    above a barrier ``u_q`` with ``q`` in ``(max(1 - alpha, 0), 1/2)``, which
    has finite energy. When ``alpha < 1/2`` it sits below some ``u_p`` with
    ``p`` in ``(1/2, 1 - alpha)``, which does not. Both
    windows are reported when nonempty.
    """
    v = critical_pairing(d)
    a = d.alpha
    extra = {"threshold": 0.5}
    lo = max(1 - a, Fraction(0))
    if lo < CRITICAL_WEIGHT:
        extra["barrier_window"] = [float(lo), 0.5]
    if 1 - a > CRITICAL_WEIGHT:
        extra["obstruction_window"] = [0.5, float(1 - a)]
    return ConvergenceVerdict(v.status, v.value, v.rate, v.factor, v.provenance, dict(v.details) | extra)


__all__ = [
    "DivisorialDensity",
    "mass_integral",
    "entropy_integral",
    "critical_pairing",
    "barrier_energy",
    "classify",
    "mass_term",
    "entropy_term",
    "pairing_term",
    "CUTOFF",
]
