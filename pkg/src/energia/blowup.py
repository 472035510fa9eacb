"""Finite energy is not invariant under blowing up a point of P^2.

The potential ``u_p = -(-log||z||)^p`` with ``p = 1/2 - delta`` gives a
measure ``mu`` of finite energy for the Kahler class upstairs, while the
test function built from ``u_eps``, ``eps = 2/3 - delta'``, has finite
energy for the pulled-back Fubini-Study class yet pairs infinitely with
``mu``. Everything reduces to one integral near the blown-up point:

    int_0^{1/2} (-log rho)^eps chi_p''(log rho) rho^-4 rho^3 drho,

with ``chi_p(t) = -(-t)^p``. Only that integral is computed here; the
geometric facts around it are quoted with ``source: cited``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .divisorial import barrier_energy
from .logpow import ConvergenceVerdict, LogPowerTerm, classify_at_zero, exact

UPPER = 0.5
P_BASE = Fraction(1, 2)
EPS_BASE = Fraction(2, 3)
BOUNDARY = Fraction(1, 6)

CITED_FACTS = (
    {
        "claim": "mu is in MA(E^1) for the Kahler class of the blow-up",
        "detail": "the pulled-back potential pi^* phi_p has finite energy for omega~ by a similar computation",
        "source": "cited",
    },
    {
        "claim": "psi = pi^* phi_eps is in E^1 for pi^* omega_FS but not in E^1 for omega~",
        "detail": "quoted from the literature on energy classes of blow-ups",
        "source": "cited",
    },
)

CONCLUSION = "not in MA(E¹) for the pulled-back Fubini–Study class"


@dataclass(frozen=True)
class BlowupScenario:
    delta: Fraction
    delta_prime: Fraction

    def __post_init__(self):
        d, dp = exact(self.delta), exact(self.delta_prime)
        if not 0 < d < P_BASE:
            raise ValueError(f"delta must lie in (0, 1/2) so that p is in (0, 1/2), got {self.delta}")
        if not 0 < dp < EPS_BASE:
            raise ValueError(f"delta' must lie in (0, 2/3) so that eps is in (0, 2/3), got {self.delta_prime}")
        object.__setattr__(self, "delta", d)
        object.__setattr__(self, "delta_prime", dp)

    @property
    def p(self) -> Fraction:
        return P_BASE - self.delta

    @property
    def eps(self) -> Fraction:
        return EPS_BASE - self.delta_prime

    def parameters(self) -> dict:
        return {
            "delta": float(self.delta),
            "deltaPrime": float(self.delta_prime),
            "p": float(self.p),
            "epsilon": float(self.eps),
        }

    def chi2(self, t: float) -> float:
        """``chi_p''(t)`` for ``chi_p(t) = -(-t)^p``, ``t < 0``."""
        p = float(self.p)
        return p * (1 - p) * (-t) ** (p - 2)

    def integrand(self, rho: float) -> float:
        """The pairing integrand assembled from its pieces, for numeric checks."""
        t = math.log(rho)
        return (-t) ** float(self.eps) * self.chi2(t) * rho**-4 * rho**3

    def integrand_s(self, s: float) -> float:
        """:meth:`integrand` after ``rho = e^-s``, Jacobian included.

        ``rho^-4 * rho^3 * |d rho / ds|`` is identically one, which keeps
        the evaluation finite where ``e^-s`` underflows.
        """
        return s ** float(self.eps) * self.chi2(-s)


def region_grid(steps: int = 100) -> list[BlowupScenario]:
    """``steps x steps`` scenarios ``delta = i/(2(steps+1))``, ``delta' = 2j/(3(steps+1))``.

    The boundary ``delta + delta' = 1/6`` becomes ``3i + 4j = steps + 1``,
    so it is hit exactly whenever that has solutions.
    """
    m = steps + 1
    return [
        BlowupScenario(Fraction(i, 2 * m), Fraction(2 * j, 3 * m))
        for i in range(1, steps + 1)
        for j in range(1, steps + 1)
    ]


def density_reduction(scn: BlowupScenario) -> LogPowerTerm:
    """The pairing integrand as ``c rho^-1 (-log rho)^(p + eps - 2)``.

    ``chi_p'' = p(1-p)(-t)^(p-2)`` gives the coefficient; the constants of
    the current and of polar coordinates stay symbolic.
    """
    p = scn.p
    return LogPowerTerm(float(p * (1 - p)), -1, scn.eps + p - 2, "A·C'")


def pairing_integral(scn: BlowupScenario) -> ConvergenceVerdict:
    """Infinite iff ``2 - p - eps <= 1``, i.e. iff ``delta + delta' <= 1/6``."""
    term = density_reduction(scn)
    v = classify_at_zero(term, UPPER)
    details = dict(v.details)
    details.update(exponent=float(2 - scn.p - scn.eps), boundary="delta + delta' <= 1/6")
    return ConvergenceVerdict(v.status, v.value, v.rate, v.factor, v.provenance, details)


def scenario_report(scn: BlowupScenario) -> dict:
    """Computed verdict, quoted facts (flagged ``source: cited``) and the conclusion."""
    v = pairing_integral(scn)
    barrier = barrier_energy(scn.p)
    report = {
        "parameters": scn.parameters(),
        "pairing": v.to_dict() | {"source": "computed"},
        "barrier_energy": {"verdict": barrier.status.value, "source": "computed"},
        "cited": [dict(f) for f in CITED_FACTS],
        "normalisation": "1/vol(omega~), kept symbolic",
    }
    if not v.converges:
        report["conclusion"] = CONCLUSION
    else:
        report["conclusion"] = None
        report["note"] = "pairing is finite for these parameters; the counterexample does not apply"
    return report


__all__ = [
    "BlowupScenario",
    "density_reduction",
    "pairing_integral",
    "scenario_report",
    "region_grid",
    "CITED_FACTS",
]
