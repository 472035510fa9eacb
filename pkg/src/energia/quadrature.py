"""Numerical integration on rays ``[L, inf)`` and punctured intervals ``(0, u]``.

This module is the independent oracle for :mod:`energia.logpow`: it never
looks at exponents, only at sampled values of the integrand. Panels double
geometrically, ``[L 2**k, L 2**(k+1)]``, each one integrated by adaptive
Gauss-Kronrod (``scipy.integrate.quad``); partial sums use ``math.fsum`` so
results do not depend on summation order.
"""

from __future__ import annotations

import math
import warnings
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import Inconclusive, NonIntegrableSuspected
from .logpow import ConvergenceVerdict, DivergenceRate, Status

__all__ = [
    "DEFAULT_TOL",
    "DEFAULT_PANELS",
    "integrate_panel",
    "integrate_tail",
    "integrate_at_zero",
    "empirical_convergence",
    "empirical_convergence_at_zero",
    "TailFit",
]

DEFAULT_TOL = 1e-8
DEFAULT_PANELS = 60

# log2 of the largest panel end we allow, leaving headroom below float max
_MAX_LOG2_END = 1015.0


def integrate_panel(f: Callable[[float], float], lo: float, hi: float, tol: float) -> float:
    """Integrate ``f`` over one bounded panel to relative accuracy ``tol``."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=max(tol, 1e-14), limit=200)
    return val


_WYNN_TERMS = 9


def _wynn(sums: list[float]) -> float:
    """Highest even column of Wynn's epsilon table over ``sums``."""
    if len(sums) % 2 == 0:
        sums = sums[1:]
    prev = [0.0] * (len(sums) + 1)
    cur = list(sums)
    for _ in range(len(sums) - 1):
        nxt = []
        for j in range(len(cur) - 1):
            d = cur[j + 1] - cur[j]
            if d == 0.0:
                return cur[j + 1]
            nxt.append(prev[j + 1] + 1.0 / d)
        prev, cur = cur, nxt
    return cur[0]


def _panel_ends(lower: float, budget: int) -> np.ndarray:
    if not lower > 0:
        raise ValueError(f"lower bound must be positive, got {lower}")
    max_budget = int(_MAX_LOG2_END - math.log2(lower))
    if budget < 3 or budget > max_budget:
        raise ValueError(f"panel budget must lie in [3, {max_budget}], got {budget}")
    return lower * np.exp2(np.arange(budget + 1, dtype=float))


def integrate_tail(
    f: Callable[[float], float],
    lower: float,
    tol: float = DEFAULT_TOL,
    budget: int = DEFAULT_PANELS,
) -> float:
    """Integrate a nonnegative ``f`` over ``[lower, inf)``.

    After each panel the remaining tail is extrapolated by Wynn's epsilon
    algorithm on the latest partial sums, which removes several geometric
    components at once (a sum of power laws decays that way per panel). The estimate is accepted once two
    consecutive extrapolations agree to ``tol`` (relative).

    Raises
    ------
    NonIntegrableSuspected
        If the extrapolated totals never settle within ``budget`` panels.
    """
    ends = _panel_ends(lower, budget)
    panel_tol = tol * 1e-3
    increments: list[float] = []
    sums: list[float] = []
    prev_est = None
    settled = 0
    for k in range(budget):
        inc = integrate_panel(f, ends[k], ends[k + 1], panel_tol)
        increments.append(inc)
        partial = math.fsum(increments)
        sums.append(partial)
        if inc == 0.0:
            if prev_est is not None and math.isclose(prev_est, partial, rel_tol=tol, abs_tol=0):
                return partial
            prev_est, settled = partial, 0
            continue
        if k == 0 or increments[-2] == 0.0:
            continue
        r = inc / increments[-2]
        if not 0.0 <= r < 1.0:
            prev_est, settled = None, 0
            continue
        est = _wynn(sums[-_WYNN_TERMS:]) if len(sums) >= 3 else partial + inc * r / (1.0 - r)
        if not math.isfinite(est):
            prev_est, settled = None, 0
            continue
        if prev_est is not None and abs(est - prev_est) <= tol * abs(est):
            settled += 1
            if settled >= 2:
                return est
        else:
            settled = 0
        prev_est = est
    raise NonIntegrableSuspected(
        f"tail increments did not settle after {budget} panels from {lower:g}"
    )


def integrate_at_zero(
    f: Callable[[float], float],
    upper: float,
    tol: float = DEFAULT_TOL,
    budget: int = DEFAULT_PANELS,
    *,
    in_log: bool = False,
) -> float:
    """Integrate ``f`` over ``(0, upper]``, ``0 < upper < 1``.

    Uses ``t = 1/r``, turning the endpoint singularity into a tail on
    ``[1/upper, inf)``; no node comes closer to ``r = 0`` than ``2^-1015``.
    That is the same map as :func:`energia.logpow.substitute_at_zero`.
    Integrands with only logarithmic decay need far more room than floats
    allow in ``r``; pass those already substituted in ``s = -log r``,
    ``f(s) = g(e^-s) e^-s``, with ``in_log=True``.
    """
    if not 0 < upper < 1:
        raise ValueError(f"upper bound must lie in (0, 1), got {upper}")
    if in_log:
        return integrate_tail(f, -math.log(upper), tol=tol, budget=budget)
    return integrate_tail(_invert(f), 1.0 / upper, tol=tol, budget=budget)


@dataclass(frozen=True)
class TailFit:
    """Least-squares fit of log-increments against one abscissa."""

    slope: float
    intercept: float
    residual: float

    @classmethod
    def fit(cls, x: np.ndarray, y: np.ndarray) -> TailFit:
        A = np.vstack([x, np.ones_like(x)]).T
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        resid = y - A @ coef
        return cls(float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(resid**2))))


def empirical_convergence(
    f: Callable[[float], float],
    lower: float,
    budget: int = DEFAULT_PANELS,
    tol: float = DEFAULT_TOL,
    *,
    extrapolation_tol: float = 1e-4,
    window: int | None = None,
) -> ConvergenceVerdict:
    """Guess whether ``int_lower^inf f`` converges from partial integrals.

    Computes the increments ``I_k = int_{T_k}^{T_{k+1}} f`` on
    ``T_k = lower * 2**k`` and fits the last ``window`` of them with two
    models: geometric decay in ``k`` (power-law integrands) and power-law
    decay in ``log T_k`` (logarithmic integrands). The better-fitting model
    decides. Verdicts are advisory; callers cross-check them against the
    symbolic classifier whenever one applies.

    Raises
    ------
    Inconclusive
        If increments decay, but too slowly for the tail to be extrapolated
        to ``extrapolation_tol`` within ``budget`` panels.
    """
    ends = _panel_ends(lower, budget)
    panel_tol = max(tol * 1e-3, 1e-13)
    inc = np.array(
        [integrate_panel(f, ends[k], ends[k + 1], panel_tol) for k in range(budget)]
    )
    if np.any(inc < 0):
        raise ValueError("integrand must be nonnegative")
    partial = math.fsum(inc)
    nz = np.flatnonzero(inc > 0)
    if nz.size == 0:
        return _converged(0.0, "underflow")
    if nz[-1] < budget - 1:
        # increments underflowed: the remaining tail is below float resolution
        return _converged(partial, "underflow")

    w = window or max(8, budget // 4)
    w = min(w, budget - 1)
    step = math.log(2.0)
    # log of the geometric panel midpoints, kept in log space to avoid overflow
    logT = math.log(lower) + (np.arange(budget, dtype=float) + 0.5) * step
    k = np.arange(budget, dtype=float)
    y = np.log(np.where(inc > 0, inc, np.nan))
    sl = slice(budget - w, budget)
    geo = TailFit.fit(k[sl], y[sl])
    details = {"geometric_slope": geo.slope, "geometric_residual": geo.residual}
    pw = None
    if logT[budget - w] > 0:
        pw = TailFit.fit(np.log(logT[sl]), y[sl])
        details.update(log_power_slope=pw.slope, log_power_residual=pw.residual)

    # an increment ratio of 1 means no decay; allow for quadrature noise
    flat = 10 * panel_tol
    if pw is None or geo.residual <= pw.residual:
        r = math.exp(geo.slope)
        if r >= 1.0 - flat:
            return ConvergenceVerdict(
                Status.DIVERGES,
                rate=DivergenceRate("power", geo.slope / step),
                provenance="numeric",
                details=details,
            )
        tail = inc[-1] * r / (1.0 - r)
        return _converged(partial + tail, "geometric", details)

    gamma = -pw.slope
    if gamma <= 1.0:
        return ConvergenceVerdict(
            Status.DIVERGES,
            rate=DivergenceRate("log", 1.0 - gamma),
            provenance="numeric",
            details=details,
        )

    def total_through(m: int) -> float:
        # fit the w panels ending at m, then sum the fitted law C x^-g beyond m
        fit = TailFit.fit(np.log(logT[m - w : m]), y[m - w : m])
        g = -fit.slope
        if g <= 1.0:
            return math.inf
        x0 = logT[m - 1] + step / 2
        tail = math.exp(fit.intercept) * x0 ** (1.0 - g) / (step * (g - 1.0))
        return math.fsum(inc[:m]) + tail

    total = total_through(budget)
    m_early = budget - max(w // 2, 1)
    earlier = total_through(m_early) if m_early - w >= 0 and logT[m_early - w] > 0 else math.inf
    uncertainty = abs(total - earlier) / total
    details.update(relative_uncertainty=uncertainty)
    if not uncertainty <= extrapolation_tol:
        raise Inconclusive(
            f"increments decay like (log T)^-{gamma:.4f}; tail extrapolation uncertain "
            f"to {uncertainty:.2%} after {budget} panels"
        )
    return _converged(total, "log-power", details)


def _converged(value: float, method: str, details: dict | None = None) -> ConvergenceVerdict:
    d = dict(details or {})
    d["extrapolation"] = method
    return ConvergenceVerdict(Status.CONVERGES, value=value, provenance="numeric", details=d)


def empirical_convergence_at_zero(
    f: Callable[[float], float],
    upper: float,
    budget: int = DEFAULT_PANELS,
    tol: float = DEFAULT_TOL,
    *,
    in_log: bool = False,
    **kwargs,
) -> ConvergenceVerdict:
    """:func:`empirical_convergence` for ``int_0^upper f`` via ``t = 1/r``.

    See :func:`integrate_at_zero` for ``in_log``.
    """
    if not 0 < upper < 1:
        raise ValueError(f"upper bound must lie in (0, 1), got {upper}")
    if in_log:
        return empirical_convergence(f, -math.log(upper), budget, tol, **kwargs)
    return empirical_convergence(_invert(f), 1.0 / upper, budget, tol, **kwargs)


def _invert(f: Callable[[float], float]) -> Callable[[float], float]:
    return lambda t: f(1.0 / t) / (t * t)
