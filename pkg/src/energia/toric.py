"""Toric finite-energy criteria, computed on the dual (Legendre) side.

A toric potential is a convex function ``phi`` on R (one complex dimension)
whose gradient image is the moment interval ``P``. Energy classes are read
off from its conjugate: ``phi`` has finite ``q``-energy iff ``phi*`` is in
``L^q(P)``, and the ``q``-th moment of the real Monge-Ampere measure equals
``int_P |grad phi*|^q dp`` after the change of variables ``p = phi'(x)``.
The measure itself is never built.

The worked family is ``phi_beta``: affine of slope one on the right, joined
at the tangency point to ``-C (-x)**beta`` on the left. The join makes it
convex and C^1, and its conjugate on ``(0, 1]`` is ``K p**(-beta*)`` with
``beta* = beta / (1 - beta)``; the default ``C`` gives ``K = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from .convex import (
    AffineExtension,
    Polytope,
    SampledConvexFunction,
    legendre_transform,
    subgradient_image,
)
from .errors import FitUnstable, OracleDisagreement, RangeError
from .logpow import (
    ConvergenceVerdict,
    LogPowerTerm,
    Status,
    classify_at_zero,
    exact,
)

FIT_POINTS = 10
FIT_RESIDUAL_MAX = 0.05
BOUNDARY_SNAP = 1e-3
# verdicts closer than this to kappa*q = 1 are not cross-checked numerically
CROSS_CHECK_BAND = 0.05
CROSS_CHECK_WINDOW = (0.01, 0.99)
CROSS_CHECK_RTOL = 1e-3
DEFAULT_GRID = 2001
D_MIN = 1e-4
X_POINTS = 20000

UNIT_INTERVAL = Polytope(0.0, 1.0)


def beta_star(beta) -> Fraction:
    b = exact(beta)
    if not 0 < b < 1:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    return b / (1 - b)


def normalized_c(beta: float) -> float:
    """The ``C`` for which the conjugate of ``phi_beta`` is exactly ``p**(-beta*)``."""
    bs = float(beta_star(beta))
    return (1.0 + bs) * bs ** (-float(beta))


def _conjugate_scale(beta: float, C: float) -> float:
    bs = float(beta_star(beta))
    return (1.0 - beta) * beta**bs * C ** (1.0 / (1.0 - beta))


def _tangency(beta: float, C: float, p) -> np.ndarray:
    # the y = -x maximizing C y**beta - p y
    return (C * beta / np.asarray(p, dtype=float)) ** (1.0 / (1.0 - beta))


def phi_beta(x, beta: float, C: float | None = None):
    """Evaluate the convex ``phi_beta`` (see the module docstring)."""
    C = normalized_c(beta) if C is None else float(C)
    x = np.asarray(x, dtype=float)
    y1 = float(_tangency(beta, C, 1.0))
    offset = -y1 + C * y1**beta
    left = -C * np.abs(np.minimum(x, 0.0)) ** beta
    return np.where(x >= -y1, x - offset, left)


def phi_beta_conjugate(p, beta: float, C: float | None = None):
    C = normalized_c(beta) if C is None else float(C)
    return _conjugate_scale(beta, C) * np.asarray(p, dtype=float) ** (-float(beta_star(beta)))


def polytope_grid(P: Polytope, n_points: int = DEFAULT_GRID, d_min: float = D_MIN) -> np.ndarray:
    """Points of ``P`` clustered geometrically toward both endpoints."""
    half = max((n_points + 1) // 2, FIT_POINTS + 2)
    d = np.geomspace(d_min * P.width, 0.5 * P.width, half)
    return np.unique(np.concatenate([P.p_min + d, P.p_max - d[::-1]]))


def beta_x_grid(beta: float, C: float, p_min: float, n_points: int = X_POINTS) -> np.ndarray:
    y1 = float(_tangency(beta, C, 1.0))
    y_max = 10.0 * float(_tangency(beta, C, p_min))
    left = -np.geomspace(y1, y_max, n_points)[::-1]
    right = np.linspace(-y1, 1.0, 64)[1:]
    return np.concatenate([left, right])


@dataclass(frozen=True, eq=False)
class ToricModel:
    reference: SampledConvexFunction
    potential: SampledConvexFunction
    polytope: Polytope = UNIT_INTERVAL
    beta: float | None = None
    C: float | None = None
    grid: int = DEFAULT_GRID
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        lo, hi = subgradient_image(self.potential)
        tol = 1e-9 * max(1.0, self.polytope.width)
        if lo < self.polytope.p_min - tol or hi > self.polytope.p_max + tol:
            raise ValueError(
                f"potential slopes [{lo:g}, {hi:g}] leave the polytope "
                f"[{self.polytope.p_min:g}, {self.polytope.p_max:g}]"
            )
        if self.beta is not None:
            b = float(self.beta)
            C = normalized_c(b) if self.C is None else float(self.C)
            object.__setattr__(self, "C", C)
            expect = phi_beta(self.potential.grid, b, C)
            if not np.allclose(self.potential.values, expect, rtol=1e-12, atol=1e-12):
                raise ValueError("potential does not match phi_beta on its grid")

    @property
    def slopes(self) -> np.ndarray:
        return polytope_grid(self.polytope, self.grid)

    @classmethod
    def beta_family(cls, beta: float, C: float | None = None, grid: int = DEFAULT_GRID) -> ToricModel:
        beta = float(beta)
        C = normalized_c(beta) if C is None else float(C)
        x = beta_x_grid(beta, C, D_MIN)
        pot = SampledConvexFunction(x, phi_beta(x, beta, C), AffineExtension(0.0, 1.0))
        return cls(reference_potential(), pot, UNIT_INTERVAL, beta, C, grid)

    def conjugate(self) -> SampledConvexFunction:
        return legendre_transform(self.potential, self.slopes)


def reference_potential(n_points: int = 100001, half_width: float = 20.0) -> SampledConvexFunction:
    """``phi_P(x) = log(1 + e^{2x}) / 2`` sampled, moment interval ``[0, 1]``."""
    x = np.linspace(-half_width, half_width, n_points)
    return SampledConvexFunction(x, 0.5 * np.logaddexp(0.0, 2.0 * x), AffineExtension(0.0, 1.0))


@dataclass(frozen=True)
class EndpointFit:
    kappa: float
    scale: float
    residual: float
    width: float

    def term(self, q: float, snap: float = BOUNDARY_SNAP) -> LogPowerTerm:
        """``(scale d**-kappa)**q`` as an integrand in the distance ``d``."""
        e = max(self.kappa, 0.0) * q
        a = Fraction(1) if abs(e - 1.0) <= snap else exact(e)
        return LogPowerTerm(max(self.scale, 1e-300) ** q, -a, 0)

    def tail(self, q: float) -> float:
        e = self.kappa * q
        return self.scale**q * self.width ** (1.0 - e) / (1.0 - e)


def fit_endpoint(d: np.ndarray, f: np.ndarray, n: int = FIT_POINTS) -> EndpointFit:
    """Fit ``|f| ~ c d**-kappa`` on the ``n`` points of smallest ``d``."""
    order = np.argsort(d)[:n]
    dd, ff = d[order], np.abs(f[order])
    if np.any(ff <= 0) or not np.all(np.isfinite(ff)):
        raise FitUnstable("endpoint values vanish or are not finite; no power law to fit")
    X = np.vstack([np.log(dd), np.ones_like(dd)]).T
    y = np.log(ff)
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = float(np.sqrt(np.mean((y - X @ coef) ** 2)))
    if resid > FIT_RESIDUAL_MAX:
        raise FitUnstable(f"endpoint log-log fit residual {resid:.3g} exceeds {FIT_RESIDUAL_MAX}")
    return EndpointFit(-float(coef[0]), math.exp(coef[1]), resid, float(dd.max()))


def _power_integral(
    p: np.ndarray, f: np.ndarray, q: float, P: Polytope, window: int = FIT_POINTS
) -> ConvergenceVerdict:
    """Classify and evaluate ``int_P |f|**q`` from samples at interior points ``p``."""
    if np.any(p <= P.p_min) or np.any(p >= P.p_max):
        raise ValueError("samples must lie in the open polytope")
    fits = {}
    for side, d in (("left", p - P.p_min), ("right", P.p_max - p)):
        fits[side] = fit_endpoint(d, f, window)
    details = {
        f"kappa_{s}": ft.kappa for s, ft in fits.items()
    } | {f"fit_residual_{s}": ft.residual for s, ft in fits.items()}
    verdicts = [classify_at_zero(ft.term(q), ft.width) for ft in fits.values()]
    bad = [v for v in verdicts if not v.converges]
    if bad:
        return ConvergenceVerdict(Status.DIVERGES, rate=bad[0].rate, provenance="numeric", details=details)
    lo, hi = fits["left"].width, fits["right"].width
    inner = (p >= P.p_min + lo) & (p <= P.p_max - hi)
    body = float(integrate.trapezoid(np.abs(f[inner]) ** q, p[inner]))
    value = body + fits["left"].tail(q) + fits["right"].tail(q)
    return ConvergenceVerdict(Status.CONVERGES, value=value, provenance="numeric", details=details)


def lq_norm_on_polytope(
    fstar: SampledConvexFunction, q: float, P: Polytope = UNIT_INTERVAL, window: int = FIT_POINTS
) -> ConvergenceVerdict:
    """Whether ``fstar`` lies in ``L^q(P)``; the value is ``int_P |fstar|**q``.

    The endpoint behaviour ``|fstar| ~ c d**-kappa`` is fitted on the
    ``window`` samples nearest each endpoint and classified exactly
    (``kappa q < 1``); the interior is integrated by the trapezoid rule.

    Raises
    ------
    FitUnstable
        If an endpoint fit is not a clean power law.
    """
    if not q > 0:
        raise ValueError(f"q must be positive, got {q}")
    p = fstar.grid
    keep = (p > P.p_min) & (p < P.p_max)
    return _power_integral(p[keep], fstar.values[keep], float(q), P, window)


def _symbolic_power(coeff: float, kappa: Fraction, q: float) -> ConvergenceVerdict:
    # int_0^1 (coeff p**-kappa)**q dp
    return classify_at_zero(LogPowerTerm(coeff**q, -kappa * exact(q), 0), 1.0)


def _cross_check(sym: ConvergenceVerdict, num: ConvergenceVerdict, exponent: float, what: str):
    if abs(exponent - 1.0) < CROSS_CHECK_BAND:
        return
    if sym.status is not num.status:
        raise OracleDisagreement(
            f"{what}: symbolic {sym.status.value} vs numeric {num.status.value}"
        )


def _beta_details(model: ToricModel) -> dict:
    return {"beta": float(model.beta), "betaStar": float(beta_star(model.beta)), "C": model.C}


def classify_toric_energy(
    model: ToricModel, q: float = 1.0, window: int = FIT_POINTS
) -> ConvergenceVerdict:
    """Finite ``q``-energy of the toric potential, via ``phi* in L^q(P)``.

    On the beta family the verdict comes from the closed form
    ``K p**(-beta*)``; the numeric transform is compared with it on
    ``[0.01, 0.99]`` and its own verdict with the symbolic one.

    Raises
    ------
    OracleDisagreement
        If the two paths disagree.
    """
    fstar = model.conjugate()
    if model.beta is None:
        return lq_norm_on_polytope(fstar, q, model.polytope, window)
    beta, C = float(model.beta), model.C
    bs = beta_star(beta)
    exact_vals = phi_beta_conjugate(fstar.grid, beta, C)
    inside = (fstar.grid >= CROSS_CHECK_WINDOW[0]) & (fstar.grid <= CROSS_CHECK_WINDOW[1])
    rel = float(np.max(np.abs(fstar.values[inside] / exact_vals[inside] - 1.0)))
    if rel > CROSS_CHECK_RTOL:
        raise OracleDisagreement(
            f"numeric conjugate of phi_beta off by {rel:.2e} relative (beta={beta})"
        )
    sym = _symbolic_power(_conjugate_scale(beta, C), bs, q)
    num = lq_norm_on_polytope(fstar, q, model.polytope, window)
    _cross_check(sym, num, float(bs) * q, f"toric energy beta={beta} q={q}")
    return ConvergenceVerdict(
        sym.status,
        value=sym.value,
        rate=sym.rate,
        details=_beta_details(model)
        | {"conjugate_max_rel_error": rel, "exponent": float(bs) * q, "numeric_value": num.value},
    )


def moment_integral(model: ToricModel, q: float = 1.0, window: int = FIT_POINTS) -> ConvergenceVerdict:
    """``int_P |grad phi*|**q dp``, the ``q``-th moment of the real Monge-Ampere measure.

    ``grad phi*`` is taken by centered differences on the slope grid.
    """
    if not q > 0:
        raise ValueError(f"q must be positive, got {q}")
    fstar = model.conjugate()
    p, P = fstar.grid, model.polytope
    keep = (p > P.p_min) & (p < P.p_max)
    grad = np.gradient(fstar.values, p, edge_order=2)
    num = _power_integral(p[keep], grad[keep], float(q), P, window)
    if model.beta is None:
        return num
    beta, C = float(model.beta), model.C
    bs = beta_star(beta)
    sym = _symbolic_power(float(bs) * _conjugate_scale(beta, C), bs + 1, q)
    _cross_check(sym, num, float(bs + 1) * q, f"moment beta={beta} q={q}")
    return ConvergenceVerdict(
        sym.status,
        value=sym.value,
        rate=sym.rate,
        details=_beta_details(model) | {"exponent": float(bs + 1) * q, "numeric_value": num.value},
    )


def sobolev_chain(q, n: int) -> Fraction:
    """The Sobolev exponent ``q* = q n / (n - q)`` for ``1 <= q < n``."""
    q = exact(q)
    if n < 2:
        raise RangeError("the Sobolev chain needs dimension n > 1")
    if not 1 <= q < n:
        raise RangeError(f"need 1 <= q < n, got q={q}, n={n}")
    return q * n / (n - q)


def sharp_sobolev_constant(q: float, n: int) -> float:
    """Best constant in ``||u||_{q*} <= S ||grad u||_q`` on R^n (Aubin, Talenti)."""
    sobolev_chain(q, n)
    if q == 1:
        return math.exp(gammaln(1 + n / 2) / n) / (n * math.sqrt(math.pi))
    log_bracket = gammaln(1 + n / 2) + gammaln(n) - gammaln(n / q) - gammaln(1 + n - n / q)
    return (
        math.pi**-0.5
        * n ** (-1.0 / q)
        * ((q - 1) / (n - q)) ** (1 - 1.0 / q)
        * math.exp(log_bracket / n)
    )


@dataclass(frozen=True)
class RadialProfile:
    """A radial convex function ``u(rho)`` on the unit ball, zero on the sphere."""

    name: str
    u: object
    du: object


def _profiles() -> list[RadialProfile]:
    out = []
    for k in (1.0, 1.5, 2.0, 3.0, 4.0):
        out.append(
            RadialProfile(f"rho^{k:g}-1", lambda r, k=k: r**k - 1.0, lambda r, k=k: k * r ** (k - 1))
        )
    for a in (1.0, 3.0):
        out.append(
            RadialProfile(
                f"exp({a:g}rho)", lambda r, a=a: math.exp(a * r) - math.exp(a), lambda r, a=a: a * math.exp(a * r)
            )
        )
    out.append(
        RadialProfile("cosh(2rho)", lambda r: math.cosh(2 * r) - math.cosh(2), lambda r: 2 * math.sinh(2 * r))
    )
    out.append(
        RadialProfile(
            "sqrt(rho^2+0.1)",
            lambda r: math.sqrt(r * r + 0.1) - math.sqrt(1.1),
            lambda r: r / math.sqrt(r * r + 0.1),
        )
    )
    out.append(
        RadialProfile("rho^2(2-rho)", lambda r: r * r * (2 - r) - 1.0, lambda r: 4 * r - 3 * r * r)
    )
    return out


SYNTHETIC_PROFILES = _profiles()


def _sphere_area(n: int) -> float:
    return 2 * math.pi ** (n / 2) / math.gamma(n / 2)


def _radial_norm(g, exponent: float, n: int) -> float:
    val, _ = integrate.quad(lambda r: abs(g(r)) ** exponent * r ** (n - 1), 0.0, 1.0, epsabs=0, epsrel=1e-11, limit=200)
    return (_sphere_area(n) * val) ** (1.0 / exponent)


@dataclass(frozen=True)
class SobolevCheck:
    q: float
    n: int
    q_star: Fraction
    ratios: dict
    fitted_constant: float
    sharp_constant: float

    @property
    def holds(self) -> bool:
        return self.fitted_constant <= self.sharp_constant

    def to_dict(self) -> dict:
        return {
            "q": self.q,
            "n": self.n,
            "qStar": float(self.q_star),
            "fitted_constant": self.fitted_constant,
            "sharp_constant": self.sharp_constant,
            "holds": self.holds,
            "ratios": self.ratios,
        }


def verify_sobolev(q, n: int, profiles=None) -> SobolevCheck:
    """Check ``||u||_{q*} <= C ||grad u||_q`` on radial convex test profiles.

    ``C`` is fitted as the largest observed ratio and must not exceed the
    sharp constant; the volume factor ``|S^{n-1}| rho^{n-1}`` is attached
    analytically, so all integrals are one-dimensional.
    """
    qs = sobolev_chain(q, n)
    profiles = SYNTHETIC_PROFILES if profiles is None else profiles
    ratios = {}
    for prof in profiles:
        lhs = _radial_norm(prof.u, float(qs), n)
        rhs = _radial_norm(prof.du, float(q), n)
        ratios[prof.name] = lhs / rhs
    return SobolevCheck(
        float(q), n, qs, ratios, max(ratios.values()), sharp_sobolev_constant(float(q), n)
    )


__all__ = [
    "ToricModel",
    "beta_star",
    "normalized_c",
    "phi_beta",
    "phi_beta_conjugate",
    "polytope_grid",
    "reference_potential",
    "fit_endpoint",
    "lq_norm_on_polytope",
    "classify_toric_energy",
    "moment_integral",
    "sobolev_chain",
    "sharp_sobolev_constant",
    "verify_sobolev",
    "SobolevCheck",
    "SYNTHETIC_PROFILES",
]
