"""Symbolic verdicts checked against sampled-value numerics.

The numeric side only ever evaluates the integrand. Verdicts are compared
where the empirical detector is reliable: pure powers (``b == 0``) and pure
log-powers (``a == -1``, integrated in ``u = log t``), away from the
boundary. Values are compared on the convergent side by direct tail
quadrature in the original variable. A mismatch raises
:class:`OracleDisagreement`; a numeric method that cannot decide is recorded
and never overrides the symbolic verdict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import Inconclusive, NonIntegrableSuspected, OracleDisagreement
from .logpow import (
    ConvergenceVerdict,
    LogPowerTerm,
    classify_at_infinity,
    classify_at_zero,
    substitute_at_zero,
)
from .quadrature import (
    DEFAULT_PANELS,
    DEFAULT_TOL,
    empirical_convergence,
    empirical_convergence_at_zero,
    integrate_at_zero,
    integrate_tail,
)

VERDICT_BAND = 0.05
VALUE_MARGIN = 0.05
VALUE_RTOL = 1e-6
VALUE_BUDGET = 1000


@dataclass
class CrossCheck:
    symbolic: ConvergenceVerdict
    numeric_verdict: str | None = None
    numeric_value: float | None = None
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "numeric_verdict": self.numeric_verdict,
            "numeric_value": self.numeric_value,
            "oracle_notes": list(self.notes),
        }


def _verdict_applies(term: LogPowerTerm) -> bool:
    a, b = term.a, term.b
    if b == 0:
        return abs(a + 1) >= VERDICT_BAND
    if a == -1:
        return abs(b + 1) >= VERDICT_BAND
    return False


def _value_applies(term: LogPowerTerm) -> bool:
    a, b = term.a, term.b
    return a <= -1 - VALUE_MARGIN or (a == -1 and b <= -1 - VALUE_MARGIN)


def numeric_value(term: LogPowerTerm, lower: float, tol: float = DEFAULT_TOL) -> float:
    """Tail quadrature of ``term`` on ``[lower, inf)``; ``u = log t`` when ``a == -1``."""
    c, a, b = term.coeff, float(term.a), float(term.b)
    if term.a == -1:
        return integrate_tail(lambda u: c * u**b, math.log(lower), tol=tol, budget=VALUE_BUDGET)
    if term.b == 0:
        return integrate_tail(lambda t: c * t**a, lower, tol=tol, budget=VALUE_BUDGET)
    return integrate_tail(lambda t: c * t**a * math.log(t) ** b, lower, tol=tol, budget=VALUE_BUDGET)


def _numeric_verdict(term: LogPowerTerm, lower: float, panels: int, tol: float) -> ConvergenceVerdict:
    c, a, b = term.coeff, float(term.a), float(term.b)
    if term.a == -1:
        return empirical_convergence(lambda u: c * u**b, math.log(lower), panels, tol)
    return empirical_convergence(lambda t: c * t**a, lower, panels, tol)


def cross_check(
    term: LogPowerTerm,
    form: str = "infinity",
    bound: float = math.e,
    *,
    tol: float = DEFAULT_TOL,
    panels: int = DEFAULT_PANELS,
    value_rtol: float = VALUE_RTOL,
) -> CrossCheck:
    """Classify ``term`` symbolically and confirm it numerically where possible.

    ``form`` is ``"infinity"`` (``bound`` is the lower limit) or ``"zero"``
    (``bound`` is the upper limit of ``int_0^bound``).

    Raises
    ------
    OracleDisagreement
        If a numeric verdict or value contradicts the symbolic one.
    """
    if form == "zero":
        sym = classify_at_zero(term, bound, tol=tol, panels=panels)
        t_term, lower = substitute_at_zero(term), 1.0 / bound
    elif form == "infinity":
        sym = classify_at_infinity(term, bound, tol=tol, panels=panels)
        t_term, lower = term, float(bound)
    else:
        raise ValueError(f"unknown form {form!r}")
    out = CrossCheck(sym)
    if _verdict_applies(t_term):
        try:
            emp = _numeric_verdict(t_term, lower, panels, tol)
        except Inconclusive as exc:
            out.notes.append(f"numeric verdict inconclusive: {exc}")
        else:
            out.numeric_verdict = emp.status.value
            if emp.status is not sym.status:
                raise OracleDisagreement(
                    f"symbolic {sym.status.value} but numeric {emp.status.value} for "
                    f"a={t_term.a}, b={t_term.b}"
                )
    if sym.converges and _value_applies(t_term):
        try:
            val = numeric_value(t_term, lower, tol)
        except NonIntegrableSuspected as exc:
            out.notes.append(f"numeric value unavailable: {exc}")
        else:
            out.numeric_value = val
            if not math.isclose(val, sym.value, rel_tol=value_rtol, abs_tol=0.0):
                raise OracleDisagreement(
                    f"symbolic value {sym.value!r} but numeric {val!r} for a={t_term.a}, b={t_term.b}"
                )
    return out


def check_callable(
    f,
    sym: ConvergenceVerdict,
    form: str,
    bound: float,
    *,
    tol: float = DEFAULT_TOL,
    panels: int = DEFAULT_PANELS,
    value_rtol: float = VALUE_RTOL,
    scale: float = 1.0,
) -> CrossCheck:
    """Compare ``sym`` with numerics on an integrand given only as a callable.

    ``scale`` converts the numeric integral to the symbolic normalisation
    (symbolic values omit opaque constants). The caller decides whether the
    integrand is far enough from the boundary for a numeric verdict to mean
    anything.

    Raises
    ------
    OracleDisagreement
        If the numeric verdict or value contradicts ``sym``.
    """
    if form == "zero":
        detect, quad = empirical_convergence_at_zero, integrate_at_zero
    elif form == "infinity":
        detect, quad = empirical_convergence, integrate_tail
    else:
        raise ValueError(f"unknown form {form!r}")
    out = CrossCheck(sym)
    try:
        emp = detect(f, bound, panels, tol)
    except Inconclusive as exc:
        out.notes.append(f"numeric verdict inconclusive: {exc}")
    else:
        out.numeric_verdict = emp.status.value
        if emp.status is not sym.status:
            raise OracleDisagreement(f"symbolic {sym.status.value} but numeric {emp.status.value}")
    if sym.converges:
        try:
            val = scale * quad(f, bound, tol=tol, budget=VALUE_BUDGET)
        except NonIntegrableSuspected as exc:
            out.notes.append(f"numeric value unavailable: {exc}")
        else:
            out.numeric_value = val
            if not math.isclose(val, sym.value, rel_tol=value_rtol, abs_tol=0.0):
                raise OracleDisagreement(f"symbolic value {sym.value!r} but numeric {val!r}")
    return out


__all__ = ["CrossCheck", "cross_check", "check_callable", "numeric_value"]
