"""Exact convergence classification for integrands ``c * t**a * log(t)**b``.

Every finite-energy threshold handled by this package reduces to deciding
whether an integral of this two-parameter form converges at ``t -> +inf``
or, after ``t = 1/r``, at ``r -> 0+``. Exponents are carried as exact
rationals so that boundary cases (``a == -1``, ``b == -1``) are never
decided by floating-point luck.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Any

from .errors import UnsupportedForm

__all__ = [
    "Status",
    "DivergenceRate",
    "ConvergenceVerdict",
    "LogPowerTerm",
    "exact",
    "multiply",
    "substitute_at_zero",
    "classify_at_infinity",
    "classify_at_zero",
    "parse_term",
]

#: Largest denominator used when snapping float inputs to rationals.
MAX_DENOMINATOR = 10**9


def exact(x: Any) -> Fraction:
    """Convert ``x`` to a :class:`~fractions.Fraction`.

    Floats are snapped to the nearest rational with denominator at most
    ``MAX_DENOMINATOR``, so ``0.6`` becomes ``3/5`` and ``2/3`` (as a float)
    becomes ``Fraction(2, 3)``. The snapping map is monotone.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    xf = float(x)
    if not math.isfinite(xf):
        raise ValueError(f"exponent must be finite, got {x!r}")
    if xf == int(xf):
        return Fraction(int(xf))
    return Fraction(xf).limit_denominator(MAX_DENOMINATOR)


class Status(str, enum.Enum):
    CONVERGES = "Converges"
    DIVERGES = "Diverges"


@dataclass(frozen=True)
class DivergenceRate:
    """Growth class of the partial integrals of a divergent integrand.

    ``kind == "power"``: partial integrals grow like ``T**exponent``.
    ``kind == "log"``: they grow like ``log(T)**exponent``; an exponent of
    zero stands for the iterated-log growth ``log(log(T))``.
    """

    kind: str
    exponent: float

    def __post_init__(self):
        if self.kind not in ("power", "log"):
            raise ValueError(f"unknown divergence kind {self.kind!r}")

    def __str__(self) -> str:
        if self.kind == "power":
            return f"PowerDivergence({self.exponent:g})"
        return "LogDivergence"


@dataclass(frozen=True)
class ConvergenceVerdict:
    """Outcome of a convergence test.

    ``factor`` names an opaque positive constant (``c_n``, a polar volume,
    bounds on ``h``...) that multiplies ``value`` and is never evaluated.
    """

    status: Status
    value: float | None = None
    rate: DivergenceRate | None = None
    factor: str = ""
    provenance: str = "symbolic"
    details: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "status", Status(self.status))
        if self.status is Status.CONVERGES:
            if self.value is None or not math.isfinite(self.value):
                raise ValueError("a convergent verdict needs a finite value")
        elif self.rate is None:
            raise ValueError("a divergent verdict needs a rate")

    @property
    def converges(self) -> bool:
        return self.status is Status.CONVERGES

    def to_dict(self) -> dict:
        out = {
            "verdict": self.status.value,
            "value": self.value,
            "rate": None if self.rate is None else str(self.rate),
            "factor": self.factor or None,
            "provenance": self.provenance,
        }
        out.update(self.details)
        return out


def _join_symbols(s1: str, s2: str) -> str:
    return "·".join(s for s in (s1, s2) if s)


@dataclass(frozen=True)
class LogPowerTerm:
    """The integrand ``coeff * symbol * t**a * log(t)**b``.

    ``symbol`` is an optional opaque positive constant carried along
    verbatim; it never enters a verdict.
    """

    coeff: float
    a: Fraction
    b: Fraction = Fraction(0)
    symbol: str = ""

    def __post_init__(self):
        coeff = float(self.coeff)
        if not (coeff > 0 and math.isfinite(coeff)):
            raise ValueError(f"coeff must be positive and finite, got {self.coeff!r}")
        object.__setattr__(self, "coeff", coeff)
        object.__setattr__(self, "a", exact(self.a))
        object.__setattr__(self, "b", exact(self.b))

    def __call__(self, t):
        """Evaluate at ``t > 1`` (variable of the ``+inf`` form)."""
        return self.coeff * t ** float(self.a) * math.log(t) ** float(self.b)

    def at_zero(self, r):
        """Evaluate ``coeff * r**a * (-log r)**b`` for ``0 < r < 1``."""
        return self.coeff * r ** float(self.a) * (-math.log(r)) ** float(self.b)

    def __mul__(self, other: LogPowerTerm) -> LogPowerTerm:
        return multiply(self, other)


def multiply(t1: LogPowerTerm, t2: LogPowerTerm) -> LogPowerTerm:
    """Product of two terms: coefficients multiply, exponents add."""
    return LogPowerTerm(
        t1.coeff * t2.coeff, t1.a + t2.a, t1.b + t2.b, _join_symbols(t1.symbol, t2.symbol)
    )


def substitute_at_zero(term: LogPowerTerm) -> LogPowerTerm:
    """Map ``r**a (-log r)**b dr`` on ``(0, u]`` to the ``+inf`` form.

    With ``t = 1/r`` one has ``-log r = log t`` and ``dr = -dt/t**2``, so the
    exponents become ``(-a - 2, b)`` on ``[1/u, inf)``.
    """
    return LogPowerTerm(term.coeff, -term.a - 2, term.b, term.symbol)


def _check_lower(lower: float, b: Fraction) -> float:
    lower = float(lower)
    if b == 0:
        if not lower > 0:
            raise ValueError(f"lower bound must be positive, got {lower}")
    elif not lower > 1:
        raise ValueError(f"lower bound must exceed 1 when b != 0, got {lower}")
    if not math.isfinite(lower):
        raise ValueError("lower bound must be finite")
    return lower


def classify_at_infinity(
    term: LogPowerTerm, lower: float, *, tol: float = 1e-8, panels: int = 60
) -> ConvergenceVerdict:
    """Decide convergence of ``int_lower^inf term(t) dt``.

    Converges iff ``a < -1``, or ``a == -1`` and ``b < -1``. Closed forms are
    returned for ``b == 0`` and for ``a == -1``; the remaining convergent
    cases get their value from :func:`energia.quadrature.integrate_tail`
    applied after ``u = log t``.
    """
    a, b, c = term.a, term.b, term.coeff
    lower = _check_lower(lower, b)
    if a < -1 or (a == -1 and b < -1):
        if b == 0:
            value = c * lower ** float(a + 1) / float(-a - 1)
            method = "closed-form"
        elif a == -1:
            value = c * math.log(lower) ** float(b + 1) / float(-b - 1)
            method = "closed-form"
        else:
            from .quadrature import integrate_tail

            k, bf = float(a + 1), float(b)
            value = integrate_tail(
                lambda u: c * math.exp(k * u) * u**bf,
                math.log(lower),
                tol=tol,
                budget=panels,
            )
            method = "quadrature"
        return ConvergenceVerdict(
            Status.CONVERGES,
            value=value,
            factor=term.symbol,
            details={"value_method": method},
        )
    if a > -1:
        rate = DivergenceRate("power", float(a + 1))
    else:
        rate = DivergenceRate("log", float(b + 1))
    return ConvergenceVerdict(Status.DIVERGES, rate=rate, factor=term.symbol)


def classify_at_zero(
    term: LogPowerTerm, upper: float, *, tol: float = 1e-8, panels: int = 60
) -> ConvergenceVerdict:
    """Decide convergence of ``int_0^upper coeff * r**a * (-log r)**b dr``."""
    upper = float(upper)
    if not upper > 0:
        raise ValueError(f"upper bound must be positive, got {upper}")
    if term.b != 0 and not upper < 1:
        raise ValueError(f"upper bound must be below 1 when b != 0, got {upper}")
    return classify_at_infinity(substitute_at_zero(term), 1.0 / upper, tol=tol, panels=panels)


_NUM = r"[-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?(?:/\d+)?"
_FACTOR_RES = [
    ("num", re.compile(rf"^({_NUM})$")),
    ("pow", re.compile(rf"^(?P<v>[a-z])(?:\^\(?(?P<e>{_NUM})\)?)?$")),
    ("log", re.compile(rf"^log\((?P<v>[a-z])\)(?:\^\(?(?P<e>{_NUM})\)?)?$")),
    ("neglog", re.compile(rf"^\(-log\((?P<v>[a-z])\)\)(?:\^\(?(?P<e>{_NUM})\)?)?$")),
]


def _split_product(expr: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in expr:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "*" and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return parts


def parse_term(expr: str) -> tuple[LogPowerTerm, str]:
    """Parse a product such as ``"2*t^-1*log(t)^-1.5"``.

    Returns the term and its form, ``"zero"`` when ``(-log(r))^b`` factors
    appear and ``"infinity"`` otherwise. Nested logarithms are rejected with
    :class:`UnsupportedForm`.
    """
    text = expr.replace(" ", "").replace("**", "^")
    if not text:
        raise ValueError("empty expression")
    if re.search(r"log\(\(?-?log", text):
        raise UnsupportedForm(f"iterated logarithms are not supported: {expr!r}")
    coeff, a, b, var, kinds = Fraction(1), Fraction(0), Fraction(0), None, set()
    for part in _split_product(text):
        for kind, rx in _FACTOR_RES:
            m = rx.match(part)
            if m:
                break
        else:
            raise ValueError(f"cannot parse factor {part!r} in {expr!r}")
        if kind == "num":
            coeff *= Fraction(m.group(1))
            continue
        v = m.group("v")
        if var is not None and v != var:
            raise UnsupportedForm(f"more than one variable in {expr!r}")
        var = v
        e = Fraction(m.group("e")) if m.group("e") else Fraction(1)
        if kind == "pow":
            a += e
        else:
            b += e
            kinds.add(kind)
    if kinds == {"log", "neglog"}:
        raise UnsupportedForm(f"mixed log(.) and (-log(.)) factors in {expr!r}")
    form = "zero" if "neglog" in kinds else "infinity"
    return LogPowerTerm(float(coeff), a, b), form
