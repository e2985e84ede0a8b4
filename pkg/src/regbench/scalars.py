"""Scalar arithmetic shared by both computation backends.

Finite values are `fractions.Fraction` in the rational backend and `float`
in the floating backend; the infinities are always the float ``inf``/``-inf``
(comparisons between Fraction and float infinities are exact, and no finite
float ever mixes into rational-mode arithmetic).
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

Scalar = Union[Fraction, int, float]

INF = math.inf
NINF = -math.inf


class MalformedInterval(ValueError):
    """Interval endpoints out of order or infinite on the wrong side."""


class IndeterminateForm(ArithmeticError):
    """An operation would produce (+inf) + (-inf) or 0 * inf."""


def is_inf(v: Scalar) -> bool:
    return v == INF or v == NINF


def is_finite(v: Scalar) -> bool:
    return not is_inf(v)


def xadd(a: Scalar, b: Scalar) -> Scalar:
    """Extended-real addition; raises on inf - inf."""
    if is_inf(a) or is_inf(b):
        if (a == INF and b == NINF) or (a == NINF and b == INF):
            raise IndeterminateForm("(+inf) + (-inf)")
        return INF if (a == INF or b == INF) else NINF
    return a + b


def xneg(a: Scalar) -> Scalar:
    if a == INF:
        return NINF
    if a == NINF:
        return INF
    return -a


def xsub(a: Scalar, b: Scalar) -> Scalar:
    return xadd(a, xneg(b))


def xmul(a: Scalar, b: Scalar) -> Scalar:
    """Extended-real multiplication; 0 * inf is indeterminate."""
    if is_inf(a) or is_inf(b):
        if a == 0 or b == 0:
            raise IndeterminateForm("0 * inf")
        return INF if (a > 0) == (b > 0) else NINF
    return a * b


def xabs(a: Scalar) -> Scalar:
    return abs(a) if is_finite(a) else INF


def xmin(*vals: Scalar) -> Scalar:
    return min(vals)


def xmax(*vals: Scalar) -> Scalar:
    return max(vals)


def parse_scalar(text: str, *, as_float: bool = False) -> Scalar:
    """Parse ``"a/b"``, integer, decimal, or ``"inf"``/``"-inf"`` literals."""
    s = text.strip()
    if s in ("inf", "+inf"):
        return INF
    if s == "-inf":
        return NINF
    value = Fraction(s)
    return float(value) if as_float else value


def fmt_scalar(v: Scalar) -> str:
    """Canonical text form: rationals as ``a/b`` (or ``a``), floats via repr."""
    if v == INF:
        return "inf"
    if v == NINF:
        return "-inf"
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(v, int):
        return str(v)
    return repr(v)


class Backend:
    """Arithmetic backend: exact rational or floating with absolute tolerance.

    Every verdict produced by the workbench records which backend computed it.
    """

    def __init__(self, name: str, tol: Scalar):
        self.name = name
        self.tol = tol

    @property
    def exact(self) -> bool:
        return self.tol == 0

    def scalar(self, v: Union[Scalar, str]) -> Scalar:
        if isinstance(v, str):
            return parse_scalar(v, as_float=not self.exact)
        if is_inf(v):
            return INF if v > 0 else NINF
        if self.exact:
            if isinstance(v, float):
                if v != int(v):
                    raise ValueError(f"non-integral float {v!r} in rational mode")
                return Fraction(int(v))
            return Fraction(v)
        return float(v)

    def eq(self, a: Scalar, b: Scalar) -> bool:
        if is_inf(a) or is_inf(b):
            return a == b
        return abs(a - b) <= self.tol

    def le(self, a: Scalar, b: Scalar) -> bool:
        if is_inf(a) or is_inf(b):
            return a <= b
        return a <= b + self.tol

    def lt(self, a: Scalar, b: Scalar) -> bool:
        return a < b and not self.eq(a, b)

    def is_zero(self, a: Scalar) -> bool:
        return self.eq(a, 0)

    def __repr__(self) -> str:
        return f"Backend({self.name!r})"


RATIONAL = Backend("rational", Fraction(0))
FLOAT = Backend("float", 1e-9)

BACKENDS = {"rational": RATIONAL, "float": FLOAT}


def get_backend(name: str) -> Backend:
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown backend {name!r}; expected one of {sorted(BACKENDS)}")
