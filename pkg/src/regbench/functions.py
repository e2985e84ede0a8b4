"""Piecewise scalar test functions: affine pieces, max/min of affine,
absolute value, and quadratics, with exact values, one-sided derivatives,
and (for the affine family) exact sublevel sets.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

from .affine import Affine, Affine2
from .intervals import Interval, IntervalSet
from .multifunctions import Dom
from .scalars import INF, NINF, Scalar


class NotPiecewiseAffine(TypeError):
    """Operation requires an affine-family expression (no quadratics)."""


@dataclass(frozen=True)
class Quad:
    """a2 * x**2 + a1 * x + a0."""

    a2: Scalar
    a1: Scalar
    a0: Scalar

    def __post_init__(self):
        for name in ("a2", "a1", "a0"):
            v = getattr(self, name)
            if isinstance(v, int):
                object.__setattr__(self, name, Fraction(v))


@dataclass(frozen=True)
class Abs:
    arg: "Expr"


@dataclass(frozen=True)
class MaxOf:
    args: Tuple["Expr", ...]


@dataclass(frozen=True)
class MinOf:
    args: Tuple["Expr", ...]


Expr = Union[Affine, Quad, Abs, MaxOf, MinOf]


def evaluate(e: Expr, x: Scalar) -> Scalar:
    if isinstance(e, Affine):
        return e(x)
    if isinstance(e, Quad):
        return e.a2 * x * x + e.a1 * x + e.a0
    if isinstance(e, Abs):
        return abs(evaluate(e.arg, x))
    if isinstance(e, MaxOf):
        return max(evaluate(a, x) for a in e.args)
    if isinstance(e, MinOf):
        return min(evaluate(a, x) for a in e.args)
    raise TypeError(f"unknown expression node {e!r}")


def one_sided(e: Expr, x: Scalar, side: str) -> Tuple[Scalar, Scalar]:
    """(limit, derivative) of e at x from ``side`` ("left" | "right")."""
    if isinstance(e, Affine):
        return e(x), e.a
    if isinstance(e, Quad):
        return evaluate(e, x), 2 * e.a2 * x + e.a1
    if isinstance(e, Abs):
        v, d = one_sided(e.arg, x, side)
        if v > 0:
            return v, d
        if v < 0:
            return -v, -d
        mag = abs(d)
        return v - v, mag if side == "right" else -mag
    if isinstance(e, (MaxOf, MinOf)):
        pairs = [one_sided(a, x, side) for a in e.args]
        take_max = isinstance(e, MaxOf)
        best = max(p[0] for p in pairs) if take_max else min(p[0] for p in pairs)
        ties = [d for v, d in pairs if v == best]
        if take_max:
            d = max(ties) if side == "right" else min(ties)
        else:
            d = min(ties) if side == "right" else max(ties)
        return best, d
    raise TypeError(f"unknown expression node {e!r}")


def negate(e: Expr) -> Expr:
    if isinstance(e, Affine):
        return e.neg()
    if isinstance(e, Quad):
        return Quad(-e.a2, -e.a1, -e.a0)
    if isinstance(e, Abs):
        raise NotPiecewiseAffine("negated absolute value has no sublevel form")
    if isinstance(e, MaxOf):
        return MinOf(tuple(negate(a) for a in e.args))
    if isinstance(e, MinOf):
        return MaxOf(tuple(negate(a) for a in e.args))
    raise TypeError(f"unknown expression node {e!r}")


def sublevel(e: Expr) -> IntervalSet:
    """{x : e(x) <= 0}, exact for the affine family."""
    if isinstance(e, Affine):
        if e.a == 0:
            return IntervalSet.whole_line() if e.b <= 0 else IntervalSet.empty()
        r = -e.b / e.a
        if e.a > 0:
            return IntervalSet.from_pairs([[NINF, r]])
        return IntervalSet.from_pairs([[r, INF]])
    if isinstance(e, Quad):
        raise NotPiecewiseAffine("quadratic sublevel sets are out of scope")
    if isinstance(e, Abs):
        return intersect(sublevel(e.arg), sublevel(negate(e.arg)))
    if isinstance(e, MaxOf):
        out = IntervalSet.whole_line()
        for a in e.args:
            out = intersect(out, sublevel(a))
        return out
    if isinstance(e, MinOf):
        out = IntervalSet.empty()
        for a in e.args:
            out = out.union(sublevel(a))
        return out
    raise TypeError(f"unknown expression node {e!r}")


def intersect(a: IntervalSet, b: IntervalSet) -> IntervalSet:
    out = []
    for ia in a.intervals:
        for ib in b.intervals:
            lo, hi = max(ia.lo, ib.lo), min(ia.hi, ib.hi)
            if lo <= hi:
                out.append(Interval(lo, hi))
    return IntervalSet(out)


class PiecewiseFunction:
    """Single-valued function given by expression pieces over domain cells."""

    def __init__(self, pieces: Sequence[Tuple[Dom, Expr]], name: str = ""):
        self.pieces = tuple(pieces)
        self.name = name

    def __call__(self, x: Scalar) -> Scalar:
        for dom, expr in self.pieces:
            if dom.contains(x):
                return evaluate(expr, x)
        return INF  # outside Dom f

    def side(self, x: Scalar, side: str) -> Optional[Tuple[Scalar, Scalar]]:
        """One-sided (limit, derivative) at x, None when nothing approaches."""
        for dom, expr in self.pieces:
            hit = dom.approaches_from_left(x) if side == "left" else dom.approaches_from_right(x)
            if hit:
                return one_sided(expr, x, side)
        return None

    def sublevel_set(self) -> IntervalSet:
        """{x : f(x) <= 0} (closure of each piece contribution)."""
        out = IntervalSet.empty()
        for dom, expr in self.pieces:
            part = intersect(
                sublevel(expr), IntervalSet.from_pairs([[dom.lo, dom.hi]])
            )
            kept = []
            for iv in part.intervals:
                if iv.lo == iv.hi and not dom.contains(iv.lo):
                    continue
                kept.append(iv)
            out = out.union(IntervalSet(kept))
        return out

    @staticmethod
    def from_expr(expr: Expr, name: str = "") -> "PiecewiseFunction":
        return PiecewiseFunction([(Dom(NINF, INF, False, False), expr)], name)

    def __str__(self) -> str:
        return self.name or f"PiecewiseFunction({len(self.pieces)} pieces)"


PExpr = Union[Affine2, "PAbs", "PMaxOf", "PMinOf"]


@dataclass(frozen=True)
class PAbs:
    arg: "PExpr"


@dataclass(frozen=True)
class PMaxOf:
    args: Tuple["PExpr", ...]


@dataclass(frozen=True)
class PMinOf:
    args: Tuple["PExpr", ...]


def substitute_p(e: PExpr, p: Scalar) -> Expr:
    if isinstance(e, Affine2):
        return e.at_p(p)
    if isinstance(e, PAbs):
        return Abs(substitute_p(e.arg, p))
    if isinstance(e, PMaxOf):
        return MaxOf(tuple(substitute_p(a, p) for a in e.args))
    if isinstance(e, PMinOf):
        return MinOf(tuple(substitute_p(a, p) for a in e.args))
    raise TypeError(f"unknown parametric node {e!r}")


class ParametricFunction:
    """f(x, p) with pieces affine in (x, p); p-independent x-partition."""

    def __init__(self, pieces: Sequence[Tuple[Dom, PExpr]], name: str = ""):
        self.pieces = tuple(pieces)
        self.name = name

    def at_p(self, p: Scalar) -> PiecewiseFunction:
        return PiecewiseFunction(
            [(dom, substitute_p(expr, p)) for dom, expr in self.pieces],
            name=f"{self.name}@p" if self.name else "",
        )

    def __call__(self, x: Scalar, p: Scalar) -> Scalar:
        return self.at_p(p)(x)

    @staticmethod
    def from_expr(expr: PExpr, name: str = "") -> "ParametricFunction":
        return ParametricFunction([(Dom(NINF, INF, False, False), expr)], name)
