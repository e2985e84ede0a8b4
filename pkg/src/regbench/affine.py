"""Affine forms in one and two variables with exact crossing solvers."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .scalars import Scalar, fmt_scalar


@dataclass(frozen=True)
class Affine:
    """a * x + b.  Integer coefficients are promoted to Fraction so that
    division never silently produces floats in exact mode."""

    a: Scalar
    b: Scalar

    def __post_init__(self):
        if isinstance(self.a, int):
            object.__setattr__(self, "a", Fraction(self.a))
        if isinstance(self.b, int):
            object.__setattr__(self, "b", Fraction(self.b))

    def __call__(self, x: Scalar) -> Scalar:
        return self.a * x + self.b

    def shift(self, c: Scalar) -> "Affine":
        return Affine(self.a, self.b + c)

    def add(self, other: "Affine") -> "Affine":
        return Affine(self.a + other.a, self.b + other.b)

    def neg(self) -> "Affine":
        return Affine(-self.a, -self.b)

    def is_constant(self) -> bool:
        return self.a == 0

    def __str__(self) -> str:
        return f"{fmt_scalar(self.a)}*x + {fmt_scalar(self.b)}"


def crossing(f: Affine, g: Affine) -> Optional[Scalar]:
    """x with f(x) == g(x), or None for parallel forms."""
    if f.a == g.a:
        return None
    return (g.b - f.b) / (f.a - g.a)


def root(f: Affine) -> Optional[Scalar]:
    return crossing(f, Affine(0, 0))


@dataclass(frozen=True)
class Affine2:
    """ax * x + ap * p + b  (parametric image endpoint)."""

    ax: Scalar
    ap: Scalar
    b: Scalar

    def __post_init__(self):
        for name in ("ax", "ap", "b"):
            v = getattr(self, name)
            if isinstance(v, int):
                object.__setattr__(self, name, Fraction(v))

    def at_p(self, p: Scalar) -> Affine:
        return Affine(self.ax, self.ap * p + self.b)

    def __call__(self, x: Scalar, p: Scalar) -> Scalar:
        return self.ax * x + self.ap * p + self.b
