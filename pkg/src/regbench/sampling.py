"""Neighborhood schedules and sample grids.

The "around" and "liminf/limsup" quantifiers are realized by a shrinking
dyadic radius schedule; every sample set includes ball endpoints and all
piece-boundary points inside the ball, so piecewise-affine extrema are never
missed by grid spacing alone.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence

from .scalars import Backend, RATIONAL, Scalar, is_finite


@dataclass(frozen=True)
class RadiusSchedule:
    """Radii r0 * shrink^k for k = 0..depth-1, strictly decreasing."""

    r0: Scalar = 1
    shrink: Scalar = Fraction(1, 2)
    depth: int = 8

    def __post_init__(self):
        if isinstance(self.r0, int):
            object.__setattr__(self, "r0", Fraction(self.r0))
        if not (self.r0 > 0 and 0 < self.shrink < 1 and self.depth >= 1):
            raise ValueError("need r0 > 0, shrink in (0,1), depth >= 1")

    def radii(self) -> List[Scalar]:
        out = []
        r = self.r0
        for _ in range(self.depth):
            out.append(r)
            r = r * self.shrink
        return out

    @staticmethod
    def default(backend: Backend) -> "RadiusSchedule":
        if backend.exact:
            return RadiusSchedule(Fraction(1), Fraction(1, 2), 8)
        return RadiusSchedule(1.0, 0.5, 20)


@dataclass(frozen=True)
class GridSpec:
    """Per-axis sample counts (>= 3) and sampling mode."""

    n: int = 7
    mode: str = "uniform"  # "uniform" | "dyadic"

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("sample count must be >= 3 per axis")
        if self.mode not in ("uniform", "dyadic"):
            raise ValueError(f"unknown sampling mode {self.mode!r}")

    def axis(self, center: Scalar, radius: Scalar) -> List[Scalar]:
        """Samples of [center - radius, center + radius], endpoints included."""
        if isinstance(center, int):
            center = Fraction(center)
        if isinstance(radius, int):
            radius = Fraction(radius)
        if self.mode == "uniform":
            step = 2 * radius / (self.n - 1)
            return [center - radius + k * step for k in range(self.n)]
        pts = [center]
        r = radius
        for _ in range(self.n - 1):
            pts.append(center - r)
            pts.append(center + r)
            r = r / 2
        return sorted(set(pts))


def ball_samples(
    center: Scalar,
    radius: Scalar,
    grid: GridSpec,
    breakpoints: Iterable[Scalar] = (),
    extra: Iterable[Scalar] = (),
) -> List[Scalar]:
    """Deterministic sorted samples of [center-r, center+r] with enrichment."""
    if isinstance(center, int):
        center = Fraction(center)
    if isinstance(radius, int):
        radius = Fraction(radius)
    lo, hi = center - radius, center + radius
    pts = set(grid.axis(center, radius))
    for b in breakpoints:
        if is_finite(b) and lo <= b <= hi:
            pts.add(b)
    for e in extra:
        if is_finite(e) and lo <= e <= hi:
            pts.add(e)
    return sorted(pts)


def clip_to_ball(values: Iterable[Scalar], center: Scalar, radius: Scalar) -> List[Scalar]:
    lo, hi = center - radius, center + radius
    return sorted(v for v in set(values) if is_finite(v) and lo <= v <= hi)
