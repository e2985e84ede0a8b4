"""Exact finite unions of closed intervals on the extended real line.

An ``IntervalSet`` is the value of a multifunction at a point: a normalized,
sorted, pairwise-disjoint tuple of closed intervals, possibly empty, with
first-class unbounded endpoints.  Isolated points are degenerate intervals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Tuple

from .scalars import (
    INF,
    NINF,
    MalformedInterval,
    Scalar,
    fmt_scalar,
    is_finite,
    xadd,
    xneg,
)


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi]; lo may be -inf, hi may be +inf."""

    lo: Scalar
    hi: Scalar

    def __post_init__(self):
        if isinstance(self.lo, int):
            object.__setattr__(self, "lo", Fraction(self.lo))
        if isinstance(self.hi, int):
            object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo == INF or self.hi == NINF:
            raise MalformedInterval(f"infinite endpoint on wrong side: [{self.lo}, {self.hi}]")
        if not self.lo <= self.hi:
            raise MalformedInterval(f"inverted endpoints: [{self.lo}, {self.hi}]")

    def contains(self, y: Scalar) -> bool:
        return self.lo <= y <= self.hi

    def __str__(self) -> str:
        return f"[{fmt_scalar(self.lo)}, {fmt_scalar(self.hi)}]"


class IntervalSet:
    """Normalized union of closed intervals; supports exact set arithmetic."""

    __slots__ = ("intervals",)

    def __init__(self, intervals: Iterable[Interval] = (), *, _normalized: bool = False):
        items = tuple(intervals)
        if not _normalized:
            items = _normalize(items)
        self.intervals: Tuple[Interval, ...] = items

    @staticmethod
    def from_pairs(pairs: Sequence[Sequence[Scalar]]) -> "IntervalSet":
        return IntervalSet(Interval(lo, hi) for lo, hi in pairs)

    @staticmethod
    def point(v: Scalar) -> "IntervalSet":
        return IntervalSet((Interval(v, v),), _normalized=True)

    @staticmethod
    def empty() -> "IntervalSet":
        return IntervalSet((), _normalized=True)

    @staticmethod
    def whole_line() -> "IntervalSet":
        return IntervalSet((Interval(NINF, INF),), _normalized=True)

    def is_empty(self) -> bool:
        return not self.intervals

    def contains(self, y: Scalar) -> bool:
        return any(iv.contains(y) for iv in self.intervals)

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(self.intervals + other.intervals)

    def intersect_interval(self, lo: Scalar, hi: Scalar) -> "IntervalSet":
        out = []
        for iv in self.intervals:
            a, b = max(iv.lo, lo), min(iv.hi, hi)
            if a <= b:
                out.append(Interval(a, b))
        return IntervalSet(out, _normalized=True)

    def translate(self, t: Scalar) -> "IntervalSet":
        return IntervalSet(
            (Interval(xadd(iv.lo, t), xadd(iv.hi, t)) for iv in self.intervals),
            _normalized=True,
        )

    def scale(self, c: Scalar) -> "IntervalSet":
        if c == 0:
            return IntervalSet.point(0) if self.intervals else IntervalSet.empty()
        if c > 0:
            items = (Interval(_sc(iv.lo, c), _sc(iv.hi, c)) for iv in self.intervals)
        else:
            items = (Interval(_sc(iv.hi, c), _sc(iv.lo, c)) for iv in self.intervals)
        return IntervalSet(items)

    def subset_of(self, other: "IntervalSet") -> bool:
        for iv in self.intervals:
            if not any(o.lo <= iv.lo and iv.hi <= o.hi for o in other.intervals):
                return False
        return True

    def component_containing(self, y: Scalar):
        for iv in self.intervals:
            if iv.contains(y):
                return iv
        return None

    def endpoints(self) -> list:
        """Finite endpoints, sorted; used for exact sample enrichment."""
        pts = set()
        for iv in self.intervals:
            if is_finite(iv.lo):
                pts.add(iv.lo)
            if is_finite(iv.hi):
                pts.add(iv.hi)
        return sorted(pts)

    def __eq__(self, other) -> bool:
        return isinstance(other, IntervalSet) and self.intervals == other.intervals

    def __hash__(self):
        return hash(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def __str__(self) -> str:
        if not self.intervals:
            return "{}"
        return " u ".join(str(iv) for iv in self.intervals)

    __repr__ = __str__


def _sc(v: Scalar, c: Scalar) -> Scalar:
    if v == INF:
        return INF if c > 0 else NINF
    if v == NINF:
        return NINF if c > 0 else INF
    return v * c


def _normalize(items: Tuple[Interval, ...]) -> Tuple[Interval, ...]:
    if not items:
        return ()
    ordered = sorted(items, key=lambda iv: (iv.lo, iv.hi))
    merged = [ordered[0]]
    for iv in ordered[1:]:
        last = merged[-1]
        if iv.lo <= last.hi:  # overlapping or touching: merge
            if iv.hi > last.hi:
                merged[-1] = Interval(last.lo, iv.hi)
        else:
            merged.append(iv)
    return tuple(merged)


def normalize(raw: Sequence[Sequence[Scalar]]) -> IntervalSet:
    """Normalize raw [lo, hi] pairs to a sorted disjoint ``IntervalSet``.

    Raises ``MalformedInterval`` when any pair has lo > hi.
    """
    return IntervalSet.from_pairs(raw)


def dist_point_to_set(y: Scalar, s: IntervalSet) -> Scalar:
    """Exact infimum distance d(y, S); d(y, empty) = +inf."""
    if s.is_empty():
        return INF
    best = INF
    for iv in s.intervals:
        if iv.contains(y):
            return 0
        if is_finite(iv.lo) and y < iv.lo:
            best = min(best, iv.lo - y)
        elif is_finite(iv.hi) and y > iv.hi:
            best = min(best, y - iv.hi)
    return best


def minkowski_sum(a: IntervalSet, b: IntervalSet) -> IntervalSet:
    """{x + y : x in A, y in B}; the empty set absorbs."""
    if a.is_empty() or b.is_empty():
        return IntervalSet.empty()
    out = []
    for ia in a.intervals:
        for ib in b.intervals:
            out.append(Interval(xadd(ia.lo, ib.lo), xadd(ia.hi, ib.hi)))
    return IntervalSet(out)


def hausdorff_excess(a: IntervalSet, b: IntervalSet) -> Scalar:
    """sup_{x in A} d(x, B), exact: the sup over A of a piecewise-affine
    function is attained at A's endpoints or at B's gap midpoints inside A."""
    if a.is_empty():
        return 0
    if b.is_empty():
        return INF
    candidates = []
    for iv in a.intervals:
        if iv.lo == NINF or iv.hi == INF:
            # unbounded on a side: excess is +inf unless B covers that side
            if iv.lo == NINF and b.intervals[0].lo != NINF:
                return INF
            if iv.hi == INF and b.intervals[-1].hi != INF:
                return INF
        if is_finite(iv.lo):
            candidates.append(iv.lo)
        if is_finite(iv.hi):
            candidates.append(iv.hi)
        # midpoints of B's gaps that fall inside this component
        prev = None
        for bv in b.intervals:
            if prev is not None and is_finite(prev.hi) and is_finite(bv.lo):
                mid = (prev.hi + bv.lo) / 2
                if iv.contains(mid):
                    candidates.append(mid)
            prev = bv
    return max((dist_point_to_set(c, b) for c in candidates), default=0)


def dist_to_complement(y: Scalar, s: IntervalSet) -> Scalar:
    """d(y, R \\ S): radius of the largest open ball around y inside S."""
    comp = s.component_containing(y)
    if comp is None:
        return 0
    left = INF if comp.lo == NINF else y - comp.lo
    right = INF if comp.hi == INF else comp.hi - y
    return min(left, right)
