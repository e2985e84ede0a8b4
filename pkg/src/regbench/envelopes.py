"""Lower semicontinuous envelope of the distance to a multifunction's images.

phi_F(x, y) = liminf_{u -> x} d(y, F(u)).  For piecewise-affine data the
liminf is computed exactly: along every piece adjacent to x the distance
function is continuous up to the boundary, so the limit is the affine
substitution at x; the liminf is the minimum over the "at/left/right"
approach classes.  Per-radius infima are also exact (distance to an affine
interval is a max of affine forms, minimized at portion endpoints or form
crossings), which makes the recorded trace truly nondecreasing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

from .affine import Affine, crossing
from .intervals import dist_point_to_set
from .multifunctions import PiecewiseMultifunction
from .sampling import GridSpec, RadiusSchedule
from .scalars import INF, Backend, RATIONAL, Scalar, is_finite


@dataclass(frozen=True)
class EnvelopeValue:
    """Envelope value with its per-radius convergence trace.

    ``trace`` pairs each schedule radius with the exact infimum of
    d(y, F(u)) over the ball of that radius; the final entry (radius 0)
    is the exact limit in rational mode.
    """

    value: Scalar
    trace: Tuple[Tuple[Scalar, Scalar], ...]
    converged: bool
    backend: str = "rational"


def _dist_forms_at(rule, y: Scalar) -> List[Affine]:
    """Affine forms g_i(u) with d(y, [lo(u), hi(u)]) = max(0, g_1, g_2)."""
    forms = [Affine(0, 0)]
    if rule.lo is not None:
        forms.append(Affine(rule.lo.a, rule.lo.b - y))  # lo(u) - y
    if rule.hi is not None:
        forms.append(Affine(-rule.hi.a, y - rule.hi.b))  # y - hi(u)
    return forms


def _rule_dist(rule, y: Scalar, u: Scalar) -> Scalar:
    return max(form(u) for form in _dist_forms_at(rule, y))


def inf_dist_over_ball(
    f: PiecewiseMultifunction, x: Scalar, y: Scalar, r: Scalar
) -> Scalar:
    """Exact inf of d(y, F(u)) over u in [x-r, x+r] (within the domain)."""
    best = INF
    for piece, a, b in f._portions(x - r, x + r):
        for rule in piece.images:
            forms = _dist_forms_at(rule, y)
            cands = [a, b]
            for i in range(len(forms)):
                for j in range(i + 1, len(forms)):
                    c = crossing(forms[i], forms[j])
                    if c is not None and a <= c <= b:
                        cands.append(c)
            for u in cands:
                v = max(form(u) for form in forms)
                if v < best:
                    best = v
    return best


def exact_liminf(f: PiecewiseMultifunction, x: Scalar, y: Scalar) -> Scalar:
    """liminf_{u -> x} d(y, F(u)), exact for piecewise-affine data."""
    best = dist_point_to_set(y, f.limit_image(x, "at"))
    for side in ("left", "right"):
        best = min(best, dist_point_to_set(y, f.limit_image(x, side)))
    return best


def lsc_envelope(
    f: PiecewiseMultifunction,
    x: Scalar,
    y: Scalar,
    sched: Optional[RadiusSchedule] = None,
    grid: Optional[GridSpec] = None,
    backend: Backend = RATIONAL,
) -> EnvelopeValue:
    """phi_F(x, y) with a recorded shrinking-radius trace."""
    sched = sched or RadiusSchedule.default(backend)
    del grid  # per-radius infima are exact; no grid needed on affine data
    trace = []
    for r in sched.radii():
        trace.append((r, inf_dist_over_ball(f, x, y, r)))
    limit = exact_liminf(f, x, y)
    trace.append((backend.scalar(0), limit))
    converged = True
    if not backend.exact and len(trace) >= 2:
        converged = backend.eq(trace[-1][1], trace[-2][1])
    return EnvelopeValue(limit, tuple(trace), converged, backend.name)


# ---------------------------------------------------------------------------
# exact local profile of u |-> d(y, F(u)) around a point (for slopes)


@dataclass(frozen=True)
class SideProfile:
    """One-sided behaviour at x: limit value and derivative of the distance."""

    limit: Scalar
    deriv: Scalar


def _next_breakpoint(f: PiecewiseMultifunction, x: Scalar, y: Scalar, side: str) -> Scalar:
    """Distance from x to the nearest structural change on ``side``."""
    gap = None
    for piece in f.pieces:
        for bp in (piece.dom.lo, piece.dom.hi):
            if not is_finite(bp):
                continue
            d = (bp - x) if side == "right" else (x - bp)
            if d > 0 and (gap is None or d < gap):
                gap = d
        for rule in piece.images:
            forms = _dist_forms_at(rule, y)
            for i in range(len(forms)):
                for j in range(i + 1, len(forms)):
                    c = crossing(forms[i], forms[j])
                    if c is None:
                        continue
                    d = (c - x) if side == "right" else (x - c)
                    if d > 0 and (gap is None or d < gap):
                        gap = d
    if gap is None:
        gap = _one_like(x)
    return gap


def _one_like(sample: Scalar) -> Scalar:
    return sample - sample + 1  # 1 in the arithmetic type of ``sample``


def side_profile(
    f: PiecewiseMultifunction, x: Scalar, y: Scalar, side: str
) -> Optional[SideProfile]:
    """Exact limit and derivative of u |-> d(y, F(u)) as u -> x from ``side``.

    Returns None when the domain does not approach x from that side.  The
    distance function is affine on a one-sided segment (x, x + delta); the
    segment is located via breakpoints and decoded from two exact samples.
    """
    approaches = any(
        p.dom.approaches_from_left(x) if side == "left" else p.dom.approaches_from_right(x)
        for p in f.pieces
    )
    if not approaches:
        return None
    delta = _next_breakpoint(f, x, y, side)
    sgn = 1 if side == "right" else -1
    u1 = x + sgn * delta / 3
    u2 = x + sgn * delta * 2 / 3
    d1 = dist_point_to_set(y, f.image(u1))
    d2 = dist_point_to_set(y, f.image(u2))
    if d1 == INF or d2 == INF:
        return SideProfile(INF, 0)
    slope = (d2 - d1) / (u2 - u1)
    limit = d1 - slope * (u1 - x)
    return SideProfile(limit, slope)


def envelope_slope_1d(f: PiecewiseMultifunction, x: Scalar, y: Scalar) -> Scalar:
    """Exact strong slope of u |-> phi_F(u, y) at x (piecewise-affine data).

    +inf when a one-sided limit drops below the value at x; otherwise the
    best descent rate max(0, left derivative, -right derivative).
    """
    value = exact_liminf(f, x, y)
    if value == INF:
        return INF
    rates = [value - value]  # exact zero
    for side in ("left", "right"):
        prof = side_profile(f, x, y, side)
        if prof is None:
            continue
        if prof.limit < value:
            return INF
        if prof.limit == value:
            rates.append(prof.deriv if side == "left" else -prof.deriv)
    return max(rates)
