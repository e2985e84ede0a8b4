"""Strong slopes and error-bound constants of parametric inequality systems."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

from .envelopes import envelope_slope_1d, exact_liminf
from .functions import ParametricFunction, PiecewiseFunction
from .intervals import dist_point_to_set
from .multifunctions import ParametricMultifunction
from .sampling import GridSpec, RadiusSchedule, ball_samples
from .scalars import INF, Backend, RATIONAL, Scalar, is_finite


class EmptySolutionSet(RuntimeError):
    """S(p) is empty for a sampled parameter near the center."""


@dataclass(frozen=True)
class SlopeEstimate:
    """Estimated strong slope with witness and per-radius sup trace."""

    value: Scalar
    witness: Optional[Scalar]
    trace: Tuple[Tuple[Scalar, Scalar], ...]
    exact: bool
    backend: str


def strong_slope(
    f: PiecewiseFunction,
    x: Scalar,
    sched: Optional[RadiusSchedule] = None,
    grid: Optional[GridSpec] = None,
    backend: Backend = RATIONAL,
) -> SlopeEstimate:
    """|grad f|(x): 0 at a local minimum, else limsup of descent ratios.

    The sampled trace records per-radius suprema; for piecewise data the
    exact value comes from one-sided limits and derivatives at x.
    """
    sched = sched or RadiusSchedule.default(backend)
    grid = grid or GridSpec()
    fx = f(x)
    if fx == INF:
        return SlopeEstimate(INF, None, (), True, backend.name)
    breakpoints = [d.lo for d, _ in f.pieces if is_finite(d.lo)] + [
        d.hi for d, _ in f.pieces if is_finite(d.hi)
    ]
    trace = []
    best_witness = None
    for r in sched.radii():
        sup = fx - fx  # exact zero
        for u in ball_samples(x, r, grid, breakpoints):
            if u == x:
                continue
            fu = f(u)
            if fu == INF:
                continue
            ratio = (fx - fu) / abs(u - x)
            if ratio > sup:
                sup = ratio
                best_witness = u
        trace.append((r, sup))
    exact_value = _exact_slope(f, x, fx)
    if exact_value is not None:
        return SlopeEstimate(exact_value, best_witness, tuple(trace), True, backend.name)
    return SlopeEstimate(trace[-1][1], best_witness, tuple(trace), False, backend.name)


def _exact_slope(f: PiecewiseFunction, x: Scalar, fx: Scalar) -> Optional[Scalar]:
    rates = [fx - fx]
    for side in ("left", "right"):
        pair = f.side(x, side)
        if pair is None:
            continue
        limit, deriv = pair
        if limit < fx:
            return INF
        if limit == fx:
            rates.append(deriv if side == "left" else -deriv)
    return max(rates)


def sampled_slope(
    value_at: Callable[..., Scalar],
    center: Tuple[Scalar, ...],
    metric: Callable[[Tuple[Scalar, ...], Tuple[Scalar, ...]], Scalar],
    samples_for_radius: Callable[[Scalar], Sequence[Tuple[Scalar, ...]]],
    sched: RadiusSchedule,
    backend: Backend = RATIONAL,
) -> SlopeEstimate:
    """Grid limsup of (f(center) - f(q)) / d(center, q) for callables on
    product spaces; a lower estimate of the true strong slope."""
    f0 = value_at(center)
    if f0 == INF:
        return SlopeEstimate(INF, None, (), False, backend.name)
    trace = []
    witness = None
    for r in sched.radii():
        sup = f0 - f0
        for q in samples_for_radius(r):
            if q == center:
                continue
            fq = value_at(q)
            if fq == INF:
                continue
            d = metric(center, q)
            if d == 0:
                continue
            ratio = (f0 - fq) / d
            if ratio > sup:
                sup = ratio
                witness = q
        trace.append((r, sup))
    return SlopeEstimate(trace[-1][1], witness, tuple(trace), False, backend.name)


# ---------------------------------------------------------------------------
# error bounds for parametric inequality systems f(x, p) <= 0


@dataclass(frozen=True)
class ErrorBoundReport:
    constant: Scalar
    witnesses: Tuple[Tuple[Scalar, Scalar], ...]
    radius: Scalar
    trace: Tuple[Tuple[Scalar, Scalar], ...]
    backend: str


def error_bound_constant(
    f: ParametricFunction,
    center: Tuple[Scalar, Scalar],
    sched: Optional[RadiusSchedule] = None,
    grid: Optional[GridSpec] = None,
    backend: Backend = RATIONAL,
    p_side: str = "both",
) -> ErrorBoundReport:
    """Smallest observed c with d(x, S(p)) <= c [f(x, p)]_+ near the center.

    S(p) = {x : f(x, p) <= 0} is exact for the affine family; the ratio is
    skipped where [f]_+ = 0 (the bound is vacuous there).  ``p_side`` can
    restrict the parameter samples to one side of the center.
    """
    sched = sched or RadiusSchedule.default(backend)
    grid = grid or GridSpec()
    xbar, pbar = center
    if not f(xbar, pbar) <= 0:
        raise ValueError("center must satisfy f(xbar, pbar) <= 0")
    trace = []
    witnesses: List[Tuple[Scalar, Scalar]] = []
    for r in sched.radii():
        pts_p = ball_samples(pbar, r, grid)
        if p_side == "nonneg":
            pts_p = [p for p in pts_p if p >= pbar]
        sup = None
        arg = None
        for p in pts_p:
            fp = f.at_p(p)
            solset = fp.sublevel_set()
            if solset.is_empty():
                raise EmptySolutionSet(f"S(p) empty at p={p}")
            bps = [d.lo for d, _ in fp.pieces if is_finite(d.lo)] + [
                d.hi for d, _ in fp.pieces if is_finite(d.hi)
            ] + solset.endpoints()
            for x in ball_samples(xbar, r, grid, bps):
                violation = fp(x)
                if violation == INF or not violation > 0:
                    continue
                ratio = dist_point_to_set(x, solset) / violation
                if sup is None or ratio > sup:
                    sup, arg = ratio, (x, p)
        if sup is None:
            sup = 0
        trace.append((r, sup))
        if arg is not None:
            witnesses.append(arg)
    constant = max((v for _, v in trace), default=0)
    final_witnesses = tuple(dict.fromkeys(witnesses[-1:]))
    return ErrorBoundReport(constant, final_witnesses, sched.radii()[-1], tuple(trace), backend.name)


# ---------------------------------------------------------------------------
# slope criterion for metric regularity of a parametric family


@dataclass(frozen=True)
class ProbeVerdict:
    verdict: str  # "holds" | "violated" | "inconclusive-pass" | "inconclusive"
    witness: Optional[tuple] = None
    detail: str = ""
    backend: str = "rational"


def slope_criterion_probe(
    family: ParametricMultifunction,
    center: Tuple[Scalar, Scalar, Scalar],
    tau: Scalar,
    gamma: Scalar,
    sched: Optional[RadiusSchedule] = None,
    grid: Optional[GridSpec] = None,
    backend: Backend = RATIONAL,
) -> ProbeVerdict:
    """Check |grad phi_p(., y)|(x) >= 1/tau wherever phi_p(x, y) in (0, gamma).

    phi_p is the lsc envelope of d(y, F(u, p)); the slope at each sampled
    point is exact for piecewise-affine data, so "violated" comes with a
    certified witness.  gamma caps the envelope value (the same cap as the
    slope form of the criterion).
    """
    xbar, ybar, pbar = center
    sched = sched or RadiusSchedule.default(backend)
    grid = grid or GridSpec()
    threshold = 1 / tau if tau != 0 else INF
    checked = 0
    for r in sched.radii():
        for p in ball_samples(pbar, r, grid):
            fp = family.at_p(p)
            bps = fp.breakpoints()
            for x in ball_samples(xbar, r, grid, bps):
                if not fp.domain.contains(x):
                    continue
                img = fp.image(x)
                y_cands = set(ball_samples(ybar, r, grid, img.endpoints()))
                for y in sorted(y_cands):
                    phi = exact_liminf(fp, x, y)
                    if not (0 < phi < gamma):
                        continue
                    checked += 1
                    slope = envelope_slope_1d(fp, x, y)
                    if backend.lt(slope, threshold):
                        return ProbeVerdict(
                            "violated",
                            (x, y, p, slope),
                            f"slope {slope} < 1/tau {threshold}",
                            backend.name,
                        )
    if checked == 0:
        return ProbeVerdict("inconclusive", None, "no sampled point had phi in (0, gamma)", backend.name)
    if backend.exact:
        return ProbeVerdict("holds", None, f"{checked} sampled points verified exactly", backend.name)
    return ProbeVerdict("inconclusive-pass", None, f"{checked} sampled points passed", backend.name)
