"""Metric-regularity, Aubin, openness, and Robinson modulus estimation.

All estimators share the same shape: per shrinking radius, an exact sup (or
inf) of a distance ratio over an enriched deterministic sample set, with a
three-valued verdict.  "irregular" requires either an infinite certified
ratio or trace growth by a factor >= 3/2 across three successive radii past
10^3, which separates true non-regularity from slow convergence.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

from .intervals import IntervalSet, dist_point_to_set, dist_to_complement, hausdorff_excess
from .multifunctions import (
    ParametricMultifunction,
    PiecewiseMultifunction,
    invert,
    sum_mf,
)
from .sampling import GridSpec, RadiusSchedule, ball_samples
from .scalars import INF, Backend, RATIONAL, Scalar, fmt_scalar

DIVERGENCE_FACTOR = Fraction(3, 2)
DIVERGENCE_LEVEL = 1000


@dataclass(frozen=True)
class Witness:
    point: tuple
    numerator: Scalar
    denominator: Scalar
    ratio: Scalar


@dataclass(frozen=True)
class ModulusReport:
    kind: str  # "metric-regularity" | "aubin" | "openness-rate" | "pl-uniform" | "robinson"
    value: Scalar
    verdict: str  # "regular" | "irregular" | "inconclusive"
    witnesses: Tuple[Witness, ...]
    trace: Tuple[Tuple[Scalar, Scalar], ...]
    backend: str

    def is_regular(self) -> bool:
        return self.verdict == "regular"


def _sup_verdict(trace: Sequence[Tuple[Scalar, Scalar]], backend: Backend) -> str:
    sups = [v for _, v in trace if v is not None]
    if not sups:
        return "inconclusive"
    if sups[-1] == INF:
        return "irregular"
    if len(sups) >= 4 and sups[-1] > DIVERGENCE_LEVEL:
        growing = all(
            sups[k + 1] >= DIVERGENCE_FACTOR * sups[k] and sups[k] > 0
            for k in range(len(sups) - 4, len(sups) - 1)
        )
        if growing:
            return "irregular"
    if len(sups) >= 2 and backend.eq(sups[-1], sups[-2]):
        return "regular"
    return "inconclusive"


def _sup_engine(
    kind: str,
    radii: Sequence[Scalar],
    samples_for_radius: Callable[[Scalar], Iterable[tuple]],
    ratio_of: Callable[[tuple], Optional[Witness]],
    backend: Backend,
) -> ModulusReport:
    trace: List[Tuple[Scalar, Scalar]] = []
    witnesses: List[Witness] = []
    for r in radii:
        sup = None
        arg = None
        for point in samples_for_radius(r):
            w = ratio_of(point)
            if w is None:
                continue
            if sup is None or w.ratio > sup:
                sup = w.ratio
                arg = w
        trace.append((r, sup))
        if arg is not None:
            witnesses.append(arg)
    verdict = _sup_verdict(trace, backend)
    sups = [v for _, v in trace if v is not None]
    value = sups[-1] if sups else INF
    return ModulusReport(kind, value, verdict, tuple(witnesses[-3:]), tuple(trace), backend.name)


def mr_modulus(
    f: PiecewiseMultifunction,
    center: Tuple[Scalar, Scalar],
    sched: Optional[RadiusSchedule] = None,
    grid: Optional[GridSpec] = None,
    backend: Backend = RATIONAL,
    probes: Optional[Callable[[Scalar], Iterable[Tuple[Scalar, Scalar]]]] = None,
) -> ModulusReport:
    """Modulus tau in d(x, F^-1(y)) <= tau d(y, F(x)) near the center.

    Points with d(y, F(x)) = 0 are skipped (the inequality is vacuous).
    ``probes`` may inject extra (x, y) pairs per radius, e.g. a known
    divergence family; the default samples are grid + structure points.
    """
    xbar, ybar = center
    if not f.image(xbar).contains(ybar):
        raise ValueError("center must lie on the graph")
    sched = sched or RadiusSchedule.default(backend)
    grid = grid or GridSpec()
    inv = invert(f)
    x_bps = f.breakpoints()
    y_bps = inv.breakpoints()

    def samples(r):
        xs = ball_samples(xbar, r, grid, x_bps)
        ys = ball_samples(ybar, r, grid, y_bps)
        pairs = [(x, y) for x in xs for y in ys]
        if probes is not None:
            pairs.extend(probes(r))
        return pairs

    def ratio(pair):
        x, y = pair
        if not f.domain.contains(x):
            return None
        den = dist_point_to_set(y, f.image(x))
        if den == 0 or den == INF:
            return None
        num = dist_point_to_set(x, inv.image(y))
        return Witness((x, y), num, den, INF if num == INF else num / den)

    return _sup_engine("metric-regularity", sched.radii(), samples, ratio, backend)


def aubin_modulus(
    s: PiecewiseMultifunction,
    center: Tuple[Scalar, Scalar],
    sched: Optional[RadiusSchedule] = None,
    grid: Optional[GridSpec] = None,
    backend: Backend = RATIONAL,
    probes: Optional[Callable[[Scalar], Iterable[tuple]]] = None,
) -> ModulusReport:
    """Aubin (pseudo-Lipschitz) modulus of S at (ybar, xbar) in gph S:
    sup d(x, S(y)) / d(y, y') over x in S(y') near xbar and y, y' near ybar."""
    ybar, xbar = center
    if not s.image(ybar).contains(xbar):
        raise ValueError("center must lie on the graph of S")
    sched = sched or RadiusSchedule.default(backend)
    grid = grid or GridSpec()
    y_bps = s.breakpoints()

    def samples(r):
        ys = ball_samples(ybar, r, grid, y_bps)
        out = []
        for yp in ys:
            if not s.domain.contains(yp):
                continue
            img = s.image(yp)
            if img.is_empty():
                continue
            xs = set(img.endpoints())
            for x in ball_samples(xbar, r, grid):
                if img.contains(x):
                    xs.add(x)
            xs = [x for x in sorted(xs) if xbar - r <= x <= xbar + r]
            for y in ys:
                if y == yp:
                    continue
                for x in xs:
                    out.append((y, yp, x))
        if probes is not None:
            out.extend(probes(r))
        return out

    def ratio(triple):
        y, yp, x = triple
        den = abs(y - yp)
        if den == 0:
            return None
        num = dist_point_to_set(x, s.image(y))
        return Witness((y, yp, x), num, den, INF if num == INF else num / den)

    return _sup_engine("aubin", sched.radii(), samples, ratio, backend)


def openness_rate(
    f: PiecewiseMultifunction,
    center: Tuple[Scalar, Scalar],
    sched: Optional[RadiusSchedule] = None,
    grid: Optional[GridSpec] = None,
    backend: Backend = RATIONAL,
    rho_count: int = 3,
) -> ModulusReport:
    """Largest linear covering rate: B(y, rho * rate) inside F(B(x, rho))
    for graph points (x, y) near the center and small rho.

    Exact per sample: the best rate is d(y, complement of the image of the
    ball) / rho, computed from the exact image of an interval.
    """
    xbar, ybar = center
    if not f.image(xbar).contains(ybar):
        raise ValueError("center must lie on the graph")
    sched = sched or RadiusSchedule.default(backend)
    grid = grid or GridSpec()
    x_bps = f.breakpoints()

    trace: List[Tuple[Scalar, Scalar]] = []
    witnesses: List[Witness] = []
    for r in sched.radii():
        inf_rate = None
        arg = None
        for x in ball_samples(xbar, r, grid, x_bps):
            if not f.domain.contains(x):
                continue
            img = f.image(x).intersect_interval(ybar - r, ybar + r)
            ys = set(img.endpoints())
            for y in ball_samples(ybar, r, grid):
                if img.contains(y):
                    ys.add(y)
            rho = r
            for _ in range(rho_count):
                ball_img = f.image_of_interval(x - rho, x + rho)
                for y in sorted(ys):
                    rate = dist_to_complement(y, ball_img)
                    rate = INF if rate == INF else rate / rho
                    if inf_rate is None or rate < inf_rate:
                        inf_rate = rate
                        arg = Witness((x, y, rho), rate, 1, rate)
                rho = rho / 2
        trace.append((r, inf_rate))
        if arg is not None:
            witnesses.append(arg)
    rates = [v for _, v in trace if v is not None]
    value = rates[-1] if rates else 0
    if not rates:
        verdict = "inconclusive"
    elif len(rates) >= 2 and backend.eq(rates[-1], rates[-2]):
        verdict = "irregular" if backend.is_zero(value) else "regular"
    else:
        verdict = "inconclusive"
    return ModulusReport("openness-rate", value, verdict, tuple(witnesses[-3:]), tuple(trace), backend.name)


@dataclass(frozen=True)
class EquivalenceReport:
    verdict: str  # "pass" | "fail" | "inconclusive"
    mr: ModulusReport
    aubin_inverse: ModulusReport
    openness: ModulusReport
    backend: str
    detail: str = ""


def equivalence_check(
    f: PiecewiseMultifunction,
    center: Tuple[Scalar, Scalar],
    tol: Optional[Scalar] = None,
    sched: Optional[RadiusSchedule] = None,
    grid: Optional[GridSpec] = None,
    backend: Backend = RATIONAL,
    probes_mr=None,
    probes_aubin=None,
) -> EquivalenceReport:
    """Three-way agreement: mr(F) = aubin(F^-1) = 1 / openness(F), or all
    three simultaneously irregular."""
    xbar, ybar = center
    tol = backend.tol if tol is None else tol
    mr = mr_modulus(f, center, sched, grid, backend, probes=probes_mr)
    au = aubin_modulus(invert(f), (ybar, xbar), sched, grid, backend, probes=probes_aubin)
    op = openness_rate(f, center, sched, grid, backend)
    irregular = [rep.verdict == "irregular" for rep in (mr, au, op)]
    if all(irregular):
        return EquivalenceReport("pass", mr, au, op, backend.name, "all three irregular")
    if any(irregular):
        return EquivalenceReport("fail", mr, au, op, backend.name, "verdicts disagree")
    vals = (mr.value, au.value, op.value)
    if op.value == 0:
        return EquivalenceReport("fail", mr, au, op, backend.name, "zero rate with finite moduli")
    ok = abs(mr.value - au.value) <= tol and abs(mr.value * op.value - 1) <= tol * max(1, op.value)
    detail = f"mr={fmt_scalar(vals[0])} aubin={fmt_scalar(vals[1])} 1/openness={fmt_scalar(1 / vals[2])}"
    return EquivalenceReport("pass" if ok else "fail", mr, au, op, backend.name, detail)


def pl_uniform_modulus(
    g: ParametricMultifunction,
    center: Tuple[Scalar, Scalar, Scalar],
    wrt: str = "x",
    sched: Optional[RadiusSchedule] = None,
    grid: Optional[GridSpec] = None,
    backend: Backend = RATIONAL,
) -> ModulusReport:
    """Pseudo-Lipschitz modulus of G(x, p), with respect to x uniformly in p
    (``wrt="x"``) or with respect to p uniformly in x (``wrt="p"``):
    smallest kappa with G(a1)...cap W subset G(a2) + kappa d(a1, a2) B."""
    if wrt not in ("x", "p"):
        raise ValueError("wrt must be 'x' or 'p'")
    xbar, pbar, kbar = center
    if not g.image(xbar, pbar).contains(kbar):
        raise ValueError("center must lie on the graph")
    sched = sched or RadiusSchedule.default(backend)
    grid = grid or GridSpec()

    def samples(r):
        xs = ball_samples(xbar, r, grid)
        ps = ball_samples(pbar, r, grid)
        out = []
        if wrt == "x":
            for p in ps:
                for x1 in xs:
                    for x2 in xs:
                        if x1 != x2:
                            out.append((x1, x2, p, r))
        else:
            for x in xs:
                for p1 in ps:
                    for p2 in ps:
                        if p1 != p2:
                            out.append((x, p1, p2, r))
        return out

    def ratio(item):
        if wrt == "x":
            x1, x2, p, r = item
            fw = g.at_p(p)
            moving = fw.image(x1).intersect_interval(kbar - r, kbar + r)
            target = fw.image(x2)
            den = abs(x1 - x2)
        else:
            x, p1, p2, r = item
            moving = g.image(x, p1).intersect_interval(kbar - r, kbar + r)
            target = g.image(x, p2)
            den = abs(p1 - p2)
        if moving.is_empty() or den == 0:
            return None
        num = hausdorff_excess(moving, target)
        return Witness(item[:3], num, den, INF if num == INF else num / den)

    return _sup_engine(f"pl-uniform-{wrt}", sched.radii(), samples, ratio, backend)


def robinson_modulus(
    f: PiecewiseMultifunction,
    g: ParametricMultifunction,
    center: Tuple[Scalar, Scalar],
    sched: Optional[RadiusSchedule] = None,
    grid: Optional[GridSpec] = None,
    backend: Backend = RATIONAL,
    probes: Optional[Callable[[Scalar], Iterable[tuple]]] = None,
) -> ModulusReport:
    """Robinson modulus: sup d(x, S(p)) / d(0, F(x) + G(x, p)) near the
    center, where S(p) = {x : 0 in F(x) + G(x, p)} is materialized per p."""
    xbar, pbar = center
    if not sum_mf(f, g.at_p(pbar)).image(xbar).contains(0):
        raise ValueError("center must solve the inclusion")
    sched = sched or RadiusSchedule.default(backend)
    grid = grid or GridSpec()

    cache = {}

    def sum_at(p):
        if p not in cache:
            sp = sum_mf(f, g.at_p(p))
            cache[p] = (sp, invert(sp))
        return cache[p]

    def samples(r):
        ps = ball_samples(pbar, r, grid)
        out = []
        for p in ps:
            sp, _ = sum_at(p)
            for x in ball_samples(xbar, r, grid, sp.breakpoints()):
                out.append((x, p))
        if probes is not None:
            out.extend(probes(r))
        return out

    def ratio(pair):
        x, p = pair
        sp, inv = sum_at(p)
        if not sp.domain.contains(x):
            return None
        den = dist_point_to_set(0, sp.image(x))
        if den == 0 or den == INF:
            return None
        num = dist_point_to_set(x, inv.image(0))
        return Witness((x, p), num, den, INF if num == INF else num / den)

    return _sup_engine("robinson", sched.radii(), samples, ratio, backend)
