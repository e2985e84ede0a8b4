"""The epigraphical multifunction E_{F,G}(x, k) = F(x) + k when k in G(x).

This object lets the sum F + G be analysed without forming it: regularity
of E under a lambda-scaled product metric transfers to the sum whenever the
pair is locally sum-stable.  The module also reproduces, in exact rational
arithmetic, the gap example showing that a metrically regular map plus a
pseudo-Lipschitz map need not be metrically regular.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

from .affine import Affine, crossing
from .envelopes import exact_liminf
from .intervals import (
    Interval,
    IntervalSet,
    dist_point_to_set,
    dist_to_complement,
    minkowski_sum,
)
from .multifunctions import (
    Dom,
    ImageRule,
    Piece,
    PiecewiseMultifunction,
    constant_map,
    graph_closedness_probe,
    invert,
    is_lsc_at,
    is_usc_at,
    sum_mf,
)
from .regularity import ModulusReport, Witness, _sup_engine, mr_modulus, pl_uniform_modulus
from .sampling import GridSpec, RadiusSchedule, ball_samples
from .scalars import INF, NINF, Backend, RATIONAL, Scalar, fmt_scalar


class NotClosed(ValueError):
    """A closedness probe certified a violation for F or G."""


class PreconditionViolated(RuntimeError):
    """A theorem hypothesis (tau*lambda < 1, certification) failed."""


@dataclass(frozen=True)
class ProductMetric:
    """max(|x - u|, |k - z| / lam); lam = 0 degenerates to exact matching of
    the second coordinate (the natural limit for locally constant G)."""

    lam: Scalar

    def dist(self, a: Tuple[Scalar, Scalar], b: Tuple[Scalar, Scalar]) -> Scalar:
        dx = abs(a[0] - b[0])
        dk = abs(a[1] - b[1])
        if self.lam == 0:
            return dx if dk == 0 else INF
        return max(dx, dk / self.lam)


class EpigraphicalMF:
    """E(x, k) = F(x) + k if k in G(x), else empty; evaluated lazily, exact."""

    def __init__(self, f: PiecewiseMultifunction, g: PiecewiseMultifunction, lam: Scalar = 1):
        self.f = f
        self.g = g
        self.metric = ProductMetric(lam)

    @property
    def lam(self) -> Scalar:
        return self.metric.lam

    def value(self, x: Scalar, k: Scalar) -> IntervalSet:
        if not self.g.domain.contains(x) or not self.g.image(x).contains(k):
            return IntervalSet.empty()
        return self.f.image(x).translate(k)

    def solution_set_slices(self, y: Scalar):
        """Patches of S_E(y) = {(u, z): z in G(u), y - z in F(u)} as
        (u-interval, z-lower affine forms, z-upper affine forms) triples."""
        for gdom, glo, ghi in self.g.graph_patches():
            for fdom, flo, fhi in self.f.graph_patches():
                lo = max(gdom.lo, fdom.lo)
                hi = min(gdom.hi, fdom.hi)
                if lo > hi:
                    continue
                lowers: List[Affine] = []
                uppers: List[Affine] = []
                if glo is not None:
                    lowers.append(glo)
                if ghi is not None:
                    uppers.append(ghi)
                # y - z in [flo(u), fhi(u)]  <=>  y - fhi(u) <= z <= y - flo(u)
                if fhi is not None:
                    lowers.append(Affine(-fhi.a, y - fhi.b))
                if flo is not None:
                    uppers.append(Affine(-flo.a, y - flo.b))
                yield (lo, hi), lowers, uppers


def build_epigraphical(
    f: PiecewiseMultifunction,
    g: PiecewiseMultifunction,
    lam: Scalar = 1,
    closedness_region=None,
) -> EpigraphicalMF:
    """Construct E_{F,G} after certifying closedness of F and G.

    ``closedness_region`` restricts the probe to the working box; a
    certified violation inside it raises ``NotClosed``.
    """
    for name, mf in (("F", f), ("G", g)):
        report = graph_closedness_probe(mf, closedness_region)
        if report.verdict == "violation":
            raise NotClosed(f"{name} has a non-closed graph at {report.witness}")
    return EpigraphicalMF(f, g, lam)


# ---------------------------------------------------------------------------
# envelope of the epigraphical distance


@dataclass(frozen=True)
class EpiEnvelopeReport:
    full: Scalar
    reduced: Optional[Scalar]
    lsc_certified: Optional[bool]
    agree: Optional[bool]
    backend: str


def epi_envelope_value(e: EpigraphicalMF, x: Scalar, k: Scalar, y: Scalar) -> Scalar:
    """phi_E((x, k), y) = liminf over gph G of d(y, F(u) + v), exact.

    The liminf decomposes over approach sides; on each side v -> k forces
    k into the side's limit slice of G, and the distance limit is the
    side-restricted envelope of d(y - k, F(.)).
    """
    best = INF
    for side in ("at", "left", "right"):
        if e.g.limit_image(x, side).contains(k):
            best = min(best, dist_point_to_set(y - k, e.f.limit_image(x, side)))
    return best


def epi_envelope(
    e: EpigraphicalMF,
    point: Tuple[Scalar, Scalar],
    y: Scalar,
    backend: Backend = RATIONAL,
) -> EpiEnvelopeReport:
    """Full envelope value, plus the reduced formula liminf d(y, F(u) + k)
    cross-checked whenever G is certified lower semicontinuous at (x, k)."""
    x, k = point
    full = epi_envelope_value(e, x, k, y)
    on_graph = e.g.domain.contains(x) and e.g.image(x).contains(k)
    if not on_graph:
        return EpiEnvelopeReport(full, None, None, None, backend.name)
    reduced = exact_liminf(e.f, x, y - k)
    lsc = is_lsc_at(e.g, x, k)
    agree = backend.eq(full, reduced)
    return EpiEnvelopeReport(full, reduced, lsc, agree, backend.name)


def epi_solution_distance(
    e: EpigraphicalMF, point: Tuple[Scalar, Scalar], y: Scalar
) -> Scalar:
    """d((x, k), S_E(y)) in the lambda-scaled product metric, exact.

    Per (G-patch, F-patch) pair the z-slice bounds are affine in u, so the
    pointwise objective max(|x - u|, d(k, slice)/lam) is convex piecewise
    affine; the minimum sits at an endpoint or a form crossing.
    """
    x, k = point
    lam = e.lam
    best = INF
    for (lo, hi), lowers, uppers in e.solution_set_slices(y):
        forms: List[Affine] = [Affine(1, -x), Affine(-1, x)]  # |u - x|
        if lam != 0:
            forms += [Affine(f.a / lam, (f.b - k) / lam) for f in lowers]
            forms += [Affine(-f.a / lam, (k - f.b) / lam) for f in uppers]
        cands = set()
        for v in (lo, hi, x):
            if lo <= v <= hi and v != NINF and v != INF:
                cands.add(v)
        pool = forms + [Affine(0, 0)]
        for i in range(len(pool)):
            for j in range(i + 1, len(pool)):
                c = crossing(pool[i], pool[j])
                if c is not None and lo <= c <= hi:
                    cands.add(c)
        for fa in lowers:
            for fb in uppers:
                c = crossing(fa, fb)
                if c is not None and lo <= c <= hi:
                    cands.add(c)
        for u in sorted(cands):
            zlo = max((f(u) for f in lowers), default=NINF)
            zhi = min((f(u) for f in uppers), default=INF)
            if zlo > zhi:
                continue
            dz = dist_point_to_set(k, IntervalSet((Interval(zlo, zhi),), _normalized=True))
            if lam == 0:
                val = abs(u - x) if dz == 0 else INF
            else:
                val = max(abs(u - x), dz / lam)
            if val < best:
                best = val
    return best


@dataclass(frozen=True)
class ZeroSetReport:
    verdict: str  # "pass" | "mismatch"
    mismatches: Tuple[tuple, ...]
    checked: int
    backend: str


def epi_zero_set_check(
    e: EpigraphicalMF,
    y: Scalar,
    region: Tuple[Tuple[Scalar, Scalar], Tuple[Scalar, Scalar]],
    grid: Optional[GridSpec] = None,
    backend: Backend = RATIONAL,
) -> ZeroSetReport:
    """Verify {(x,k): phi_E((x,k),y) = 0} = {(x,k): k in G(x), y in F(x)+k}
    at sampled points and piece boundaries of the region."""
    grid = grid or GridSpec()
    (xlo, xhi), (klo, khi) = region
    xlo, xhi, klo, khi = (
        Fraction(v) if isinstance(v, int) else v for v in (xlo, xhi, klo, khi)
    )
    xc, xr = (xlo + xhi) / 2, (xhi - xlo) / 2
    kc, kr = (klo + khi) / 2, (khi - klo) / 2
    bps = e.f.breakpoints() + e.g.breakpoints()
    mismatches = []
    checked = 0
    for x in ball_samples(xc, xr, grid, bps):
        if not e.g.domain.contains(x) or not e.f.domain.contains(x):
            continue
        k_cands = set(ball_samples(kc, kr, grid, e.g.image(x).endpoints()))
        for k in sorted(k_cands):
            checked += 1
            phi = epi_envelope_value(e, x, k, y)
            member = e.g.image(x).contains(k) and e.f.image(x).contains(y - k)
            if backend.is_zero(phi) != member:
                mismatches.append((x, k, phi, member))
    verdict = "pass" if not mismatches else "mismatch"
    return ZeroSetReport(verdict, tuple(mismatches[:5]), checked, backend.name)


# ---------------------------------------------------------------------------
# sum stability


@dataclass(frozen=True)
class SumStabilityReport:
    verdict: str  # "stable" | "unstable" | "inconclusive"
    shortcut_used: bool
    delta_table: Tuple[Tuple[Scalar, Scalar], ...]  # (eps, delta) rows
    witnesses: Tuple[tuple, ...]  # (x, w, eps, delta) rows, verified exactly
    backend: str


def sum_stability_probe(
    f: PiecewiseMultifunction,
    g: PiecewiseMultifunction,
    center: Tuple[Scalar, Scalar, Scalar],
    eps_list: Sequence[Scalar] = (Fraction(1, 4), Fraction(1, 8)),
    grid: Optional[GridSpec] = None,
    backend: Backend = RATIONAL,
    delta_steps: int = 6,
    delta0: Optional[Scalar] = None,
) -> SumStabilityReport:
    """Probe local sum-stability of (F, G) around (xbar, ybar, zbar).

    For each eps the probe searches a dyadic delta such that every sampled
    w in (F+G)(x) near ybar+zbar decomposes as y + z with y in F(x), z in
    G(x) within closed eps-balls of ybar, zbar; the decomposition test is
    exact (Minkowski sum membership on interval unions).  When G(xbar) is
    the singleton {zbar} and G is upper semicontinuous at xbar the verdict
    is "stable" by the usc-singleton shortcut.
    """
    xbar, ybar, zbar = center
    if not f.image(xbar).contains(ybar):
        raise ValueError("ybar must lie in F(xbar)")
    if not g.image(xbar).contains(zbar):
        raise ValueError("zbar must lie in G(xbar)")
    grid = grid or GridSpec()
    gx = g.image(xbar)
    if gx == IntervalSet.point(zbar) and is_usc_at(g, xbar):
        return SumStabilityReport("stable", True, (), (), backend.name)

    s = sum_mf(f, g)
    wc = ybar + zbar
    table = []
    witnesses: List[tuple] = []
    for eps in eps_list:
        found_delta = None
        delta = backend.scalar(delta0) if delta0 is not None else eps
        for _ in range(delta_steps):
            violations = _stability_violations(f, g, s, xbar, ybar, zbar, wc, eps, delta, grid)
            if not violations:
                found_delta = delta
                break
            witnesses.extend((x, w, eps, delta) for x, w in violations)
            delta = delta / 2
        if found_delta is not None:
            table.append((eps, found_delta))
        else:
            return SumStabilityReport(
                "unstable", False, tuple(table), tuple(witnesses[:24]), backend.name
            )
    return SumStabilityReport("stable", False, tuple(table), (), backend.name)


def _stability_violations(f, g, s, xbar, ybar, zbar, wc, eps, delta, grid):
    """All sampled (x, w) with w in (F+G)(x) near wc and no eps-decomposition."""
    out = []
    for x in ball_samples(xbar, delta, grid, s.breakpoints()):
        if not s.domain.contains(x):
            continue
        window = s.image(x).intersect_interval(wc - delta, wc + delta)
        if window.is_empty():
            continue
        decomposable = minkowski_sum(
            f.image(x).intersect_interval(ybar - eps, ybar + eps),
            g.image(x).intersect_interval(zbar - eps, zbar + eps),
        )
        w_cands = set(window.endpoints())
        for w in ball_samples(wc, delta, grid):
            if window.contains(w):
                w_cands.add(w)
        for iv in window.intervals:
            if iv.lo != NINF and iv.hi != INF:
                w_cands.add((iv.lo + iv.hi) / 2)
        for w in sorted(w_cands):
            if not decomposable.contains(w):
                out.append((x, w))
    return out


# ---------------------------------------------------------------------------
# localized estimate and the sum theorem


@dataclass(frozen=True)
class CheckReport:
    verdict: str  # "holds" | "violated" | "inconclusive-pass"
    witness: Optional[tuple]
    detail: str
    backend: str


def localized_sum_estimate_check(
    f: PiecewiseMultifunction,
    g: PiecewiseMultifunction,
    center: Tuple[Scalar, Scalar, Scalar],
    tau: Scalar,
    theta: Scalar,
    sched: Optional[RadiusSchedule] = None,
    grid: Optional[GridSpec] = None,
    backend: Backend = RATIONAL,
    probes: Optional[Callable[[Scalar], Iterable[tuple]]] = None,
) -> CheckReport:
    """Check d(x, (F+G)^-1(y)) <= tau * d(y, F(x) + G(x) cap B(kbar, theta))
    over sampled (x, y) near the center; failures carry exact witnesses."""
    xbar, kbar, ybar = center
    sched = sched or RadiusSchedule.default(backend)
    grid = grid or GridSpec()
    s = sum_mf(f, g)
    inv = invert(s)
    checked = 0
    per_radius_violation = []
    last_witness = None
    for r in sched.radii():
        pairs = [
            (x, y)
            for x in ball_samples(xbar, r, grid, s.breakpoints())
            for y in ball_samples(ybar, r, grid, inv.breakpoints())
        ]
        if probes is not None:
            pairs.extend(probes(r))
        violation = None
        for x, y in pairs:
            if not s.domain.contains(x):
                continue
            g_local = g.image(x).intersect_interval(kbar - theta, kbar + theta)
            rhs = dist_point_to_set(y, minkowski_sum(f.image(x), g_local))
            lhs = dist_point_to_set(x, inv.image(y))
            checked += 1
            if rhs == INF and lhs == INF:
                continue
            bound = INF if rhs == INF else tau * rhs
            if not backend.le(lhs, bound):
                violation = (x, y, lhs, rhs)
        per_radius_violation.append(violation is not None)
        if violation is not None:
            last_witness = violation
    return _tail_verdict(per_radius_violation, last_witness, checked, backend)


def _tail_verdict(per_radius_violation, witness, checked, backend: Backend) -> "CheckReport":
    """Local-property verdict: only the smallest radii decide.

    A violation at the final radius is an exact certificate of failure
    arbitrarily близко is not claimed -- it certifies failure at the finest
    probed scale; a clean tail of three radii supports "holds".
    """
    tail = per_radius_violation[-min(3, len(per_radius_violation)):]
    if per_radius_violation and per_radius_violation[-1]:
        lhs, rhs = witness[2], witness[3]
        return CheckReport(
            "violated",
            witness,
            f"d = {fmt_scalar(lhs)} > tau * {fmt_scalar(rhs)} at the finest radius",
            backend.name,
        )
    if not any(tail):
        verdict = "holds" if backend.exact else "inconclusive-pass"
        return CheckReport(verdict, None, f"{checked} samples, clean tail", backend.name)
    return CheckReport("inconclusive", witness, "violations die out mid-schedule", backend.name)


def epi_regularity_modulus(
    e: EpigraphicalMF,
    center: Tuple[Scalar, Scalar, Scalar],
    sched: Optional[RadiusSchedule] = None,
    grid: Optional[GridSpec] = None,
    backend: Backend = RATIONAL,
    probes: Optional[Callable[[Scalar], Iterable[tuple]]] = None,
) -> ModulusReport:
    """Metric regularity modulus of E under the lambda product metric:
    sup d_pm((x,k), S_E(y)) / d(y, E(x,k)) near ((xbar, kbar), ybar)."""
    xbar, kbar, ybar = center
    sched = sched or RadiusSchedule.default(backend)
    grid = grid or GridSpec()

    def samples(r):
        out = []
        for x in ball_samples(xbar, r, grid, e.f.breakpoints() + e.g.breakpoints()):
            if not e.g.domain.contains(x) or not e.f.domain.contains(x):
                continue
            slice_g = e.g.image(x).intersect_interval(kbar - r, kbar + r)
            k_cands = set(slice_g.endpoints())
            for k in ball_samples(kbar, r, grid):
                if slice_g.contains(k):
                    k_cands.add(k)
            for k in sorted(k_cands):
                for y in ball_samples(ybar, r, grid):
                    out.append((x, k, y))
        if probes is not None:
            out.extend(probes(r))
        return out

    def ratio(triple):
        x, k, y = triple
        den = dist_point_to_set(y, e.value(x, k))
        if den == 0 or den == INF:
            return None
        num = epi_solution_distance(e, (x, k), y)
        return Witness((x, k, y), num, den, INF if num == INF else num / den)

    return _sup_engine("epi-regularity", sched.radii(), samples, ratio, backend)


@dataclass(frozen=True)
class SumTheoremReport:
    bound: Scalar
    part_a: Tuple[str, ModulusReport]  # reg(E) <= bound
    part_b: Tuple[str, Optional[ModulusReport], str]  # verdict, mr(F+G), reason
    part_c: Tuple[str, Optional[tuple]]  # covering inclusion verdict + witness
    stability: SumStabilityReport
    evidence: dict
    backend: str


def sum_theorem_verify(
    f: PiecewiseMultifunction,
    g: PiecewiseMultifunction,
    center: Tuple[Scalar, Scalar, Scalar],
    tau: Scalar,
    lam: Scalar,
    sched: Optional[RadiusSchedule] = None,
    grid: Optional[GridSpec] = None,
    backend: Backend = RATIONAL,
    tol: Optional[Scalar] = None,
    closedness_region=None,
) -> SumTheoremReport:
    """Verify the sum theorem package around (xbar, kbar, ybar).

    (a) reg(E_{F,G}) under the lambda metric is at most (1/tau - lam)^-1;
    (b) when the pair is sum-stable, the same bound holds for mr(F + G);
    (c) the covering inclusion B(k+z, rho*(1/tau - lam)) inside
        (F+G)(B(x, rho)) holds at sampled graph points.

    Preconditions (tau*lam < 1, mr(F) <= tau, pl(G) <= lam) are certified
    by the upstream estimators and recorded in the evidence chain.
    """
    from .multifunctions import p_free

    xbar, kbar, ybar = center
    tol = (0 if backend.exact else Fraction(1, 10**6)) if tol is None else tol
    if not tau * lam < 1:
        raise PreconditionViolated(f"tau*lam = {fmt_scalar(tau * lam)} >= 1")
    mr_f = mr_modulus(f, (xbar, ybar - kbar), sched, grid, backend)
    if not (mr_f.is_regular() and mr_f.value <= tau + tol):
        raise PreconditionViolated(f"mr(F) not certified <= {fmt_scalar(tau)}: {mr_f.verdict}")
    pl_g = pl_uniform_modulus(p_free(g), (xbar, 0, kbar), "x", sched, grid, backend)
    if not (pl_g.verdict != "irregular" and pl_g.value <= lam + tol):
        raise PreconditionViolated(f"pl(G) not certified <= {fmt_scalar(lam)}")
    bound = 1 / (1 / tau - lam)

    e = build_epigraphical(f, g, lam, closedness_region)
    reg_e = epi_regularity_modulus(e, center, sched, grid, backend)
    a_ok = reg_e.value <= bound + tol and reg_e.verdict != "irregular"
    part_a = ("pass" if a_ok else "fail", reg_e)

    stability = sum_stability_probe(f, g, (xbar, ybar - kbar, kbar), backend=backend)
    mr_sum = mr_modulus(sum_mf(f, g), (xbar, ybar), sched, grid, backend)
    if stability.verdict == "stable":
        b_ok = mr_sum.is_regular() and mr_sum.value <= bound + tol
        part_b = ("pass" if b_ok else "fail", mr_sum, "")
    else:
        part_b = ("skipped", mr_sum, "sum-stability absent")

    part_c = _covering_check(f, g, center, 1 / tau - lam, sched or RadiusSchedule.default(backend), grid or GridSpec(), backend)

    evidence = {
        "tau": tau,
        "lam": lam,
        "bound": bound,
        "mr_F": mr_f,
        "pl_G": pl_g,
    }
    return SumTheoremReport(bound, part_a, part_b, part_c, stability, evidence, backend.name)


def _covering_check(f, g, center, rate, sched, grid, backend):
    """Corollary-style inclusion B(k+z, rho*rate) in (F+G)(B(x, rho))."""
    xbar, kbar, ybar = center
    s = sum_mf(f, g)
    zc = ybar - kbar
    for r in sched.radii():
        for x in ball_samples(xbar, r, grid, s.breakpoints()):
            if not s.domain.contains(x):
                continue
            ks = g.image(x).intersect_interval(kbar - r, kbar + r)
            zs = f.image(x).intersect_interval(zc - r, zc + r)
            k_cands = ks.endpoints()
            z_cands = zs.endpoints()
            for k in k_cands:
                for z in z_cands:
                    rho = r
                    for _ in range(3):
                        img = s.image_of_interval(x - rho, x + rho)
                        if dist_to_complement(k + z, img) < rho * rate:
                            return ("fail", (x, k, z, rho))
                        rho = rho / 2
    return ("pass", None)


# ---------------------------------------------------------------------------
# the gap counterexample, exactly


@dataclass(frozen=True)
class CounterexampleBundle:
    delta: Scalar
    f: PiecewiseMultifunction
    g: PiecewiseMultifunction
    x: Scalar
    y: Scalar
    dist_inverse: Scalar  # d(x, (F+G)^-1(y)) = delta/2 + delta^2/2
    dist_image: Scalar  # d(y, (F+G)(x)) = delta^2/2
    ratio: Scalar  # (1 + delta)/delta
    ratio_formula: str
    instability_witness: Tuple[Scalar, Scalar]  # (x_delta, w_delta) = (delta/2, delta/2)
    backend: str


def counterexample_pair(backend: Backend = RATIONAL):
    """F regular at (0,0) with an escaping branch, G the two-point constant."""
    b = backend.scalar
    f = PiecewiseMultifunction(
        [
            Piece(Dom(NINF, b(0), False, False), (ImageRule.const(b(-1), b(-1)),)),
            Piece(Dom(b(0), INF, True, False), (ImageRule(Affine(b(-1), b(0)), None),)),
        ],
        name="gap-example-f",
    )
    g = constant_map([b(0), b(1)], name="gap-example-g")
    return f, g


def counterexample(delta: Scalar, backend: Backend = RATIONAL) -> CounterexampleBundle:
    """Exact distances of the gap example at x = -delta/2, y = -delta^2/2.

    Requires 0 < delta < 1.  The reported ratio (1+delta)/delta diverges as
    delta -> 0, certifying that F + G is not metrically regular at (0, 0).
    """
    delta = backend.scalar(delta)
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    f, g = counterexample_pair(backend)
    s = sum_mf(f, g)
    x = -delta / 2
    y = -delta * delta / 2
    d_inv = dist_point_to_set(x, invert(s).image(y))
    d_img = dist_point_to_set(y, s.image(x))
    return CounterexampleBundle(
        delta,
        f,
        g,
        x,
        y,
        d_inv,
        d_img,
        d_inv / d_img,
        "(1 + delta) / delta",
        (delta / 2, delta / 2),
        backend.name,
    )
