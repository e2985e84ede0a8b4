"""Exact piecewise-affine multifunctions on the real line.

A multifunction F: R =| R is a finite list of pieces.  Each piece has a
one-dimensional domain interval (endpoints may be open, so maps like
"{-1} for x < 0" are representable exactly) and finitely many image
intervals whose endpoints are affine in x (or infinite).  The graph of F
is by definition the union of the piece graphs.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .affine import Affine, crossing
from .intervals import Interval, IntervalSet, dist_point_to_set, minkowski_sum
from .scalars import INF, NINF, MalformedInterval, Scalar, fmt_scalar, is_finite


class OutOfDomain(ValueError):
    """Evaluation point outside the declared domain."""


@dataclass(frozen=True)
class Dom:
    """Domain interval with open/closed endpoint flags (infinite ends open)."""

    lo: Scalar
    hi: Scalar
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self):
        if isinstance(self.lo, int):
            object.__setattr__(self, "lo", Fraction(self.lo))
        if isinstance(self.hi, int):
            object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo > self.hi:
            raise MalformedInterval(f"inverted domain [{self.lo}, {self.hi}]")
        if self.lo == NINF and self.lo_closed:
            object.__setattr__(self, "lo_closed", False)
        if self.hi == INF and self.hi_closed:
            object.__setattr__(self, "hi_closed", False)
        if self.lo == self.hi and not (self.lo_closed and self.hi_closed):
            raise MalformedInterval("degenerate domain must be closed")

    def contains(self, x: Scalar) -> bool:
        if x < self.lo or x > self.hi:
            return False
        if x == self.lo and not self.lo_closed:
            return False
        if x == self.hi and not self.hi_closed:
            return False
        return True

    def in_closure(self, x: Scalar) -> bool:
        return self.lo <= x <= self.hi

    def approaches_from_left(self, x: Scalar) -> bool:
        """Domain contains points < x arbitrarily close to x."""
        return self.lo < x <= self.hi

    def approaches_from_right(self, x: Scalar) -> bool:
        return self.lo <= x < self.hi

    def is_degenerate(self) -> bool:
        return self.lo == self.hi

    def __str__(self) -> str:
        lb = "[" if self.lo_closed else "("
        rb = "]" if self.hi_closed else ")"
        return f"{lb}{fmt_scalar(self.lo)}, {fmt_scalar(self.hi)}{rb}"


@dataclass(frozen=True)
class ImageRule:
    """One image interval [lo(x), hi(x)]; None endpoint means -inf / +inf."""

    lo: Optional[Affine]
    hi: Optional[Affine]

    def value(self, x: Scalar) -> Interval:
        lo = NINF if self.lo is None else self.lo(x)
        hi = INF if self.hi is None else self.hi(x)
        return Interval(lo, hi)

    def shift(self, c: Scalar) -> "ImageRule":
        return ImageRule(
            None if self.lo is None else self.lo.shift(c),
            None if self.hi is None else self.hi.shift(c),
        )

    @staticmethod
    def const(lo: Scalar, hi: Scalar) -> "ImageRule":
        return ImageRule(
            None if lo == NINF else Affine(0, lo),
            None if hi == INF else Affine(0, hi),
        )

    @staticmethod
    def affine_point(a: Scalar, b: Scalar) -> "ImageRule":
        f = Affine(a, b)
        return ImageRule(f, f)


@dataclass(frozen=True)
class Piece:
    dom: Dom
    images: Tuple[ImageRule, ...]

    def __post_init__(self):
        # endpoints must stay ordered across the whole (possibly unbounded) domain
        for rule in self.images:
            if rule.lo is None or rule.hi is None:
                continue
            lo, hi = rule.lo, rule.hi
            for x in (self.dom.lo, self.dom.hi):
                if is_finite(x) and lo(x) > hi(x):
                    raise MalformedInterval(
                        f"image endpoints cross at x={fmt_scalar(x)} on piece {self.dom}"
                    )
            if self.dom.hi == INF and (lo.a > hi.a or (lo.a == hi.a and lo.b > hi.b)):
                raise MalformedInterval(f"image endpoints cross as x -> +inf on {self.dom}")
            if self.dom.lo == NINF and (lo.a < hi.a or (lo.a == hi.a and lo.b > hi.b)):
                raise MalformedInterval(f"image endpoints cross as x -> -inf on {self.dom}")

    def image_at(self, x: Scalar) -> List[Interval]:
        return [rule.value(x) for rule in self.images]


class PiecewiseMultifunction:
    """Finite union of affine graph pieces over a declared ambient domain."""

    def __init__(self, pieces: Sequence[Piece], domain: Optional[Dom] = None, name: str = ""):
        self.pieces = tuple(pieces)
        self.domain = domain if domain is not None else Dom(NINF, INF, False, False)
        self.name = name
        self._validate_cover()

    def _validate_cover(self):
        if not self.pieces:
            raise MalformedInterval("multifunction needs at least one piece")
        # pieces sorted by domain; overlaps only at shared endpoints
        order = sorted(self.pieces, key=lambda p: (p.dom.lo, p.dom.hi))
        for a, b in zip(order, order[1:]):
            if b.dom.lo < a.dom.hi:
                raise MalformedInterval(f"piece domains overlap: {a.dom} and {b.dom}")

    def image(self, x: Scalar) -> IntervalSet:
        """F(x): union of the images of every piece whose domain contains x."""
        if not self.domain.contains(x):
            raise OutOfDomain(f"x={fmt_scalar(x)} outside declared domain {self.domain}")
        items: List[Interval] = []
        for piece in self.pieces:
            if piece.dom.contains(x):
                items.extend(piece.image_at(x))
        return IntervalSet(items)

    def limit_image(self, x: Scalar, side: str) -> IntervalSet:
        """One-sided limit of piece images as u -> x from ``side``.

        side: "left", "right", or "at" (evaluation at x itself).  Exact for
        affine data: the limit along a piece is the affine substitution at x.
        """
        items: List[Interval] = []
        for piece in self.pieces:
            if side == "at":
                hit = piece.dom.contains(x)
            elif side == "left":
                hit = piece.dom.approaches_from_left(x)
            else:
                hit = piece.dom.approaches_from_right(x)
            if hit:
                items.extend(piece.image_at(x))
        return IntervalSet(items)

    def breakpoints(self) -> List[Scalar]:
        """Finite piece-boundary abscissas, sorted."""
        pts = set()
        for piece in self.pieces:
            if is_finite(piece.dom.lo):
                pts.add(piece.dom.lo)
            if is_finite(piece.dom.hi):
                pts.add(piece.dom.hi)
        return sorted(pts)

    def dist(self, y: Scalar, x: Scalar) -> Scalar:
        return dist_point_to_set(y, self.image(x))

    def shift_images(self, c: Scalar) -> "PiecewiseMultifunction":
        return PiecewiseMultifunction(
            [Piece(p.dom, tuple(r.shift(c) for r in p.images)) for p in self.pieces],
            self.domain,
        )

    def image_of_interval(self, lo: Scalar, hi: Scalar) -> IntervalSet:
        """Exact union of F over [lo, hi] (intersected with the domain)."""
        items: List[Interval] = []
        for piece, a, b in self._portions(lo, hi):
            for rule in piece.images:
                va, vb = rule.value(a), rule.value(b)
                items.append(Interval(min(va.lo, vb.lo), max(va.hi, vb.hi)))
        return IntervalSet(items)

    def _portions(self, lo: Scalar, hi: Scalar):
        """Nonempty intersections piece-domain x [lo, hi] as (piece, a, b)."""
        for piece in self.pieces:
            a, b = max(piece.dom.lo, lo), min(piece.dom.hi, hi)
            if a > b:
                continue
            if a == b and not piece.dom.contains(a):
                continue
            if a == piece.dom.lo and not piece.dom.lo_closed and a == b:
                continue
            yield piece, a, b

    def graph_patches(self):
        """(dom, lo_affine|None, hi_affine|None) triples: the graph pieces."""
        for piece in self.pieces:
            for rule in piece.images:
                yield piece.dom, rule.lo, rule.hi

    def __str__(self) -> str:
        return self.name or f"PiecewiseMultifunction({len(self.pieces)} pieces)"


def singleton_map(a: Scalar, b: Scalar = 0, name: str = "") -> PiecewiseMultifunction:
    """x |-> {a*x + b} on the whole line."""
    piece = Piece(Dom(NINF, INF, False, False), (ImageRule.affine_point(a, b),))
    return PiecewiseMultifunction([piece], name=name or f"{{{fmt_scalar(a)}x+{fmt_scalar(b)}}}")


def constant_map(values: Sequence[Scalar], name: str = "") -> PiecewiseMultifunction:
    rules = tuple(ImageRule.const(v, v) for v in values)
    piece = Piece(Dom(NINF, INF, False, False), rules)
    return PiecewiseMultifunction([piece], name=name)


def identity_map() -> PiecewiseMultifunction:
    return singleton_map(1, 0, name="identity")


def sum_mf(f: PiecewiseMultifunction, g: PiecewiseMultifunction) -> PiecewiseMultifunction:
    """(F+G)(x) = F(x) + G(x) pointwise, on the refined common partition."""
    domain = _dom_intersection(f.domain, g.domain)
    cells = _refine_cells([f, g], domain)
    pieces: List[Piece] = []
    for cell in cells:
        fp = _pieces_on_cell(f, cell)
        gp = _pieces_on_cell(g, cell)
        if not fp or not gp:
            continue
        rules = []
        for pf in fp:
            for rf in pf.images:
                for pg in gp:
                    for rg in pg.images:
                        rules.append(_sum_rules(rf, rg))
        pieces.append(Piece(cell, tuple(rules)))
    return PiecewiseMultifunction(_coalesce(pieces), domain)


def _sum_rules(a: ImageRule, b: ImageRule) -> ImageRule:
    lo = None if (a.lo is None or b.lo is None) else a.lo.add(b.lo)
    hi = None if (a.hi is None or b.hi is None) else a.hi.add(b.hi)
    return ImageRule(lo, hi)


def _dom_intersection(a: Dom, b: Dom) -> Dom:
    if a.lo > b.lo:
        lo, lo_closed = a.lo, a.lo_closed
    elif b.lo > a.lo:
        lo, lo_closed = b.lo, b.lo_closed
    else:
        lo, lo_closed = a.lo, a.lo_closed and b.lo_closed
    if a.hi < b.hi:
        hi, hi_closed = a.hi, a.hi_closed
    elif b.hi < a.hi:
        hi, hi_closed = b.hi, b.hi_closed
    else:
        hi, hi_closed = a.hi, a.hi_closed and b.hi_closed
    return Dom(lo, hi, lo_closed, hi_closed)


def _refine_cells(mfs: Sequence[PiecewiseMultifunction], domain: Dom) -> List[Dom]:
    """Elementary cells of the common partition restricted to ``domain``:
    open cells between consecutive breakpoints plus degenerate cells at them."""
    pts = set()
    for mf in mfs:
        for p in mf.breakpoints():
            if domain.in_closure(p):
                pts.add(p)
    if is_finite(domain.lo):
        pts.add(domain.lo)
    if is_finite(domain.hi):
        pts.add(domain.hi)
    bps = sorted(pts)
    cells: List[Dom] = []
    if not bps:
        return [domain]
    lead = Dom(domain.lo, bps[0], domain.lo_closed, False) if domain.lo < bps[0] else None
    if lead is not None:
        cells.append(lead)
    for i, p in enumerate(bps):
        if domain.contains(p):
            cells.append(Dom(p, p, True, True))
        if i + 1 < len(bps):
            cells.append(Dom(p, bps[i + 1], False, False))
    if bps[-1] < domain.hi:
        cells.append(Dom(bps[-1], domain.hi, False, domain.hi_closed))
    return cells


def _pieces_on_cell(mf: PiecewiseMultifunction, cell: Dom) -> List[Piece]:
    if cell.is_degenerate():
        return [p for p in mf.pieces if p.dom.contains(cell.lo)]
    x = _cell_interior_point(cell)
    return [p for p in mf.pieces if p.dom.contains(x)]


def _cell_interior_point(cell: Dom) -> Scalar:
    if cell.is_degenerate():
        return cell.lo
    if is_finite(cell.lo) and is_finite(cell.hi):
        return (cell.lo + cell.hi) / 2
    if is_finite(cell.lo):
        return cell.lo + 1
    if is_finite(cell.hi):
        return cell.hi - 1
    return 0


def _coalesce(pieces: List[Piece]) -> List[Piece]:
    """Merge adjacent cells that carry identical image rules."""
    if not pieces:
        return pieces
    pieces = sorted(pieces, key=lambda p: (p.dom.lo, p.dom.hi))
    out = [pieces[0]]
    for p in pieces[1:]:
        last = out[-1]
        contiguous = last.dom.hi == p.dom.lo and (last.dom.hi_closed or p.dom.lo_closed)
        if contiguous and set(last.images) == set(p.images):
            out[-1] = Piece(
                Dom(last.dom.lo, p.dom.hi, last.dom.lo_closed, p.dom.hi_closed), last.images
            )
        else:
            out.append(p)
    return out


# ---------------------------------------------------------------------------
# symbolic inversion


@dataclass(frozen=True)
class _Bound:
    """Affine bound on u as a function of y, with strictness."""

    form: Affine  # u-bound value at y
    strict: bool = False


def invert(f: PiecewiseMultifunction) -> PiecewiseMultifunction:
    """F^{-1} as a multifunction of y, materialized symbolically.

    Each graph patch {(u, y): u in D, lo(u) <= y <= hi(u)} is solved for u,
    which yields affine u-bounds in y; the patches are then refit onto a
    common y-partition.  The result represents the closure of each y-slice
    (distances to a set and to its closure agree), with exactly-empty slices
    dropped using the original open/closed endpoint flags.
    """
    patches = []
    for dom, lo, hi in f.graph_patches():
        patches.append(_invert_patch(dom, lo, hi))
    breakpoints = set()
    for lowers, uppers, gates in patches:
        for b in _patch_breakpoints(lowers, uppers, gates):
            breakpoints.add(b)
    bps = sorted(breakpoints)
    cells = _refine_cells_from_points(bps)
    pieces = []
    for cell in cells:
        yrep = _cell_interior_point(cell)
        rules = []
        for lowers, uppers, gates in patches:
            rule = _patch_slice(lowers, uppers, gates, cell, yrep)
            if rule is not None:
                rules.append(rule)
        pieces.append(Piece(cell, tuple(rules)))
    return PiecewiseMultifunction(_coalesce(pieces), Dom(NINF, INF, False, False))


def _invert_patch(dom: Dom, lo: Optional[Affine], hi: Optional[Affine]):
    """Constraints on u given y: lists of lower/upper affine bounds plus
    y-gates (intervals of y outside which the patch slice is empty)."""
    lowers: List[_Bound] = []
    uppers: List[_Bound] = []
    gates: List[Tuple[Scalar, Scalar, bool, bool]] = []  # lo, hi, lo_strict, hi_strict
    if is_finite(dom.lo):
        lowers.append(_Bound(Affine(0, dom.lo), not dom.lo_closed))
    if is_finite(dom.hi):
        uppers.append(_Bound(Affine(0, dom.hi), not dom.hi_closed))
    for form, kind in ((lo, "lo"), (hi, "hi")):
        if form is None:
            continue
        a, b = form.a, form.b
        # lo: a*u + b <= y ; hi: y <= a*u + b
        if a == 0:
            if kind == "lo":
                gates.append((b, INF, False, False))
            else:
                gates.append((NINF, b, False, False))
        else:
            bound = Affine(1 / a, -b / a)  # u = (y - b)/a
            if (kind == "lo") == (a > 0):
                uppers.append(_Bound(bound))
            else:
                lowers.append(_Bound(bound))
    return lowers, uppers, gates


def _patch_breakpoints(lowers, uppers, gates) -> List[Scalar]:
    pts = []
    forms = [b.form for b in lowers] + [b.form for b in uppers]
    for i in range(len(forms)):
        for j in range(i + 1, len(forms)):
            c = crossing(forms[i], forms[j])
            if c is not None:
                pts.append(c)
    for g in gates:
        for v in (g[0], g[1]):
            if is_finite(v):
                pts.append(v)
    return pts


def _refine_cells_from_points(bps: List[Scalar]) -> List[Dom]:
    if not bps:
        return [Dom(NINF, INF, False, False)]
    cells = [Dom(NINF, bps[0], False, False)]
    for i, p in enumerate(bps):
        cells.append(Dom(p, p, True, True))
        if i + 1 < len(bps):
            cells.append(Dom(p, bps[i + 1], False, False))
    cells.append(Dom(bps[-1], INF, False, False))
    return cells


def _patch_slice(lowers, uppers, gates, cell: Dom, yrep: Scalar) -> Optional[ImageRule]:
    for glo, ghi, gs_lo, gs_hi in gates:
        if yrep < glo or yrep > ghi:
            return None
        if yrep == glo and gs_lo:
            return None
        if yrep == ghi and gs_hi:
            return None
    lo_b = hi_b = None
    lv = hv = None
    if lowers:
        lv = max(b.form(yrep) for b in lowers)
        binding_l = [b for b in lowers if b.form(yrep) == lv]
        lo_b = binding_l[0]
        l_strict = any(b.strict for b in binding_l)
    if uppers:
        hv = min(b.form(yrep) for b in uppers)
        binding_u = [b for b in uppers if b.form(yrep) == hv]
        hi_b = binding_u[0]
        h_strict = any(b.strict for b in binding_u)
    if lo_b is not None and hi_b is not None:
        if lv > hv:
            return None
        if lv == hv and (l_strict or h_strict):
            return None
    return ImageRule(None if lo_b is None else lo_b.form, None if hi_b is None else hi_b.form)


def inverse_distance(f: PiecewiseMultifunction, y: Scalar, x: Scalar) -> Scalar:
    """Exact d(x, F^{-1}(y)); +inf when the preimage is empty."""
    return dist_point_to_set(x, invert(f).image(y))


# ---------------------------------------------------------------------------
# closedness probing


@dataclass(frozen=True)
class ClosednessReport:
    verdict: str  # "closed" | "violation" | "inconclusive"
    witness: Optional[Tuple[Scalar, Scalar]] = None
    backend: str = "rational"

    def is_closed(self) -> bool:
        return self.verdict == "closed"


def graph_closedness_probe(
    f: PiecewiseMultifunction,
    region: Optional[Tuple[Tuple[Scalar, Scalar], Tuple[Scalar, Scalar]]] = None,
    backend_name: str = "rational",
) -> ClosednessReport:
    """Decide closedness of gph F relative to (domain x R), exactly.

    Piecewise-affine graphs can only fail to be closed at open piece-domain
    endpoints, where the one-sided limit slice may escape the pointwise
    image.  ``region`` restricts which limit points (x, y) are examined.
    """
    (xlo, xhi), (ylo, yhi) = region if region is not None else ((NINF, INF), (NINF, INF))
    for piece in f.pieces:
        for x, closed, side in (
            (piece.dom.lo, piece.dom.lo_closed, "right"),
            (piece.dom.hi, piece.dom.hi_closed, "left"),
        ):
            if closed or not is_finite(x):
                continue
            if not f.domain.contains(x):
                continue  # limit abscissa not a point of the ambient domain
            if not (xlo <= x <= xhi):
                continue
            limit = IntervalSet(
                [r.value(x) for r in piece.images]
            ).intersect_interval(ylo, yhi)
            at = f.image(x)
            if not limit.subset_of(at):
                return ClosednessReport("violation", (x, _escape_point(limit, at)), backend_name)
    return ClosednessReport("closed", None, backend_name)


def _escape_point(limit: IntervalSet, at: IntervalSet) -> Scalar:
    """Some point of ``limit`` outside ``at`` (caller guarantees one exists)."""
    for iv in limit.intervals:
        for cand in (iv.lo, iv.hi):
            if is_finite(cand) and not at.contains(cand):
                return cand
        # endpoints covered but the stretch straddles a gap of `at`
        prev = None
        for o in at.intervals:
            if prev is not None and is_finite(prev.hi) and is_finite(o.lo):
                mid = (prev.hi + o.lo) / 2
                if iv.contains(mid):
                    return mid
            prev = o
    raise AssertionError("no escape point found although subset check failed")


# ---------------------------------------------------------------------------
# semicontinuity certificates (exact for affine data)


def is_lsc_at(g: PiecewiseMultifunction, x: Scalar, k: Scalar) -> bool:
    """Lower semicontinuity of G at (x, k) in gph G: every approach side
    admits selections converging to k, i.e. k lies in each side's limit set."""
    if not g.image(x).contains(k):
        raise ValueError("(x, k) must lie on the graph")
    for side in ("left", "right"):
        approaches = any(
            p.dom.approaches_from_left(x) if side == "left" else p.dom.approaches_from_right(x)
            for p in g.pieces
        )
        if not approaches:
            continue
        if not g.limit_image(x, side).contains(k):
            return False
    return True


def is_usc_at(g: PiecewiseMultifunction, x: Scalar) -> bool:
    """Upper semicontinuity of G at x: every one-sided limit slice is
    contained in G(x)."""
    at = g.image(x)
    for side in ("left", "right"):
        if not g.limit_image(x, side).subset_of(at):
            return False
    return True


# ---------------------------------------------------------------------------
# parametric variant


class ParametricMultifunction:
    """G(x, p): pieces with p-independent x-domains and images affine in (x, p)."""

    def __init__(self, pieces, domain: Optional[Dom] = None, name: str = ""):
        # pieces: sequence of (Dom, tuple of (Affine2|None, Affine2|None))
        self.pieces = tuple(pieces)
        self.domain = domain if domain is not None else Dom(NINF, INF, False, False)
        self.name = name

    def at_p(self, p: Scalar) -> PiecewiseMultifunction:
        out = []
        for dom, images in self.pieces:
            rules = tuple(
                ImageRule(
                    None if lo is None else lo.at_p(p),
                    None if hi is None else hi.at_p(p),
                )
                for lo, hi in images
            )
            out.append(Piece(dom, rules))
        return PiecewiseMultifunction(out, self.domain, name=f"{self.name}@p={fmt_scalar(p)}")

    def image(self, x: Scalar, p: Scalar) -> IntervalSet:
        return self.at_p(p).image(x)

    def __str__(self) -> str:
        return self.name or "ParametricMultifunction"


def p_free(f: PiecewiseMultifunction, name: str = "") -> ParametricMultifunction:
    """Lift a p-independent multifunction to the parametric interface."""
    from .affine import Affine2

    pieces = []
    for piece in f.pieces:
        images = tuple(
            (
                None if r.lo is None else Affine2(r.lo.a, 0, r.lo.b),
                None if r.hi is None else Affine2(r.hi.a, 0, r.hi.b),
            )
            for r in piece.images
        )
        pieces.append((piece.dom, images))
    return ParametricMultifunction(pieces, f.domain, name or f.name)
