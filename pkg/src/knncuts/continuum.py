"""Continuum balanced-cut objective over parametric cut families.

Cuts are hyperplanes {x . n = s} with normal n = (cos t, sin t[, 0]), plus
the dumbbell-specific family of vertical cuts through the neck.  The cut
energy is the boundary integral of h = rho^(1-1/d) over the cut inside D,
and the objective divides by the smaller nu-measure of the two sides.

For the supported shapes every quantity reduces to closed forms (uniform
density) or 1-D quadrature of closed-form slice measures (bump density).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._geom import (
    gauss_legendre_integrate,
    merge_intervals,
    segment_area,
    sphere_cap_volume,
)
from .domain import Ball, Box, Density, Domain, Dumbbell, quad
from .functionals import limit_constants

_GOLDEN_TOL = 1e-8
_TIE_TOL = 1e-12


@dataclass(frozen=True)
class ContinuumCut:
    """One parametric cut with its energy and side measures.

    a_side records the canonical orientation: the halfspace {x.n < s}
    ("neg") or {x.n > s} ("pos") that carries the label A.  Side A is the
    side of smaller nu-measure; exact ties go to the side whose centroid is
    lexicographically smaller.  Points exactly on the cut belong to A.
    """

    family: str       # "line" | "vertical_neck"
    theta: float
    s: float
    weighted_tv: float
    nu_a: float
    nu_ac: float
    value: float
    a_side: str
    valid: bool

    def normal(self, dim: int) -> np.ndarray:
        n = np.zeros(dim)
        n[0] = math.cos(self.theta)
        n[1] = math.sin(self.theta)
        return n

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "theta": self.theta,
            "s": self.s,
            "weighted_tv": self.weighted_tv,
            "nu_a": self.nu_a,
            "nu_ac": self.nu_ac,
            "value": self.value,
            "a_side": self.a_side,
            "valid": self.valid,
        }

    @staticmethod
    def from_dict(spec: dict) -> "ContinuumCut":
        return ContinuumCut(**spec)


@dataclass(frozen=True)
class ContinuumReport:
    best: ContinuumCut
    scan: list               # (theta, s, value) triples
    rescaled_target: float   # limit factor times the family minimum
    dim: int
    family_restricted: bool = True  # minimum is over the cut family only

    def to_dict(self) -> dict:
        return {
            "best": self.best.to_dict(),
            "rescaled_target": self.rescaled_target,
            "dim": self.dim,
            "family_restricted": self.family_restricted,
            "scan": [list(row) for row in self.scan],
        }


# ---------------------------------------------------------------------------
# chord integrals (the cut energy)
# ---------------------------------------------------------------------------

def _box2_chords(sx, sy, theta, s):
    """t-intervals of the line {x.n = s} inside [0,sx]x[0,sy] (d=2 slice).

    The line is p(t) = s*n + t*tau with tau = (-sin t, cos t).
    """
    ct, st = math.cos(theta), math.sin(theta)
    px, py = s * ct, s * st
    dx, dy = -st, ct
    tlo, thi = -math.inf, math.inf
    for p, dvec, hi in ((px, dx, sx), (py, dy, sy)):
        if abs(dvec) < 1e-300:
            if p < 0.0 or p > hi:
                return []
        else:
            t0, t1 = (0.0 - p) / dvec, (hi - p) / dvec
            if t0 > t1:
                t0, t1 = t1, t0
            tlo, thi = max(tlo, t0), min(thi, t1)
    return [(tlo, thi)] if thi > tlo else []


def _chord_intervals(domain: Domain, theta: float, s: float):
    """Merged t-intervals of the cut line inside the domain (d=2 geometry).

    For d=3 domains this describes the (x1, x2) trace of the vertical
    cut plane.
    """
    ct, st = math.cos(theta), math.sin(theta)
    if isinstance(domain, Box):
        return _box2_chords(domain.sides[0], domain.sides[1], theta, s)
    if isinstance(domain, Ball):
        g2 = domain.radius**2 - s * s
        if g2 <= 0.0:
            return []
        g = math.sqrt(g2)
        return [(-g, g)]
    if isinstance(domain, Dumbbell):
        x0, xa, xb, x3 = domain.x_breaks
        ny0, ny1 = domain.neck_y()
        b = domain.lobe_height
        pieces = []
        for bx0, bx1, by0, by1 in (
            (x0, xa, 0.0, b), (xa, xb, ny0, ny1), (xb, x3, 0.0, b),
        ):
            # clip against the translated box: shift the line reference
            # point into the box frame
            px = s * ct - bx0
            py = s * st - by0
            dx, dy = -st, ct
            tlo, thi = -math.inf, math.inf
            ok = True
            for p, dvec, hi in ((px, dx, bx1 - bx0), (py, dy, by1 - by0)):
                if abs(dvec) < 1e-300:
                    if p < 0.0 or p > hi:
                        ok = False
                        break
                else:
                    t0, t1 = (0.0 - p) / dvec, (hi - p) / dvec
                    if t0 > t1:
                        t0, t1 = t1, t0
                    tlo, thi = max(tlo, t0), min(thi, t1)
            if ok and thi > tlo:
                pieces.append((tlo, thi))
        return merge_intervals(pieces)
    raise NotImplementedError(f"unsupported domain {type(domain).__name__}")


def weighted_tv_line(domain: Domain, density: Density, theta: float, s: float) -> float:
    """Boundary integral of h = rho^(1-1/d) over the cut {x.n = s} inside D.

    d=2: integral along the chord(s).  d=3 (box or ball): integral over the
    vertical plane section, with the normal restricted to the x1-x2 plane.
    """
    d = domain.dim
    exponent = 1.0 - 1.0 / d
    ct, st = math.cos(theta), math.sin(theta)

    def h_at_t(t):
        # first coordinate along the cut parameterization
        x1 = s * ct - np.asarray(t) * st
        return (density.profile(x1) / density.Z) ** exponent

    if d == 2:
        intervals = _chord_intervals(domain, theta, s)
        total = 0.0
        for tlo, thi in intervals:
            if density.kind == "uniform":
                total += (thi - tlo) * float(h_at_t(0.0))
            else:
                total += gauss_legendre_integrate(h_at_t, tlo, thi)
        return total

    if isinstance(domain, Box):
        depth = domain.sides[2]
        intervals = _chord_intervals(Box(domain.sides[:2]), theta, s)
        total = 0.0
        for tlo, thi in intervals:
            if density.kind == "uniform":
                total += (thi - tlo) * float(h_at_t(0.0))
            else:
                total += gauss_legendre_integrate(h_at_t, tlo, thi)
        return depth * total

    if isinstance(domain, Ball):
        g2 = domain.radius**2 - s * s
        if g2 <= 0.0:
            return 0.0
        g = math.sqrt(g2)
        if density.kind == "uniform":
            return math.pi * g2 * float(h_at_t(0.0))
        return gauss_legendre_integrate(
            lambda t: h_at_t(t) * 2.0 * np.sqrt(np.maximum(g2 - np.asarray(t) ** 2, 0.0)),
            -g, g,
        )

    raise NotImplementedError(f"unsupported d=3 domain {type(domain).__name__}")


# ---------------------------------------------------------------------------
# halfspace masses and centroids
# ---------------------------------------------------------------------------

def _clip_polygon_halfplane(poly, ct, st, s):
    """Sutherland-Hodgman clip of a polygon against {x*ct + y*st <= s}."""
    out = []
    m = len(poly)
    for i in range(m):
        px, py = poly[i]
        qx, qy = poly[(i + 1) % m]
        pin = px * ct + py * st <= s
        qin = qx * ct + qy * st <= s
        if pin:
            out.append((px, py))
        if pin != qin:
            denom = (qx - px) * ct + (qy - py) * st
            t = (s - (px * ct + py * st)) / denom
            out.append((px + t * (qx - px), py + t * (qy - py)))
    return out


def _polygon_area_centroid(poly):
    if len(poly) < 3:
        return 0.0, (0.0, 0.0)
    a = 0.0
    cx = cy = 0.0
    m = len(poly)
    for i in range(m):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % m]
        cross = x0 * y1 - x1 * y0
        a += cross
        cx += (x0 + x1) * cross
        cy += (y0 + y1) * cross
    a *= 0.5
    if abs(a) < 1e-300:
        return 0.0, (0.0, 0.0)
    return abs(a), (cx / (6.0 * a), cy / (6.0 * a))


def _domain_boxes(domain):
    if isinstance(domain, Box):
        return [(0.0, domain.sides[0], 0.0, domain.sides[1])]
    if isinstance(domain, Dumbbell):
        x0, xa, xb, x3 = domain.x_breaks
        ny0, ny1 = domain.neck_y()
        b = domain.lobe_height
        return [(x0, xa, 0.0, b), (xa, xb, ny0, ny1), (xb, x3, 0.0, b)]
    raise NotImplementedError


def halfspace_stats(domain: Domain, density: Density, theta: float, s: float):
    """(mass, centroid) of {x.n < s} ∩ D under the density."""
    d = domain.dim
    ct, st = math.cos(theta), math.sin(theta)

    if density.kind == "uniform" and d == 2 and isinstance(domain, (Box, Dumbbell)):
        rho = 1.0 / density.Z
        mass = 0.0
        cx = cy = 0.0
        for x0, x1, y0, y1 in _domain_boxes(domain):
            poly = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
            clipped = _clip_polygon_halfplane(poly, ct, st, s)
            a, (px, py) = _polygon_area_centroid(clipped)
            mass += a * rho
            cx += a * rho * px
            cy += a * rho * py
        if mass <= 0.0:
            return 0.0, np.zeros(2)
        return mass, np.array([cx / mass, cy / mass])

    if density.kind == "uniform" and isinstance(domain, Ball):
        R = domain.radius
        vol = domain.volume()
        if d == 2:
            area = segment_area(R, s)  # rotation-invariant
            mass = area / vol
        else:
            mass = sphere_cap_volume(R, s) / vol
        if mass <= 0.0:
            return 0.0, np.zeros(d)
        # centroid along the normal by 1-D moments; zero across it
        def moment(t):
            t = np.asarray(t)
            if d == 2:
                width = 2.0 * np.sqrt(np.maximum(R * R - t * t, 0.0))
            else:
                width = math.pi * np.maximum(R * R - t * t, 0.0)
            return t * width / vol
        hi = min(s, R)
        m1 = gauss_legendre_integrate(moment, -R, hi) / mass
        centroid = np.zeros(d)
        centroid[0] = m1 * ct
        centroid[1] = m1 * st
        return mass, centroid

    # generic path: 1-D quadrature over x1 slices
    return _halfspace_stats_sliced(domain, density, theta, s)


def _halfspace_stats_sliced(domain, density, theta, s):
    d = domain.dim
    ct, st = math.cos(theta), math.sin(theta)
    lo, hi = domain.x1_extent()

    if isinstance(domain, Ball) and d == 3:
        R = domain.radius

        def pieces(x1):
            g = domain.slice_radius(x1)
            if g == 0.0:
                return 0.0, 0.0
            if abs(st) < 1e-300:
                inside = (x1 * ct < s)
                area = math.pi * g * g if inside else 0.0
                ymid = 0.0
            else:
                ycut = (s - x1 * ct) / st
                if st > 0:
                    area = segment_area(g, ycut)
                else:
                    area = math.pi * g * g - segment_area(g, ycut)
                ymid = _segment_y_centroid(g, ycut, st > 0)
            return area, ymid
    else:
        def pieces(x1):
            iv = domain.yslice(x1)
            if iv is None:
                return 0.0, 0.0
            ylo, yhi = iv
            if abs(st) < 1e-300:
                if x1 * ct < s:
                    return yhi - ylo, 0.5 * (ylo + yhi)
                return 0.0, 0.0
            ycut = (s - x1 * ct) / st
            if st > 0:
                lo2, hi2 = ylo, min(yhi, ycut)
            else:
                lo2, hi2 = max(ylo, ycut), yhi
            if hi2 <= lo2:
                return 0.0, 0.0
            return hi2 - lo2, 0.5 * (lo2 + hi2)
        if d == 3 and isinstance(domain, Box):
            depth = domain.sides[2]
            base = pieces
            def pieces(x1):
                ln, ymid = base(x1)
                return ln * depth, ymid

    def rho1(x1):
        return float(density.profile(x1)) / density.Z

    breaks = set()
    if isinstance(domain, Dumbbell):
        breaks.update(domain.x_breaks)
    # slices where the cut crosses horizontal box edges give integrand kinks
    if abs(ct) > 1e-300 and isinstance(domain, (Box, Dumbbell)):
        for _, _, y0, y1b in _domain_boxes(domain):
            for y in (y0, y1b):
                xc = (s - y * st) / ct
                if lo < xc < hi:
                    breaks.add(xc)
    if abs(st) < 1e-300 and abs(ct) > 1e-300 and lo < s / ct < hi:
        breaks.add(s / ct)  # vertical cut: the indicator jumps here

    breakpoints = sorted(b for b in breaks if lo < b < hi) or None
    mass = quad(lambda t: rho1(t) * pieces(t)[0], lo, hi, points=breakpoints)
    if mass <= 0.0:
        return 0.0, np.zeros(d)
    m_x = quad(lambda t: t * rho1(t) * pieces(t)[0], lo, hi, points=breakpoints)
    m_y = quad(lambda t: rho1(t) * pieces(t)[0] * pieces(t)[1], lo, hi, points=breakpoints)
    centroid = np.zeros(d)
    centroid[0] = m_x / mass
    centroid[1] = m_y / mass
    if d == 3 and isinstance(domain, Box):
        centroid[2] = 0.5 * domain.sides[2]
    return mass, centroid


def _segment_y_centroid(g, ycut, below):
    """y-centroid of the circular segment {y < ycut} (or >) of disk radius g."""
    if below:
        a, b = -g, min(ycut, g)
    else:
        a, b = max(ycut, -g), g
    if b <= a:
        return 0.0
    # moments of the horizontal strip decomposition
    def width(y):
        y = np.asarray(y)
        return 2.0 * np.sqrt(np.maximum(g * g - y * y, 0.0))
    m0 = gauss_legendre_integrate(width, a, b)
    if m0 <= 0.0:
        return 0.0
    m1 = gauss_legendre_integrate(lambda y: np.asarray(y) * width(y), a, b)
    return m1 / m0


# ---------------------------------------------------------------------------
# cut evaluation and optimization
# ---------------------------------------------------------------------------

def line_cut(domain: Domain, density: Density, theta: float, s: float,
             family: str = "line") -> ContinuumCut:
    """Evaluate one cut of the family: energy, side measures, orientation."""
    tv = weighted_tv_line(domain, density, theta, s)
    mass_neg, cen_neg = halfspace_stats(domain, density, theta, s)
    mass_neg = min(max(mass_neg, 0.0), 1.0)
    mass_pos = 1.0 - mass_neg
    if tv <= 0.0 or min(mass_neg, mass_pos) <= 1e-15:
        side = "neg" if mass_neg <= mass_pos else "pos"
        return ContinuumCut(family, theta, s, tv, min(mass_neg, mass_pos),
                            max(mass_neg, mass_pos), math.inf, side, False)
    if abs(mass_neg - mass_pos) > _TIE_TOL:
        side = "neg" if mass_neg < mass_pos else "pos"
    else:
        _, cen_pos = _complement_centroid(domain, density, theta, s, mass_neg, cen_neg)
        side = "neg" if _lex_less(cen_neg, cen_pos) else "pos"
    nu_a = mass_neg if side == "neg" else mass_pos
    return ContinuumCut(
        family=family, theta=theta, s=s, weighted_tv=tv,
        nu_a=nu_a, nu_ac=1.0 - nu_a,
        value=tv / min(mass_neg, mass_pos), a_side=side, valid=True,
    )


def _complement_centroid(domain, density, theta, s, mass_neg, cen_neg):
    """Centroid of the positive side from the whole-domain centroid."""
    whole_mass, whole_cen = 1.0, _domain_centroid(domain, density)
    mass_pos = whole_mass - mass_neg
    if mass_pos <= 0.0:
        return 0.0, np.zeros(domain.dim)
    cen_pos = (whole_cen - mass_neg * cen_neg) / mass_pos
    return mass_pos, cen_pos


def _domain_centroid(domain, density):
    # exploit that the density profile depends on x1 only
    lo, hi = domain.x1_extent()
    breaks = sorted(set(domain.x_breaks)) if isinstance(domain, Dumbbell) else None

    def rho_cross(t):
        return float(density.profile(t)) / density.Z * domain.cross_section(t)

    cen = np.zeros(domain.dim)
    cen[0] = quad(lambda t: t * rho_cross(t), lo, hi, points=breaks)
    if isinstance(domain, Box):
        cen[1:] = np.asarray(domain.sides[1:]) / 2.0
    elif isinstance(domain, Dumbbell):
        def ymid_weight(t):
            iv = domain.yslice(t)
            if iv is None:
                return 0.0
            return float(density.profile(t)) / density.Z * (iv[1] - iv[0]) * 0.5 * (iv[0] + iv[1])
        cen[1] = quad(ymid_weight, lo, hi, points=breaks)
    # Ball: remaining coordinates are 0 by symmetry
    return cen


def _lex_less(a, b, tol=1e-9):
    for x, y in zip(a, b):
        if x < y - tol:
            return True
        if x > y + tol:
            return False
    return True  # equal centroids: keep "neg"


def _offset_range(domain: Domain, theta: float):
    """Range of x.n over the domain for normal angle theta."""
    ct, st = math.cos(theta), math.sin(theta)
    if isinstance(domain, Ball):
        return -domain.radius, domain.radius
    if isinstance(domain, Box):
        xs = [0.0, domain.sides[0]]
        ys = [0.0, domain.sides[1]]
        vals = [x * ct + y * st for x in xs for y in ys]
        return min(vals), max(vals)
    if isinstance(domain, Dumbbell):
        vals = []
        for x0, x1, y0, y1 in _domain_boxes(domain):
            vals.extend(x * ct + y * st for x in (x0, x1) for y in (y0, y1))
        return min(vals), max(vals)
    raise NotImplementedError


def minimize_continuum(domain: Domain, density: Density, family: str = "line",
                       grid_resolution: int = 48) -> ContinuumReport:
    """Family minimum of the continuum objective.

    Grid scan over the cut parameters followed by golden-section refinement
    of the offset at the best angle.  The reported minimum is restricted to
    the cut family (hyperplanes / neck cuts), which is the comparison
    target used throughout.
    """
    if grid_resolution < 4:
        raise ValueError("grid_resolution must be >= 4")
    if family == "vertical_neck" and not isinstance(domain, Dumbbell):
        raise ValueError("vertical_neck family requires a dumbbell domain")
    if family not in ("line", "vertical_neck"):
        raise ValueError(f"unknown cut family {family!r}")

    thetas = (np.linspace(0.0, math.pi, grid_resolution, endpoint=False)
              if family == "line" else np.array([0.0]))
    scan = []
    best = None
    for theta in thetas:
        smin, smax = _offset_range(domain, float(theta))
        pad = (smax - smin) * 1e-9
        offsets = np.linspace(smin + pad, smax - pad, grid_resolution)
        for s in offsets:
            cut = line_cut(domain, density, float(theta), float(s), family)
            scan.append((float(theta), float(s), cut.value))
            if cut.valid and (best is None or cut.value < best.value):
                best = cut
    if best is None:
        raise ValueError("no valid cut found in the scanned family")

    refined = _golden_refine(domain, density, best, family)
    if refined.valid and refined.value <= best.value:
        best = refined
    target = limit_constants(domain.dim).factor * best.value
    return ContinuumReport(best=best, scan=scan, rescaled_target=target,
                           dim=domain.dim)


def _golden_refine(domain, density, cut, family):
    theta = cut.theta
    smin, smax = _offset_range(domain, theta)
    span = (smax - smin) / 8.0
    lo = max(smin + (smax - smin) * 1e-9, cut.s - span)
    hi = min(smax - (smax - smin) * 1e-9, cut.s + span)

    def f(s):
        c = line_cut(domain, density, theta, s, family)
        return c.value if c.valid else math.inf

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c1 = b - invphi * (b - a)
    c2 = a + invphi * (b - a)
    f1, f2 = f(c1), f(c2)
    while b - a > _GOLDEN_TOL:
        if f1 <= f2:
            b, c2, f2 = c2, c1, f1
            c1 = b - invphi * (b - a)
            f1 = f(c1)
        else:
            a, c1, f1 = c1, c2, f2
            c2 = a + invphi * (b - a)
            f2 = f(c2)
    s_best = c1 if f1 <= f2 else c2
    return line_cut(domain, density, theta, float(s_best), family)


def rescaled_limit_value(report: ContinuumReport, d: int = None) -> float:
    """Asymptotic target for the discrete minimum: limit factor times the
    family minimum (zero for a degenerate zero-value cut)."""
    if d is None:
        d = report.dim
    if not math.isfinite(report.best.value):
        return math.inf
    if report.best.value == 0.0:
        return 0.0
    return limit_constants(d).factor * report.best.value


def continuum_indicator(domain: Domain, cut: ContinuumCut, pts) -> np.ndarray:
    """Indicator of side A at the given points (1 on A, 0 on the complement).

    Side A is closed: points exactly on the cut belong to A.
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    proj = pts[:, 0] * math.cos(cut.theta) + pts[:, 1] * math.sin(cut.theta)
    if cut.a_side == "neg":
        return (proj <= cut.s).astype(np.int8)
    return (proj >= cut.s).astype(np.int8)
