"""Bounded domains, probability densities on them, and i.i.d. point sampling.

Supported shapes are a closed set: axis-aligned boxes, balls, and a planar
dumbbell (two boxes joined by a rectangular neck).  Membership tests are
exact, volumes are closed form, and ball masses nu(B(x,r) ∩ D) reduce to 1-D
quadrature of closed-form slice measures.

Sampling uses the counter-based Philox generator (numpy), so a (domain,
density, n, seed) tuple reproduces the identical cloud on any platform.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from ._geom import (
    circle_circle_area,
    circle_rect_area,
    interval_overlap,
    unit_ball_volume,
)
from .errors import ConfigurationError

_REJECTION_CHUNK = 8192  # fixed so the accepted sequence is seed-deterministic
_MAX_PROPOSAL_FACTOR = 10**6
_QUAD_OPTS = dict(epsabs=1e-10, epsrel=1e-10, limit=200)


def quad(func, a, b, points=None):
    """scipy.integrate.quad tuned for this module's tolerances.

    Roundoff warnings are silenced: slice integrands have sqrt endpoints,
    where quad routinely reports roundoff while still beating 1e-10.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(func, a, b, points=points, **_QUAD_OPTS)
    return val


# ---------------------------------------------------------------------------
# domains
# ---------------------------------------------------------------------------

class Domain:
    """Base class: a bounded open region of R^d with exact membership."""

    dim: int

    def volume(self) -> float:
        raise NotImplementedError

    def contains(self, pts) -> np.ndarray:
        """Exact membership test; pts is (m, d) or (d,), returns bool array."""
        raise NotImplementedError

    def bbox(self):
        """Axis-aligned bounding box as (lo, hi) arrays."""
        raise NotImplementedError

    def x1_extent(self):
        lo, hi = self.bbox()
        return float(lo[0]), float(hi[0])

    def cross_section(self, x1: float) -> float:
        """(d-1)-volume of the slice {x in D : x_1 = x1}."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    @staticmethod
    def from_dict(spec: dict) -> "Domain":
        shape = spec["shape"]
        if shape == "box":
            return Box(spec["sides"])
        if shape == "ball":
            return Ball(spec["radius"], spec["dim"])
        if shape == "dumbbell":
            return Dumbbell(
                spec["lobe_width"], spec["lobe_height"],
                spec["neck_width"], spec["neck_length"],
            )
        raise ValueError(f"unknown domain shape {shape!r}")


@dataclass(frozen=True)
class Box(Domain):
    """Axis-aligned box [0, L1] x ... x [0, Ld]."""

    sides: tuple

    def __init__(self, sides):
        sides = tuple(float(s) for s in sides)
        if len(sides) < 2:
            raise ValueError("box needs dimension >= 2")
        if any(s <= 0 for s in sides):
            raise ValueError("box sides must be positive")
        object.__setattr__(self, "sides", sides)

    @property
    def dim(self):
        return len(self.sides)

    def volume(self):
        return float(np.prod(self.sides))

    def contains(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        lo = pts >= 0.0
        hi = pts <= np.asarray(self.sides)
        return np.all(lo & hi, axis=1)

    def bbox(self):
        return np.zeros(self.dim), np.asarray(self.sides, dtype=float)

    def cross_section(self, x1):
        if x1 < 0.0 or x1 > self.sides[0]:
            return 0.0
        return float(np.prod(self.sides[1:]))

    def yslice(self, x1):
        """y-interval of the slice at x1 (d=2 only)."""
        if x1 < 0.0 or x1 > self.sides[0]:
            return None
        return (0.0, self.sides[1])

    def to_dict(self):
        return {"shape": "box", "sides": list(self.sides)}


@dataclass(frozen=True)
class Ball(Domain):
    """Ball of radius R centered at the origin."""

    radius: float
    dim: int

    def __init__(self, radius, dim):
        radius = float(radius)
        dim = int(dim)
        if radius <= 0:
            raise ValueError("radius must be positive")
        if dim < 2:
            raise ValueError("ball needs dimension >= 2")
        object.__setattr__(self, "radius", radius)
        object.__setattr__(self, "dim", dim)

    def volume(self):
        return unit_ball_volume(self.dim) * self.radius**self.dim

    def contains(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return np.einsum("ij,ij->i", pts, pts) <= self.radius**2

    def bbox(self):
        r = self.radius
        return -r * np.ones(self.dim), r * np.ones(self.dim)

    def slice_radius(self, x1):
        """Radius of the (d-1)-ball slice at coordinate x1."""
        rr = self.radius**2 - x1 * x1
        return math.sqrt(rr) if rr > 0.0 else 0.0

    def cross_section(self, x1):
        g = self.slice_radius(x1)
        if g == 0.0:
            return 0.0
        return unit_ball_volume(self.dim - 1) * g ** (self.dim - 1)

    def yslice(self, x1):
        g = self.slice_radius(x1)
        if g == 0.0:
            return None
        return (-g, g)

    def to_dict(self):
        return {"shape": "ball", "radius": self.radius, "dim": self.dim}


@dataclass(frozen=True)
class Dumbbell(Domain):
    """Two boxes of size a x b joined by a neck of width w and length l (d=2).

    Layout: left lobe [0,a]x[0,b], neck [a, a+l] x [(b-w)/2, (b+w)/2],
    right lobe [a+l, 2a+l] x [0,b].
    """

    lobe_width: float
    lobe_height: float
    neck_width: float
    neck_length: float

    def __init__(self, lobe_width, lobe_height, neck_width, neck_length):
        a, b = float(lobe_width), float(lobe_height)
        w, l = float(neck_width), float(neck_length)
        if min(a, b, w, l) <= 0:
            raise ValueError("dumbbell parameters must be positive")
        if w > b:
            raise ValueError("neck width cannot exceed lobe height")
        object.__setattr__(self, "lobe_width", a)
        object.__setattr__(self, "lobe_height", b)
        object.__setattr__(self, "neck_width", w)
        object.__setattr__(self, "neck_length", l)

    @property
    def dim(self):
        return 2

    def volume(self):
        return 2.0 * self.lobe_width * self.lobe_height + self.neck_width * self.neck_length

    @property
    def x_breaks(self):
        a, l = self.lobe_width, self.neck_length
        return (0.0, a, a + l, 2.0 * a + l)

    def neck_y(self):
        b, w = self.lobe_height, self.neck_width
        return ((b - w) / 2.0, (b + w) / 2.0)

    def contains(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        x, y = pts[:, 0], pts[:, 1]
        a = self.lobe_width
        b = self.lobe_height
        x0, x1, x2, x3 = self.x_breaks
        y0, y1 = self.neck_y()
        in_lobe_x = ((x >= x0) & (x <= x1)) | ((x >= x2) & (x <= x3))
        in_lobe = in_lobe_x & (y >= 0.0) & (y <= b)
        in_neck = (x >= x1) & (x <= x2) & (y >= y0) & (y <= y1)
        return in_lobe | in_neck

    def bbox(self):
        _, _, _, xmax = self.x_breaks
        return np.array([0.0, 0.0]), np.array([xmax, self.lobe_height])

    def cross_section(self, x1):
        iv = self.yslice(x1)
        return 0.0 if iv is None else iv[1] - iv[0]

    def yslice(self, x1):
        x0, xa, xb, x3 = self.x_breaks
        if x1 < x0 or x1 > x3:
            return None
        if xa < x1 < xb:
            return self.neck_y()
        return (0.0, self.lobe_height)

    def lobe_of(self, pts):
        """Lobe labels for points: 0 = left lobe, 1 = right lobe, -1 = neck."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        x = pts[:, 0]
        _, xa, xb, _ = self.x_breaks
        out = np.full(len(x), -1, dtype=int)
        out[x <= xa] = 0
        out[x >= xb] = 1
        return out

    def to_dict(self):
        return {
            "shape": "dumbbell",
            "lobe_width": self.lobe_width,
            "lobe_height": self.lobe_height,
            "neck_width": self.neck_width,
            "neck_length": self.neck_length,
        }


def volume(domain: Domain) -> float:
    """Exact Lebesgue volume of a supported domain."""
    return domain.volume()


# ---------------------------------------------------------------------------
# densities
# ---------------------------------------------------------------------------

class Density:
    """Probability density on a domain, bounded above and below by positive
    constants.  Two kinds: uniform, and a smooth bump
    rho(x) ∝ 1 + a sin(pi (x1 - x1min) / L1) with |a| < 1.
    """

    def __init__(self, domain: Domain, kind: str = "uniform", amplitude: float = 0.0):
        if kind not in ("uniform", "bump"):
            raise ValueError(f"unknown density kind {kind!r}")
        if kind == "bump" and not abs(amplitude) < 1.0:
            raise ValueError("bump amplitude must satisfy |a| < 1")
        self.domain = domain
        self.kind = kind
        self.amplitude = float(amplitude) if kind == "bump" else 0.0
        x1lo, x1hi = domain.x1_extent()
        self._x1lo = x1lo
        self._L1 = x1hi - x1lo
        self.Z = self._normalization()
        # sin(pi t / L1) sweeps [0, 1] over the full extent, so the profile
        # range [1, 1+a] (or [1+a, 1] for a < 0) is attained
        lo_profile = 1.0 + min(0.0, self.amplitude)
        hi_profile = 1.0 + max(0.0, self.amplitude)
        self.rho_min = lo_profile / self.Z
        self.rho_max = hi_profile / self.Z
        self._check_normalized()

    # profile = unnormalized density; depends on x1 only
    def profile(self, x1):
        x1 = np.asarray(x1, dtype=float)
        if self.kind == "uniform":
            return np.ones_like(x1)
        return 1.0 + self.amplitude * np.sin(np.pi * (x1 - self._x1lo) / self._L1)

    def __call__(self, pts):
        """rho evaluated at points, shape (m, d) or (d,)."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return self.profile(pts[:, 0]) / self.Z

    def profile_integral(self, t0: float, t1: float) -> float:
        """Closed-form integral of the unnormalized profile over [t0, t1]."""
        if t1 <= t0:
            return 0.0
        if self.kind == "uniform":
            return t1 - t0
        L, a = self._L1, self.amplitude
        c0 = math.cos(math.pi * (t0 - self._x1lo) / L)
        c1 = math.cos(math.pi * (t1 - self._x1lo) / L)
        return (t1 - t0) + a * L / math.pi * (c0 - c1)

    def _normalization(self):
        dom = self.domain
        if self.kind == "uniform":
            return dom.volume()
        if isinstance(dom, Box):
            # closed form: integral of a*sin(pi t/L) over [0, L] is 2aL/pi
            vol = dom.volume()
            return vol * (1.0 + 2.0 * self.amplitude / math.pi)
        lo, hi = dom.x1_extent()
        breaks = sorted(set(dom.x_breaks)) if isinstance(dom, Dumbbell) else None
        return quad(
            lambda t: float(self.profile(t)) * dom.cross_section(t),
            lo, hi, points=breaks,
        )

    def _check_normalized(self):
        dom = self.domain
        lo, hi = dom.x1_extent()
        breaks = sorted(set(dom.x_breaks)) if isinstance(dom, Dumbbell) else None
        total = quad(
            lambda t: float(self.profile(t)) * dom.cross_section(t) / self.Z,
            lo, hi, points=breaks,
        )
        if abs(total - 1.0) > 1e-8:
            raise ConfigurationError(
                f"density fails to normalize on the domain: integral = {total}"
            )

    def to_dict(self):
        out = {"kind": self.kind}
        if self.kind == "bump":
            out["amplitude"] = self.amplitude
        return out

    @staticmethod
    def from_dict(domain: Domain, spec: dict) -> "Density":
        return Density(domain, spec["kind"], spec.get("amplitude", 0.0))


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PointCloud:
    """n i.i.d. samples from (domain, density), tagged with their provenance."""

    points: np.ndarray
    seed: int
    domain: Domain
    density: Density

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"x{i+1}" for i in range(self.dim)])
        for row in self.points:
            writer.writerow([format(v, ".17g") for v in row])
        return buf.getvalue()

    def manifest(self) -> dict:
        return {
            "n": self.n,
            "seed": self.seed,
            "domain": self.domain.to_dict(),
            "density": self.density.to_dict(),
        }

    @staticmethod
    def from_csv(text: str, manifest: dict) -> "PointCloud":
        rows = list(csv.reader(io.StringIO(text)))
        pts = np.array([[float(v) for v in row] for row in rows[1:]], dtype=float)
        domain = Domain.from_dict(manifest["domain"])
        density = Density.from_dict(domain, manifest["density"])
        return PointCloud(pts, int(manifest["seed"]), domain, density)


def sample(domain: Domain, density: Density, n: int, seed: int) -> PointCloud:
    """Draw n i.i.d. points from the density by rejection against the
    bounding box with envelope rho_max.

    Deterministic given the seed (Philox stream, fixed proposal chunking).
    Raises ConfigurationError if the accept rate is absurdly low.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if density.domain is not domain and density.domain.to_dict() != domain.to_dict():
        raise ValueError("density was normalized on a different domain")
    rng = np.random.Generator(np.random.Philox(seed))
    lo, hi = domain.bbox()
    d = domain.dim
    hi_profile = 1.0 + max(0.0, density.amplitude)
    accepted = []
    got = 0
    proposals = 0
    budget = _MAX_PROPOSAL_FACTOR * n
    while got < n:
        if proposals >= budget:
            raise ConfigurationError(
                "rejection sampling exceeded its proposal budget; "
                "domain/density configuration is inconsistent"
            )
        block = rng.random((_REJECTION_CHUNK, d + 1))
        proposals += _REJECTION_CHUNK
        pts = lo + block[:, :d] * (hi - lo)
        accept = domain.contains(pts)
        if density.kind != "uniform":
            accept &= block[:, d] < density.profile(pts[:, 0]) / hi_profile
        pts = pts[accept]
        if len(pts):
            accepted.append(pts)
            got += len(pts)
    points = np.concatenate(accepted)[:n]
    points.setflags(write=False)
    return PointCloud(points, int(seed), domain, density)


# ---------------------------------------------------------------------------
# ball masses
# ---------------------------------------------------------------------------

def nu_ball(domain: Domain, density: Density, center, r: float) -> float:
    """nu(B(center, r) ∩ D): the density mass of a Euclidean ball.

    Closed form for uniform densities on boxes/balls in d=2,3; otherwise the
    mass reduces to a 1-D quadrature over x1 of closed-form slice measures
    (the profile only depends on x1).  Absolute accuracy ~1e-8.
    """
    if r < 0:
        raise ValueError("radius must be nonnegative")
    if r == 0.0:
        return 0.0
    center = np.asarray(center, dtype=float)
    d = domain.dim
    if d not in (2, 3):
        raise NotImplementedError("nu_ball supports d in {2, 3}")
    rho0 = 1.0 / density.Z  # uniform density value

    if density.kind == "uniform":
        if isinstance(domain, Box):
            if d == 2:
                return rho0 * circle_rect_area(
                    center[0], center[1], r, 0.0, domain.sides[0], 0.0, domain.sides[1]
                )
            return rho0 * _ball_box_volume_3d(domain, center, r)
        if isinstance(domain, Ball):
            if d == 2:
                return rho0 * circle_circle_area(
                    float(np.linalg.norm(center)), domain.radius, r
                )
            return rho0 * _ball_ball_volume_3d(domain, center, r)

    # generic path: integrate profile(x1)/Z times the slice measure
    lo, hi = domain.x1_extent()
    a = max(lo, center[0] - r)
    b = min(hi, center[0] + r)
    if b <= a:
        return 0.0

    if d == 2:
        def slice_measure(x1):
            g2 = r * r - (x1 - center[0]) ** 2
            if g2 <= 0.0:
                return 0.0
            g = math.sqrt(g2)
            iv = domain.yslice(x1)
            if iv is None:
                return 0.0
            return interval_overlap(iv[0], iv[1], center[1] - g, center[1] + g)
    else:
        def slice_measure(x1):
            g2 = r * r - (x1 - center[0]) ** 2
            if g2 <= 0.0:
                return 0.0
            g = math.sqrt(g2)
            if isinstance(domain, Box):
                return circle_rect_area(
                    center[1], center[2], g,
                    0.0, domain.sides[1], 0.0, domain.sides[2],
                )
            if isinstance(domain, Ball):
                sr = domain.slice_radius(x1)
                if sr == 0.0:
                    return 0.0
                dist = math.hypot(center[1], center[2])
                return circle_circle_area(dist, sr, g)
            raise NotImplementedError

    breaks = [center[0]]
    if isinstance(domain, Dumbbell):
        breaks.extend(domain.x_breaks)
    breaks = sorted({t for t in breaks if a < t < b})
    return quad(
        lambda t: float(density.profile(t)) / density.Z * slice_measure(t),
        a, b, points=breaks or None,
    )


def _ball_box_volume_3d(domain: Box, center, r):
    a = max(0.0, center[0] - r)
    b = min(domain.sides[0], center[0] + r)
    if b <= a:
        return 0.0

    def area(x1):
        g2 = r * r - (x1 - center[0]) ** 2
        if g2 <= 0.0:
            return 0.0
        return circle_rect_area(
            center[1], center[2], math.sqrt(g2),
            0.0, domain.sides[1], 0.0, domain.sides[2],
        )

    return quad(area, a, b, points=[center[0]] if a < center[0] < b else None)


def _ball_ball_volume_3d(domain: Ball, center, r):
    a = max(-domain.radius, center[0] - r)
    b = min(domain.radius, center[0] + r)
    if b <= a:
        return 0.0
    dist_yz = math.hypot(center[1], center[2])

    def area(x1):
        g2 = r * r - (x1 - center[0]) ** 2
        if g2 <= 0.0:
            return 0.0
        sr = domain.slice_radius(x1)
        if sr == 0.0:
            return 0.0
        return circle_circle_area(dist_yz, sr, math.sqrt(g2))

    return quad(area, a, b, points=[center[0]] if a < center[0] < b else None)


def save_cloud(cloud: PointCloud, path: str) -> None:
    """Write `path` (CSV) and the JSON manifest next to it (`path` + .json)."""
    with open(path, "w") as fh:
        fh.write(cloud.to_csv())
    with open(path + ".json", "w") as fh:
        json.dump(cloud.manifest(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_cloud(path: str) -> PointCloud:
    with open(path) as fh:
        text = fh.read()
    with open(path + ".json") as fh:
        manifest = json.load(fh)
    return PointCloud.from_csv(text, manifest)
