"""Closed-form areas for circle/rectangle/half-plane intersections.

These primitives back the exact ball-mass and cut-measure quadratures: every
domain slice reduces to intervals, rectangles or disks, so the integrands
below are evaluated in closed form and only the outer 1-D integral is numeric.
"""

import math

import numpy as np


def segment_area(r, t):
    """Area of {x <= t} inside a disk of radius r centered at the origin."""
    if r <= 0.0:
        return 0.0
    if t <= -r:
        return 0.0
    if t >= r:
        return math.pi * r * r
    return t * math.sqrt(r * r - t * t) + r * r * (math.asin(t / r) + math.pi / 2.0)


def _antider_full(x, r):
    # antiderivative of 2*sqrt(r^2 - x^2)
    x = min(max(x, -r), r)
    return x * math.sqrt(max(r * r - x * x, 0.0)) + r * r * math.asin(x / r)


def _corner_area(a, b, r):
    """Area of {x <= a, y <= b} inside the disk of radius r at the origin."""
    if r <= 0.0 or a <= -r or b <= -r:
        return 0.0
    if a >= r and b >= r:
        return math.pi * r * r
    if b >= r:
        return segment_area(r, a)
    if a >= r:
        return segment_area(r, b)
    # both cuts pass through the disk; chord half-width g(x) = sqrt(r^2 - x^2)
    c = math.sqrt(max(r * r - b * b, 0.0))

    def partial(x0, x1):
        # integral of (b + g(x)) over [x0, x1]
        if x1 <= x0:
            return 0.0
        return b * (x1 - x0) + 0.5 * (_antider_full(x1, r) - _antider_full(x0, r))

    def full(x0, x1):
        # integral of 2 g(x) over [x0, x1]
        if x1 <= x0:
            return 0.0
        return _antider_full(x1, r) - _antider_full(x0, r)

    if b >= 0.0:
        # full chord below y=b for |x| >= c, partial in between
        total = full(-r, min(a, -c))
        total += partial(-c, min(max(a, -c), c))
        if a > c:
            total += full(c, a)
        return total
    # b < 0: contribution only where the chord dips below b, |x| < c
    return partial(-c, min(max(a, -c), c))


def circle_rect_area(cx, cy, r, x0, x1, y0, y1):
    """Area of the axis-aligned rectangle [x0,x1]x[y0,y1] inside disk((cx,cy), r)."""
    if r <= 0.0 or x1 <= x0 or y1 <= y0:
        return 0.0
    a0, a1 = x0 - cx, x1 - cx
    b0, b1 = y0 - cy, y1 - cy
    area = (
        _corner_area(a1, b1, r)
        - _corner_area(a0, b1, r)
        - _corner_area(a1, b0, r)
        + _corner_area(a0, b0, r)
    )
    return max(area, 0.0)


def circle_circle_area(d, r1, r2):
    """Lens area of two disks with center distance d and radii r1, r2."""
    if r1 <= 0.0 or r2 <= 0.0:
        return 0.0
    if d >= r1 + r2:
        return 0.0
    if d <= abs(r1 - r2):
        rm = min(r1, r2)
        return math.pi * rm * rm
    # standard two-sector-minus-triangle formula
    q1 = (d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)
    q2 = (d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)
    q1 = min(1.0, max(-1.0, q1))
    q2 = min(1.0, max(-1.0, q2))
    tri = 0.5 * math.sqrt(
        max((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2), 0.0)
    )
    return r1 * r1 * math.acos(q1) + r2 * r2 * math.acos(q2) - tri


def sphere_cap_volume(R, t):
    """Volume of {x1 <= t} inside the ball of radius R at the origin (d=3)."""
    if t <= -R:
        return 0.0
    if t >= R:
        return 4.0 * math.pi * R**3 / 3.0
    return math.pi * (R * R * t - t**3 / 3.0 + 2.0 * R**3 / 3.0)


def interval_overlap(a0, a1, b0, b1):
    """Length of [a0,a1] ∩ [b0,b1]."""
    return max(0.0, min(a1, b1) - max(a0, b0))


def clamp(x, lo, hi):
    return min(max(x, lo), hi)


def unit_ball_volume(d):
    """Lebesgue volume of the unit ball in R^d."""
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)


def merge_intervals(intervals):
    """Union of closed intervals as a sorted list of disjoint (lo, hi) pairs."""
    ivs = sorted((lo, hi) for lo, hi in intervals if hi > lo)
    merged = []
    for lo, hi in ivs:
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


def gauss_legendre_integrate(f, a, b, order=64):
    """Fixed-order Gauss-Legendre quadrature of a vectorized f over [a, b]."""
    if b <= a:
        return 0.0
    nodes, weights = np.polynomial.legendre.leggauss(order)
    x = 0.5 * (b - a) * nodes + 0.5 * (a + b)
    return 0.5 * (b - a) * float(np.dot(weights, f(x)))
