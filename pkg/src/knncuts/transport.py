"""Discrete optimal transport: the TL1 metric and bottleneck matchings.

All solvers are exact.  The TL1 cost between (measure, function) pairs is
the optimal coupling cost of displacement plus function discrepancy; equal
uniform supports go through the assignment solver, everything else through
a transportation LP (HiGHS), with column generation plus a reduced-cost
optimality certificate once the dense arc set would be too large to hold.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import linear_sum_assignment, linprog
from scipy.sparse.csgraph import maximum_bipartite_matching
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from ._geom import circle_rect_area
from ._netsimplex import solve_transportation
from .continuum import ContinuumCut, continuum_indicator
from .domain import Ball, Box, Density, Domain, Dumbbell, PointCloud, quad, sample
from .errors import BudgetError
from .functionals import Partition

DEFAULT_COST_BUDGET = 4_000_000
_DENSE_ARC_LIMIT = 250_000
_LP_OPTS = {
    "presolve": True,
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finitely many atoms with positive masses summing to one."""

    points: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        w = np.asarray(self.masses, dtype=float)
        if len(pts) != len(w):
            raise ValueError("points and masses must have equal length")
        if np.any(w <= 0):
            raise ValueError("masses must be positive")
        if abs(w.sum() - 1.0) > 1e-10:
            raise ValueError(f"masses must sum to 1, got {w.sum()}")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "masses", w)

    @property
    def size(self):
        return len(self.masses)

    def is_uniform(self):
        return bool(np.allclose(self.masses, 1.0 / self.size, atol=1e-12))

    @staticmethod
    def from_cloud(cloud: PointCloud) -> "DiscreteMeasure":
        n = cloud.n
        return DiscreteMeasure(cloud.points, np.full(n, 1.0 / n))


@dataclass(frozen=True)
class TransportPlan:
    """Sparse coupling between two discrete measures."""

    src: np.ndarray
    dst: np.ndarray
    mass: np.ndarray
    cost_tl1: float   # objective value of this plan
    cost_inf: float   # max displacement |x - y| over the support

    def displacements(self, mu1: DiscreteMeasure, mu2: DiscreteMeasure):
        return np.linalg.norm(
            mu1.points[self.src] - mu2.points[self.dst], axis=1
        )

    def check_marginals(self, mu1: DiscreteMeasure, mu2: DiscreteMeasure,
                        tol: float = 1e-8) -> bool:
        out = np.zeros(mu1.size)
        np.add.at(out, self.src, self.mass)
        into = np.zeros(mu2.size)
        np.add.at(into, self.dst, self.mass)
        return bool(
            np.all(np.abs(out - mu1.masses) <= tol)
            and np.all(np.abs(into - mu2.masses) <= tol)
        )

    def to_csv(self, mu1: DiscreteMeasure, mu2: DiscreteMeasure) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["src", "dst", "mass", "displacement"])
        disp = self.displacements(mu1, mu2)
        for s, t, w, dl in zip(self.src, self.dst, self.mass, disp):
            writer.writerow([int(s), int(t), format(w, ".17g"), format(dl, ".17g")])
        return buf.getvalue()


def _plan_from_arcs(src, dst, mass, cost, points1, points2):
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    mass = np.asarray(mass, dtype=float)
    disp = np.linalg.norm(points1[src] - points2[dst], axis=1)
    cinf = float(disp.max()) if len(disp) else 0.0
    return TransportPlan(src=src, dst=dst, mass=mass, cost_tl1=float(cost),
                         cost_inf=cinf)


# ---------------------------------------------------------------------------
# quantization of continuum measures
# ---------------------------------------------------------------------------

def quantize(domain: Domain, density: Density, m: int,
             scheme: str = "grid", seed: int = 0) -> DiscreteMeasure:
    """m-atom approximation of the continuum measure.

    "grid": ceil(m^(1/d)) cells per bbox axis, atom at every cell center
    with the exact cell mass nu(cell ∩ D); zero-mass cells are dropped.
    "montecarlo": m i.i.d. samples with mass 1/m.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if scheme == "montecarlo":
        cloud = sample(domain, density, m, seed)
        return DiscreteMeasure(cloud.points, np.full(m, 1.0 / m))
    if scheme != "grid":
        raise ValueError(f"unknown quantization scheme {scheme!r}")

    d = domain.dim
    g = max(1, math.ceil(m ** (1.0 / d) - 1e-9))
    lo, hi = domain.bbox()
    edges = [np.linspace(lo[a], hi[a], g + 1) for a in range(d)]
    centers = [0.5 * (e[:-1] + e[1:]) for e in edges]

    if isinstance(domain, Box):
        masses = _box_grid_masses(domain, density, edges)
    else:
        masses = _generic_grid_masses(domain, density, edges)

    mesh = np.meshgrid(*centers, indexing="ij")
    pts = np.stack([mm.ravel() for mm in mesh], axis=1)
    w = masses.ravel()
    keep = w > 1e-15
    w = w[keep]
    return DiscreteMeasure(pts[keep], w / w.sum())


def _box_grid_masses(domain: Box, density: Density, edges):
    # separable: profile integral along x1, plain lengths elsewhere
    ix = np.array([
        density.profile_integral(a, b) for a, b in zip(edges[0][:-1], edges[0][1:])
    ])
    masses = ix / density.Z
    for e in edges[1:]:
        masses = np.multiply.outer(masses, np.diff(e))
    return masses


def _generic_grid_masses(domain: Domain, density: Density, edges):
    d = domain.dim
    shape = tuple(len(e) - 1 for e in edges)
    masses = np.zeros(shape)
    for idx in np.ndindex(shape):
        lo = [edges[a][idx[a]] for a in range(d)]
        hi = [edges[a][idx[a] + 1] for a in range(d)]
        masses[idx] = _cell_mass(domain, density, lo, hi)
    return masses


def _cell_mass(domain: Domain, density: Density, lo, hi):
    """nu of an axis-aligned cell intersected with the domain."""
    d = domain.dim
    if isinstance(domain, Dumbbell):
        total = 0.0
        from .continuum import _domain_boxes
        for bx0, bx1, by0, by1 in _domain_boxes(domain):
            x0, x1 = max(lo[0], bx0), min(hi[0], bx1)
            y0, y1 = max(lo[1], by0), min(hi[1], by1)
            if x1 > x0 and y1 > y0:
                total += density.profile_integral(x0, x1) * (y1 - y0) / density.Z
        return total
    if isinstance(domain, Ball) and d == 2:
        if density.kind == "uniform":
            return circle_rect_area(0.0, 0.0, domain.radius,
                                    lo[0], hi[0], lo[1], hi[1]) / density.Z

        def slice_len(t):
            iv = domain.yslice(t)
            if iv is None:
                return 0.0
            return max(0.0, min(iv[1], hi[1]) - max(iv[0], lo[1]))

        return quad(
            lambda t: float(density.profile(t)) / density.Z * slice_len(t),
            max(lo[0], -domain.radius), min(hi[0], domain.radius),
        )
    if isinstance(domain, Ball) and d == 3:
        def slice_area(t):
            g = domain.slice_radius(t)
            if g == 0.0:
                return 0.0
            return circle_rect_area(0.0, 0.0, g, lo[1], hi[1], lo[2], hi[2])

        a = max(lo[0], -domain.radius)
        b = min(hi[0], domain.radius)
        if b <= a:
            return 0.0
        return quad(lambda t: float(density.profile(t)) / density.Z * slice_area(t), a, b)
    raise NotImplementedError(f"grid quantization for {type(domain).__name__} d={d}")


# ---------------------------------------------------------------------------
# TL1 distance
# ---------------------------------------------------------------------------

def tl1_cost_matrix(mu1, u1, mu2, u2):
    c = cdist(mu1.points, mu2.points)
    c += np.abs(np.asarray(u1, dtype=float)[:, None] - np.asarray(u2, dtype=float)[None, :])
    return c


def tl1_distance(mu1: DiscreteMeasure, u1, mu2: DiscreteMeasure, u2,
                 max_cost_entries: int = DEFAULT_COST_BUDGET):
    """Exact TL1 distance and an optimal coupling.

    min over couplings pi of  int |x - y| + |u1(x) - u2(y)| dpi.
    Equal-size uniform measures use the assignment solver; general measures
    a transportation LP.  Problems whose dense cost would exceed
    max_cost_entries raise BudgetError (quantize to fewer atoms, or raise
    the budget explicitly).
    """
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    if u1.shape != (mu1.size,) or u2.shape != (mu2.size,):
        raise ValueError("function values must match the measure supports")
    n, m = mu1.size, mu2.size
    if n * m > max_cost_entries:
        raise BudgetError(
            f"cost matrix would hold {n * m} entries (> {max_cost_entries}); "
            "quantize one side to fewer atoms or pass a larger budget"
        )
    if n == m and mu1.is_uniform() and mu2.is_uniform():
        c = tl1_cost_matrix(mu1, u1, mu2, u2)
        rows, cols = linear_sum_assignment(c)
        w = np.full(n, 1.0 / n)
        cost = float(c[rows, cols].sum() / n)
        return cost, _plan_from_arcs(rows, cols, w, cost, mu1.points, mu2.points)
    if n * m <= _DENSE_ARC_LIMIT:
        return _transport_lp_dense(mu1, u1, mu2, u2)
    cost, plan, _ = _transport_lp_colgen(mu1, u1, mu2, u2)
    return cost, plan


def _marginal_matrix(n, m, arc_src, arc_dst):
    k = len(arc_src)
    rows = np.concatenate([arc_src, n + arc_dst])
    cols = np.concatenate([np.arange(k), np.arange(k)])
    data = np.ones(2 * k)
    return sparse.csr_matrix((data, (rows, cols)), shape=(n + m, k))


def _solve_restricted(mu1, mu2, arc_src, arc_dst, arc_cost):
    """Exact solve over candidate arcs: (flows, objective, duals f, duals g).

    Network simplex first; HiGHS as the fallback when the pivot budget is
    exhausted (degenerate cycling) or numba is unavailable.
    """
    try:
        flows, f, g = solve_transportation(arc_src, arc_dst, arc_cost,
                                           mu1.masses, mu2.masses)
        return flows, float(np.dot(flows, arc_cost)), f, g
    except RuntimeError:
        pass
    a_eq = _marginal_matrix(mu1.size, mu2.size, arc_src, arc_dst)
    b_eq = np.concatenate([mu1.masses, mu2.masses])
    res = linprog(arc_cost, A_eq=a_eq, b_eq=b_eq, bounds=(0, None),
                  method="highs", options=_LP_OPTS)
    if not res.success:
        raise RuntimeError(f"transport LP failed: {res.message}")
    duals = res.eqlin.marginals
    return res.x, float(res.fun), duals[: mu1.size], duals[mu1.size:]


def _transport_lp_dense(mu1, u1, mu2, u2):
    n, m = mu1.size, mu2.size
    c = tl1_cost_matrix(mu1, u1, mu2, u2)
    src = np.repeat(np.arange(n), m)
    dst = np.tile(np.arange(m), n)
    flows, fun, _, _ = _solve_restricted(mu1, mu2, src, dst, c.ravel())
    keep = flows > 1e-14
    return fun, _plan_from_arcs(
        src[keep], dst[keep], flows[keep], fun, mu1.points, mu2.points
    )


def _arc_cost(mu1, u1, mu2, u2, src, dst):
    disp = np.linalg.norm(mu1.points[src] - mu2.points[dst], axis=1)
    return disp + np.abs(u1[src] - u2[dst])


def _greedy_feasible_arcs(mu1, mu2):
    """Support of a feasible short-arc transport (greedy nearest assignment
    with expanding neighbor queries).  Gives the restricted LP a feasible
    basis whose cost is already near the optimum."""
    n, m = mu1.size, mu2.size
    tree2 = cKDTree(mu2.points)
    remaining = mu2.masses.copy()
    pairs = []
    for i in range(n):
        need = mu1.masses[i]
        kq = min(16, m)
        offset = 0
        while need > 1e-13:
            _, idx = tree2.query(mu1.points[i], k=kq)
            idx = np.atleast_1d(idx)
            for j in idx[offset:]:
                j = int(j)
                if remaining[j] <= 0.0:
                    continue
                take = min(need, remaining[j])
                remaining[j] -= take
                need -= take
                pairs.append((i, j))
                if need <= 1e-13:
                    break
            if need > 1e-13:
                if kq >= m:
                    break  # numerically exhausted; LP still has kNN arcs
                offset = kq
                kq = min(4 * kq, m)
    return pairs


def _initial_arcs(mu1, u1, mu2, u2, neighbors=12):
    """Greedy feasible support, spatially near arcs, and near arcs among
    targets with matching function value (cheap arcs under the u-term)."""
    n, m = mu1.size, mu2.size
    pairs = set(_greedy_feasible_arcs(mu1, mu2))
    tree2 = cKDTree(mu2.points)
    _, idx = tree2.query(mu1.points, k=min(neighbors, m))
    idx = np.atleast_2d(idx)
    for i in range(n):
        for j in idx[i]:
            pairs.add((i, int(j)))
    # nearest targets whose u-value matches the source's
    for label in np.unique(u2):
        sel = np.flatnonzero(u2 == label)
        if len(sel) == 0:
            continue
        sub = cKDTree(mu2.points[sel])
        srcs = np.flatnonzero(u1 == label)
        if len(srcs) == 0:
            continue
        _, idxm = sub.query(mu1.points[srcs], k=min(8, len(sel)))
        idxm = np.atleast_2d(idxm)
        for row, i in enumerate(srcs):
            for j in idxm[row]:
                pairs.add((int(i), int(sel[j])))
    tree1 = cKDTree(mu1.points)
    _, idx1 = tree1.query(mu2.points, k=min(8, n))
    idx1 = np.atleast_2d(idx1)
    for j in range(m):
        for i in idx1[j]:
            pairs.add((int(i), j))
    arr = np.array(sorted(pairs), dtype=np.int64)
    return arr[:, 0], arr[:, 1]


def _price_all_pairs(mu1, u1, mu2, u2, f, g, take, price_tol):
    """Scan every pair's reduced cost in chunks.

    Returns (violating source arcs, per-column most-negative reduced cost).
    """
    n, m = mu1.size, mu2.size
    chunk = max(1, (1 << 22) // m)
    new_src, new_dst = [], []
    col_min = np.full(m, np.inf)
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        block = cdist(mu1.points[start:stop], mu2.points)
        block += np.abs(u1[start:stop, None] - u2[None, :])
        block -= f[start:stop, None]
        block -= g[None, :]
        np.minimum(col_min, block.min(axis=0), out=col_min)
        cols = np.argpartition(block, take - 1, axis=1)[:, :take]
        rows = np.arange(start, stop)[:, None]
        viol = block[np.arange(stop - start)[:, None], cols] < -price_tol
        if viol.any():
            new_src.append(np.broadcast_to(rows, cols.shape)[viol])
            new_dst.append(cols[viol])
    if new_src:
        return (np.concatenate(new_src), np.concatenate(new_dst)), col_min
    return None, col_min


def _dual_lower_bound(fun, col_min, masses2):
    """Valid lower bound on the full-problem optimum from restricted duals.

    Shifting each column dual down by its worst violation restores dual
    feasibility, reducing the dual objective by sum(violation * mass).
    """
    slack = np.minimum(col_min, 0.0)
    return fun + float(np.dot(slack, masses2))


def _transport_lp_colgen(mu1, u1, mu2, u2, max_rounds=40, price_tol=1e-9,
                         seed_arcs=None, pool_cap=400_000, stop_above=None):
    """Exact transport via column generation with a reduced-cost certificate.

    Between rounds the arc pool keeps all positive-flow arcs and the
    lowest-reduced-cost candidates up to pool_cap, so restricted solves stay
    small.  If stop_above is given and a dual lower bound certifies the
    optimum exceeds it, returns (bound, None, arcs) early — used to prune
    provably-worse label alignments without solving them out.
    """
    n, m = mu1.size, mu2.size
    src, dst = _initial_arcs(mu1, u1, mu2, u2)
    if seed_arcs is not None:
        flat = np.unique(np.concatenate([src * m + dst,
                                         seed_arcs[0] * m + seed_arcs[1]]))
        src, dst = flat // m, flat % m
    cost = _arc_cost(mu1, u1, mu2, u2, src, dst)
    take = min(24, m)
    prev_fun = np.inf
    for _ in range(max_rounds):
        flows, fun, f, g = _solve_restricted(mu1, mu2, src, dst, cost)
        violations, col_min = _price_all_pairs(mu1, u1, mu2, u2, f, g,
                                               take, price_tol)
        if violations is None:
            keep = flows > 1e-14
            plan = _plan_from_arcs(src[keep], dst[keep], flows[keep], fun,
                                   mu1.points, mu2.points)
            return fun, plan, (src, dst)
        if stop_above is not None:
            bound = _dual_lower_bound(fun, col_min, mu2.masses)
            if bound > stop_above:
                return bound, None, (src, dst)
        if fun > prev_fun - 0.005 * max(abs(fun), 1e-12):
            take = min(4 * take, 256, m)  # stalling: widen the arc intake
        prev_fun = fun
        flat_old = src * m + dst
        flat_new = np.unique(np.concatenate([
            flat_old, violations[0] * m + violations[1],
        ]))
        if len(flat_new) == len(flat_old):
            keep = flows > 1e-14
            plan = _plan_from_arcs(src[keep], dst[keep], flows[keep], fun,
                                   mu1.points, mu2.points)
            return fun, plan, (src, dst)
        new_src, new_dst = flat_new // m, flat_new % m
        new_cost = _arc_cost(mu1, u1, mu2, u2, new_src, new_dst)
        if len(new_src) > pool_cap:
            # trim: keep positive-flow arcs plus the cheapest reduced costs
            in_flow = np.isin(flat_new, flat_old[flows > 1e-14])
            red = new_cost - f[new_src] - g[new_dst]
            order = np.argsort(red, kind="stable")
            order = order[~in_flow[order]]
            room = max(0, pool_cap - int(in_flow.sum()))
            kept_idx = np.unique(np.concatenate([
                np.flatnonzero(in_flow), order[:room],
            ]))
            new_src, new_dst, new_cost = (new_src[kept_idx], new_dst[kept_idx],
                                          new_cost[kept_idx])
        src, dst, cost = new_src, new_dst, new_cost
    raise RuntimeError("column generation did not certify optimality")


# ---------------------------------------------------------------------------
# bottleneck matching
# ---------------------------------------------------------------------------

def inf_transport_estimate(mu1: DiscreteMeasure, mu2: DiscreteMeasure):
    """Min-max-displacement matching between equal-size uniform measures.

    Binary search on the distance threshold; feasibility via maximum
    bipartite matching.  Returns (cost_inf, plan).
    """
    if mu1.size != mu2.size:
        raise ValueError("bottleneck matching needs equal atom counts")
    if not (mu1.is_uniform() and mu2.is_uniform()):
        raise ValueError("bottleneck matching needs uniform masses")
    n = mu1.size
    dmat = cdist(mu1.points, mu2.points)
    candidates = np.unique(dmat)

    def matching_at(thresh):
        adj = sparse.csr_matrix(dmat <= thresh)
        match = maximum_bipartite_matching(adj, perm_type="column")
        return match if np.all(match >= 0) else None

    lo, hi = 0, len(candidates) - 1
    if matching_at(candidates[0]) is not None:
        hi = 0
    while lo < hi:
        mid = (lo + hi) // 2
        if matching_at(candidates[mid]) is not None:
            hi = mid
        else:
            lo = mid + 1
    thresh = candidates[hi]
    match = matching_at(thresh)
    rows = np.arange(n)
    w = np.full(n, 1.0 / n)
    disp = dmat[rows, match]
    cost_tl1 = float(disp.mean())
    return float(disp.max()), TransportPlan(
        src=rows, dst=np.asarray(match, dtype=np.int64), mass=w,
        cost_tl1=cost_tl1, cost_inf=float(disp.max()),
    )


# ---------------------------------------------------------------------------
# discrete-vs-continuum comparison
# ---------------------------------------------------------------------------

def tl1_discrete_vs_continuum(cloud: PointCloud, part: Partition,
                              domain: Domain, density: Density,
                              cut: ContinuumCut, m: int,
                              scheme: str = "grid",
                              max_cost_entries: int = None) -> float:
    """TL1 distance from (empirical measure, partition indicator) to the
    quantized continuum measure with the cut's side-A indicator.

    Both labelings of the partition are evaluated and the smaller distance
    returned: minimizers are identified up to complement.
    """
    mu1 = DiscreteMeasure.from_cloud(cloud)
    u1 = part.mask.astype(float)
    mu2 = quantize(domain, density, m, scheme=scheme)
    u2 = continuum_indicator(domain, cut, mu2.points).astype(float)
    if max_cost_entries is None:
        # the caller fixed m deliberately; budget exactly that size
        max_cost_entries = max(DEFAULT_COST_BUDGET, mu1.size * mu2.size)
    if mu1.size * mu2.size > max_cost_entries:
        raise BudgetError("requested quantization exceeds the cost budget")
    return _tl1_complement_min(mu1, u1, mu2, u2, max_cost_entries)


def _tl1_complement_min(mu1, u1, mu2, u2, max_cost_entries, stop_above=None):
    """min over the two labelings of u1 of the exact TL1 distance.

    With stop_above set, may return a certified lower bound larger than
    stop_above instead of the exact value (then the true distance cannot
    be the minimum the caller is taking).
    """
    large = mu1.size * mu2.size > _DENSE_ARC_LIMIT and not (
        mu1.size == mu2.size and mu1.is_uniform() and mu2.is_uniform()
    )
    if not large:
        d_direct, _ = tl1_distance(mu1, u1, mu2, u2,
                                   max_cost_entries=max_cost_entries)
        d_flipped, _ = tl1_distance(mu1, 1.0 - u1, mu2, u2,
                                    max_cost_entries=max_cost_entries)
        return min(d_direct, d_flipped)
    # solve the better-matching labeling first, then try to prune the other
    # one with a dual lower bound instead of solving it out; the proxy is
    # label agreement under a nearest-atom map
    _, nearest = cKDTree(mu2.points).query(mu1.points, k=1)
    mismatch = float(np.dot(mu1.masses, np.abs(u1 - u2[nearest])))
    first_flipped = (1.0 - mismatch) < mismatch
    ua = 1.0 - u1 if first_flipped else u1
    ub = u1 if first_flipped else 1.0 - u1
    d_a, plan_a, arcs = _transport_lp_colgen(mu1, ua, mu2, u2,
                                             stop_above=stop_above)
    if plan_a is None:
        # alignment a certified above stop_above; screen b independently
        d_b, plan_b, _ = _transport_lp_colgen(mu1, ub, mu2, u2,
                                              seed_arcs=arcs,
                                              stop_above=stop_above)
        return d_b if plan_b is not None else min(d_a, d_b)
    cutoff = d_a if stop_above is None else min(d_a, stop_above)
    d_b, plan_b, _ = _transport_lp_colgen(mu1, ub, mu2, u2, seed_arcs=arcs,
                                          stop_above=cutoff)
    if plan_b is None:
        return d_a  # pruned: certified d_b >= bound > cutoff
    return min(d_a, d_b)


def tl1_to_cut_set(cloud: PointCloud, part: Partition, domain: Domain,
                   density: Density, cuts, m: int, scheme: str = "grid") -> float:
    """Smallest TL1 distance from the partition to any cut in the list.

    Used when the continuum problem has several minimizers (symmetric
    domains): convergence of discrete minimizers targets the minimizer
    set.  Cuts are tried in order of a label-agreement proxy; later cuts
    are pruned by certified dual bounds once they provably exceed the
    running best.
    """
    if not cuts:
        raise ValueError("need at least one cut")
    mu1 = DiscreteMeasure.from_cloud(cloud)
    u1 = part.mask.astype(float)
    mu2 = quantize(domain, density, m, scheme=scheme)
    budget = max(DEFAULT_COST_BUDGET, mu1.size * mu2.size)
    tree = cKDTree(mu2.points)
    _, nearest = tree.query(mu1.points, k=1)
    ranked = []
    for cut in cuts:
        u2 = continuum_indicator(domain, cut, mu2.points).astype(float)
        mis = float(np.dot(mu1.masses, np.abs(u1 - u2[nearest])))
        ranked.append((min(mis, 1.0 - mis), u2))
    ranked.sort(key=lambda t: t[0])
    best = None
    for _, u2 in ranked:
        val = _tl1_complement_min(mu1, u1, mu2, u2, budget, stop_above=best)
        if best is None or val < best:
            best = val
    return best
