"""Minimizers for the balanced-cut objective.

Tiny graphs are solved exactly by enumerating subsets; at scale the pipeline
is: Fiedler vector of the unweighted graph Laplacian -> sweep over the
induced vertex ordering -> greedy single-vertex refinement.  The sweep and
refinement always evaluate the true rescaled objective; the spectral
relaxation only supplies an ordering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from .errors import BudgetError, DisconnectedGraphError
from .functionals import CutResult, Partition, cheeger_cut, gtv_scale
from .graphs import KnnGraph, is_connected

EXACT_LIMIT = 24
_ENUM_CHUNK = 1 << 18


@dataclass(frozen=True)
class SolverReport:
    best: Partition
    best_result: CutResult
    method: str  # "exact" | "spectral_sweep" | "spectral_sweep_refined"
    iterations: int
    eigen_residual: float | None = None

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "iterations": self.iterations,
            "eigen_residual": self.eigen_residual,
            "partition": self.best.to_dict(),
            "result": self.best_result.to_dict(),
        }


# ---------------------------------------------------------------------------
# exact enumeration
# ---------------------------------------------------------------------------

def solve_exact(graph: KnnGraph) -> SolverReport:
    """Global minimum over all proper subsets; n <= 24.

    Vertex 0 is pinned to side A (complement symmetry halves the search).
    Ties resolve to the smallest (|A|, mask-integer) pair.
    """
    n = graph.n
    if n > EXACT_LIMIT:
        raise BudgetError(f"exact enumeration limited to n <= {EXACT_LIMIT}, got {n}")
    if n < 2:
        raise ValueError("need at least two vertices")
    edges = graph.edges
    scale = gtv_scale(graph)
    total = 1 << (n - 1)
    best_key = None
    best_mask_int = None
    count = 0
    for start in range(0, total, _ENUM_CHUNK):
        stop = min(start + _ENUM_CHUNK, total)
        # all odd masks = subsets containing vertex 0; drop the full set
        masks = (np.arange(start, stop, dtype=np.int64) << 1) | 1
        masks = masks[masks != (1 << n) - 1]
        if len(masks) == 0:
            continue
        count += len(masks)
        sizes = np.zeros(len(masks), dtype=np.int64)
        for b in range(n):
            sizes += (masks >> b) & 1
        cuts = np.zeros(len(masks), dtype=np.int64)
        for i, j in edges:
            cuts += ((masks >> int(i)) & 1) != ((masks >> int(j)) & 1)
        raw = 2 * cuts
        balance = np.minimum(sizes, n - sizes) / n
        values = scale * raw / balance
        order = np.lexsort((masks, sizes, values))
        top = order[0]
        key = (values[top], sizes[top], masks[top])
        if best_key is None or key < best_key:
            best_key = key
            best_mask_int = int(masks[top])
    bits = np.array([(best_mask_int >> b) & 1 for b in range(n)], dtype=bool)
    part = Partition(bits)
    return SolverReport(
        best=part,
        best_result=cheeger_cut(graph, part),
        method="exact",
        iterations=count,
    )


# ---------------------------------------------------------------------------
# spectral relaxation
# ---------------------------------------------------------------------------

def graph_laplacian(graph) -> sparse.csr_matrix:
    """Unnormalized Laplacian with unit edge weights."""
    adj = graph.adjacency()
    deg = np.asarray(adj.sum(axis=1)).ravel()
    return (sparse.diags(deg) - adj).tocsr()


def _deflated_smallest(lap, deflate, tol, max_iter=5000, seed=0x5EED):
    """Smallest Laplacian eigenpair orthogonal to the given vectors.

    Shifted inverse power iteration with the deflation subspace projected
    out each step, then Rayleigh-quotient polish.  Returns unit vector,
    eigenvalue, residual, iterations.
    """
    n = lap.shape[0]
    basis = np.stack([d / np.linalg.norm(d) for d in deflate])
    mean_deg = float(np.asarray(lap.diagonal()).mean())
    shift = 1e-3 * max(mean_deg, 1.0)
    lu = splu((lap + shift * sparse.identity(n, format="csc")).tocsc())

    def project(x):
        x = x - basis.T @ (basis @ x)
        nrm = np.linalg.norm(x)
        if nrm == 0.0:
            raise DisconnectedGraphError(
                "iteration collapsed onto the deflation subspace"
            )
        return x / nrm

    rng = np.random.Generator(np.random.Philox(seed))
    v = project(rng.standard_normal(n))
    lam = float(v @ (lap @ v))
    residual = np.inf
    iters = 0
    stall = 0
    for _ in range(max_iter):
        iters += 1
        v = project(lu.solve(v))
        new_lam = float(v @ (lap @ v))
        residual = float(np.linalg.norm(lap @ v - new_lam * v))
        if residual <= tol:
            lam = new_lam
            break
        if abs(new_lam - lam) <= 1e-3 * max(new_lam, 1e-30):
            stall += 1
        else:
            stall = 0
        lam = new_lam
        # once the quotient stabilizes, switch to Rayleigh-quotient steps
        if stall >= 3:
            lam, v, residual, extra = _rayleigh_polish(lap, v, lam, tol, project)
            iters += extra
            break
    if residual > tol:
        lam, v, residual, extra = _rayleigh_polish(lap, v, lam, tol, project)
        iters += extra
    if residual > tol:
        raise DisconnectedGraphError(
            f"eigeniteration failed to reach residual {tol} (got {residual})"
        )
    return v, lam, residual, iters


def _rayleigh_polish(lap, v, lam, tol, project, max_steps=40):
    """Rayleigh-quotient iteration restricted to the working subspace."""
    n = lap.shape[0]
    eye = sparse.identity(n, format="csc")
    residual = float(np.linalg.norm(lap @ v - lam * v))
    steps = 0
    while residual > tol and steps < max_steps:
        steps += 1
        # the shifted matrix is near-singular by design; regularize slightly
        guard = max(residual * 1e-3, 1e-14)
        try:
            lu = splu((lap - (lam - guard) * eye).tocsc())
            w = lu.solve(v)
        except RuntimeError:
            lu = splu((lap - (lam - 10 * guard) * eye).tocsc())
            w = lu.solve(v)
        if not np.all(np.isfinite(w)):
            break
        try:
            v = project(w)
        except DisconnectedGraphError:
            break
        lam = float(v @ (lap @ v))
        residual = float(np.linalg.norm(lap @ v - lam * v))
    return lam, v, residual, steps


def fiedler_vector(graph, tol: float = 1e-8, max_iter: int = 5000):
    """Second eigenvector of the unnormalized graph Laplacian.

    Returns (vector, eigenvalue, residual, iterations); the vector has unit
    norm and is orthogonal to constants.  Requires a connected graph.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not is_connected(graph):
        raise DisconnectedGraphError(
            "graph is disconnected: the Laplacian kernel is degenerate"
        )
    lap = graph_laplacian(graph).tocsc()
    ones = np.ones(graph.n)
    return _deflated_smallest(lap, [ones], tol, max_iter)


def spectral_pair(graph, tol: float = 1e-8, max_iter: int = 5000):
    """The two lowest nonconstant Laplacian eigenvectors.

    The second one is computed with the first deflated; for nearly
    degenerate spectra the pair spans the low-energy subspace that sweep
    orderings are drawn from.
    """
    if not is_connected(graph):
        raise DisconnectedGraphError(
            "graph is disconnected: the Laplacian kernel is degenerate"
        )
    lap = graph_laplacian(graph).tocsc()
    ones = np.ones(graph.n)
    v2, lam2, res2, it2 = _deflated_smallest(lap, [ones], tol, max_iter)
    v3, lam3, res3, it3 = _deflated_smallest(lap, [ones, v2], tol, max_iter,
                                             seed=0x5EED + 1)
    return (v2, lam2, res2, it2), (v3, lam3, res3, it3)


# ---------------------------------------------------------------------------
# sweep and refinement
# ---------------------------------------------------------------------------

def _neighbor_arrays(graph):
    adj = graph.adjacency().tocsr()
    return adj.indptr, adj.indices


def sweep_cut(graph: KnnGraph, u) -> SolverReport:
    """Best prefix partition of the ordering induced by u.

    Evaluates the objective at all n-1 thresholds with O(deg) incremental
    cut updates; ties go to the smaller prefix.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (graph.n,):
        raise ValueError("function length does not match graph")
    if np.all(u == u[0]):
        raise ValueError("sweep needs a non-constant function")
    n = graph.n
    order = np.argsort(u, kind="stable")
    indptr, indices = _neighbor_arrays(graph)
    in_a = np.zeros(n, dtype=bool)
    scale = gtv_scale(graph)
    cut = 0
    best = None
    for t, v in enumerate(order[:-1], start=1):
        nbrs = indices[indptr[v]:indptr[v + 1]]
        inside = int(in_a[nbrs].sum())
        cut += len(nbrs) - 2 * inside
        in_a[v] = True
        raw = 2 * cut
        balance = min(t, n - t) / n
        value = scale * raw / balance
        if best is None or value < best[0]:
            best = (value, t)
    t_best = best[1]
    part = Partition.from_indices(n, order[:t_best])
    return SolverReport(
        best=part,
        best_result=cheeger_cut(graph, part),
        method="spectral_sweep",
        iterations=n - 1,
    )


def local_refine(graph: KnnGraph, part: Partition, max_passes: int = None) -> SolverReport:
    """Greedy improvement: repeatedly swap the single vertex whose move most
    decreases the objective; stops at a local minimum or the move budget.
    Never empties a side and never returns a worse value than the input.
    """
    n = graph.n
    if max_passes is None:
        max_passes = 2 * n
    indptr, indices = _neighbor_arrays(graph)
    deg = np.asarray(graph.degrees, dtype=np.int64)
    in_a = part.mask.copy()
    size = int(in_a.sum())
    if size == 0 or size == n:
        raise ValueError("both sides must be nonempty")
    links_a = np.zeros(n, dtype=np.int64)  # neighbors currently in A
    for v in range(n):
        nbrs = indices[indptr[v]:indptr[v + 1]]
        links_a[v] = int(in_a[nbrs].sum())
    cut = int(links_a[~in_a].sum())
    scale = gtv_scale(graph)

    def value_of(cut_edges, a_size):
        return scale * 2 * cut_edges / (min(a_size, n - a_size) / n)

    current = value_of(cut, size)
    moves = 0
    vertex_ids = np.arange(n)
    while moves < max_passes:
        # candidate deltas for moving each vertex to the other side
        links_b = deg - links_a
        new_cut = np.where(in_a, cut - links_b + links_a, cut - links_a + links_b)
        new_size = np.where(in_a, size - 1, size + 1)
        valid = (new_size > 0) & (new_size < n)
        new_balance = np.minimum(new_size, n - new_size) / n
        with np.errstate(divide="ignore"):
            new_value = np.where(valid, scale * 2 * new_cut / new_balance, np.inf)
        best_idx = int(np.lexsort((vertex_ids, new_value))[0])
        if not new_value[best_idx] < current - 1e-15:
            break
        moves += 1
        v = best_idx
        cut = int(new_cut[v])
        size = int(new_size[v])
        current = float(new_value[v])
        nbrs = indices[indptr[v]:indptr[v + 1]]
        if in_a[v]:
            links_a[nbrs] -= 1
        else:
            links_a[nbrs] += 1
        in_a[v] = ~in_a[v]
    out = Partition(in_a)
    result = cheeger_cut(graph, out)
    return SolverReport(
        best=out,
        best_result=result,
        method="spectral_sweep_refined",
        iterations=moves,
    )


def solve(graph: KnnGraph, tol: float = 1e-8, exact_limit: int = EXACT_LIMIT,
          refine_budget: int = None, fan: int = 8) -> SolverReport:
    """Dispatch: exact enumeration for n <= exact_limit, else the spectral
    pipeline: sweep a fan of mixtures of the two lowest nonconstant
    eigenvectors (the low spectrum of geometric graphs is often nearly
    degenerate, and the Fiedler vector alone lands on an arbitrary mixture),
    then locally refine the best sweeps.
    """
    if not is_connected(graph):
        raise DisconnectedGraphError("cut solving requires a connected graph")
    if graph.n <= exact_limit:
        return solve_exact(graph)
    (v2, _, res2, it2), (v3, _, res3, it3) = spectral_pair(graph, tol=tol)
    candidates = []
    for idx in range(fan):
        psi = math.pi * idx / fan
        u = math.cos(psi) * v2 + math.sin(psi) * v3
        if np.allclose(u, u[0]):
            continue
        candidates.append(sweep_cut(graph, u))
    candidates.sort(key=lambda r: r.best_result.cheeger_value)
    best = None
    moves = 0
    for cand in candidates[:3]:
        refined = local_refine(graph, cand.best, max_passes=refine_budget)
        moves += refined.iterations
        if best is None or refined.best_result.cheeger_value < best.best_result.cheeger_value:
            best = refined
    return SolverReport(
        best=best.best,
        best_result=best.best_result,
        method="spectral_sweep_refined",
        iterations=it2 + it3 + moves,
        eigen_residual=max(res2, res3),
    )
