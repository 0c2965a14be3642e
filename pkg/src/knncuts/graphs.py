"""Symmetric k-NN graphs and comparison epsilon-graphs over point clouds.

The k-NN relation puts an edge on {i, j} whenever i is among the k nearest
neighbors of j or vice versa (OR symmetrization).  Neighbor ranking excludes
the point itself and breaks distance ties by smaller vertex index, so the
construction is fully deterministic even on adversarial inputs.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.spatial import cKDTree

from .domain import PointCloud


@dataclass(frozen=True)
class KnnGraph:
    """Symmetrized k-NN graph: n vertices, unordered edge pairs, eps_bar = (k/n)^(1/d)."""

    n: int
    k: int
    dim: int
    edges: np.ndarray  # (E, 2) int array, each row i < j
    degrees: np.ndarray = field(repr=False)

    @property
    def eps_bar(self) -> float:
        return (self.k / self.n) ** (1.0 / self.dim)

    def adjacency(self) -> sparse.csr_matrix:
        i, j = self.edges[:, 0], self.edges[:, 1]
        data = np.ones(2 * len(self.edges))
        mat = sparse.coo_matrix(
            (data, (np.concatenate([i, j]), np.concatenate([j, i]))),
            shape=(self.n, self.n),
        )
        return mat.tocsr()

    def edge_set(self) -> set:
        return {(int(a), int(b)) for a, b in self.edges}

    def header(self) -> dict:
        return {"n": self.n, "k": self.k, "d": self.dim,
                "eps_bar": self.eps_bar}


@dataclass(frozen=True)
class EpsGraph:
    """Graph connecting all pairs at Euclidean distance strictly below eps."""

    n: int
    eps: float
    edges: np.ndarray
    degrees: np.ndarray = field(repr=False)

    def adjacency(self) -> sparse.csr_matrix:
        i, j = self.edges[:, 0], self.edges[:, 1]
        data = np.ones(2 * len(self.edges))
        mat = sparse.coo_matrix(
            (data, (np.concatenate([i, j]), np.concatenate([j, i]))),
            shape=(self.n, self.n),
        )
        return mat.tocsr()

    def edge_set(self) -> set:
        return {(int(a), int(b)) for a, b in self.edges}

    def header(self) -> dict:
        return {"n": self.n, "eps": self.eps}


def _degrees_from_edges(n, edges):
    deg = np.zeros(n, dtype=np.int64)
    if len(edges):
        np.add.at(deg, edges[:, 0], 1)
        np.add.at(deg, edges[:, 1], 1)
    return deg


def _finalize_edges(n, pair_iter):
    pairs = sorted(pair_iter)
    edges = np.array(pairs, dtype=np.int64).reshape(-1, 2)
    edges.setflags(write=False)
    deg = _degrees_from_edges(n, edges)
    deg.setflags(write=False)
    return edges, deg


def knn_neighbor_lists(points: np.ndarray, k: int) -> list:
    """The k nearest neighbors of each point (self excluded), ties by index.

    Uses a kd-tree.  When the cutoff distance is tied with the next
    candidate, the neighborhood is re-pulled by radius and ordered by
    (distance, index), so the result is deterministic even with ties.
    """
    n = len(points)
    tree = cKDTree(points)
    q = min(k + 2, n)  # one spare candidate beyond self + k to detect ties
    dist, idx = tree.query(points, k=q)
    out = []
    for i in range(n):
        keep = idx[i] != i
        di, ii = dist[i][keep], idx[i][keep]
        tied = len(di) > k and di[k] <= di[k - 1]
        if tied:
            cutoff = di[k - 1]
            cand = tree.query_ball_point(points[i], cutoff * (1.0 + 1e-12))
            cand = np.array([c for c in cand if c != i], dtype=np.int64)
            dc = np.linalg.norm(points[cand] - points[i], axis=1)
            order = np.lexsort((cand, dc))
            ii = cand[order][:k]
        else:
            ii = ii[:k]
        out.append(np.sort(ii))
    return out


def _knn_neighbor_lists_bruteforce(points: np.ndarray, k: int) -> list:
    """All-pairs oracle with identical tie semantics; O(n^2 log n)."""
    n = len(points)
    d2 = np.sum((points[:, None, :] - points[None, :, :]) ** 2, axis=2)
    out = []
    for i in range(n):
        others = np.array([j for j in range(n) if j != i])
        order = np.lexsort((others, d2[i, others]))
        out.append(np.sort(others[order][:k]))
    return out


def build_knn(cloud: PointCloud, k: int) -> KnnGraph:
    """Build the OR-symmetrized k-NN graph of a cloud."""
    n = cloud.n
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= k < n, got k={k}, n={n}")
    neighbor_lists = knn_neighbor_lists(cloud.points, k)
    pairs = set()
    for i, nbrs in enumerate(neighbor_lists):
        for j in nbrs:
            pairs.add((min(i, int(j)), max(i, int(j))))
    edges, deg = _finalize_edges(n, pairs)
    return KnnGraph(n=n, k=k, dim=cloud.dim, edges=edges, degrees=deg)


def build_knn_bruteforce(cloud: PointCloud, k: int) -> KnnGraph:
    """O(n^2) reference construction used as the correctness oracle."""
    n = cloud.n
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= k < n, got k={k}, n={n}")
    pairs = set()
    for i, nbrs in enumerate(_knn_neighbor_lists_bruteforce(cloud.points, k)):
        for j in nbrs:
            pairs.add((min(i, int(j)), max(i, int(j))))
    edges, deg = _finalize_edges(n, pairs)
    return KnnGraph(n=n, k=k, dim=cloud.dim, edges=edges, degrees=deg)


def build_eps(cloud: PointCloud, eps: float) -> EpsGraph:
    """Connect all pairs with |x_i - x_j| < eps (strict)."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    tree = cKDTree(cloud.points)
    pairs = tree.query_pairs(r=eps, output_type="ndarray")
    if len(pairs):
        diffs = cloud.points[pairs[:, 0]] - cloud.points[pairs[:, 1]]
        dist = np.linalg.norm(diffs, axis=1)
        pairs = pairs[dist < eps]  # query_pairs is inclusive; contract is strict
    edges, deg = _finalize_edges(cloud.n, map(tuple, pairs))
    return EpsGraph(n=cloud.n, eps=float(eps), edges=edges, degrees=deg)


def knn_membership_check(cloud: PointCloud, graph: KnnGraph, i: int, j: int) -> bool:
    """Empirical-ball version of the k-NN relation.

    With r = |x_i - x_j|, tests whether the empirical measure of B(x_i, r)
    or of B(x_j, r) is at most k/n, counting atoms at strict distance < r
    (each center counts inside its own ball).  Almost surely equivalent to
    adjacency for clouds without distance ties.
    """
    if i == j:
        raise ValueError("i and j must differ")
    pts = cloud.points
    r = float(np.linalg.norm(pts[i] - pts[j]))
    di = np.linalg.norm(pts - pts[i], axis=1)
    dj = np.linalg.norm(pts - pts[j], axis=1)
    count_i = int((di < r).sum())
    count_j = int((dj < r).sum())
    k = graph.k
    return count_i <= k or count_j <= k


def degree_stats(graph) -> dict:
    """Degree-sequence summary: min, max, mean, coefficient of variation."""
    deg = np.asarray(graph.degrees, dtype=float)
    mean = float(deg.mean())
    cv = float(deg.std() / mean) if mean > 0 else 0.0
    return {
        "min": int(deg.min()),
        "max": int(deg.max()),
        "mean": mean,
        "coefficient_of_variation": cv,
    }


# ---------------------------------------------------------------------------
# connectivity
# ---------------------------------------------------------------------------

class UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))
        self.rank = [0] * n
        self.components = n

    def find(self, a):
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        self.components -= 1
        return True


def is_connected(graph) -> bool:
    uf = UnionFind(graph.n)
    for a, b in graph.edges:
        uf.union(int(a), int(b))
    return uf.components == 1


def min_connecting_eps(cloud: PointCloud) -> float:
    """Smallest pairwise-distance value for which build_eps is connected.

    Because the eps-graph uses strict inequality, this is the pairwise
    distance immediately above the bottleneck (max MST edge).
    """
    pts = cloud.points
    n = len(pts)
    d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=2)
    iu = np.triu_indices(n, k=1)
    dists = np.sqrt(d2[iu])
    order = np.argsort(dists, kind="stable")
    uf = UnionFind(n)
    bottleneck = dists[order[-1]]
    for idx in order:
        uf.union(int(iu[0][idx]), int(iu[1][idx]))
        if uf.components == 1:
            bottleneck = dists[idx]
            break
    larger = dists[dists > bottleneck]
    if len(larger) == 0:
        return float(bottleneck) * (1.0 + 1e-12)
    return float(larger.min())


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def graph_to_csv(graph) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["i", "j"])
    for a, b in graph.edges:
        writer.writerow([int(a), int(b)])
    return buf.getvalue()


def save_graph(graph, path: str) -> None:
    """Write the edge list CSV plus a JSON header sidecar (`path` + .json)."""
    with open(path, "w") as fh:
        fh.write(graph_to_csv(graph))
    with open(path + ".json", "w") as fh:
        json.dump(graph.header(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_graph(path: str):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    edges = np.array([[int(a), int(b)] for a, b in rows[1:]], dtype=np.int64).reshape(-1, 2)
    with open(path + ".json") as fh:
        header = json.load(fh)
    n = int(header["n"])
    deg = _degrees_from_edges(n, edges)
    if "k" in header:
        return KnnGraph(n=n, k=int(header["k"]), dim=int(header["d"]),
                        edges=edges, degrees=deg)
    return EpsGraph(n=n, eps=float(header["eps"]), edges=edges, degrees=deg)
