"""Graph energies: total variation, Cheeger cut, ratio cut, limit constants.

Conventions used throughout (and by every numeric target in the tests):
the double sum in the graph total variation runs over ordered pairs, so
each unordered edge contributes twice, and the rescaling is
1 / (n^2 eps_bar^(d+1)) with eps_bar = (k/n)^(1/d).
"""

from __future__ import annotations

import base64
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._geom import unit_ball_volume
from .graphs import KnnGraph


# ---------------------------------------------------------------------------
# partitions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Partition:
    """A vertex subset A stored as a boolean mask over the vertex set."""

    mask: np.ndarray

    def __post_init__(self):
        mask = np.asarray(self.mask, dtype=bool)
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)

    @property
    def n(self) -> int:
        return len(self.mask)

    @property
    def size(self) -> int:
        return int(self.mask.sum())

    def complement(self) -> "Partition":
        return Partition(~self.mask)

    def indices(self) -> list:
        return np.flatnonzero(self.mask).tolist()

    def to_dict(self) -> dict:
        out = {
            "n": self.n,
            "size": self.size,
            "mask_b64": base64.b64encode(np.packbits(self.mask)).decode("ascii"),
        }
        if self.n <= 256:
            out["indices"] = self.indices()
        return out

    @staticmethod
    def from_dict(spec: dict) -> "Partition":
        n = int(spec["n"])
        bits = np.unpackbits(
            np.frombuffer(base64.b64decode(spec["mask_b64"]), dtype=np.uint8)
        )
        return Partition(bits[:n].astype(bool))

    @staticmethod
    def from_indices(n: int, indices) -> "Partition":
        mask = np.zeros(n, dtype=bool)
        mask[list(indices)] = True
        return Partition(mask)


@dataclass(frozen=True)
class CutResult:
    """Cheeger-cut diagnostics of one partition."""

    gtv: float          # rescaled graph total variation of the indicator
    balance: float      # min(|A|, |A^c|) / n
    cheeger_value: float
    raw_edge_cut: int   # ordered-pair count of boundary edges

    def to_dict(self) -> dict:
        return {
            "gtv": self.gtv,
            "balance": self.balance,
            "cheeger_value": self.cheeger_value,
            "raw_edge_cut": self.raw_edge_cut,
        }


# ---------------------------------------------------------------------------
# energies
# ---------------------------------------------------------------------------

def gtv_scale(graph: KnnGraph) -> float:
    """The prefactor 1 / (n^2 eps_bar^(d+1))."""
    return 1.0 / (graph.n**2 * graph.eps_bar ** (graph.dim + 1))


def gtv(graph: KnnGraph, u) -> float:
    """Rescaled graph total variation of a vertex function.

    Sum over ordered neighbor pairs of |u_i - u_j|, times gtv_scale.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (graph.n,):
        raise ValueError(f"function has length {u.shape}, graph has n={graph.n}")
    if len(graph.edges) == 0:
        return 0.0
    diffs = np.abs(u[graph.edges[:, 0]] - u[graph.edges[:, 1]])
    return gtv_scale(graph) * 2.0 * float(diffs.sum())


def edge_cut_count(graph, part: Partition) -> int:
    """Number of ordered pairs (i, j) with an edge and i, j on opposite sides."""
    mask = part.mask
    crossing = mask[graph.edges[:, 0]] != mask[graph.edges[:, 1]]
    return 2 * int(crossing.sum())


def cheeger_cut(graph: KnnGraph, part: Partition) -> CutResult:
    """Evaluate the balanced-cut objective GTV(1_A) / (min(|A|,|A^c|)/n)."""
    if part.n != graph.n:
        raise ValueError("partition size does not match graph")
    size = part.size
    if size == 0 or size == graph.n:
        raise ValueError("both sides of the partition must be nonempty")
    raw = edge_cut_count(graph, part)
    g = gtv_scale(graph) * raw
    balance = min(size, graph.n - size) / graph.n
    return CutResult(gtv=g, balance=balance, cheeger_value=g / balance,
                     raw_edge_cut=raw)


def ratio_cut(graph, part: Partition) -> float:
    """Ordered-pair edge cut divided by |A| * |A^c| (unscaled)."""
    size = part.size
    if size == 0 or size == part.n:
        raise ValueError("both sides of the partition must be nonempty")
    return edge_cut_count(graph, part) / (size * (part.n - size))


def coarea_decompose(graph: KnnGraph, u) -> float:
    """Layer-cake value of the graph total variation.

    Decomposes u into its superlevel indicators between consecutive
    distinct values; the weighted sum of their GTVs equals gtv(u) exactly
    (up to roundoff).
    """
    u = np.asarray(u, dtype=float)
    levels = np.unique(u)
    if len(levels) < 2:
        return 0.0
    total = 0.0
    for lo, hi in zip(levels[:-1], levels[1:]):
        total += gtv(graph, (u > lo).astype(float)) * (hi - lo)
    return total


# ---------------------------------------------------------------------------
# limit constants
# ---------------------------------------------------------------------------

def alpha_d(d: int) -> float:
    """Volume of the unit ball in R^d."""
    if d < 1:
        raise ValueError("d must be >= 1")
    return unit_ball_volume(d)


def sigma_eta(d: int) -> float:
    """First absolute moment of a coordinate over the unit ball.

    Integral of |z_1| over B(0,1) in R^d; closed form 2 alpha_{d-1} / (d+1).
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    return 2.0 * unit_ball_volume(d - 1) / (d + 1)


@dataclass(frozen=True)
class LimitConstants:
    sigma_eta: float
    alpha_d: float
    factor: float  # sigma_eta / alpha_d^(1 + 1/d)


@lru_cache(maxsize=None)
def limit_constants(d: int) -> LimitConstants:
    """The constants entering the continuum limit of the rescaled cut value."""
    s = sigma_eta(d)
    a = alpha_d(d)
    return LimitConstants(sigma_eta=s, alpha_d=a, factor=s / a ** (1.0 + 1.0 / d))
