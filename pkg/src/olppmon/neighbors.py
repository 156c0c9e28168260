"""KNN adjacency graph with Gaussian similarities, degree matrix, and Laplacian.

Samples are columns of the data matrix. Edges come from the symmetrized union
of k-nearest-neighbor relations; weights are exp(-||xi - xj||^2 / q). The
diagonal similarity S_ii = 1 (zero self-distance) is stored explicitly and
included in the degree sums, so L = D - S keeps the all-ones vector in its
nullspace.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.spatial.distance import cdist

from .linalg import as_matrix

DEFAULT_K = 10
_CHUNK = 1024


def nearest_neighbors(x, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact k-nearest neighbors of every sample (columns of x), self excluded.

    Returns (indices, distances), each (N, k), rows sorted by ascending
    distance with ties broken by ascending sample index. Computed in row
    chunks so the full N x N distance matrix never materializes.
    """
    x = as_matrix(x, "data")
    n = x.shape[1]
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must be in [1, {n - 1}], got {k}")
    pts = x.T
    idx = np.empty((n, k), dtype=np.intp)
    dist = np.empty((n, k))
    for start in range(0, n, _CHUNK):
        stop = min(start + _CHUNK, n)
        d = cdist(pts[start:stop], pts)
        d[np.arange(stop - start), np.arange(start, stop)] = np.inf
        if k < n - 1:
            part = np.argpartition(d, k, axis=1)[:, :k]
            dpart = np.take_along_axis(d, part, axis=1)
            # exact ties straddling the k-boundary: re-sort those rows fully
            # so the lowest indices win
            boundary = dpart.max(axis=1)
            straddle = ((d == boundary[:, None]).sum(axis=1)
                        > (dpart == boundary[:, None]).sum(axis=1))
            for r in np.nonzero(straddle)[0]:
                part[r] = np.argsort(d[r], kind="stable")[:k]
                dpart[r] = d[r, part[r]]
        else:
            part = np.argsort(d, axis=1, kind="stable")[:, :k]
            dpart = np.take_along_axis(d, part, axis=1)
        # order within the k candidates by (distance, index)
        order = np.lexsort((part, dpart), axis=1)
        idx[start:stop] = np.take_along_axis(part, order, axis=1)
        dist[start:stop] = np.take_along_axis(dpart, order, axis=1)
    return idx, dist


def knn_indices(x, k: int) -> np.ndarray:
    """Per-sample lists of the k nearest neighbor indices (ascending distance)."""
    idx, _ = nearest_neighbors(x, k)
    return idx


def default_kernel_width(x, k: int = DEFAULT_K) -> float:
    """Median squared distance to the k-th nearest neighbor (scale-adaptive q)."""
    _, dist = nearest_neighbors(x, k)
    return float(np.median(dist[:, -1] ** 2))


@dataclass(frozen=True)
class NeighborGraph:
    """Similarity matrix S (with unit diagonal), degrees D_ii, and Laplacian L = D - S."""

    n: int
    k: int
    q: float
    s: sp.csr_matrix         # symmetric, unit diagonal
    degrees: np.ndarray      # (n,), row sums of s
    laplacian: sp.csr_matrix

    def edges(self) -> np.ndarray:
        """Off-diagonal edge pairs (i, j) with i < j."""
        coo = sp.triu(self.s, k=1).tocoo()
        return np.column_stack([coo.row, coo.col])


def build_graph(x, k: int = DEFAULT_K, q: float | None = None) -> NeighborGraph:
    """Build the KNN similarity graph over samples.

    An edge joins (i, j) when i is among j's k nearest neighbors or vice
    versa (union symmetrization, which keeps S symmetric and every row
    connected). q defaults to the median squared k-th-neighbor distance.
    """
    x = as_matrix(x, "data")
    n = x.shape[1]
    idx, dist = nearest_neighbors(x, k)
    if q is None:
        q = float(np.median(dist[:, -1] ** 2))
    if q <= 0:
        raise ValueError(f"kernel width q must be positive, got {q}")
    weights = np.exp(-dist.ravel() ** 2 / q)
    rows = np.repeat(np.arange(n), k)
    s = sp.coo_matrix((weights, (rows, idx.ravel())), shape=(n, n)).tocsr()
    s = s.maximum(s.T)               # union of directed KNN edges
    s = (s + sp.eye(n, format="csr")).tocsr()
    degrees = np.asarray(s.sum(axis=1)).ravel()
    laplacian = (sp.diags(degrees) - s).tocsr()
    return NeighborGraph(n=n, k=k, q=q, s=s, degrees=degrees, laplacian=laplacian)


def uniform_graph(n: int) -> NeighborGraph:
    """Fully connected graph with constant weights S_ij = 1/n^2.

    The resulting Laplacian is (1/n) I - (1/n^2) 1 1^T, whose quadratic form
    with the data matrix is exactly the biased sample covariance; used for
    the maximal-variance (PCA-like) regime.
    """
    if n < 1:
        raise ValueError("n must be positive")
    s = sp.csr_matrix(np.full((n, n), 1.0 / n**2))
    degrees = np.full(n, 1.0 / n)
    laplacian = (sp.diags(degrees) - s).tocsr()
    return NeighborGraph(n=n, k=n - 1, q=float("inf"), s=s, degrees=degrees,
                         laplacian=laplacian)
