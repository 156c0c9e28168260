"""Maximum-likelihood estimation of intrinsic dimensionality from NN distances.

Per-point estimates invert the mean log ratio of the k-th neighbor radius to
the closer neighbor radii; pooling averages over samples and then over a
range of neighborhood sizes k in [k1, k2]. Estimates depend only on distance
ratios, so they are invariant under isometries and global rescaling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix
from .neighbors import nearest_neighbors

DEFAULT_K1 = 10
DEFAULT_K2 = 20


@dataclass(frozen=True)
class IdEstimate:
    """Pooled intrinsic-dimension estimate with its per-k breakdown."""

    per_k: dict[int, float]
    pooled: float
    rounded: int
    k1: int
    k2: int
    skipped: int = 0  # samples dropped at some k due to duplicate points

    def __post_init__(self):
        if self.pooled <= 0:
            raise ValueError("pooled estimate must be positive")


def mle_id_point(sorted_nn_distances, k: int) -> float:
    """Dimension estimate at one sample from its ascending neighbor distances.

    Returns the inverse of (1/(k-1)) * sum_{j<k} log(F_k/F_j), where F_j is
    the j-th nearest neighbor distance.
    """
    d = np.asarray(sorted_nn_distances, dtype=float)
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    if d.ndim != 1 or d.size < k:
        raise ValueError(f"need at least {k} neighbor distances, got {d.size}")
    if np.any(np.diff(d) < 0):
        raise ValueError("neighbor distances must be non-decreasing")
    if np.any(d[:k] <= 0):
        raise ValueError("degenerate neighborhood")
    mean_log = float(np.mean(np.log(d[k - 1] / d[: k - 1])))
    if mean_log <= 0:
        raise ValueError("degenerate neighborhood")
    return 1.0 / mean_log


def mle_id(x, k1: int = DEFAULT_K1, k2: int = DEFAULT_K2) -> IdEstimate:
    """Pooled MLE of intrinsic dimension over neighborhood sizes k1..k2.

    Samples whose neighborhoods are degenerate (duplicate points giving zero
    distances or zero log sums) are skipped and counted, not perturbed.
    """
    x = as_matrix(x, "data")
    m, n = x.shape
    if not 2 <= k1 < k2 <= n - 1:
        raise ValueError(f"need 2 <= k1 < k2 <= N-1, got k1={k1}, k2={k2}, N={n}")
    n_distinct = np.unique(x.T, axis=0).shape[0]
    if n_distinct < k2 + 1:
        raise ValueError(
            f"need at least k2+1={k2 + 1} distinct samples, found {n_distinct}")
    _, dist = nearest_neighbors(x, k2)
    per_k: dict[int, float] = {}
    skipped_mask = np.zeros(n, dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_d = np.log(dist)
    for k in range(k1, k2 + 1):
        mean_log = log_d[:, k - 1][:, None] - log_d[:, : k - 1]
        mean_log = mean_log.mean(axis=1)
        valid = np.isfinite(mean_log) & (mean_log > 0) & np.all(dist[:, :k] > 0, axis=1)
        skipped_mask |= ~valid
        if not np.any(valid):
            raise ValueError(f"all neighborhoods degenerate at k={k}")
        per_k[k] = float(np.mean(1.0 / mean_log[valid]))
    pooled = float(np.mean(list(per_k.values())))
    rounded = int(np.floor(pooled + 0.5))  # round half up
    rounded = max(1, min(m, rounded))
    return IdEstimate(per_k=per_k, pooled=pooled, rounded=rounded, k1=k1, k2=k2,
                      skipped=int(skipped_mask.sum()))


def id_stability_sweep(x, k1_values, k2_values, strides=(1,)) -> dict[tuple[int, int, int], int]:
    """Grid of rounded ID estimates over (k1, k2) ranges and subsample strides.

    Stride j keeps every j-th sample before estimating, emulating a sampling
    frequency reduced to 1/j. Keys are (k1, k2, stride).
    """
    x = as_matrix(x, "data")
    table: dict[tuple[int, int, int], int] = {}
    for stride in strides:
        if stride < 1:
            raise ValueError(f"stride must be >= 1, got {stride}")
        xs = x[:, ::stride]
        for k1 in k1_values:
            for k2 in k2_values:
                table[(int(k1), int(k2), int(stride))] = mle_id(xs, k1, k2).rounded
    return table
