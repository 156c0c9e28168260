"""Dense linear-algebra kernels shared by the rest of the package.

Thin, contract-enforcing wrappers around LAPACK (via numpy/scipy): truncated
SVD, Moore-Penrose pseudo-inverse, symmetric and generalized symmetric
eigendecompositions. All results use deterministic conventions (descending
singular values, ascending eigenvalues, sign-fixed vectors) so downstream
fits are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

DEFAULT_RANK_TOL = 1e-10


@dataclass(frozen=True)
class SvdResult:
    """Truncated SVD: u @ diag(sigma) @ v.T reconstructs the input to rank `rank`."""

    u: np.ndarray        # (m, r), orthonormal columns
    sigma: np.ndarray    # (r,), positive, descending
    v: np.ndarray        # (n, r), orthonormal columns
    rank: int


@dataclass(frozen=True)
class EigResult:
    """Eigendecomposition with ascending eigenvalues and unit-norm, sign-fixed vectors."""

    values: np.ndarray   # (n,), ascending
    vectors: np.ndarray  # (n, n) or (n, k), column i pairs with values[i]


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate a 2-D finite float array."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    if a.size == 0:
        raise ValueError("empty input")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip column signs so each column's largest-magnitude entry is positive.

    Ties resolve to the first such entry, making outputs deterministic for
    regression tests. The copy is C-ordered so downstream products are
    bit-reproducible across serialization round-trips.
    """
    v = np.array(vectors, dtype=float, copy=True, order="C")
    if v.ndim == 1:
        v = v[:, None]
        idx = np.argmax(np.abs(v), axis=0)
        if v[idx[0], 0] < 0:
            v = -v
        return v[:, 0]
    idx = np.argmax(np.abs(v), axis=0)
    flip = v[idx, np.arange(v.shape[1])] < 0
    v[:, flip] *= -1.0
    return v


def svd(a, rank_tol: float = DEFAULT_RANK_TOL) -> SvdResult:
    """Truncated singular value decomposition.

    Singular values below rank_tol * sigma_max are dropped; the retained
    count is the reported numerical rank.
    """
    a = as_matrix(a)
    if rank_tol <= 0:
        raise ValueError("rank_tol must be positive")
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        rank = 0
    else:
        rank = int(np.sum(s > rank_tol * s[0]))
    u, s, v = u[:, :rank], s[:rank], vt[:rank].T
    # sign convention lives on U; V follows so the product is unchanged
    if rank:
        idx = np.argmax(np.abs(u), axis=0)
        flip = u[idx, np.arange(rank)] < 0
        u[:, flip] *= -1.0
        v[:, flip] *= -1.0
    return SvdResult(u=u, sigma=s, v=v, rank=rank)


def pseudo_inverse(a, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Moore-Penrose pseudo-inverse via truncated SVD: V diag(1/sigma) U^T."""
    res = svd(a, rank_tol)
    if res.rank == 0:
        return np.zeros((res.v.shape[0], res.u.shape[0]))
    return (res.v / res.sigma) @ res.u.T


def _check_square_symmetric(a, name: str) -> np.ndarray:
    a = as_matrix(a, name)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a))))
    if np.max(np.abs(a - a.T)) > 1e-10 * scale:
        raise ValueError(f"{name} is not symmetric within tolerance")
    return 0.5 * (a + a.T)


def sym_eig(a) -> EigResult:
    """Full spectrum of a symmetric matrix, eigenvalues ascending."""
    a = _check_square_symmetric(a, "matrix")
    values, vectors = np.linalg.eigh(a)
    return EigResult(values=values, vectors=fix_signs(vectors))


def gen_sym_eig(a, b) -> EigResult:
    """Solve A v = lambda B v for symmetric A and symmetric positive-definite B.

    Reduced to a standard symmetric problem through B's Cholesky-type
    factorization (LAPACK sygvd). Eigenvectors come out B-orthogonal and are
    renormalized to unit Euclidean norm.
    """
    a = _check_square_symmetric(a, "A")
    b = _check_square_symmetric(b, "B")
    if a.shape != b.shape:
        raise ValueError(f"A and B must have equal shapes: {a.shape} vs {b.shape}")
    b_eigs = np.linalg.eigvalsh(b)
    if b_eigs[0] <= 1e-12 * max(b_eigs[-1], 0.0):
        raise ValueError("indefinite B")
    values, vectors = sla.eigh(a, b)
    vectors = vectors / np.linalg.norm(vectors, axis=0)
    return EigResult(values=values, vectors=fix_signs(vectors))
