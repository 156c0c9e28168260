"""Projection-basis fitting: OLPP, its SVD variant, and PCA/DPCA/LPP baselines.

OLPP minimizes the graph-locality Rayleigh quotient
a^T (X L X^T) a / a^T (X D X^T) a under mutual orthogonality of the
projection vectors, solved as a sequence of constrained eigenproblems. The
denominator matrix X D X^T is frequently singular (zero-mean or redundant
data), so three remedies are supported: PCA pre-projection, diagonal
regularization, and pseudo-inversion.

When the denominator is symmetric positive definite, each constrained step
is solved as an equivalent generalized symmetric eigenproblem restricted to
the orthogonal complement of the previous vectors. Otherwise the explicit
(non-symmetric) deflated operator is formed and its smallest-real-part
eigenvector taken, with Gram-Schmidt re-orthogonalization as a safeguard.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .linalg import (DEFAULT_RANK_TOL, as_matrix, fix_signs, gen_sym_eig,
                     pseudo_inverse)
from .neighbors import NeighborGraph

_SPD_TOL = 1e-12
_CONSTRAINT_TOL = 1e-6
_COMPLEX_TOL = 1e-8


@dataclass(frozen=True)
class PcaProject:
    """Pre-project onto the leading PCA subspace so X D X^T becomes nonsingular."""

    variance_kept: float = 0.999

    def __post_init__(self):
        if not 0 < self.variance_kept <= 1:
            raise ValueError("variance_kept must be in (0, 1]")


@dataclass(frozen=True)
class Regularize:
    """Add beta * I to X D X^T. beta=None means 1e-6 * trace(X D X^T) / m."""

    beta: float | None = None

    def __post_init__(self):
        if self.beta is not None and self.beta <= 0:
            raise ValueError("beta must be positive")


@dataclass(frozen=True)
class PseudoInverse:
    """Replace (X D X^T)^-1 by the Moore-Penrose pseudo-inverse."""


SingularStrategy = PcaProject | Regularize | PseudoInverse


@dataclass(frozen=True)
class ProjectionModel:
    """Fitted projection basis.

    w has orthonormal columns for olpp/pca/dpca; lpp columns are unit-norm
    but generally not mutually orthogonal. lag is nonzero only for dpca.
    """

    w: np.ndarray
    method: str            # olpp | pca | dpca | lpp
    l: int
    strategy: SingularStrategy | None = None
    lag: int = 0

    @property
    def input_dim(self) -> int:
        return self.w.shape[0]


def project(model: ProjectionModel, x) -> np.ndarray:
    """Map a sample (or matrix of column samples) to its l-dimensional image W^T x."""
    x = np.asarray(x, dtype=float)
    dim = x.shape[0]
    if dim != model.input_dim:
        raise ValueError(
            f"sample dimension {dim} does not match model dimension {model.input_dim}")
    return model.w.T @ x


def _graph_matrices(x: np.ndarray, graph: NeighborGraph) -> tuple[np.ndarray, np.ndarray]:
    """Dense G = X D X^T and H = X L X^T from the sparse graph."""
    if graph.n != x.shape[1]:
        raise ValueError(
            f"graph built on {graph.n} samples but data has {x.shape[1]}")
    g = (x * graph.degrees) @ x.T
    h = x @ (graph.laplacian @ x.T)
    g = 0.5 * (g + g.T)
    h = 0.5 * (h + h.T)
    return g, h


def _numerical_rank(sym: np.ndarray, tol: float = DEFAULT_RANK_TOL) -> int:
    eigs = np.abs(np.linalg.eigvalsh(sym))
    top = eigs.max(initial=0.0)
    if top == 0.0:
        return 0
    return int(np.sum(eigs > tol * top))


def _is_spd(sym: np.ndarray) -> bool:
    eigs = np.linalg.eigvalsh(sym)
    return eigs[0] > _SPD_TOL * max(eigs[-1], 0.0)


def _complement_basis(a: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of span(a)."""
    return sla.null_space(a.T)


def _gram_schmidt(vec: np.ndarray, basis: list[np.ndarray]) -> np.ndarray:
    for prev in basis:
        vec = vec - (prev @ vec) * prev
    nrm = np.linalg.norm(vec)
    if nrm == 0:
        raise ValueError("projection vector collapsed during orthogonalization")
    return vec / nrm


def _admissible_real_eigvecs(mat: np.ndarray, count: int, select: str,
                             constraints: np.ndarray | None = None,
                             range_basis: np.ndarray | None = None) -> list[np.ndarray]:
    """Up to `count` extremal-real-part eigenvectors of a non-symmetric operator.

    Eigenpairs whose vectors violate the orthogonality constraints or leave
    the admissible range (spurious null-directions introduced by deflation or
    pseudo-inversion) are skipped. A complex residue on a selected pair is an
    error, signaling an ill-conditioned remedy choice.
    """
    values, vectors = np.linalg.eig(mat)
    order = np.argsort(values.real)
    if select == "largest":
        order = order[::-1]
    picked: list[np.ndarray] = []
    for i in order:
        v = vectors[:, i]
        # rotate the phase so the vector is as real as possible
        pivot = v[np.argmax(np.abs(v))]
        if pivot != 0:
            v = v * (np.conj(pivot) / abs(pivot))
        nrm = np.linalg.norm(v)
        if constraints is not None and constraints.size:
            if np.linalg.norm(constraints.T @ v) > _CONSTRAINT_TOL * nrm:
                continue
        if range_basis is not None:
            if np.linalg.norm(v - range_basis @ (range_basis.T @ v)) > _CONSTRAINT_TOL * nrm:
                continue
        if np.linalg.norm(v.imag) > _COMPLEX_TOL * nrm:
            raise ValueError("non-real eigenpair")
        picked.append(v.real / np.linalg.norm(v.real))
        if len(picked) == count:
            break
    if len(picked) < count:
        raise ValueError("no admissible eigenvector found")
    return picked


def _pick_real_eigvec(mat: np.ndarray, select: str,
                      constraints: np.ndarray | None = None,
                      range_basis: np.ndarray | None = None) -> np.ndarray:
    return _admissible_real_eigvecs(mat, 1, select, constraints, range_basis)[0]


def _direction_sequence(h: np.ndarray, g: np.ndarray, l: int, select: str,
                        g_inv: np.ndarray | None = None,
                        spd: bool | None = None) -> np.ndarray:
    """l mutually orthogonal extremal directions of the (H, G) quotient.

    The first vector solves H a = lambda G a; each subsequent one solves the
    same problem restricted to the orthogonal complement of its predecessors.
    """
    m = h.shape[0]
    if not 1 <= l <= m:
        raise ValueError(f"number of directions must be in [1, {m}], got {l}")
    if spd is None:
        spd = _is_spd(g)
    if not spd and g_inv is None:
        g_inv = pseudo_inverse(g)
    range_basis = None
    if not spd:
        rank = _numerical_rank(g)
        if rank < m:
            _, vecs = np.linalg.eigh(g)
            range_basis = vecs[:, m - rank:]
    basis: list[np.ndarray] = []
    for step in range(l):
        if spd:
            if step == 0:
                res = gen_sym_eig(h, g)
                a = res.vectors[:, 0 if select == "smallest" else -1]
            else:
                q = _complement_basis(np.column_stack(basis))
                res = gen_sym_eig(q.T @ h @ q, q.T @ g @ q)
                a = q @ res.vectors[:, 0 if select == "smallest" else -1]
        else:
            if step == 0:
                mat = g_inv @ h
                a = _pick_real_eigvec(mat, select, range_basis=range_basis)
            else:
                amat = np.column_stack(basis)
                bmat = amat.T @ g_inv @ amat
                if _numerical_rank(bmat) < bmat.shape[0]:
                    b_inv = pseudo_inverse(bmat)
                else:
                    b_inv = np.linalg.inv(bmat)
                deflate = np.eye(m) - g_inv @ amat @ b_inv @ amat.T
                mat = deflate @ g_inv @ h
                a = _pick_real_eigvec(mat, select, constraints=amat,
                                      range_basis=range_basis)
        a = _gram_schmidt(a, basis)
        basis.append(a)
    return fix_signs(np.column_stack(basis))


def _resolve_beta(strategy: Regularize, g: np.ndarray) -> float:
    if strategy.beta is not None:
        return strategy.beta
    return 1e-6 * float(np.trace(g)) / g.shape[0]


def fit_olpp(x, l: int, graph: NeighborGraph,
             strategy: SingularStrategy | None = Regularize(),
             select: str = "smallest") -> ProjectionModel:
    """Fit l orthogonal locality preserving directions on normalized data.

    `strategy` resolves a singular X D X^T; passing None demands it be
    nonsingular as-is. `select` picks the smallest-eigenvalue directions
    (locality preserving) or, with "largest", the maximal-quotient ones.
    """
    x = as_matrix(x, "data")
    if select not in ("smallest", "largest"):
        raise ValueError(f"select must be 'smallest' or 'largest', got {select!r}")
    g, h = _graph_matrices(x, graph)
    rank_g = _numerical_rank(g)
    if l > rank_g:
        raise ValueError(
            f"requested {l} directions but X D X^T has numerical rank {rank_g}")

    if isinstance(strategy, PcaProject):
        w_pca = fit_pca(x, strategy.variance_kept).w
        if l > w_pca.shape[1]:
            raise ValueError(
                f"requested {l} directions but PCA projection keeps {w_pca.shape[1]}")
        x_red = w_pca.T @ x
        g_red, h_red = _graph_matrices(x_red, graph)
        w_olpi = _direction_sequence(h_red, g_red, l, select, spd=_is_spd(g_red))
        w = fix_signs(w_pca @ w_olpi)
        return ProjectionModel(w=w, method="olpp", l=l, strategy=strategy)

    if isinstance(strategy, Regularize):
        g = g + _resolve_beta(strategy, g) * np.eye(g.shape[0])
        w = _direction_sequence(h, g, l, select, spd=True)
    elif isinstance(strategy, PseudoInverse):
        w = _direction_sequence(h, g, l, select, g_inv=pseudo_inverse(g), spd=False)
    elif strategy is None:
        if not _is_spd(g):
            raise ValueError("singular XDX^T: choose a remedy")
        w = _direction_sequence(h, g, l, select, spd=True)
    else:
        raise TypeError(f"unknown singular strategy: {strategy!r}")
    return ProjectionModel(w=w, method="olpp", l=l, strategy=strategy)


def fit_olpp_svd_variant(x, l: int, graph: NeighborGraph) -> ProjectionModel:
    """OLPP through the reduced eigenproblem in the SVD coordinates of X.

    With X = U S V^T, each direction a = U S^-1 b where b solves
    (V^T L V) b = lambda (V^T D V) b; orthogonality constraints on the a's
    translate to linear constraints on b. Handles singular X D X^T natively,
    since the reduction works inside the row space of X.
    """
    x = as_matrix(x, "data")
    if graph.n != x.shape[1]:
        raise ValueError(
            f"graph built on {graph.n} samples but data has {x.shape[1]}")
    dec = _truncated_svd(x)
    u, s, v = dec
    r = s.size
    if l > r:
        raise ValueError(f"requested {l} directions but X has numerical rank {r}")
    l_red = v.T @ (graph.laplacian @ v)
    d_red = v.T @ (graph.degrees[:, None] * v)
    l_red = 0.5 * (l_red + l_red.T)
    d_red = 0.5 * (d_red + d_red.T)
    us_inv = u / s
    basis: list[np.ndarray] = []
    for step in range(l):
        if step == 0:
            res = gen_sym_eig(l_red, d_red)
            b = res.vectors[:, 0]
        else:
            # constraint a_i^T a = 0 becomes (S^-1 U^T a_i)^T b = 0
            c = us_inv.T @ np.column_stack(basis)
            q = _complement_basis(c)
            res = gen_sym_eig(q.T @ l_red @ q, q.T @ d_red @ q)
            b = q @ res.vectors[:, 0]
        a = us_inv @ b
        a = _gram_schmidt(a, basis)
        basis.append(a)
    w = fix_signs(np.column_stack(basis))
    return ProjectionModel(w=w, method="olpp", l=l, strategy=None)


def _truncated_svd(x: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL):
    u, s, vt = np.linalg.svd(x, full_matrices=False)
    rank = int(np.sum(s > rank_tol * s[0])) if s[0] > 0 else 0
    if rank == 0:
        raise ValueError("zero data matrix")
    return u[:, :rank], s[:rank], vt[:rank].T


def fit_pca(x, l_or_variance) -> ProjectionModel:
    """PCA basis on normalized (zero-mean) data.

    An integer selects that many leading components; a fraction in (0, 1]
    selects the smallest count reaching that share of total variance.
    """
    x = as_matrix(x, "data")
    m, n = x.shape
    u, s, _ = np.linalg.svd(x, full_matrices=False)
    variances = s**2
    if isinstance(l_or_variance, (int, np.integer)) and not isinstance(l_or_variance, bool):
        l = int(l_or_variance)
        if not 1 <= l <= m:
            raise ValueError(f"component count must be in [1, {m}], got {l}")
    else:
        frac = float(l_or_variance)
        if not 0 < frac <= 1:
            raise ValueError(f"variance fraction must be in (0, 1], got {frac}")
        total = variances.sum()
        if total == 0:
            raise ValueError("zero data matrix")
        l = int(np.searchsorted(np.cumsum(variances) / total, frac) + 1)
        l = min(l, u.shape[1])
    w = fix_signs(u[:, :l])
    return ProjectionModel(w=w, method="pca", l=l)


def stack_lagged(x, lag: int) -> np.ndarray:
    """Time-lag embedding: column t holds [x_t; x_{t-1}; ...; x_{t-lag}]."""
    x = as_matrix(x, "data")
    m, n = x.shape
    if lag < 0:
        raise ValueError("lag must be non-negative")
    if n <= lag:
        raise ValueError(f"need more than lag={lag} samples, got {n}")
    if lag == 0:
        return x
    cols = n - lag
    out = np.empty(((lag + 1) * m, cols))
    for d in range(lag + 1):
        out[d * m:(d + 1) * m] = x[:, lag - d:n - d]
    return out


def fit_dpca(x, lag: int, l_or_variance) -> ProjectionModel:
    """Dynamic PCA: PCA on the lag-stacked matrix; the model records the lag."""
    stacked = stack_lagged(x, lag)
    base = fit_pca(stacked, l_or_variance)
    return ProjectionModel(w=base.w, method="dpca" if lag > 0 else "pca",
                           l=base.l, lag=lag)


def fit_lpp(x, l: int, graph: NeighborGraph,
            strategy: SingularStrategy | None = Regularize()) -> ProjectionModel:
    """Locality preserving projection: the first l generalized eigenvectors of
    (X L X^T) a = lambda (X D X^T) a, unit-normalized, without the
    orthogonality constraint."""
    x = as_matrix(x, "data")
    g, h = _graph_matrices(x, graph)
    rank_g = _numerical_rank(g)
    if l > rank_g:
        raise ValueError(
            f"requested {l} directions but X D X^T has numerical rank {rank_g}")

    if isinstance(strategy, PcaProject):
        w_pca = fit_pca(x, strategy.variance_kept).w
        if l > w_pca.shape[1]:
            raise ValueError(
                f"requested {l} directions but PCA projection keeps {w_pca.shape[1]}")
        x_red = w_pca.T @ x
        inner = fit_lpp(x_red, l, graph, strategy=None)
        w = w_pca @ inner.w
        return ProjectionModel(w=w, method="lpp", l=l, strategy=strategy)

    if isinstance(strategy, Regularize):
        g = g + _resolve_beta(strategy, g) * np.eye(g.shape[0])
        res = gen_sym_eig(h, g)
        w = res.vectors[:, :l]
    elif isinstance(strategy, PseudoInverse):
        rank = _numerical_rank(g)
        range_basis = None
        if rank < g.shape[0]:
            _, vecs = np.linalg.eigh(g)
            range_basis = vecs[:, g.shape[0] - rank:]
        cols = _admissible_real_eigvecs(pseudo_inverse(g) @ h, l, "smallest",
                                        range_basis=range_basis)
        w = np.column_stack(cols)
    elif strategy is None:
        if not _is_spd(g):
            raise ValueError("singular XDX^T: choose a remedy")
        res = gen_sym_eig(h, g)
        w = res.vectors[:, :l]
    else:
        raise TypeError(f"unknown singular strategy: {strategy!r}")
    return ProjectionModel(w=fix_signs(w), method="lpp", l=l, strategy=strategy)


def fit_maxvar_olpp(x, l: int) -> ProjectionModel:
    """Orthogonal directions of maximal variance via the uniform-weight graph.

    With constant weights 1/N^2 the locality Laplacian satisfies
    X L X^T = biased sample covariance, and the norm-constrained sequence
    selecting largest eigenvalues projects along maximal-variance directions,
    reproducing PCA.
    """
    x = as_matrix(x, "data")
    m, n = x.shape
    centered = x - x.mean(axis=1, keepdims=True)
    h = centered @ centered.T / n
    w = _direction_sequence(h, np.eye(m), l, select="largest", spd=True)
    return ProjectionModel(w=w, method="olpp", l=l, strategy=None)
