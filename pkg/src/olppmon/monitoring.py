"""T^2 / SPE monitoring statistics, KDE alarm thresholds, and detection logic.

Off-line: normalize training data, estimate the intrinsic dimension, fit the
chosen projection, then calibrate kernel-density thresholds for both
statistics at confidence alpha. On-line: normalize each test sample with the
training statistics, project, score, and alarm when either statistic exceeds
its threshold.

T^2 is evaluated in the eigenvector frame of the score covariance, i.e. it is
the Mahalanobis distance of the projected sample scaled by the latent
variances. SPE is the squared reconstruction residual; for an orthonormal
basis it equals ||x||^2 - ||W^T x||^2.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf

from . import projections
from .dataio import normalize_apply, normalize_fit
from .intrinsic_dim import IdEstimate, mle_id
from .linalg import as_matrix
from .neighbors import build_graph
from .projections import (ProjectionModel, Regularize, SingularStrategy,
                          project, stack_lagged)

_SQRT2 = np.sqrt(2.0)
_LAMBDA_FLOOR = 1e-12
_SPE_CLAMP = 1e-9

METHODS = ("olpp", "lpp", "pca", "dpca")


@dataclass
class MonitoringConfig:
    """Knobs for the off-line modeling phase."""

    method: str = "olpp"
    k: int = 10                     # graph neighbors
    q: float | None = None          # kernel width, None = median heuristic
    k1: int = 10                    # ID estimation neighbor range
    k2: int = 20
    alpha: float = 0.99
    strategy: SingularStrategy | None = field(default_factory=Regularize)
    lag: int = 2                    # dpca only
    l: int | None = None            # override the estimated dimension
    pca_variance: float | None = None  # pca/dpca: retained-variance rule

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must be in (0, 1)")


@dataclass
class MonitoringModel:
    """Everything the on-line phase needs, immutable after fit."""

    projection: ProjectionModel
    mean: np.ndarray                 # per-variable training mean
    std: np.ndarray                  # per-variable training std
    rotation: np.ndarray             # (l, r) eigenvectors of cov(Y), r retained dims
    lam: np.ndarray                  # (r,) positive eigenvalues, descending
    dropped_dims: int
    alpha: float
    j_th_t2: float
    j_th_spe: float | None           # None when SPE is inactive (l = full rank)
    spe_active: bool
    kappa_t2: float
    kappa_spe: float | None
    info: dict = field(default_factory=dict, repr=False)  # fit diagnostics, not serialized


@dataclass(frozen=True)
class DetectionRecord:
    """Per-sample statistics and verdict; verdict is faulty iff either alarm fires."""

    index: int
    t2: float
    spe: float
    t2_alarm: bool
    spe_alarm: bool
    verdict: str                     # "normal" | "faulty"
    label: int | None = None         # ground truth: 0 normal, >0 fault id


def t2(y, lam) -> float:
    """Variance-scaled squared score: sum(y_i^2 / gamma_i)."""
    y = np.asarray(y, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if y.shape[0] != lam.shape[0]:
        raise ValueError(f"score has {y.shape[0]} entries but {lam.shape[0]} variances")
    if np.any(lam <= 0):
        raise ValueError("latent variances must be positive")
    return float(np.sum(y * y / lam))


def spe(x, w) -> float:
    """Squared reconstruction residual ||x||^2 - ||W^T x||^2 for orthonormal W.

    Tiny negative values from rounding are clamped to zero; anything beyond
    the clamp budget means W^T W deviates from the identity.
    """
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    y = w.T @ x
    value = float(x @ x - y @ y)
    if value < 0:
        if -value > _SPE_CLAMP:
            raise ValueError("orthonormality violated")
        value = 0.0
    return value


def kde_pdf(z, samples, kappa: float):
    """Gaussian kernel density estimate at z (scalar or array)."""
    if kappa <= 0:
        raise ValueError("bandwidth must be positive")
    s = np.asarray(samples, dtype=float).ravel()
    if s.size == 0:
        raise ValueError("need at least one sample")
    z = np.asarray(z, dtype=float)
    u = (z[..., None] - s) / kappa
    dens = np.exp(-0.5 * u * u).sum(axis=-1) / (s.size * kappa * np.sqrt(2 * np.pi))
    return float(dens) if dens.ndim == 0 else dens


def bandwidth_opt(samples) -> float:
    """Gaussian-reference bandwidth 1.06 * sigma * N^(-1/5)."""
    s = np.asarray(samples, dtype=float).ravel()
    if s.size < 2:
        raise ValueError("need at least two samples")
    sigma = float(s.std(ddof=1))
    if sigma == 0:
        raise ValueError("degenerate statistic distribution")
    return 1.06 * sigma * s.size ** (-0.2)


def _kde_cdf(j, s, kappa):
    return float(np.mean(0.5 * (1.0 + erf((j - s) / (kappa * _SQRT2)))))


def kde_threshold(samples, alpha: float, kappa: float | None = None) -> float:
    """Solve the KDE CDF equation F(J) = alpha by bisection.

    The CDF is the exact mixture of Gaussian CDFs, bracketed on
    [min - 6*kappa, max + 6*kappa]. With a degenerate (constant) sample set a
    tiny bandwidth floor is substituted so the threshold lands on the mass.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must be in (0, 1)")
    s = np.asarray(samples, dtype=float).ravel()
    if s.size == 0:
        raise ValueError("need at least one sample")
    if kappa is None:
        sigma = float(s.std(ddof=1)) if s.size > 1 else 0.0
        if sigma == 0:
            kappa = 1e-12 * max(1.0, float(np.abs(s).max()))
        else:
            kappa = 1.06 * sigma * s.size ** (-0.2)
    lo = float(s.min()) - 6 * kappa
    hi = float(s.max()) + 6 * kappa
    tol = 1e-9 * (hi - lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:     # bracket at machine resolution
            return mid
        if _kde_cdf(mid, s, kappa) < alpha:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol:
            return 0.5 * (lo + hi)
    raise RuntimeError("threshold bisection did not converge in 200 iterations")


def _span_basis(model: ProjectionModel) -> np.ndarray:
    """Orthonormal basis of span(W); W itself for the orthonormal methods."""
    if model.method == "lpp":
        q, _ = np.linalg.qr(model.w)
        return q
    return model.w


def _resolve_dimension(z: np.ndarray, config: MonitoringConfig) -> tuple[int | float, IdEstimate | None]:
    if config.l is not None:
        return config.l, None
    if config.method in ("pca", "dpca") and config.pca_variance is not None:
        return config.pca_variance, None
    est = mle_id(z, config.k1, config.k2)
    return est.rounded, est


def fit_monitoring(x_train, config: MonitoringConfig | None = None) -> MonitoringModel:
    """Off-line modeling: normalize, estimate dimension, fit, calibrate thresholds."""
    config = config or MonitoringConfig()
    x = as_matrix(x_train, "training data")
    if x.shape[1] < 50:
        raise ValueError(f"need at least 50 training samples, got {x.shape[1]}")
    stats = normalize_fit(x)
    z = normalize_apply(x, stats)

    l_or_var, id_est = _resolve_dimension(z, config)
    graph = None
    if config.method == "olpp":
        graph = build_graph(z, config.k, config.q)
        proj = projections.fit_olpp(z, int(l_or_var), graph, config.strategy)
    elif config.method == "lpp":
        graph = build_graph(z, config.k, config.q)
        proj = projections.fit_lpp(z, int(l_or_var), graph, config.strategy)
    elif config.method == "pca":
        proj = projections.fit_pca(z, l_or_var)
    else:
        proj = projections.fit_dpca(z, config.lag, l_or_var)

    z_fit = stack_lagged(z, proj.lag) if proj.lag else z
    y = project(proj, z_fit)
    if y.ndim == 1:
        y = y[None, :]
    cov_y = np.atleast_2d(np.cov(y, ddof=1))
    lam_all, rot = np.linalg.eigh(cov_y)
    order = np.argsort(lam_all)[::-1]
    lam_all, rot = lam_all[order], rot[:, order]
    keep = lam_all > _LAMBDA_FLOOR * lam_all[0]
    dropped = int(np.sum(~keep))
    if dropped:
        warnings.warn(f"dropping {dropped} near-zero-variance score dimensions from T^2")
    lam, rot = lam_all[keep], np.ascontiguousarray(rot[:, keep])

    t2_train = np.sum((rot.T @ y) ** 2 / lam[:, None], axis=0)
    basis = _span_basis(proj)
    spe_train = np.einsum("ij,ij->j", z_fit, z_fit) - \
        np.einsum("ij,ij->j", basis.T @ z_fit, basis.T @ z_fit)
    spe_train = np.where((spe_train < 0) & (spe_train > -_SPE_CLAMP), 0.0, spe_train)
    if np.any(spe_train < 0):
        raise ValueError("orthonormality violated")

    # a full-rank basis leaves no residual subspace: SPE carries no signal
    spe_active = basis.shape[1] < basis.shape[0] and float(spe_train.std(ddof=1)) > 0
    if not spe_active:
        warnings.warn("residual subspace is empty; SPE monitoring disabled")

    kappa_t2 = bandwidth_opt(t2_train)
    j_th_t2 = kde_threshold(t2_train, config.alpha, kappa_t2)
    kappa_spe = j_th_spe = None
    if spe_active:
        kappa_spe = bandwidth_opt(spe_train)
        j_th_spe = kde_threshold(spe_train, config.alpha, kappa_spe)

    info = {
        "id_estimate": id_est,
        "graph_q": graph.q if graph is not None else None,
        "graph_k": graph.k if graph is not None else None,
        "t2_train": t2_train,
        "spe_train": spe_train,
        "coverage_t2": float(np.mean(t2_train <= j_th_t2)),
        "coverage_spe": float(np.mean(spe_train <= j_th_spe)) if spe_active else None,
    }
    return MonitoringModel(
        projection=proj, mean=stats.mean, std=stats.std, rotation=rot, lam=lam,
        dropped_dims=dropped, alpha=config.alpha, j_th_t2=j_th_t2,
        j_th_spe=j_th_spe, spe_active=spe_active,
        kappa_t2=kappa_t2, kappa_spe=kappa_spe, info=info)


def _normalize_sample(model: MonitoringModel, x_raw: np.ndarray) -> np.ndarray:
    lag = model.projection.lag
    m = model.mean.size
    expected = (lag + 1) * m
    if x_raw.shape[0] != expected:
        raise ValueError(
            f"sample dimension {x_raw.shape[0]} does not match model dimension {expected}")
    reps = lag + 1
    mean = np.tile(model.mean, reps)
    std = np.tile(model.std, reps)
    return (x_raw - mean) / std


def detect(model: MonitoringModel, x_raw, label: int | None = None,
           index: int = 0) -> DetectionRecord:
    """Score one raw sample against the model; lag-stacked input for dpca."""
    x_raw = np.asarray(x_raw, dtype=float)
    z = _normalize_sample(model, x_raw)
    y = project(model.projection, z)
    t2_val = t2(model.rotation.T @ y, model.lam)
    spe_val = spe(z, _span_basis(model.projection))
    t2_alarm = bool(t2_val > model.j_th_t2)
    spe_alarm = bool(model.spe_active and spe_val > model.j_th_spe)
    verdict = "faulty" if (t2_alarm or spe_alarm) else "normal"
    return DetectionRecord(index=index, t2=t2_val, spe=spe_val,
                           t2_alarm=t2_alarm, spe_alarm=spe_alarm,
                           verdict=verdict, label=label)


def detect_series(model: MonitoringModel, x_test, labels=None) -> list[DetectionRecord]:
    """Score a test series sample by sample.

    For dpca models the series is lag-stacked with a sliding window primed by
    the first `lag` samples, which therefore receive no verdicts; records
    start at index lag.
    """
    x = as_matrix(x_test, "test data")
    if labels is not None:
        labels = np.asarray(labels)
        if labels.shape[0] != x.shape[1]:
            raise ValueError("labels length must match the number of samples")
    lag = model.projection.lag
    m = model.mean.size
    if x.shape[0] != m:
        raise ValueError(f"test data has {x.shape[0]} variables, model expects {m}")
    records = []
    for idx in range(lag, x.shape[1]):
        if lag:
            window = x[:, idx - lag:idx + 1]
            sample = window[:, ::-1].T.ravel()  # [x_t; x_{t-1}; ...; x_{t-lag}]
        else:
            sample = x[:, idx]
        lab = None if labels is None else int(labels[idx])
        records.append(detect(model, sample, label=lab, index=idx))
    return records


def evaluate(records) -> dict:
    """Fault detection rate and false alarm rate, in percent.

    A class with no members yields None for its metric rather than zero.
    """
    records = list(records)
    if not records:
        raise ValueError("no detection records to evaluate")
    if any(r.label is None for r in records):
        raise ValueError("every record must carry a ground-truth label")
    faulty = [r for r in records if r.label != 0]
    normal = [r for r in records if r.label == 0]
    fdr = 100.0 * sum(r.verdict == "faulty" for r in faulty) / len(faulty) if faulty else None
    far = 100.0 * sum(r.verdict == "faulty" for r in normal) / len(normal) if normal else None
    return {
        "fdr": fdr,
        "far": far,
        "n_faulty": len(faulty),
        "n_normal": len(normal),
        "n_alarms": sum(r.verdict == "faulty" for r in records),
    }
