"""Locality-preserving process monitoring with MLE intrinsic-dimension selection.

Fits orthogonal locality preserving projections (and PCA/DPCA/LPP baselines)
on normal operating data, picks the latent dimension by maximum-likelihood
estimation from nearest-neighbor distances, and flags faults online through
T^2 and SPE statistics against kernel-density alarm thresholds.
"""

from .dataio import Dataset, NormStats, load_csv, load_model, save_csv, save_model
from .intrinsic_dim import IdEstimate, id_stability_sweep, mle_id, mle_id_point
from .monitoring import (DetectionRecord, MonitoringConfig, MonitoringModel,
                         bandwidth_opt, detect, detect_series, evaluate,
                         fit_monitoring, kde_pdf, kde_threshold, spe, t2)
from .neighbors import NeighborGraph, build_graph, knn_indices
from .projections import (PcaProject, ProjectionModel, PseudoInverse,
                          Regularize, fit_dpca, fit_lpp, fit_maxvar_olpp,
                          fit_olpp, fit_olpp_svd_variant, fit_pca, project)

__version__ = "0.1.0"

__all__ = [
    "Dataset", "NormStats", "load_csv", "save_csv", "load_model", "save_model",
    "IdEstimate", "mle_id", "mle_id_point", "id_stability_sweep",
    "DetectionRecord", "MonitoringConfig", "MonitoringModel",
    "bandwidth_opt", "detect", "detect_series", "evaluate", "fit_monitoring",
    "kde_pdf", "kde_threshold", "spe", "t2",
    "NeighborGraph", "build_graph", "knn_indices",
    "PcaProject", "ProjectionModel", "PseudoInverse", "Regularize",
    "fit_dpca", "fit_lpp", "fit_maxvar_olpp", "fit_olpp",
    "fit_olpp_svd_variant", "fit_pca", "project",
    "__version__",
]
