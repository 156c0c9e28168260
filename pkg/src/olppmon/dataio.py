"""Dataset ingestion, normalization statistics, and model/result serialization.

CSV layout: header row names the variables, one sample per row, optional
trailing `label` column (0 = normal, otherwise the fault id). Values are
written with 17 significant digits so numeric round-trips are exact.

Models are stored as versioned JSON; Python float repr round-trips exactly,
so a saved model detects identically to the in-memory one.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .linalg import as_matrix

MODEL_FORMAT = "olppmon-model"
MODEL_VERSION = 1


@dataclass(frozen=True)
class Dataset:
    """Variables-by-samples matrix with names and optional per-sample labels."""

    x: np.ndarray
    variable_names: list[str]
    labels: np.ndarray | None = None
    provenance: str = ""

    def __post_init__(self):
        if self.labels is not None and self.labels.shape[0] != self.x.shape[1]:
            raise ValueError("labels length must equal the number of samples")


@dataclass(frozen=True)
class NormStats:
    """Per-variable mean and standard deviation from training data."""

    mean: np.ndarray
    std: np.ndarray


def load_csv(path, provenance: str | None = None) -> Dataset:
    """Parse a dataset CSV; rows are samples, a `label` column is ground truth."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        has_labels = bool(header) and header[-1] == "label"
        names = header[:-1] if has_labels else header
        if not names:
            raise ValueError(f"{path}: no variable columns")
        rows, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValueError(
                    f"{path}: row {lineno} has {len(row)} cells, expected {len(header)}")
            try:
                values = [float(c) for c in row[: len(names)]]
            except ValueError as exc:
                raise ValueError(f"{path}: row {lineno}: {exc}") from None
            rows.append(values)
            if has_labels:
                try:
                    labels.append(int(float(row[-1])))
                except ValueError as exc:
                    raise ValueError(f"{path}: row {lineno}: {exc}") from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    x = np.asarray(rows, dtype=float).T
    return Dataset(x=x, variable_names=names,
                   labels=np.asarray(labels, dtype=int) if has_labels else None,
                   provenance=provenance if provenance is not None else str(path))


def save_csv(dataset: Dataset, path) -> None:
    """Write a Dataset with 17-significant-digit values."""
    path = Path(path)
    header = list(dataset.variable_names)
    if dataset.labels is not None:
        header.append("label")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for j in range(dataset.x.shape[1]):
            row = [f"{v:.17g}" for v in dataset.x[:, j]]
            if dataset.labels is not None:
                row.append(str(int(dataset.labels[j])))
            writer.writerow(row)


def normalize_fit(x) -> NormStats:
    """Training mean and unbiased std per variable; zero variance maps to std 1."""
    x = as_matrix(x, "data")
    if x.shape[1] < 2:
        raise ValueError("need at least two samples to fit normalization")
    mean = x.mean(axis=1)
    std = x.std(axis=1, ddof=1)
    flat = std == 0
    if np.any(flat):
        warnings.warn(
            f"{int(flat.sum())} variable(s) have zero variance; std set to 1")
        std = np.where(flat, 1.0, std)
    return NormStats(mean=mean, std=std)


def normalize_apply(x, stats: NormStats) -> np.ndarray:
    """Zero-mean unit-variance scaling with (training) statistics."""
    x = as_matrix(x, "data")
    if x.shape[0] != stats.mean.shape[0]:
        raise ValueError(
            f"data has {x.shape[0]} variables, stats describe {stats.mean.shape[0]}")
    return (x - stats.mean[:, None]) / stats.std[:, None]


def _strategy_to_json(strategy):
    from .projections import PcaProject, PseudoInverse, Regularize
    if strategy is None:
        return None
    if isinstance(strategy, PcaProject):
        return {"kind": "pca_project", "variance_kept": strategy.variance_kept}
    if isinstance(strategy, Regularize):
        return {"kind": "regularize", "beta": strategy.beta}
    if isinstance(strategy, PseudoInverse):
        return {"kind": "pseudo_inverse"}
    raise TypeError(f"unknown strategy {strategy!r}")


def _strategy_from_json(obj):
    from .projections import PcaProject, PseudoInverse, Regularize
    if obj is None:
        return None
    kind = obj.get("kind")
    if kind == "pca_project":
        return PcaProject(variance_kept=obj["variance_kept"])
    if kind == "regularize":
        return Regularize(beta=obj["beta"])
    if kind == "pseudo_inverse":
        return PseudoInverse()
    raise ValueError(f"unknown strategy kind {kind!r}")


def save_model(model, path) -> None:
    """Serialize a MonitoringModel to versioned JSON (W stored row-major)."""
    payload = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "method": model.projection.method,
        "l": model.projection.l,
        "lag": model.projection.lag,
        "strategy": _strategy_to_json(model.projection.strategy),
        "w": model.projection.w.tolist(),
        "mean": model.mean.tolist(),
        "std": model.std.tolist(),
        "rotation": model.rotation.tolist(),
        "lambda": model.lam.tolist(),
        "dropped_dims": model.dropped_dims,
        "alpha": model.alpha,
        "j_th_t2": model.j_th_t2,
        "j_th_spe": model.j_th_spe,
        "spe_active": model.spe_active,
        "kappa_t2": model.kappa_t2,
        "kappa_spe": model.kappa_spe,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_model(path):
    """Load a MonitoringModel saved by save_model; rejects unknown versions."""
    from .monitoring import MonitoringModel
    from .projections import ProjectionModel
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: corrupt or truncated model file: {exc}") from None
    if payload.get("format") != MODEL_FORMAT:
        raise ValueError(f"{path}: not a monitoring model file")
    if payload.get("version") != MODEL_VERSION:
        raise ValueError(
            f"{path}: unsupported model version {payload.get('version')!r}")
    proj = ProjectionModel(
        w=np.asarray(payload["w"], dtype=float),
        method=payload["method"],
        l=int(payload["l"]),
        strategy=_strategy_from_json(payload["strategy"]),
        lag=int(payload["lag"]),
    )
    return MonitoringModel(
        projection=proj,
        mean=np.asarray(payload["mean"], dtype=float),
        std=np.asarray(payload["std"], dtype=float),
        rotation=np.asarray(payload["rotation"], dtype=float),
        lam=np.asarray(payload["lambda"], dtype=float),
        dropped_dims=int(payload["dropped_dims"]),
        alpha=float(payload["alpha"]),
        j_th_t2=float(payload["j_th_t2"]),
        j_th_spe=None if payload["j_th_spe"] is None else float(payload["j_th_spe"]),
        spe_active=bool(payload["spe_active"]),
        kappa_t2=float(payload["kappa_t2"]),
        kappa_spe=None if payload["kappa_spe"] is None else float(payload["kappa_spe"]),
    )


def records_to_csv(records, j_th_t2: float, j_th_spe: float | None, path) -> None:
    """Detection series export: one row per scored sample."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample_index", "t2", "spe", "j_th_t2", "j_th_spe",
                         "verdict", "label"])
        spe_th = "" if j_th_spe is None else f"{j_th_spe:.17g}"
        for r in records:
            writer.writerow([
                r.index, f"{r.t2:.17g}", f"{r.spe:.17g}", f"{j_th_t2:.17g}",
                spe_th, r.verdict, "" if r.label is None else r.label,
            ])


def records_from_csv(path):
    """Read back a detection series written by records_to_csv."""
    from .monitoring import DetectionRecord
    path = Path(path)
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"sample_index", "t2", "spe", "j_th_t2", "j_th_spe", "verdict", "label"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ValueError(f"{path}: not a detection-record file")
        j_t2 = j_spe = None
        for lineno, row in enumerate(reader, start=2):
            try:
                j_t2 = float(row["j_th_t2"])
                j_spe = float(row["j_th_spe"]) if row["j_th_spe"] else None
                t2_val = float(row["t2"])
                spe_val = float(row["spe"])
                records.append(DetectionRecord(
                    index=int(row["sample_index"]), t2=t2_val, spe=spe_val,
                    t2_alarm=t2_val > j_t2,
                    spe_alarm=j_spe is not None and spe_val > j_spe,
                    verdict=row["verdict"],
                    label=int(row["label"]) if row["label"] != "" else None))
            except ValueError as exc:
                raise ValueError(f"{path}: row {lineno}: {exc}") from None
    if not records:
        raise ValueError(f"{path}: no detection records")
    return records, j_t2, j_spe
