"""Frozen end-to-end benchmark runs reproducing the two bundled case studies.

Both benchmarks freeze every knob (seeds, neighbor counts, ID-estimation
ranges, confidence level), so reruns are byte-identical and the reported
rates are reproducible fixtures rather than moving targets.

Numerical benchmark: 1000 training samples of the 3-variable system, then
1000-sample test runs for each step fault (onset at sample 500). At the
default neighborhood range the +-0.05 noise dominates, so the estimated
dimension equals the ambient 3 and monitoring runs on the full Mahalanobis
statistic (the residual subspace is empty, so SPE is inactive, as in the
CSTR case study).

CSTR benchmark: 6000 s of normal operation for training, 600 min test runs
(normal, feed-temperature step, volume ramp; onset at the 101st minute),
low-pass filtered before normalization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import datagen
from .datagen import CstrConfig, NumericalConfig, cstr_fault, numerical_fault
from .monitoring import (MonitoringConfig, MonitoringModel, detect_series,
                         evaluate, fit_monitoring)

NUMERICAL_SEED = 20240801
NUMERICAL_CONFIG = MonitoringConfig(method="olpp", k=10, q=None,
                                    k1=10, k2=20, alpha=0.99)

CSTR_SEED = 11
CSTR_TRAIN_SECONDS = 6000
CSTR_TEST_MINUTES = 600
CSTR_CONFIG = MonitoringConfig(method="olpp", k=10, q=None,
                               k1=10, k2=20, alpha=0.99)


@dataclass(frozen=True)
class BenchmarkCell:
    """Outcome of one (method, test-set) evaluation."""

    suite: str
    method: str
    case: str                 # "normal" or "fault<N>"
    fdr: float | None
    far: float | None
    records: list

    def rate(self) -> float | None:
        """The headline number: FAR for the normal case, FDR otherwise."""
        return self.far if self.case == "normal" else self.fdr


def _monitoring_config(base: MonitoringConfig, method: str) -> MonitoringConfig:
    cfg = MonitoringConfig(**{**base.__dict__})
    cfg.method = method
    return cfg


def numerical_datasets(seed: int = NUMERICAL_SEED, n: int = 1000):
    """Training set plus labeled test sets: normal and faults 1-3."""
    train, _ = datagen.gen_numerical(NumericalConfig(n_samples=n, seed=seed))
    tests = {}
    normal, _ = datagen.gen_numerical(NumericalConfig(n_samples=n, seed=seed + 9))
    tests["normal"] = (normal, np.zeros(n, dtype=int))
    for fid in (1, 2, 3):
        base, _ = datagen.gen_numerical(NumericalConfig(n_samples=n, seed=seed + fid))
        spec = numerical_fault(fid)
        faulty = datagen.inject_fault_numerical(base, fid, spec.onset_index)
        tests[f"fault{fid}"] = (faulty,
                                datagen.fault_labels(n, fid, spec.onset_index))
    return train, tests


def cstr_datasets(seed: int = CSTR_SEED, train_seconds: int = CSTR_TRAIN_SECONDS,
                  test_minutes: int = CSTR_TEST_MINUTES,
                  config: CstrConfig = CstrConfig()):
    """Low-pass-filtered CSTR training set plus normal / fault-4 / fault-5 tests."""
    retention = config.lowpass_retention
    train, _ = datagen.simulate_cstr(config, train_seconds, seed=seed)
    train = datagen.lowpass_filter(train, retention)
    n_test = test_minutes * 60
    tests = {}
    for offset, (case, fid) in enumerate(
            [("normal", None), ("fault4", 4), ("fault5", 5)], start=1):
        fault = None if fid is None else cstr_fault(fid)
        x, labels = datagen.simulate_cstr(config, n_test, seed=seed + offset,
                                          fault=fault)
        tests[case] = (datagen.lowpass_filter(x, retention), labels)
    return train, tests


def run_suite(train, tests, base_config: MonitoringConfig,
              methods=("olpp",), suite: str = "") -> tuple[dict[str, MonitoringModel], list[BenchmarkCell]]:
    """Fit one model per method and evaluate it on every test set."""
    models: dict[str, MonitoringModel] = {}
    cells: list[BenchmarkCell] = []
    for method in methods:
        model = fit_monitoring(train, _monitoring_config(base_config, method))
        models[method] = model
        for case, (x, labels) in tests.items():
            records = detect_series(model, x, labels)
            metrics = evaluate(records)
            cells.append(BenchmarkCell(suite=suite, method=method, case=case,
                                       fdr=metrics["fdr"], far=metrics["far"],
                                       records=records))
    return models, cells


def run_numerical_benchmark(methods=("olpp",), seed: int = NUMERICAL_SEED):
    train, tests = numerical_datasets(seed)
    return run_suite(train, tests, NUMERICAL_CONFIG, methods, suite="numerical")


def run_cstr_benchmark(methods=("olpp",), seed: int = CSTR_SEED):
    train, tests = cstr_datasets(seed)
    return run_suite(train, tests, CSTR_CONFIG, methods, suite="cstr")


def cells_to_table(cells) -> tuple[list[str], list[list]]:
    """Pivot cells into one row per case and one column per method.

    The normal row reports FAR; fault rows report FDR, mirroring the usual
    comparison-table layout.
    """
    methods = list(dict.fromkeys(c.method for c in cells))
    cases = list(dict.fromkeys(c.case for c in cells))
    by_key = {(c.method, c.case): c for c in cells}
    header = ["case"] + methods
    rows = []
    for case in cases:
        row = [case]
        for method in methods:
            cell = by_key.get((method, case))
            row.append(None if cell is None else cell.rate())
        rows.append(row)
    return header, rows
