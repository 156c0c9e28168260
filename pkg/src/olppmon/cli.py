"""Command-line interface: simulate benchmark data, train monitors, detect faults.

Commands write machine-readable outputs (JSON summaries, CSV series) plus
optional SVG monitoring charts; every command is deterministic for a fixed
seed, configuration, and inputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import benchmarks, datagen, dataio
from .charts import render_monitoring_chart
from .datagen import CstrConfig, NumericalConfig
from .intrinsic_dim import id_stability_sweep, mle_id
from .monitoring import MonitoringConfig, detect_series, evaluate, fit_monitoring
from .projections import PcaProject, PseudoInverse, Regularize

NUMERICAL_VARS = ["x1", "x2", "x3"]
CSTR_VARS = ["c_a", "t", "t_c", "q"]


def _write_json(obj, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _strategy_from_args(args) -> PcaProject | Regularize | PseudoInverse:
    if args.strategy == "pca":
        return PcaProject()
    if args.strategy == "pseudoinverse":
        return PseudoInverse()
    return Regularize(beta=args.beta)


def _monitoring_config(args) -> MonitoringConfig:
    return MonitoringConfig(
        method=args.method, k=args.k, q=args.q, k1=args.k1, k2=args.k2,
        alpha=args.alpha, strategy=_strategy_from_args(args), lag=args.lag,
        l=args.dim, pca_variance=args.variance)


def _load_dataset(path: str, lowpass: float | None) -> dataio.Dataset:
    ds = dataio.load_csv(path)
    if lowpass is not None:
        ds = dataio.Dataset(x=datagen.lowpass_filter(ds.x, lowpass),
                            variable_names=ds.variable_names, labels=ds.labels,
                            provenance=ds.provenance)
    return ds


def cmd_simulate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.process == "numerical":
        n = args.n_samples
        train, _ = datagen.gen_numerical(NumericalConfig(n_samples=n, seed=args.seed))
        dataio.save_csv(dataio.Dataset(train, NUMERICAL_VARS,
                                       np.zeros(n, dtype=int)), out / "train.csv")
        normal, _ = datagen.gen_numerical(
            NumericalConfig(n_samples=n, seed=args.seed + 9))
        dataio.save_csv(dataio.Dataset(normal, NUMERICAL_VARS,
                                       np.zeros(n, dtype=int)),
                        out / "test_normal.csv")
        for fid in (1, 2, 3):
            base, _ = datagen.gen_numerical(
                NumericalConfig(n_samples=n, seed=args.seed + fid))
            spec = datagen.numerical_fault(fid, args.onset)
            x = datagen.inject_fault_numerical(base, fid, spec.onset_index)
            labels = datagen.fault_labels(n, fid, spec.onset_index)
            dataio.save_csv(dataio.Dataset(x, NUMERICAL_VARS, labels),
                            out / f"test_fault{fid}.csv")
    else:
        config = CstrConfig()
        train, labels = datagen.simulate_cstr(config, args.train_seconds,
                                              seed=args.seed)
        dataio.save_csv(dataio.Dataset(train, CSTR_VARS, labels), out / "train.csv")
        n_test = args.test_minutes * 60
        for offset, (case, fid) in enumerate(
                [("normal", None), ("fault4", 4), ("fault5", 5)], start=1):
            fault = None if fid is None else datagen.cstr_fault(fid)
            x, labels = datagen.simulate_cstr(config, n_test,
                                              seed=args.seed + offset, fault=fault)
            dataio.save_csv(dataio.Dataset(x, CSTR_VARS, labels),
                            out / f"test_{case}.csv")
    print(f"wrote datasets to {out}")
    return 0


def cmd_id_estimate(args) -> int:
    ds = _load_dataset(args.data, args.lowpass)
    est = mle_id(ds.x, args.k1, args.k2)
    report = {
        "pooled": est.pooled,
        "rounded": est.rounded,
        "k1": est.k1,
        "k2": est.k2,
        "skipped_samples": est.skipped,
        "per_k": {str(k): v for k, v in est.per_k.items()},
    }
    if args.sweep:
        table = id_stability_sweep(ds.x, args.sweep_k1, args.sweep_k2,
                                   args.strides)
        report["sweep"] = [
            {"k1": k1, "k2": k2, "stride": j, "rounded": r}
            for (k1, k2, j), r in sorted(table.items())
        ]
    text = json.dumps(report, indent=1, sort_keys=True)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


def cmd_train(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ds = _load_dataset(args.train, args.lowpass)
    config = _monitoring_config(args)
    model = fit_monitoring(ds.x, config)
    dataio.save_model(model, out / "model.json")
    est = model.info.get("id_estimate")
    report = {
        "method": model.projection.method,
        "dimension": model.projection.l,
        "estimated_id": None if est is None else {
            "pooled": est.pooled, "rounded": est.rounded,
            "k1": est.k1, "k2": est.k2},
        "alpha": model.alpha,
        "thresholds": {"t2": model.j_th_t2, "spe": model.j_th_spe},
        "bandwidths": {"t2": model.kappa_t2, "spe": model.kappa_spe},
        "spe_active": model.spe_active,
        "training_coverage": {"t2": model.info["coverage_t2"],
                              "spe": model.info["coverage_spe"]},
        "graph": {"k": model.info["graph_k"], "q": model.info["graph_q"]},
        "n_train": int(ds.x.shape[1]),
    }
    _write_json(report, out / "train_report.json")
    print(f"wrote {out / 'model.json'} and {out / 'train_report.json'}")
    return 0


def cmd_detect(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    model = dataio.load_model(args.model)
    ds = _load_dataset(args.test, args.lowpass)
    records = detect_series(model, ds.x, ds.labels)
    dataio.records_to_csv(records, model.j_th_t2, model.j_th_spe,
                          out / "records.csv")
    summary = {
        "n_scored": len(records),
        "n_alarms": sum(r.verdict == "faulty" for r in records),
        "thresholds": {"t2": model.j_th_t2, "spe": model.j_th_spe},
    }
    if ds.labels is not None:
        metrics = evaluate(records)
        summary.update(fdr=metrics["fdr"], far=metrics["far"],
                       n_faulty=metrics["n_faulty"], n_normal=metrics["n_normal"])
    _write_json(summary, out / "summary.json")
    if args.svg:
        render_monitoring_chart(records, model.j_th_t2, model.j_th_spe,
                                out / "chart.svg", log_scale=args.log_scale)
    print(f"wrote detection outputs to {out}")
    return 0


def cmd_evaluate(args) -> int:
    records, _, _ = dataio.records_from_csv(args.records)
    metrics = evaluate(records)
    text = json.dumps(metrics, indent=1, sort_keys=True)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


def cmd_benchmark(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    if args.suite == "numerical":
        models, cells = benchmarks.run_numerical_benchmark(methods, seed=args.seed)
    else:
        models, cells = benchmarks.run_cstr_benchmark(methods, seed=args.seed)
    header, rows = benchmarks.cells_to_table(cells)
    with open(out / "benchmark.csv", "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(
                "" if v is None else (v if isinstance(v, str) else f"{v:.2f}")
                for v in row) + "\n")
    table_json = {
        "suite": args.suite,
        "methods": methods,
        "rows": [
            {"case": row[0], **{m: row[i + 1] for i, m in enumerate(methods)}}
            for row in rows
        ],
    }
    _write_json(table_json, out / "benchmark.json")
    if args.svg:
        for cell in cells:
            model = models[cell.method]
            render_monitoring_chart(
                cell.records, model.j_th_t2, model.j_th_spe,
                out / f"{cell.method}_{cell.case}.svg",
                title=f"{cell.method} / {cell.case}")
    print(f"wrote benchmark table to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="olppmon",
        description="Locality-preserving process monitoring toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate benchmark datasets as CSV")
    p.add_argument("--process", choices=["numerical", "cstr"], required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=benchmarks.NUMERICAL_SEED)
    p.add_argument("--n-samples", type=int, default=1000,
                   help="numerical: samples per dataset")
    p.add_argument("--onset", type=int, default=datagen.DEFAULT_NUMERICAL_ONSET,
                   help="numerical: fault onset sample")
    p.add_argument("--train-seconds", type=int, default=benchmarks.CSTR_TRAIN_SECONDS)
    p.add_argument("--test-minutes", type=int, default=benchmarks.CSTR_TEST_MINUTES)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("id-estimate", help="estimate intrinsic dimensionality")
    p.add_argument("--data", required=True)
    p.add_argument("--k1", type=int, default=10)
    p.add_argument("--k2", type=int, default=20)
    p.add_argument("--sweep", action="store_true",
                   help="also run a (k1, k2) x stride stability sweep")
    p.add_argument("--sweep-k1", type=int, nargs="+", default=[5, 10])
    p.add_argument("--sweep-k2", type=int, nargs="+", default=[15, 20, 25])
    p.add_argument("--strides", type=int, nargs="+", default=[1, 2, 3, 4])
    p.add_argument("--lowpass", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_id_estimate)

    p = sub.add_parser("train", help="fit a monitoring model from a training CSV")
    p.add_argument("--train", required=True)
    p.add_argument("--method", choices=["olpp", "lpp", "pca", "dpca"],
                   default="olpp")
    p.add_argument("--k", type=int, default=10, help="graph neighbor count")
    p.add_argument("--q", type=float, default=None, help="kernel width")
    p.add_argument("--k1", type=int, default=10)
    p.add_argument("--k2", type=int, default=20)
    p.add_argument("--alpha", type=float, default=0.99)
    p.add_argument("--strategy", choices=["regularize", "pca", "pseudoinverse"],
                   default="regularize")
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--lag", type=int, default=2, help="dpca time lag")
    p.add_argument("--dim", type=int, default=None,
                   help="override the estimated dimension")
    p.add_argument("--variance", type=float, default=None,
                   help="pca/dpca retained-variance fraction")
    p.add_argument("--lowpass", type=float, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("detect", help="score a test CSV against a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--svg", action="store_true", help="render the monitoring chart")
    p.add_argument("--log-scale", action="store_true")
    p.add_argument("--lowpass", type=float, default=None)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("evaluate", help="FDR/FAR from a detection-records CSV")
    p.add_argument("--records", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("benchmark", help="run a frozen benchmark suite")
    p.add_argument("--suite", choices=["numerical", "cstr"], required=True)
    p.add_argument("--methods", default="olpp",
                   help="comma-separated subset of olpp,lpp,pca,dpca")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--svg", action="store_true")
    p.set_defaults(func=cmd_benchmark)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) == "benchmark" and args.seed is None:
        args.seed = (benchmarks.NUMERICAL_SEED if args.suite == "numerical"
                     else benchmarks.CSTR_SEED)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
