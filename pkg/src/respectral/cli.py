"""Command-line front end.

Subcommands: cluster (one run, writes partition/metrics/history),
bench (repeated runs with derived seeds, aggregate table),
verify-theory (random-instance bound checks), make-blobs (synthetic data).
Every report embeds the config hash and seed so runs can be reproduced.
Exit codes: 0 success, 1 invalid input, 2 runtime failure, 3 violated bound.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import logging
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import dataset as ds_mod
from . import metrics as metrics_mod
from .blocks import KernelParams, median_bandwidth
from .restart import run_restarted_kmeans
from .rotation import run_restarted_rotation
from .theory import run_theory_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_RUNTIME = 2
EXIT_VIOLATION = 3

ALGORITHMS = {
    "alg1": "kmeans",
    "kmeans": "kmeans",
    "alg2": "rotation",
    "rotation": "rotation",
}


@dataclass
class RunConfig:
    """One clustering run, loadable from JSON with flag overrides."""

    data: str = ""
    format: str = "csv"           # csv | libsvm | blobs
    label_column: int | None = None
    algorithm: str = "alg1"
    clusters: int = 2
    tau: float | str = "median"
    landmarks: int | float | None = None
    rank: int | float | None = None
    max_cycles: int = 30
    tol: float = 1e-3
    coupling: float = 1.0
    kmeans_restarts: int = 10
    seed: int = 0
    normalize: bool = False
    zscore: bool = False
    blobs: dict | None = None     # {clusters, per_cluster, dim, separation}
    name: str = ""

    @staticmethod
    def from_dict(payload):
        known = {f.name for f in dataclasses.fields(RunConfig)}
        unknown = set(payload) - known
        if unknown:
            raise ValueError(f"unknown config field(s): {', '.join(sorted(unknown))}")
        cfg = RunConfig(**payload)
        if cfg.algorithm not in ALGORITHMS:
            raise ValueError(
                f"algorithm must be one of {sorted(ALGORITHMS)}, got {cfg.algorithm!r}"
            )
        if cfg.format not in ("csv", "libsvm", "blobs"):
            raise ValueError(f"format must be csv, libsvm or blobs, got {cfg.format!r}")
        if cfg.clusters < 1:
            raise ValueError(f"clusters must be >= 1, got {cfg.clusters}")
        if not isinstance(cfg.tau, str) and cfg.tau <= 0:
            raise ValueError(f"tau must be positive, got {cfg.tau}")
        if isinstance(cfg.tau, str) and cfg.tau != "median":
            raise ValueError(f"tau must be a number or 'median', got {cfg.tau!r}")
        return cfg

    def as_dict(self):
        return dataclasses.asdict(self)

    def digest(self):
        canon = json.dumps(self.as_dict(), sort_keys=True)
        return hashlib.sha256(canon.encode()).hexdigest()[:12]


def load_run_config(path=None, overrides=None):
    payload = {}
    if path:
        with open(path) as fh:
            payload.update(json.load(fh))
    for key, val in (overrides or {}).items():
        if val is not None:
            payload[key] = val
    return RunConfig.from_dict(payload)


def load_dataset(cfg):
    if cfg.format == "blobs":
        spec = cfg.blobs or {}
        return ds_mod.make_blobs(
            n_clusters=spec.get("clusters", cfg.clusters),
            per_cluster=spec.get("per_cluster", 100),
            dim=spec.get("dim", 2),
            separation=spec.get("separation", 10.0),
            seed=cfg.seed,
        )
    if not cfg.data:
        raise ValueError("config needs a 'data' path (or format='blobs')")
    if cfg.format == "csv":
        return ds_mod.load_csv(cfg.data, label_column=cfg.label_column, name=cfg.name)
    return ds_mod.load_libsvm(cfg.data, name=cfg.name)


def prepare_samples(dataset, cfg):
    samples = dataset.samples
    if cfg.zscore:
        samples = ds_mod.zscore_columns(samples)
    if cfg.normalize:
        samples = ds_mod.normalize_rows(samples)
    return samples


def execute_run(cfg, dataset=None, seed=None):
    """Run one config; returns a result dict.  Wall time excludes loading."""
    if dataset is None:
        dataset = load_dataset(cfg)
    samples = prepare_samples(dataset, cfg)
    seed = cfg.seed if seed is None else seed
    tau = cfg.tau
    if tau == "median":
        tau = median_bandwidth(samples, seed=seed)
    params = KernelParams(
        tau=float(tau), landmarks=cfg.landmarks, rank=cfg.rank, seed=seed
    )
    kind = ALGORITHMS[cfg.algorithm]
    t0 = time.perf_counter()
    if kind == "kmeans":
        part, history = run_restarted_kmeans(
            samples,
            cfg.clusters,
            params,
            max_cycles=cfg.max_cycles,
            tol=cfg.tol,
            kmeans_restarts=cfg.kmeans_restarts,
            labels=dataset.labels,
        )
    else:
        part, history = run_restarted_rotation(
            samples,
            cfg.clusters,
            params,
            max_cycles=cfg.max_cycles,
            tol=cfg.tol,
            coupling=cfg.coupling,
            labels=dataset.labels,
        )
    elapsed = time.perf_counter() - t0
    report = (
        metrics_mod.evaluate(part.assign, dataset.labels)
        if dataset.labels is not None
        else None
    )
    return {
        "partition": part,
        "history": history,
        "metrics": report,
        "seconds": elapsed,
        "tau": float(tau),
        "seed": seed,
        "config_hash": cfg.digest(),
    }


def _write_run_outputs(cfg, result, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stamp = {"config_hash": result["config_hash"], "seed": result["seed"]}

    with open(out / "partition.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample_index", "cluster"])
        for i, k in enumerate(result["partition"].assign):
            writer.writerow([i, int(k)])

    with open(out / "history.jsonl", "w") as fh:
        for rec in result["history"]:
            fh.write(json.dumps({**rec, **stamp}) + "\n")

    if result["metrics"] is not None:
        (out / "metrics.json").write_text(
            result["metrics"].to_json(seconds=round(result["seconds"], 4), **stamp)
        )

    echo = {**cfg.as_dict(), **stamp, "tau_used": result["tau"]}
    (out / "config.json").write_text(json.dumps(echo, indent=2, sort_keys=True))


def cmd_cluster(args):
    overrides = {
        "data": args.data,
        "format": args.format,
        "label_column": args.label_column,
        "algorithm": args.algorithm,
        "clusters": args.clusters,
        "tau": args.tau,
        "landmarks": args.landmarks,
        "rank": args.rank,
        "max_cycles": args.max_cycles,
        "tol": args.tol,
        "coupling": args.coupling,
        "seed": args.seed,
        "normalize": args.normalize or None,
        "zscore": args.zscore or None,
    }
    cfg = load_run_config(args.config, overrides)
    result = execute_run(cfg)
    _write_run_outputs(cfg, result, args.out)
    line = (
        f"[{result['config_hash']}] {cfg.algorithm} c={cfg.clusters} "
        f"cycles={len(result['history'])} seconds={result['seconds']:.3f}"
    )
    if result["metrics"] is not None:
        line += f" average={result['metrics'].average:.4f}"
    print(line)
    return EXIT_OK


BENCH_COLUMNS = ("ACC", "NMI", "Purity", "ARI", "precision", "Recall", "F-score", "Average", "CPU")


def _bench_row(label, reports, seconds):
    vals = [
        float(np.mean([getattr(r, m) for r in reports]))
        for m in metrics_mod.METRIC_NAMES
    ]
    vals.append(float(np.mean([r.average for r in reports])))
    vals.append(float(np.mean(seconds)))
    return [label] + vals


def _print_table(rows):
    header = ["run"] + list(BENCH_COLUMNS)
    widths = [max(len(str(r[i])) if isinstance(r[i], str) else 8 for r in [header] + rows)
              for i in range(len(header))]
    widths = [max(w, len(header[i])) for i, w in enumerate(widths)]

    def fmt(row):
        cells = []
        for i, cell in enumerate(row):
            if isinstance(cell, float):
                cells.append(f"{cell:.4f}".rjust(widths[i]))
            else:
                cells.append(str(cell).ljust(widths[i]))
        return "  ".join(cells)

    print(fmt(header))
    print("  ".join("-" * w for w in widths))
    for row in rows:
        print(fmt(row))


def cmd_bench(args):
    with open(args.config) as fh:
        payload = json.load(fh)
    runs = payload["runs"] if isinstance(payload, dict) else payload
    if not isinstance(runs, list) or not runs:
        raise ValueError("bench config must hold a non-empty list under 'runs'")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    table_rows = []
    csv_rows = []
    for idx, run_payload in enumerate(runs):
        cfg = RunConfig.from_dict(run_payload)
        label = cfg.name or f"{cfg.algorithm}:{Path(cfg.data).stem or cfg.format}"
        dataset = load_dataset(cfg)
        if dataset.labels is None:
            raise ValueError(f"run {idx}: bench needs ground-truth labels")
        reports, seconds = [], []
        for k in range(args.runs):
            try:
                result = execute_run(cfg, dataset=dataset, seed=cfg.seed + k)
            except Exception as exc:  # per-run failures recorded, not fatal
                logger.error("run %s seed %d failed: %s", label, cfg.seed + k, exc)
                csv_rows.append(
                    {"run": label, "seed": cfg.seed + k, "status": f"error: {exc}",
                     "config_hash": cfg.digest()}
                )
                continue
            reports.append(result["metrics"])
            seconds.append(result["seconds"])
            csv_rows.append(
                {
                    "run": label,
                    "seed": result["seed"],
                    "status": "ok",
                    "config_hash": result["config_hash"],
                    "seconds": round(result["seconds"], 4),
                    **{k2: round(v, 4) for k2, v in result["metrics"].as_dict().items()},
                }
            )
        if reports:
            table_rows.append(_bench_row(label, reports, seconds))

    fields = ["run", "seed", "status", "config_hash", "seconds"] + list(
        metrics_mod.METRIC_NAMES
    ) + ["average"]
    with open(out / "bench.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for row in csv_rows:
            writer.writerow(row)
    _print_table(table_rows)
    return EXIT_OK


def cmd_verify_theory(args):
    reports = run_theory_suite(n_instances=args.instances, seed=args.seed)
    violations = []
    lines = []
    for i, rep in enumerate(reports):
        dev, sub = rep.deviation, rep.subspace
        dev_state = (
            "n/a" if dev.holds is None else ("ok" if dev.holds else "VIOLATED")
        )
        sub_state = (
            "n/a" if sub.holds is None else ("ok" if sub.holds else "VIOLATED")
        )
        lines.append(
            f"instance {i:02d} n={rep.n} c={rep.n_clusters} "
            f"deviation[lhs={dev.lhs:.3e} bound={dev.bound:.3e} {dev_state}] "
            f"subspace[sin={sub.sin_theta:.3e} bound={sub.bound:.3e} {sub_state}]"
        )
        if rep.violated():
            violations.append(i)
    for line in lines:
        print(line)
    applicable_dev = sum(r.deviation.holds is not None for r in reports)
    applicable_sub = sum(r.subspace.holds is not None for r in reports)
    print(
        f"checked {len(reports)} instances: deviation applicable on {applicable_dev}, "
        f"subspace applicable on {applicable_sub}, violations: {len(violations)}"
    )
    if args.out:
        payload = [
            {
                "instance": i,
                "n": r.n,
                "clusters": r.n_clusters,
                "seed": r.seed,
                "deviation": dataclasses.asdict(r.deviation),
                "subspace": dataclasses.asdict(r.subspace),
            }
            for i, r in enumerate(reports)
        ]
        Path(args.out).write_text(json.dumps(payload, indent=2))
    if violations:
        print(f"violated instances: {violations}")
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_make_blobs(args):
    dataset = ds_mod.make_blobs(
        n_clusters=args.clusters,
        per_cluster=args.per_cluster,
        dim=args.dim,
        separation=args.separation,
        seed=args.seed,
    )
    ds_mod.save_csv(dataset, args.out)
    print(f"wrote {dataset.n} samples ({args.clusters} clusters) to {args.out}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="respectral",
        description="Restarted self-guiding spectral clustering on block-compressed kernels",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_cluster = sub.add_parser("cluster", help="cluster one dataset")
    p_cluster.add_argument("--config", help="JSON config file (flags override)")
    p_cluster.add_argument("--data", help="dataset path")
    p_cluster.add_argument("--format", choices=["csv", "libsvm", "blobs"])
    p_cluster.add_argument("--label-column", dest="label_column", type=int)
    p_cluster.add_argument("--algorithm", choices=sorted(ALGORITHMS))
    p_cluster.add_argument("--clusters", type=int)
    p_cluster.add_argument("--tau", type=lambda s: s if s == "median" else float(s))
    p_cluster.add_argument("--landmarks", type=_int_or_float)
    p_cluster.add_argument("--rank", type=_int_or_float)
    p_cluster.add_argument("--max-cycles", dest="max_cycles", type=int)
    p_cluster.add_argument("--tol", type=float)
    p_cluster.add_argument("--coupling", type=float)
    p_cluster.add_argument("--seed", type=int)
    p_cluster.add_argument("--normalize", action="store_true")
    p_cluster.add_argument("--zscore", action="store_true")
    p_cluster.add_argument("--out", default="out", help="output directory")
    p_cluster.set_defaults(func=cmd_cluster)

    p_bench = sub.add_parser("bench", help="repeat runs and tabulate mean metrics")
    p_bench.add_argument("--config", required=True, help="JSON file with a 'runs' list")
    p_bench.add_argument("--runs", type=int, default=5, help="repeats per config")
    p_bench.add_argument("--out", default="bench_out")
    p_bench.set_defaults(func=cmd_bench)

    p_theory = sub.add_parser("verify-theory", help="check error bounds on random instances")
    p_theory.add_argument("--instances", type=int, default=20)
    p_theory.add_argument("--seed", type=int, default=0)
    p_theory.add_argument("--out", help="optional JSON report path")
    p_theory.set_defaults(func=cmd_verify_theory)

    p_blobs = sub.add_parser("make-blobs", help="write a synthetic blob dataset")
    p_blobs.add_argument("--clusters", type=int, default=3)
    p_blobs.add_argument("--per-cluster", dest="per_cluster", type=int, default=100)
    p_blobs.add_argument("--dim", type=int, default=2)
    p_blobs.add_argument("--separation", type=float, default=10.0)
    p_blobs.add_argument("--seed", type=int, default=0)
    p_blobs.add_argument("--out", required=True)
    p_blobs.set_defaults(func=cmd_make_blobs)

    return parser


def _int_or_float(text):
    value = float(text)
    if value.is_integer() and "." not in text:
        return int(value)
    return value


def main(argv=None):
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # unexpected runtime failure
        logger.exception("run failed")
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
