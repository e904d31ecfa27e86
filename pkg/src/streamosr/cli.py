"""Command line: ``streamosr generate | run | bench``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 partial benchmark failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

from . import bench
from .core import BASELINES, ExperimentConfig
from .datagen import GENERATORS, DATASET_GROUPS, CSVFormatError, GeneratorParams, generate, load_csv, group_params, write_csv

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_PARTIAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _floats(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def _words(text):
    return tuple(v.strip() for v in text.split(",") if v.strip())


def build_parser():
    p = argparse.ArgumentParser(prog="streamosr", description="Streaming open-set recognition benchmark.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write synthetic datasets as CSV")
    g.add_argument("--generator", choices=GENERATORS, required=True, help="generator family")
    g.add_argument("--group", choices=list(DATASET_GROUPS) + ["all"], help="dataset parameter group (D1-D4, ...) or 'all'")
    g.add_argument("--master-seed", type=int, default=0, help="seed from which per-dataset seeds are derived")
    g.add_argument("--n-instances", type=int, help="explicit mode: number of instances")
    g.add_argument("--n-classes", type=int, help="explicit mode: number of classes")
    g.add_argument("--n-features", type=int, help="explicit mode: number of features")
    g.add_argument("--std-dev", type=float, default=1.0, help="explicit mode: isoGauss noise std (default 1)")
    g.add_argument("--class-sep", type=float, default=1.0, help="explicit mode: hyperCube vertex scale (default 1)")
    g.add_argument("--seed", type=int, help="explicit mode: generator seed (default: --master-seed)")
    g.add_argument("--name", help="explicit mode: dataset/file name")
    g.add_argument("--out-dir", required=True, help="directory for CSV files and manifest.json")

    r = sub.add_parser("run", help="run one experiment on a dataset CSV")
    r.add_argument("--dataset", required=True, help="CSV with header f0..f{d-1},label")
    r.add_argument("--beta", type=float, required=True, help="missing-class ratio in (0, 1)")
    r.add_argument("--baseline", choices=BASELINES, required=True)
    r.add_argument("--seed", type=int, default=0, help="run seed (partition, split, warm-up)")
    r.add_argument("--gamma-h", type=float, help="fixed entropy threshold in (0, 1]; omit for the Youden threshold")
    r.add_argument("--learning-rate", type=float, default=0.01, help="SGD step size (default 0.01)")
    r.add_argument("--warmup-epochs", type=int, default=1, help="warm-up passes over the training split (default 1)")
    r.add_argument("--out-dir", default=".", help="where run.csv and report.json are written")

    b = sub.add_parser("bench", help="run the dataset x beta x baseline matrix")
    b.add_argument("--spec", help="JSON benchmark spec; flags below override its fields")
    b.add_argument("--master-seed", type=int, help="master seed (default 0)")
    b.add_argument("--betas", type=_floats, help="comma-separated betas for synthetic datasets")
    b.add_argument("--real-betas", type=_floats, help="comma-separated betas for --real-dataset files")
    b.add_argument("--baselines", type=_words, help="comma-separated subset of static,incremental,sosr")
    b.add_argument("--generators", type=_words, help="comma-separated subset of isoGauss,hyperCube ('' for none)")
    b.add_argument("--groups", type=_words, help="comma-separated dataset groups, e.g. D1-D4,D5-D8")
    b.add_argument("--datasets", type=_words, help="comma-separated dataset names, e.g. isoGauss-D1")
    b.add_argument("--real-dataset", action="append", default=None, help="dataset CSV to include (repeatable)")
    b.add_argument("--seeds-per-real-dataset", type=int, help="repetitions per real dataset and beta (default 5)")
    b.add_argument("--jobs", type=int, help="parallel worker processes (default 1)")
    b.add_argument("--out-dir", help="output directory (default ./bench-results)")
    return p


def cmd_generate(args):
    out = Path(args.out_dir)
    explicit = [args.n_instances, args.n_classes, args.n_features]
    if args.group and any(v is not None for v in explicit):
        raise UsageError("use either --group or explicit --n-* parameters, not both")
    if args.group:
        groups = list(DATASET_GROUPS) if args.group == "all" else [args.group]
        jobs = [item for grp in groups for item in group_params(args.generator, grp, args.master_seed)]
    elif all(v is not None for v in explicit):
        seed = args.master_seed if args.seed is None else args.seed
        params = GeneratorParams(args.n_instances, args.n_classes, args.n_features, args.std_dev, args.class_sep, seed)
        jobs = [(args.name or args.generator, params)]
    else:
        raise UsageError("give --group or all of --n-instances, --n-classes, --n-features")

    out.mkdir(parents=True, exist_ok=True)
    manifest = []
    for name, params in jobs:
        ds = generate(args.generator, params, name)
        path = out / f"{name}.csv"
        write_csv(ds, path)
        entry = {"name": name, "generator": args.generator, "file": path.name, **asdict(params)}
        manifest.append(entry)
        print(json.dumps(entry, sort_keys=True))
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_run(args):
    try:
        config = ExperimentConfig(
            beta=args.beta,
            seed=args.seed,
            baseline=args.baseline,
            learning_rate=args.learning_rate,
            warmup_epochs=args.warmup_epochs,
            gamma_h=args.gamma_h,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    dataset = load_csv(args.dataset)
    record, report = bench.run_experiment(dataset, config)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    record.to_csv(out / "run.csv")
    payload = {"dataset": dataset.name, **config.echo(), **report.to_dict()}
    payload = {k: v for k, v in payload.items() if v is not None}
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    (out / "report.json").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def _bench_spec(args):
    try:
        spec = bench.BenchmarkSpec.from_json(args.spec) if args.spec else bench.BenchmarkSpec()
    except (ValueError, TypeError) as exc:
        raise UsageError(f"bad benchmark spec: {exc}") from None
    overrides = {
        "master_seed": args.master_seed,
        "betas": args.betas,
        "real_betas": args.real_betas,
        "baselines": args.baselines,
        "generators": args.generators,
        "groups": args.groups,
        "datasets": args.datasets,
        "real_datasets": tuple(args.real_dataset) if args.real_dataset else None,
        "seeds_per_real_dataset": args.seeds_per_real_dataset,
        "jobs": args.jobs,
        "out_dir": args.out_dir,
    }
    fields = asdict(spec)
    fields.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return bench.BenchmarkSpec(**fields)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_bench(args):
    spec = _bench_spec(args)
    for path in spec.real_datasets:
        if not Path(path).is_file():
            raise FileNotFoundError(f"dataset file not found: {path}")

    def progress(done, total):
        print(f"\r[{done}/{total}]", end="", file=sys.stderr, flush=True)

    rows, summary = bench.run_benchmark(spec, progress=progress)
    print(file=sys.stderr)
    out = bench.write_outputs(rows, summary, spec.out_dir or "bench-results")
    sys.stdout.write(bench.summary_table(summary))
    print(f"wrote {out / 'results.csv'} ({len(rows)} rows) and {out / 'summary.csv'}", file=sys.stderr)
    return EXIT_PARTIAL if bench.has_failures(rows) else EXIT_OK


COMMANDS = {"generate": cmd_generate, "run": cmd_run, "bench": cmd_bench}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CSVFormatError, FileNotFoundError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
