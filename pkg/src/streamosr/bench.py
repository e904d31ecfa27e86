"""Single experiments and the (dataset x beta x baseline) benchmark matrix."""

from __future__ import annotations

import csv
import json
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

from .core import (
    BASELINES,
    RNG_PARTITION,
    Dataset,
    ExperimentConfig,
    InfeasibleBetaError,
    child_rng,
    derive_seed,
    label_space_partition,
)
from .datagen import GENERATORS, DATASET_GROUPS, assemble_stream, generate, load_csv, group_params
from .framework import run_stream, warm_up
from .metrics import aggregate, evaluate

SYNTHETIC_BETAS = (0.1, 0.25, 0.4, 0.6, 0.75)
REAL_BETAS = (0.1, 0.25, 0.5, 0.7)

RESULT_COLUMNS = (
    "generator", "dataset", "beta", "baseline", "seed",
    "kc_acc", "uc_acc", "open_f1", "auroc", "threshold", "db_index", "error",
)
SKIPPED = "skipped: "


def prepare(dataset: Dataset, beta: float, seed: int):
    """Partition the label space and build (train, stream) for one run seed."""
    kc, uc = label_space_partition(dataset.n_classes, beta, child_rng(seed, RNG_PARTITION))
    return assemble_stream(dataset, kc, uc, seed)


def run_experiment(dataset: Dataset, config: ExperimentConfig, prepared=None, models=None):
    """Full pipeline for one configuration; returns ``(record, report)``."""
    train, stream = prepared if prepared is not None else prepare(dataset, config.beta, config.seed)
    record = run_stream(train, stream, config, models)
    report = evaluate(record, stream, kc_classes=range(train.n_classes))
    return record, report


def run_seed(master_seed, kind, key, beta, rep=0):
    return derive_seed(master_seed, kind, key, round(beta * 10_000), rep)


@dataclass
class BenchmarkSpec:
    master_seed: int = 0
    betas: tuple = SYNTHETIC_BETAS
    real_betas: tuple = REAL_BETAS
    baselines: tuple = BASELINES
    generators: tuple = GENERATORS
    groups: tuple = tuple(DATASET_GROUPS)
    # restrict to these dataset names (e.g. "isoGauss-D3"); empty keeps all
    datasets: tuple = ()
    real_datasets: tuple = ()
    seeds_per_real_dataset: int = 5
    learning_rate: float = 0.01
    warmup_epochs: int = 1
    jobs: int = 1
    out_dir: Optional[str] = None

    def __post_init__(self):
        for b in tuple(self.betas) + tuple(self.real_betas):
            if not 0.0 < b < 1.0:
                raise ValueError(f"beta {b} outside (0, 1)")
        bad = set(self.baselines) - set(BASELINES)
        if bad:
            raise ValueError(f"unknown baselines {sorted(bad)}")
        bad = set(self.generators) - set(GENERATORS)
        if bad:
            raise ValueError(f"unknown generators {sorted(bad)}")
        bad = set(self.groups) - set(DATASET_GROUPS)
        if bad:
            raise ValueError(f"unknown dataset groups {sorted(bad)}")

    @classmethod
    def from_json(cls, path) -> "BenchmarkSpec":
        with open(path) as fh:
            raw = json.load(fh)
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown benchmark spec keys: {sorted(unknown)}")
        for k in ("betas", "real_betas", "baselines", "generators", "groups", "datasets", "real_datasets"):
            if k in raw:
                raw[k] = tuple(raw[k])
        return cls(**raw)

    def tasks(self):
        """One task per (dataset, beta[, repetition]); each runs every baseline."""
        out = []
        for gen in self.generators:
            fam = GENERATORS.index(gen)
            for group in self.groups:
                for name, params in group_params(gen, group, self.master_seed, fam):
                    if self.datasets and name not in self.datasets:
                        continue
                    idx = int(name.rsplit("D", 1)[1])
                    for beta in self.betas:
                        seed = run_seed(self.master_seed, fam, idx, beta)
                        out.append(("synthetic", gen, name, asdict(params), beta, seed))
        for path in self.real_datasets:
            name = Path(path).stem
            key = zlib.crc32(name.encode())
            for beta in self.real_betas:
                for rep in range(self.seeds_per_real_dataset):
                    seed = run_seed(self.master_seed, len(GENERATORS), key, beta, rep)
                    out.append(("real", name, name, str(path), beta, seed))
        return out


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _row(gen, name, beta, baseline, seed, report=None, error=""):
    row = dict.fromkeys(RESULT_COLUMNS)
    row.update(generator=gen, dataset=name, beta=beta, baseline=baseline, seed=seed, error=error)
    if report is not None:
        row.update(
            kc_acc=report.kc_acc,
            uc_acc=report.uc_acc,
            open_f1=report.open_f1,
            auroc=report.auroc,
            threshold=report.chosen_threshold,
            db_index=report.db_index,
        )
    return row


def _load_task_dataset(task):
    kind, gen, name, payload, _, _ = task
    if kind == "synthetic":
        from .datagen import GeneratorParams

        return generate(gen, GeneratorParams(**payload), name)
    return load_csv(payload, name)


def run_task(task, baselines=BASELINES, learning_rate=0.01, warmup_epochs=1):
    """Run every baseline on one (dataset, beta, seed); never raises."""
    _, gen, name, _, beta, seed = task
    try:
        dataset = _load_task_dataset(task)
        train, stream = prepare(dataset, beta, seed)
    except InfeasibleBetaError as exc:
        return [_row(gen, name, beta, b, seed, error=SKIPPED + str(exc)) for b in baselines]
    except Exception as exc:  # recorded per row; the matrix keeps going
        return [_row(gen, name, beta, b, seed, error=f"{type(exc).__name__}: {exc}") for b in baselines]

    rows = []
    shared = None
    for b in baselines:
        cfg = ExperimentConfig(beta=beta, seed=seed, baseline=b, learning_rate=learning_rate, warmup_epochs=warmup_epochs)
        try:
            if shared is None:
                shared = warm_up(train, cfg, with_clusters="sosr" in baselines)
            _, report = run_experiment(dataset, cfg, prepared=(train, stream), models=shared)
            rows.append(_row(gen, name, beta, b, seed, report))
        except Exception as exc:
            rows.append(_row(gen, name, beta, b, seed, error=f"{type(exc).__name__}: {exc}"))
    return rows


def _sort_key(row):
    return (row["generator"], _dataset_order(row["dataset"]), row["beta"], BASELINES.index(row["baseline"]), row["seed"])


def _dataset_order(name):
    tail = name.rsplit("-D", 1)
    if len(tail) == 2 and tail[1].isdigit():
        return (tail[0], int(tail[1]))
    return (name, 0)


def run_benchmark(spec: BenchmarkSpec, progress=None):
    """Run the whole matrix; returns ``(result_rows, summary_rows)`` in canonical order."""
    tasks = spec.tasks()
    kwargs = dict(baselines=tuple(spec.baselines), learning_rate=spec.learning_rate, warmup_epochs=spec.warmup_epochs)
    rows = []
    if spec.jobs > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            futures = [pool.submit(run_task, t, **kwargs) for t in tasks]
            for i, fut in enumerate(futures):
                rows.extend(fut.result())
                if progress:
                    progress(i + 1, len(tasks))
    else:
        for i, t in enumerate(tasks):
            rows.extend(run_task(t, **kwargs))
            if progress:
                progress(i + 1, len(tasks))
    rows.sort(key=_sort_key)
    summary = aggregate(rows)
    return rows, summary


def has_failures(rows) -> bool:
    return any(r["error"] and not r["error"].startswith(SKIPPED) for r in rows)


def write_rows(rows, path, columns=None):
    columns = list(columns or (rows[0].keys() if rows else RESULT_COLUMNS))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r.get(c)) for c in columns])


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def summary_table(summary, scores=("kc_acc", "uc_acc", "open_f1", "auroc")) -> str:
    """Markdown results table, one line per (generator, beta, baseline)."""
    head = ["generator", "beta", "baseline"] + [s for s in scores]
    lines = ["| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
    for r in summary:
        cells = [r["generator"], f"{r['beta']:g}", r["baseline"]]
        for s in scores:
            m, sd = r.get(f"{s}_mean"), r.get(f"{s}_std")
            cell = "-" if m is None else f"{m:.2f} ± {sd:.2f}"
            if r.get(f"{s}_sig"):
                cell += " *"
            cells.append(cell)
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def write_outputs(rows, summary, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_rows(rows, out / "results.csv", RESULT_COLUMNS)
    write_rows(summary, out / "summary.csv")
    (out / "summary.md").write_text(summary_table(summary))
    return out
