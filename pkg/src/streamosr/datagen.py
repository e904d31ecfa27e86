"""Synthetic benchmark generators, CSV datasets and stream assembly."""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .core import RNG_SPLIT, UNKNOWN, Dataset, child_rng, derive_seed, relabel_map

CENTER_BOX = 10.0
TRAIN_FRACTION = 0.8
UC_FRACTION = 0.1
MIN_KC_INSTANCES = 5


@dataclass(frozen=True)
class GeneratorParams:
    n_instances: int
    n_classes: int
    n_features: int
    std_dev: float = 1.0
    class_sep: float = 1.0
    seed: int = 0

    def validate(self, hypercube=False):
        if self.n_classes < 2 or self.n_features < 1:
            raise ValueError("need n_classes >= 2 and n_features >= 1")
        if self.n_instances < 10 * self.n_classes:
            raise ValueError("need at least 10 instances per class")
        if self.std_dev <= 0 or self.class_sep <= 0:
            raise ValueError("std_dev and class_sep must be positive")
        if hypercube and 2**self.n_features < self.n_classes:
            raise ValueError(
                f"{self.n_features} features give {2 ** self.n_features} vertices, "
                f"fewer than {self.n_classes} classes"
            )


# name -> (dataset ids, instances, classes, features, isoGauss std, hyperCube class_sep)
DATASET_GROUPS = {
    "D1-D4": (range(1, 5), 1000, 5, 3, 0.75, 1.4),
    "D5-D8": (range(5, 9), 2000, 8, 4, 1.0, 1.2),
    "D9-D11": (range(9, 12), 3000, 10, 6, 1.25, 1.0),
    "D12-D14": (range(12, 15), 5000, 12, 8, 1.5, 0.8),
    "D15-D17": (range(15, 18), 7500, 15, 10, 1.75, 0.6),
    "D18-D20": (range(18, 21), 10000, 20, 12, 2.0, 0.4),
}
GENERATORS = ("isoGauss", "hyperCube")


def _class_sizes(n, k):
    base, extra = divmod(n, k)
    return np.array([base + (1 if c < extra else 0) for c in range(k)])


def _sample_around(centers, params, noise_std, rng, name):
    sizes = _class_sizes(params.n_instances, params.n_classes)
    y = np.repeat(np.arange(params.n_classes), sizes)
    X = centers[y] + rng.normal(0.0, noise_std, size=(len(y), params.n_features))
    order = rng.permutation(len(y))
    return Dataset(X[order], y[order], params.n_classes, name)


def gen_iso_gauss(params: GeneratorParams, name="isoGauss") -> Dataset:
    """Isotropic Gaussian blobs around centers drawn uniformly in [-10, 10]^d."""
    params.validate()
    rng = np.random.default_rng(params.seed)
    centers = rng.uniform(-CENTER_BOX, CENTER_BOX, size=(params.n_classes, params.n_features))
    return _sample_around(centers, params, params.std_dev, rng, name)


def hypercube_vertices(indices, d):
    bits = (np.asarray(indices)[:, None] >> np.arange(d)[None, :]) & 1
    return 2.0 * bits - 1.0


def gen_hypercube(params: GeneratorParams, name="hyperCube") -> Dataset:
    """One distinct {-1, 1}^d vertex per class, scaled by ``class_sep``, plus unit noise."""
    params.validate(hypercube=True)
    rng = np.random.default_rng(params.seed)
    picks = rng.choice(2**params.n_features, size=params.n_classes, replace=False)
    centers = params.class_sep * hypercube_vertices(picks, params.n_features)
    return _sample_around(centers, params, 1.0, rng, name)


def benchmark_params(generator, master_seed):
    """Yield ``(name, GeneratorParams)`` for the 20 datasets of one generator family."""
    if generator not in GENERATORS:
        raise ValueError(f"unknown generator {generator!r}")
    fam = GENERATORS.index(generator)
    for group in DATASET_GROUPS:
        yield from group_params(generator, group, master_seed, fam)


def group_params(generator, group, master_seed, fam=None):
    if fam is None:
        fam = GENERATORS.index(generator)
    ids, n, k, d, std, sep = DATASET_GROUPS[group]
    for i in ids:
        seed = derive_seed(master_seed, fam, i)
        yield f"{generator}-D{i}", GeneratorParams(n, k, d, std_dev=std, class_sep=sep, seed=seed)


def generate(generator, params, name=None) -> Dataset:
    fn = {"isoGauss": gen_iso_gauss, "hyperCube": gen_hypercube}[generator]
    return fn(params, name or generator)


def params_dict(params: GeneratorParams) -> dict:
    return asdict(params)


class CSVFormatError(ValueError):
    def __init__(self, path, row, message):
        self.path, self.row = str(path), row
        super().__init__(f"{path}: row {row}: {message}")


def write_csv(dataset: Dataset, path):
    labels = dataset.class_names or None
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"f{j}" for j in range(dataset.d)] + ["label"])
        for x, c in zip(dataset.X, dataset.y):
            lab = labels[c] if labels else str(int(c))
            w.writerow([repr(float(v)) for v in x] + [lab])


def load_csv(path, name=None) -> Dataset:
    """Read ``f0,...,f{d-1},label`` rows; labels get dense ids by first appearance.

    Row numbers in errors count the header as row 1.
    """
    path = Path(path)
    ids: dict = {}
    X, y = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or len(header) < 2:
            raise CSVFormatError(path, 1, "missing header or fewer than two columns")
        width = len(header)
        for rownum, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width:
                raise CSVFormatError(path, rownum, f"expected {width} fields, got {len(row)}")
            try:
                feats = [float(v) for v in row[:-1]]
            except ValueError as exc:
                raise CSVFormatError(path, rownum, f"non-numeric feature ({exc})") from None
            if not all(math.isfinite(v) for v in feats):
                raise CSVFormatError(path, rownum, "non-finite feature value")
            label = row[-1].strip()
            y.append(ids.setdefault(label, len(ids)))
            X.append(feats)
    if len(ids) < 2:
        raise CSVFormatError(path, 1, f"need at least 2 classes, found {len(ids)}")
    return Dataset(np.array(X), np.array(y), len(ids), name or path.stem, tuple(ids))


def _take(n, frac):
    return math.floor(frac * n + 0.5)


def assemble_stream(dataset: Dataset, kc_ids, uc_ids, seed):
    """Build the warm-up partition and the interleaved test stream.

    Each known class is split 80/20 (train/stream) after a seeded shuffle and
    relabelled densely. Every unknown class contributes 10% of its own
    instances to the stream, relabelled ``UNKNOWN``. The stream is shuffled.
    """
    rng = child_rng(seed, RNG_SPLIT)
    remap = relabel_map(kc_ids)
    tr_idx, tr_lab, st_idx, st_lab = [], [], [], []
    for c in sorted(kc_ids):
        idx = rng.permutation(np.flatnonzero(dataset.y == c))
        if len(idx) < MIN_KC_INSTANCES:
            raise ValueError(f"known class {c} has {len(idx)} instances; need >= {MIN_KC_INSTANCES}")
        n_train = _take(len(idx), TRAIN_FRACTION)
        tr_idx.append(idx[:n_train])
        st_idx.append(idx[n_train:])
        tr_lab.append(np.full(n_train, remap[c]))
        st_lab.append(np.full(len(idx) - n_train, remap[c]))
    for c in sorted(uc_ids):
        idx = np.flatnonzero(dataset.y == c)
        take = max(1, _take(len(idx), UC_FRACTION)) if len(idx) else 0
        st_idx.append(rng.choice(idx, size=take, replace=False))
        st_lab.append(np.full(take, UNKNOWN))

    tr_idx, tr_lab = np.concatenate(tr_idx), np.concatenate(tr_lab)
    st_idx, st_lab = np.concatenate(st_idx), np.concatenate(st_lab)
    tr_order = rng.permutation(len(tr_idx))
    st_order = rng.permutation(len(st_idx))
    k = len(kc_ids)
    train = Dataset(dataset.X[tr_idx[tr_order]], tr_lab[tr_order], k, f"{dataset.name}/train")
    stream = Dataset(dataset.X[st_idx[st_order]], st_lab[st_order], k, f"{dataset.name}/stream")
    return train, stream
