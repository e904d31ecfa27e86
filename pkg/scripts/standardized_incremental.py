"""Incremental baseline with features z-scored on the warm-up split.

A diagnostic only, not part of the benchmark protocol: it shows how strongly
the incremental baseline's UC-Acc depends on feature scale.

    python3 scripts/standardized_incremental.py
"""

from collections import defaultdict

import numpy as np

from streamosr.bench import BenchmarkSpec, prepare
from streamosr.core import Dataset, ExperimentConfig, InfeasibleBetaError
from streamosr.datagen import GeneratorParams, generate
from streamosr.framework import run_stream
from streamosr.metrics import evaluate


def standardize(train, stream):
    mu, sd = train.X.mean(0), train.X.std(0)
    sd[sd == 0] = 1.0
    return (Dataset((train.X - mu) / sd, train.y, train.n_classes),
            Dataset((stream.X - mu) / sd, stream.y, stream.n_classes))


if __name__ == "__main__":
    acc = defaultdict(list)
    for _, gen, name, params, beta, seed in BenchmarkSpec().tasks():
        ds = generate(gen, GeneratorParams(**params), name)
        try:
            train, stream = standardize(*prepare(ds, beta, seed))
        except InfeasibleBetaError:
            continue
        rec = run_stream(train, stream, ExperimentConfig(beta=beta, seed=seed, baseline="incremental"))
        rep = evaluate(rec, stream, range(train.n_classes))
        acc[(gen, beta)].append((rep.kc_acc, rep.uc_acc))
    print("generator   beta  n   KC-Acc  UC-Acc")
    for (gen, beta), v in sorted(acc.items()):
        kc, uc = np.mean(v, axis=0)
        print(f"{gen:10s} {beta:5.2f} {len(v):3d}  {kc:6.2f}  {uc:6.2f}")
