"""D-B index vs AUROC for every sOSR run of a benchmark results file.

Writes one CSV row per run and prints the Spearman correlation per beta.

    python3 scripts/db_vs_auc.py results/benchmark/results.csv --out results/db_vs_auc.csv
"""

import argparse
import csv
from collections import defaultdict

from scipy.stats import spearmanr

from streamosr.bench import read_rows

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("results")
    ap.add_argument("--out", default="db_vs_auc.csv")
    a = ap.parse_args()

    rows = [r for r in read_rows(a.results) if r["baseline"] == "sosr" and not r["error"]]
    by_beta = defaultdict(list)
    with open(a.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["generator", "dataset", "beta", "db_index", "auroc"])
        for r in rows:
            w.writerow([r["generator"], r["dataset"], r["beta"], r["db_index"], r["auroc"]])
            by_beta[float(r["beta"])].append((float(r["db_index"]), float(r["auroc"])))
    for beta, pairs in sorted(by_beta.items()):
        db, auc = zip(*pairs)
        print(f"beta={beta:g}  n={len(pairs)}  spearman={spearmanr(db, auc).statistic:+.3f}")
