"""Run the full synthetic benchmark and print the results table.

    python3 scripts/run_benchmark.py --out-dir results/benchmark [--master-seed 0] [--jobs 1]
"""

import argparse
import sys

from streamosr.cli import main

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out-dir", default="results/benchmark")
    ap.add_argument("--master-seed", default="0")
    ap.add_argument("--jobs", default="1")
    a = ap.parse_args()
    sys.exit(main(["bench", "--master-seed", a.master_seed, "--jobs", a.jobs, "--out-dir", a.out_dir]))
