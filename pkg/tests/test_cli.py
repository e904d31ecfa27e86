import csv
import json

import pytest

from streamosr.bench import read_rows
from streamosr.cli import main


@pytest.fixture(scope="module")
def gen_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("gen")
    assert main(["generate", "--generator", "isoGauss", "--group", "D1-D4", "--out-dir", str(out)]) == 0
    return out


def test_generate_writes_files(gen_dir):
    manifest = json.loads((gen_dir / "manifest.json").read_text())
    assert [m["name"] for m in manifest] == [f"isoGauss-D{i}" for i in range(1, 5)]
    with open(gen_dir / "isoGauss-D1.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["f0", "f1", "f2", "label"] and len(rows) == 1001


def test_generate_usage_errors(tmp_path):
    assert main(["generate", "--generator", "isoGauss", "--out-dir", str(tmp_path)]) == 1
    assert main(["generate", "--generator", "isoGauss", "--group", "D1-D4", "--n-classes", "3", "--out-dir", str(tmp_path)]) == 1
    assert main(["generate", "--generator", "nope", "--out-dir", str(tmp_path)]) == 1


def test_run_outputs(gen_dir, tmp_path, capsys):
    code = main(["run", "--dataset", str(gen_dir / "isoGauss-D1.csv"), "--beta", "0.25", "--baseline", "sosr", "--seed", "3", "--out-dir", str(tmp_path)])
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert json.loads(capsys.readouterr().out) == report
    for key in ("kc_acc", "uc_acc", "open_f1", "auroc", "chosen_threshold", "db_index", "beta", "seed"):
        assert key in report
    header = (tmp_path / "run.csv").read_text().splitlines()[0]
    assert header == "t,true_label,closed_pred,entropy"


def test_run_errors(gen_dir, tmp_path):
    ds = str(gen_dir / "isoGauss-D1.csv")
    assert main(["run", "--dataset", ds, "--beta", "0.75", "--baseline", "sosr", "--out-dir", str(tmp_path)]) == 2
    assert main(["run", "--dataset", ds, "--beta", "1.5", "--baseline", "sosr", "--out-dir", str(tmp_path)]) == 1
    assert main(["run", "--dataset", str(tmp_path / "missing.csv"), "--beta", "0.2", "--baseline", "sosr"]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("f0,label\n1,a\nx,b\n")
    assert main(["run", "--dataset", str(bad), "--beta", "0.2", "--baseline", "sosr"]) == 2


def test_bench_real_dataset_matches_run(gen_dir, tmp_path):
    ds = gen_dir / "isoGauss-D2.csv"
    out = tmp_path / "b"
    code = main(["bench", "--generators", "", "--real-dataset", str(ds), "--real-betas", "0.25",
                 "--seeds-per-real-dataset", "2", "--out-dir", str(out)])
    assert code == 0
    rows = read_rows(out / "results.csv")
    assert len(rows) == 6
    for row in rows:
        run_out = tmp_path / f"r-{row['baseline']}-{row['seed']}"
        assert main(["run", "--dataset", str(ds), "--beta", "0.25", "--baseline", row["baseline"],
                     "--seed", row["seed"], "--out-dir", str(run_out)]) == 0
        rep = json.loads((run_out / "report.json").read_text())
        for key in ("kc_acc", "uc_acc", "open_f1"):
            assert float(row[key]) == rep[key]
        if row["baseline"] == "sosr":
            assert float(row["auroc"]) == rep["auroc"]


def test_bench_skips_infeasible_beta(tmp_path):
    out = tmp_path / "b"
    code = main(["bench", "--generators", "isoGauss", "--datasets", "isoGauss-D1", "--betas", "0.75",
                 "--baselines", "sosr", "--out-dir", str(out)])
    assert code == 0
    (row,) = read_rows(out / "results.csv")
    assert row["error"].startswith("skipped: ")


def test_bench_partial_failure_exit_code(tmp_path):
    bad = tmp_path / "tiny.csv"
    bad.write_text("f0,label\n" + "".join(f"{i},{i % 3}\n" for i in range(9)))
    out = tmp_path / "b"
    code = main(["bench", "--generators", "", "--real-dataset", str(bad), "--real-betas", "0.3",
                 "--seeds-per-real-dataset", "1", "--out-dir", str(out)])
    assert code == 3
    assert all(r["error"] for r in read_rows(out / "results.csv"))


def test_bench_spec_errors(tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"bogus": 1}))
    assert main(["bench", "--spec", str(spec), "--out-dir", str(tmp_path)]) == 1
    spec.write_text(json.dumps({"betas": [0.1], "groups": ["D1-D4"], "baselines": ["sosr"], "generators": ["hyperCube"]}))
    assert main(["bench", "--spec", str(spec), "--out-dir", str(tmp_path / "o")]) == 0
    assert len(read_rows(tmp_path / "o" / "results.csv")) == 4
