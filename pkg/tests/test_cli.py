import csv
import json

import numpy as np
import pytest

import blindpca.cli as cli
from blindpca.cli import main, theory_rows
from blindpca.dataio import read_csv, write_csv
from blindpca.errors import NumericError
from blindpca.simgen import generate


@pytest.fixture
def sample_csv(tmp_path):
    X = generate("example2-dim10", 60, seed=1)
    path = tmp_path / "sample.csv"
    rows = [[*row, "a" if k % 2 else "b"] for k, row in enumerate(X.tolist())]
    write_csv(path, [f"V{i}" for i in range(10)] + ["grp"], rows)
    return path


def test_select_report_is_byte_identical(sample_csv, tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"r{k}.json"
        assert main(["select", str(sample_csv), "--exclude-cols", "grp", "--d", "2", "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    rep = json.loads(outs[0])
    assert rep["selection"]["d"] == 2
    assert rep["input"]["n"] == 60 and rep["input"]["p"] == 10
    assert set(rep["r_used"]) == set(f"V{i}" for i in range(10)) - set(rep["selection"]["names"])


def test_select_auto_filter_and_scores(sample_csv, tmp_path):
    out, scores = tmp_path / "r.json", tmp_path / "s.csv"
    rc = main(["select", str(sample_csv), "--exclude-cols", "grp", "--filter", "grp=a",
               "--weights", "equal", "--out", str(out), "--scores", str(scores)])
    assert rc == 0
    rep = json.loads(out.read_text())
    assert rep["input"]["n"] == 30
    assert len(rep["selection"]["d_path"]) == rep["selection"]["d"]
    with open(scores) as fh:
        rows = list(csv.reader(fh))
    assert rows[0][:3] == ["row", "pc1", "pc2"] and len(rows) == 31


def test_non_numeric_column_fails(sample_csv, capsys):
    assert main(["select", str(sample_csv)]) == 2
    assert "grp" in capsys.readouterr().err


def test_missing_file_and_bad_args(tmp_path):
    assert main(["select", str(tmp_path / "nope.csv")]) == 2
    assert main(["simulate", "--model", "nonexistent"]) == 2
    assert main(["select"]) == 2


def test_too_few_rows(tmp_path):
    path = tmp_path / "one.csv"
    path.write_text("a,b\n1,2\n")
    assert main(["select", str(path)]) == 2


def test_numeric_failure_exit_code(monkeypatch, sample_csv):
    def boom(*a, **k):
        raise NumericError("no convergence")

    monkeypatch.setattr(cli, "run_search", boom)
    assert main(["select", str(sample_csv), "--exclude-cols", "grp"]) == 3


def test_csv_round_trip_precision(tmp_path):
    X = np.random.default_rng(0).normal(size=(5, 3)) * 1e3
    path = tmp_path / "x.csv"
    write_csv(path, ["a", "b", "c"], X.tolist())
    back = read_csv(path).values
    np.testing.assert_allclose(back, X, rtol=1e-15)


def test_pca_defaults_to_all_components(sample_csv, capsys):
    assert main(["pca", str(sample_csv), "--exclude-cols", "grp"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["q"] == 10
    assert rep["cumulative_ratio"][-1] == pytest.approx(1.0)


def test_theory_rows():
    rows = {r["groups"]: r for r in theory_rows(2)}
    assert len(rows) == 6
    assert rows["A1,A2"]["h"] <= 5e-6
    assert len(theory_rows(1)) == 3


def test_theory_cli(capsys):
    assert main(["theory", "--d", "2"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["best"] == "A1,A2"


def test_simulate_paper_table_2_has_15_rows(tmp_path):
    prefix = tmp_path / "t2"
    assert main(["simulate", "--paper-table", "2", "--replicates", "1", "--out", str(prefix)]) == 0
    with open(f"{prefix}.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["selection", "blinding", "b2", "b4"]
    assert len(rows) == 16
    meta = json.loads((tmp_path / "t2.json").read_text())
    assert meta["replicates"] == 1


def test_simulate_single_replicate_b4(tmp_path):
    prefix = tmp_path / "s"
    assert main(["simulate", "--model", "example1-dim4", "--n", "30", "--replicates", "1",
                 "--methods", "b4", "--out", str(prefix)]) == 0
    with open(f"{prefix}.csv") as fh:
        vals = sorted(float(r[1]) for r in list(csv.reader(fh))[1:])
    assert vals[-1] == 1.0 and sum(vals) == 1.0
