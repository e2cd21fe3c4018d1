import json

import numpy as np
import pytest

from armafit.cli import main
from armafit.core import PacfCoeffs
from armafit.datasets import DatasetFormatError, load_dataset, read_csv, read_series_csv, write_series_csv
from armafit.evaluate import classify_boundary
from armafit.pipelines import CSV_HEADER, RECORD_FIELDS, BenchmarkRecord, run_reg_sweep


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    out = tmp_path_factory.mktemp("data")
    assert main(["simulate", "--preset", "desk", "--seed", "7", "--replicates", "1", "-o", str(out)]) == 0
    return out


@pytest.fixture(scope="module")
def bench(dataset, tmp_path_factory):
    out = tmp_path_factory.mktemp("bench")
    assert main(["benchmark", str(dataset), "--starts", "3", "--seed", "1", "--no-timing", "-o", str(out)]) == 0
    return out


def test_simulate_writes_grid(dataset):
    entries = load_dataset(dataset)
    assert len(entries) == 6
    assert len(list(dataset.glob("s*.csv"))) == 6
    assert read_series_csv(entries[0].path).size == entries[0].length


def test_series_csv_round_trip(tmp_path):
    y = np.random.default_rng(0).standard_normal(7)
    write_series_csv(tmp_path / "a.csv", y)
    np.testing.assert_array_equal(read_series_csv(tmp_path / "a.csv"), y)
    (tmp_path / "b.csv").write_text("t,z\n1,2\n")
    with pytest.raises(DatasetFormatError):
        read_series_csv(tmp_path / "b.csv")


def test_fit_json(dataset, capsys):
    series = str(dataset / "s00000.csv")
    assert main(["fit", series, "--order", "1", "1", "--starts", "30", "--seed", "1"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert len(out["starts"]) == 30 and out["best"]["loglik"] is not None
    assert main(["fit", series, "--order", "1", "1", "--starts", "4", "--lambda", "8"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert all(r["lambda"] == 8 for r in out["starts"])


def test_fit_naive_far_start(dataset, capsys):
    args = ["fit", str(dataset / "s00000.csv"), "--order", "1", "1", "--method", "jones",
            "--jones-form", "naive", "--start-jones", "-800", "0.2"]
    assert main(args) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["starts"][0]["failure_kind"] == "ArithmeticIssue"
    assert out["best"] is None


def test_usage_errors(tmp_path, capsys):
    assert main(["fit", str(tmp_path / "missing.csv"), "--order", "1", "1"]) == 2
    assert main(["benchmark", str(tmp_path)]) == 2
    assert main(["fit"]) == 2
    assert main(["nonsense"]) == 2
    capsys.readouterr()


def test_benchmark_records(dataset, bench):
    rows = read_csv(bench / "records.csv")
    assert list(rows[0])[: len(RECORD_FIELDS)] == RECORD_FIELDS
    assert len(rows) == 6 * 2 * 3
    keys = [(r["series_id"], r["method"], int(r["start_index"])) for r in rows]
    assert keys == sorted(keys)
    records = [BenchmarkRecord.from_row(r) for r in rows]
    for r in records:
        assert (r.failure_kind is None) == (r.loglik is not None)
    # fairness: both methods share the start set
    starts = {}
    for r in records:
        starts.setdefault((r.series_id, r.start_index), []).append((tuple(r.start_rho), tuple(r.start_b)))
    assert all(len(set(v)) == 1 for v in starts.values())
    # stored classes recompute from the stored parameters
    for r in records:
        if r.est_rho is not None:
            pc = PacfCoeffs(r.est_rho, r.est_b, r.est_sigma2)
            assert classify_boundary(pc, 0.02).tag.value == r.result_boundary_class
        sc = classify_boundary(PacfCoeffs(r.start_rho, r.start_b, 1.0), 0.02).tag.value
        assert sc == r.start_boundary_class
    summary = json.loads((bench / "summary.json").read_text())
    assert set(summary["methods"]) == {"jones", "bounded"}
    assert "failures_per_1000" in summary["methods"]["jones"]


def test_benchmark_deterministic(dataset, bench, tmp_path):
    assert main(["benchmark", str(dataset), "--starts", "3", "--seed", "1", "--no-timing", "-o", str(tmp_path)]) == 0
    assert (tmp_path / "records.csv").read_bytes() == (bench / "records.csv").read_bytes()


def test_benchmark_partial_dataset(dataset, tmp_path, capsys):
    import shutil

    part = tmp_path / "part"
    shutil.copytree(dataset, part)
    (part / "s00001.csv").unlink()
    assert main(["benchmark", str(part), "--starts", "1", "--methods", "bounded", "-o", str(tmp_path / "o")]) == 0
    assert "missing series file" in capsys.readouterr().err
    assert len(read_csv(tmp_path / "o" / "records.csv")) == 5


def test_timed_benchmark_report(dataset, tmp_path, capsys):
    assert main(["benchmark", str(dataset), "--starts", "2", "-o", str(tmp_path)]) == 0
    capsys.readouterr()
    assert main(["report", str(tmp_path / "records.csv")]) == 0
    text = capsys.readouterr().out
    assert "Two-sided Wilcoxon" in text and "per 1000 runs" in text
    assert "Kalman filter errors" in text


def test_report_edge_cases(tmp_path, capsys):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert main(["report", str(empty)]) == 0
    assert "no records" in capsys.readouterr().out
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    assert main(["report", str(bad)]) == 2
    header_only = tmp_path / "h.csv"
    header_only.write_text(",".join(CSV_HEADER) + "\n")
    assert main(["report", str(header_only)]) == 0


def test_report_error_point_rows(tmp_path, capsys):
    rec = BenchmarkRecord("s00001", 2, 1, 100, 0.1, "jones", 0.0, 4, "NearAR", None, 0.1,
                          "KalmanError", "NearBoth", "NearBoth", truth_boundary_class="StrictlyFeasible",
                          start_rho=np.array([0.99, 0.1]), start_b=np.array([0.2]))
    path = tmp_path / "r.csv"
    from armafit.datasets import write_csv

    write_csv(path, CSV_HEADER, [rec.to_row()])
    assert main(["report", str(path)]) == 0
    text = capsys.readouterr().out
    assert "| ARMA(2,1) | 100 | 0.1 | (i) | (iii) | strictly feasible |" in text


def test_forecast_eval(dataset, tmp_path, capsys):
    assert main(["forecast-eval", str(dataset), "--starts", "6", "-o", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "forecast_report.json").read_text())
    assert [t["metric"] for t in report["tests"]] == ["MASE(3)", "ScaledError(1)", "ScaledError(2)", "ScaledError(3)"]
    assert report["holdout"] == 3
    assert report["n_selected"] + report["n_excluded"] == report["n_series"] == 6
    capsys.readouterr()
    assert main(["report", str(tmp_path / "forecast_report.json")]) == 0
    assert "border - strict" in capsys.readouterr().out


def test_reg_sweep(dataset, tmp_path, capsys):
    assert main(["reg-sweep", str(dataset), "-o", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "reg_sweep_report.json").read_text())
    assert report["methods"] == ["Jones", "lambda=0", "lambda=1", "lambda=2", "lambda=4", "lambda=8", "lambda=16"]
    assert len(report["mean_ranks"]) == 4
    assert all(len(v) == 7 for v in report["mean_ranks"].values())
    assert set(report["friedman"]) == set(report["mean_ranks"])
    for name, mat in report["nemenyi"].items():
        assert report["friedman"][name]["p_value"] < report["alpha"]
        assert np.shape(mat) == (7, 7)
    capsys.readouterr()
    assert main(["report", "--clip", str(tmp_path / "reg_sweep_report.json")]) == 0
    assert "Average ranks" in capsys.readouterr().out


def test_reg_sweep_nemenyi_only_when_significant(dataset):
    entries = load_dataset(dataset)
    _, _, report = run_reg_sweep(entries, alpha=1.5)
    assert set(report["nemenyi"]) == set(report["friedman"])
    _, _, report = run_reg_sweep(entries, alpha=0.0)
    assert report["nemenyi"] == {}
