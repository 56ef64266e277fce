import csv
import io
import json

import pytest

from coallab import cli


def run(capsys, *argv):
    code = cli.run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_rates_kingman(capsys):
    code, out, _ = run(capsys, "rates", "--kingman", "--b", "5")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["quantity", "b", "k", "value"]
    lam = {int(r[2]): float(r[3]) for r in rows[1:] if r[0] == "lambda"}
    assert lam == {2: 1.0, 3: 0.0, 4: 0.0, 5: 0.0}


def test_rates_beta_round_trip_digits(capsys):
    code, out, _ = run(capsys, "rates", "--beta", "0.5", "1.5", "--b", "3")
    rows = list(csv.reader(io.StringIO(out)))
    g = {int(r[1]): r[3] for r in rows if r[0] == "g"}
    assert g[3] == "2.5"
    pmf = {int(r[2]): float(r[3]) for r in rows if r[0] == "pmf"}
    assert pmf[1] == pytest.approx(0.9, rel=1e-15)


def test_missing_n_is_config_error(capsys):
    code, _, err = run(capsys, "verify", "sigma", "--beta", "0.5", "1.5")
    assert code == 2 and "usage" in err


def test_bad_measure_is_config_error(capsys):
    code, _, err = run(capsys, "simulate", "external", "--beta", "-1", "1",
                       "--n", "10")
    assert code == 2 and "error" in err
    code, _, _ = run(capsys, "verify", "sigma", "--kingman", "--n", "50",
                     "--reps", "10")
    assert code == 2


def test_simulate_external_header_and_determinism(capsys, tmp_path, monkeypatch):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["simulate", "external", "--beta", "0.5", "1.5", "--n", "200",
            "--reps", "5000", "--seed", "7"]
    assert cli.run(args + ["--out", str(a), "--workers", "1"]) == 0
    monkeypatch.setenv("COALLAB_WORKERS", "3")
    assert cli.run(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    head = a.read_text().splitlines()[0]
    assert head == "replicate,n,sigma,t_len,tau,y_at_sigma"


def test_simulate_chain_and_blockcount(capsys):
    code, out, _ = run(capsys, "simulate", "chain", "--kingman", "--n", "5",
                       "--reps", "2")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 2 * 5
    code, out, _ = run(capsys, "simulate", "blockcount", "--beta", "0.5", "1.5",
                       "--n", "100", "--reps", "2", "--grid", "11")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 22 and rows[0]["blocks"] == "100"


def test_verify_sigma_passes(capsys, tmp_path):
    ecdf = tmp_path / "e.csv"
    code, out, _ = run(capsys, "verify", "sigma", "--beta", "0.5", "1.5",
                       "--n", "5000", "--reps", "20000", "--seed", "42",
                       "--ecdf", str(ecdf))
    doc = json.loads(out)
    assert code == 0 and doc["passed"] and doc["theorem"] == "Sigma31"
    assert ecdf.read_text().startswith("value,empirical_cdf,analytic_cdf")


def test_verify_failure_exit_code(capsys):
    code, out, _ = run(capsys, "verify", "sigma", "--beta", "0.5", "1.5",
                       "--n", "20", "--reps", "20000")
    assert code == 1 and not json.loads(out)["passed"]


def test_verify_convergence(capsys):
    code, out, _ = run(capsys, "verify", "convergence", "--beta", "1", "1",
                       "--mode", "bs", "--n", "100", "--n-list", "100", "1000",
                       "--reps", "2000")
    doc = json.loads(out)
    assert len(doc["reports"]) == 2 and "decreasing" in doc


def test_limits_tabulate(capsys):
    code, out, _ = run(capsys, "limits", "tabulate", "--law", "kingman-tlen",
                       "--t-max", "2", "--grid", "3")
    assert code == 0
    assert out.splitlines() == ["t,cdf,pdf", "0.0,0.0,1.0",
                                "1.0,0.5555555555555556,0.2962962962962963",
                                "2.0,0.75,0.125"]
    code, _, _ = run(capsys, "limits", "tabulate", "--law", "tlen")
    assert code == 2
