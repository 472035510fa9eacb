import json
import subprocess
import sys

import numpy as np
import pytest

from energia import cli
from energia.convex import SampledConvexFunction
from energia.divisorial import DivisorialDensity, classify
from energia.logpow import ConvergenceVerdict, DivergenceRate, Status
from energia.radial import sample_power_log
from energia.report import read_csv

REQUIRED = {"module", "operation", "parameters", "verdict", "value", "provenance", "anchor"}


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def records(out):
    return [json.loads(line) for line in out.splitlines() if line]


def test_radial_example(capsys):
    code, out, _ = run(["radial", "classify", "--n", "2", "--p", "0.6"], capsys)
    assert code == 0
    (rec,) = records(out)
    assert rec["verdict"] == "Converges"
    assert round(rec["threshold"], 4) == 0.6667
    assert REQUIRED <= rec.keys()
    assert rec["numeric_verdict"] == "Converges"


def test_divisorial_example(capsys):
    code, out, _ = run(["divisorial", "classify", "--alpha", "0.5"], capsys)
    assert code == 0
    (rec,) = records(out)
    assert rec["verdict"] == "Diverges" and rec["anchor"] == "Prop. divisorial"


def test_toric_scan_example(capsys):
    argv = ["scan", "--module", "toric", "--param", "beta", "--from", "0.05", "--to", "0.95", "--step", "0.05", "--q", "1"]
    code, out, _ = run(argv, capsys)
    assert code == 0
    rows = read_csv(out)
    assert len(rows) == 19
    assert [r["verdict"] for r in rows] == ["Converges"] * 9 + ["Diverges"] * 10
    assert float(rows[9]["beta"]) == 0.5


def test_csv_round_trip_reproduces_verdicts(capsys):
    argv = ["scan", "--module", "divisorial", "--param", "alpha", "--from", "0.05", "--to", "2", "--step", "0.05"]
    code, out, _ = run(argv, capsys)
    assert code == 0
    assert out.splitlines()[0].split(",")[0] == "alpha"
    rows = read_csv(out)
    expect = [classify(DivisorialDensity(float(r["alpha"]))).status.value for r in rows]
    assert [r["verdict"] for r in rows] == expect
    assert len(rows) == 40


def test_scan_order_independent_of_jobs(capsys):
    base = ["scan", "--module", "radial", "--param", "p", "--from", "0.05", "--to", "0.95", "--step", "0.1", "--n", "2"]
    _, serial, _ = run(base, capsys)
    _, parallel, _ = run(base + ["--jobs", "2"], capsys)
    assert serial == parallel


@pytest.mark.parametrize(
    "argv",
    [
        ["radial", "lp", "--n", "2", "--p", "1/3", "--gamma", "2/3", "--q", "3/2"],
        ["radial", "perturb", "--n", "2", "--p", "1/3", "--gamma", "2/3"],
        ["radial", "dirichlet", "--p", "0.4"],
        ["toric", "classify", "--beta", "0.4"],
        ["toric", "moment", "--beta", "0.4", "--q", "0.5"],
        ["toric", "sobolev", "--q", "1", "--n", "3"],
        ["divisorial", "entropy", "--alpha", "1.5"],
        ["divisorial", "mass", "--alpha", "1", "--components", "2", "--bound", "10"],
        ["divisorial", "barrier", "--p", "0.4"],
        ["blowup", "pairing", "--delta", "0.05", "--delta-prime", "0.05"],
        ["blowup", "reduce", "--delta", "0.05", "--delta-prime", "0.05"],
        ["blowup", "report", "--delta", "0.2", "--delta-prime", "0.2"],
        ["classify-integral", "--expr", "t^-1*log(t)^-1.5"],
        ["classify-integral", "--a", "-1", "--b", "-3/2", "--at", "zero", "--bound", "0.5"],
    ],
)
def test_records_carry_required_fields(argv, capsys):
    code, out, err = run(argv, capsys)
    assert code == 0, err
    (rec,) = records(out)
    assert REQUIRED <= rec.keys()
    assert rec["provenance"] in ("symbolic", "numeric", "cited")


def test_perturb_reports_p_prime(capsys):
    _, out, _ = run(["radial", "perturb", "--n", "3", "--p", "1/2", "--gamma", "3/4"], capsys)
    (rec,) = records(out)
    assert rec["p_prime_exact"] == "3/4" and rec["verdict"] == "Diverges"


def test_sobolev_record(capsys):
    _, out, _ = run(["toric", "sobolev", "--q", "2", "--n", "3"], capsys)
    (rec,) = records(out)
    assert rec["qStar"] == 6 and rec["holds"] is True


def test_blowup_report_flags(capsys):
    _, out, _ = run(["blowup", "report", "--delta", "0.05", "--delta-prime", "0.05"], capsys)
    (rec,) = records(out)
    rep = rec["report"]
    assert rep["conclusion"].startswith("not in MA(E")
    assert {f["source"] for f in rep["cited"]} == {"cited"}
    assert rep["pairing"]["source"] == "computed"


def test_blowup_scan_csv(capsys):
    code, out, _ = run(["blowup", "--scan", "--steps", "10"], capsys)
    assert code == 0
    rows = read_csv(out)
    assert len(rows) == 100
    for r in rows:
        diverges = float(r["delta"]) + float(r["deltaPrime"]) <= 1 / 6 + 1e-12
        assert (r["verdict"] == "Diverges") is diverges


def test_out_file(tmp_path, capsys):
    path = tmp_path / "rec.jsonl"
    code, out, _ = run(["divisorial", "--alpha", "0.6", "--out", str(path)], capsys)
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["verdict"] == "Converges"


def test_legendre_subcommand(tmp_path, capsys):
    x = np.linspace(-5, 5, 2001)
    src, dst = tmp_path / "f.txt", tmp_path / "g.txt"
    SampledConvexFunction(x, x**2 / 2).save(src)
    code, out, _ = run(["legendre", "--input", str(src), "--out", str(dst), "--slopes", "-4:4:801"], capsys)
    assert code == 0
    (rec,) = records(out)
    assert rec["extension"] == "affine -5.0 5.0"
    g = SampledConvexFunction.load(dst)
    assert np.max(np.abs(g.values - g.grid**2 / 2)) <= 5e-5


def test_sampled_boundary_weight_is_withheld(tmp_path, capsys):
    w = sample_power_log(0.5)
    path = tmp_path / "w.txt"
    path.write_text("s chi\n" + "".join(f"{a:.17g} {b:.17g}\n" for a, b in zip(w.s, w.chi)))
    code, out, _ = run(["radial", "dirichlet", "--weight", str(path)], capsys)
    assert code == 0
    (rec,) = records(out)
    assert rec["verdict"] == "Withheld" and rec["reason"]


@pytest.mark.parametrize(
    "argv",
    [
        ["radial", "--bogus"],
        ["nosuch"],
        ["radial", "classify"],
        ["radial", "--p", "1.5"],
        ["radial", "--p", "abc"],
        ["toric", "--beta", "0.4", "--polytope", "1:0"],
        ["toric", "sobolev", "--q", "3", "--n", "3"],
        ["legendre", "--input", "/nonexistent/file.txt"],
        ["classify-integral", "--expr", "t^-1*log(log(t))"],
        ["blowup", "--delta", "0.6", "--delta-prime", "0.1"],
        ["divisorial", "--alpha", "0"],
    ],
)
def test_input_errors_exit_2(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2
    assert err


def test_bad_config_exits_2(tmp_path, capsys):
    path = tmp_path / "bad.ini"
    path.write_text("[quadrature]\ntol = x\n")
    code, _, err = run(["radial", "--p", "0.3", "--config", str(path)], capsys)
    assert code == 2 and "bad.ini:2" in err


def _lying_detector(*args, **kwargs):
    return ConvergenceVerdict(Status.DIVERGES, rate=DivergenceRate("power", 1.0), provenance="numeric")


def test_oracle_disagreement_exits_3(monkeypatch, capsys):
    import energia.oracle as oracle

    monkeypatch.setattr(oracle, "empirical_convergence", _lying_detector)
    code, _, err = run(["classify-integral", "--a", "-2"], capsys)
    assert code == 3 and "disagreement" in err
    code, _, _ = run(["radial", "--n", "2", "--p", "0.3"], capsys)
    assert code == 3


def test_no_check_skips_oracle(monkeypatch, capsys):
    import energia.oracle as oracle

    monkeypatch.setattr(oracle, "empirical_convergence", _lying_detector)
    code, _, _ = run(["classify-integral", "--a", "-2", "--no-check"], capsys)
    assert code == 0


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "energia", "divisorial", "--alpha", "0.75"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["verdict"] == "Converges"
