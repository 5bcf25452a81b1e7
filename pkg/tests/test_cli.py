import csv
import io
import json
import math
import subprocess
import sys

import pytest

from sntail import cli
from sntail.errors import NumericalError


def run(*argv):
    buf = io.StringIO()
    code = cli.main(list(argv), out=buf)
    return code, buf.getvalue()


def test_analyze_independent_negative_octant():
    code, out = run("analyze", "--alpha1", "-1", "--alpha2", "-1", "--rho", "0", "--format", "json")
    assert code == 0
    r = json.loads(out)
    assert r["theta"] == pytest.approx(1.0, abs=1e-14)
    assert r["kappa"] == pytest.approx(2.0, abs=1e-14)
    assert r["tau2"] == pytest.approx(0.0, abs=1e-14)
    assert r["log_tau1"] == pytest.approx(0.0, abs=1e-14)
    assert r["kappa"] == r["theta"] + 1


def test_analyze_equi_skew_positive():
    _, out = run("analyze", "--alpha1", "1", "--alpha2", "1", "--rho", "0.5", "--format", "json")
    assert json.loads(out)["theta"] == pytest.approx(4 / 3, rel=1e-13)


def test_analyze_flags_zero_alpha():
    _, out = run("analyze", "--alpha1", "0", "--alpha2", "0.5", "--rho", "0.2", "--format", "json")
    r = json.loads(out)
    assert r["closed_form_path"] is True
    assert any("closed-form" in w for w in r["warnings"])


def test_analyze_json_schema():
    _, out = run("analyze", "--alpha1", "0.3", "--alpha2", "1", "--rho", "-0.5", "--format", "json")
    r = json.loads(out)
    for key in ("params", "case", "lambda1", "lambda2", "gamma1", "beta1", "beta2", "theta", "kappa",
                "tau2", "log_tau1", "formula", "warnings", "printed"):
        assert key in r
    assert r["printed"]["fields"]["theta"]["delta"] == pytest.approx(0.0, abs=1e-12)


def test_analyze_text_mentions_case():
    code, out = run("analyze", "--alpha1", "1", "--alpha2", "2", "--rho", "0.3")
    assert code == 0 and "case 5" in out


def test_analyze_is_deterministic():
    argv = ("analyze", "--alpha1", "-2", "--alpha2", "1.5", "--rho", "0.5", "--format", "json")
    assert run(*argv)[1] == run(*argv)[1]


def test_analyze_boundary_flag():
    _, out = run("analyze", "--alpha1", "-1", "--alpha2", "2", "--rho", "0.5", "--boundary", "lambda1",
                 "--format", "json")
    assert json.loads(out)["boundary"] == ["lambda1"]


@pytest.mark.parametrize("argv", [
    ("analyze", "--alpha1", "1", "--alpha2", "1", "--rho", "1"),
    ("analyze", "--alpha1", "nan", "--alpha2", "1", "--rho", "0"),
    ("analyze", "--alpha1", "1", "--alpha2", "1"),
    ("analyze", "--alpha1", "1", "--alpha2", "1", "--rho", "0", "--boundary", "bogus"),
    ("nosuchcommand",),
])
def test_usage_errors_exit_2(argv):
    assert run(*argv)[0] == 2


def test_batch(tmp_path):
    f = tmp_path / "sets.txt"
    f.write_text("-1 -1 0\n# comment\n\n1, 1, 0.5\n")
    code, out = run("analyze", "--batch", str(f))
    assert code == 0
    assert [r["theta"] for r in json.loads(out)] == pytest.approx([1.0, 4 / 3])


def test_batch_bad_line(tmp_path):
    f = tmp_path / "sets.txt"
    f.write_text("1 1 2\n")
    assert run("analyze", "--batch", str(f))[0] == 2


def test_verify_csv_header():
    code, out = run("verify", "--alpha1", "-1", "--alpha2", "-1", "--rho", "0", "--u-log-grid", "-50,-100",
                    "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "u_log,log_exact,log_asym,ratio,summand1_log,summand2_log"
    rows = list(csv.DictReader(io.StringIO("\n".join(l for l in lines if not l.startswith("#")))))
    assert [float(r["u_log"]) for r in rows] == [-50.0, -100.0]
    assert all(float(r["ratio"]) > 0 for r in rows)


def test_verify_case1_ratio_approaches_one():
    code, out = run("verify", "--alpha1", "-2", "--alpha2", "-1", "--rho", "0.5",
                    "--u-log-grid", "-50,-100,-200,-400", "--format", "json")
    assert code == 0
    r = json.loads(out)
    errs = [abs(math.log(row["ratio"])) for row in r["rows"]]
    assert all(y < x for x, y in zip(errs, errs[1:]))
    assert r["summary"]["improving"] is True


def test_verify_parallel_matches_serial():
    base = ("verify", "--alpha1", "1", "--alpha2", "2", "--rho", "0.3", "--u-log-grid", "-40:-120:-40",
            "--format", "json")
    assert run(*base)[1] == run(*base, "--jobs", "2")[1]


def test_verify_accepts_tiny_decimal_u():
    code, out = run("verify", "--alpha1", "-1", "--alpha2", "-1", "--rho", "0", "--u", "1e-5000",
                    "--format", "json")
    assert code == 0
    assert json.loads(out)["rows"][0]["u_log"] == pytest.approx(-5000 * math.log(10), rel=1e-15)


@pytest.mark.parametrize("extra", [(), ("--u-log-grid", "-5"), ("--u", "0.5"), ("--u-log", "-2e6")])
def test_verify_grid_errors(extra):
    assert run("verify", "--alpha1", "1", "--alpha2", "1", "--rho", "0", *extra)[0] == 2


def test_verify_failed_row_exits_1(monkeypatch):
    real = cli.log_dcdu_exact

    def flaky(u_log, p):
        if u_log == -100.0:
            raise NumericalError("forced", {})
        return real(u_log, p)

    monkeypatch.setattr(cli, "log_dcdu_exact", flaky)
    code, out = run("verify", "--alpha1", "1", "--alpha2", "1", "--rho", "0", "--u-log-grid", "-50,-100,-150",
                    "--format", "json")
    assert code == 1
    rows = json.loads(out)["rows"]
    assert [r["failed"] for r in rows] == [False, True, False]


def test_fit_case1_passes_at_two_percent():
    code, out = run("fit", "--alpha1", "-1", "--alpha2", "-0.5", "--rho", "0.3", "--tolerance", "0.02",
                    "--format", "json")
    assert code == 0
    assert json.loads(out)["theta_rel_error"] <= 0.02


def test_fit_injected_form_is_recovered():
    code, out = run("fit", "--inject-rvform", "0.7,-1.2,0.35", "--format", "json")
    assert code == 0
    r = json.loads(out)
    assert r["theta_hat"] == pytest.approx(0.7, abs=1e-10)
    assert r["tau2_hat"] == pytest.approx(0.35, abs=1e-10)


def test_fit_fails_at_impossible_tolerance():
    code, _ = run("fit", "--alpha1", "-1", "--alpha2", "-0.5", "--rho", "0.3", "--tolerance", "1e-9")
    assert code == 1


@pytest.mark.parametrize("grid", ["-40", "-40,-40,-40,-40", "-10:-100:-30"])
def test_fit_grid_usage_errors(grid):
    assert run("fit", "--alpha1", "-1", "--alpha2", "-0.5", "--rho", "0.3", "--u-log-grid", grid)[0] == 2


def test_selftest():
    code, out = run("selftest")
    assert code == 0
    assert out.count("PASS") == 5


@pytest.mark.parametrize("spec,expected", [
    ("-40:-160:-40", [-40.0, -80.0, -120.0, -160.0]),
    ("-50,-100", [-50.0, -100.0]),
])
def test_parse_grid(spec, expected):
    assert cli.parse_grid(spec) == expected


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "sntail", "analyze", "--alpha1", "-1", "--alpha2", "-1",
                           "--rho", "0", "--format", "json"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["kappa"] == pytest.approx(2.0)
