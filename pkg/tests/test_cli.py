import json

import pytest

from corrpin import cli
from corrpin.critical import curve_point
from corrpin.disorder import MovingAverage, correlations
from corrpin.errors import NumericalFailure
from corrpin.kernels import ZetaLaw
from corrpin.validation import Check


def run(tmp_path, *args):
    out = tmp_path / "out.txt"
    code = cli.main([*args, "--out", str(out)])
    return code, out.read_text() if out.exists() else ""


def data_rows(text):
    lines = [ln for ln in text.split("\n") if ln and not ln.startswith("#")]
    return lines[0].split(","), [ln.split(",") for ln in lines[1:]]


def test_curve_grid(tmp_path):
    code, text = run(tmp_path, "curve", "--alpha", "1", "--coeffs", "0.70710678118654752,0.70710678118654752", "--beta", "0:2:0.02")
    assert code == 0
    header, rows = data_rows(text)
    assert header == ["beta", "lambda", "Lambda", "h_c_ann", "closed_form", "slope_asymptote_prediction"]
    assert len(rows) == 101
    assert "\r" not in text and "# coeffs=0.70710678118654752,0.70710678118654752" in text
    for r in rows:
        assert abs(float(r[3]) - float(r[4])) <= 1e-10
    assert float(rows[-1][0]) == 2.0


def test_curve_round_trip_precision(tmp_path):
    _, text = run(tmp_path, "curve", "--beta", "1.3", "--threads", "1")
    _, rows = data_rows(text)
    cp = curve_point(ZetaLaw(1.0), correlations(MovingAverage((0.8, 0.36, 0.48))), 1.3)
    assert float(rows[0][3]) == cp.h_c_ann


def test_curve_without_closed_form(tmp_path):
    code, text = run(tmp_path, "curve", "--coeffs", "0.5,0.5,0.5,0.5", "--beta", "0,1", "--format", "json")
    assert code == 0
    doc = json.loads(text)
    assert [r["closed_form"] for r in doc["rows"]] == [None, None]
    assert doc["config"]["coeffs"] == "0.5,0.5,0.5,0.5"


def test_free_energy(tmp_path):
    code, text = run(tmp_path, "free-energy", "--beta", "0,0.8", "--h", "-0.5:0.5:0.25")
    assert code == 0
    header, rows = data_rows(text)
    assert header == ["beta", "h", "Lambda", "epsilon", "f_ann", "bracket_width"]
    assert len(rows) == 10
    assert all(float(r[4]) >= 0 for r in rows)


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nalpha = 2\nbeta = 0:1:0.5\ncoeffs=0.6,0.8\n")
    code, text = run(tmp_path, "curve", "--config", str(cfg), "--alpha", "0.5")
    assert code == 0
    assert "# alpha=0.5" in text and "# coeffs=0.6,0.8" in text
    assert len(data_rows(text)[1]) == 3
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = red\n")
    assert run(tmp_path, "curve", "--config", str(bad))[0] == 2


def test_mass_table(tmp_path):
    good = tmp_path / "k.txt"
    good.write_text("0.4 0.2 0.1\n")
    code, text = run(tmp_path, "curve", "--mass-table", str(good), "--beta", "0.5", "--coeffs", "0.6,0.8")
    assert code == 0 and '"family": "table"' in text
    doc = tmp_path / "k.json"
    doc.write_text(json.dumps({"family": "table", "masses": [0.5, 0.2], "k_infinity": 0.1}))
    assert run(tmp_path, "curve", "--mass-table", str(doc), "--beta", "0.5")[0] == 0


@pytest.mark.parametrize(
    "args",
    [
        ["curve", "--beta", "1:0:1"],
        ["curve", "--beta", "abc"],
        ["curve", "--beta", "-1"],
        ["curve", "--coeffs", "0.7,0.7"],
        ["curve", "--alpha", "-1"],
        ["curve", "--k-infinity", "1.5"],
        ["sample", "--beta", "0,1"],
        ["sample", "--N", "0"],
        ["curve", "--mass-table", "/nonexistent/file"],
    ],
)
def test_bad_input_exit_code(tmp_path, args):
    assert run(tmp_path, *args)[0] == 2


def test_negative_mass_table(tmp_path):
    neg = tmp_path / "neg.txt"
    neg.write_text("0.5, -0.1\n")
    assert run(tmp_path, "curve", "--mass-table", str(neg))[0] == 2


def test_argparse_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        cli.main(["curve", "--format", "xml"])
    assert exc.value.code == 2


def test_numerical_failure_exit_code(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise NumericalFailure("no convergence", residual=1.0)

    monkeypatch.setattr(cli, "curve_point", boom)
    assert run(tmp_path, "curve", "--beta", "1")[0] == 3


def test_validate_quick(tmp_path):
    code, text = run(tmp_path, "validate", "--quick")
    assert code == 0
    doc = json.loads(text)
    assert doc["passed"] is True and doc["config"]["quick"] is True
    assert all({"name", "lhs", "rhs", "tolerance", "pass"} <= set(c) for c in doc["checks"])


def test_validate_failure_exit_code(tmp_path, monkeypatch):
    monkeypatch.setattr(cli, "run_suite", lambda **k: [Check("x", 1.0, 0.0, 0.1, False)])
    code, text = run(tmp_path, "validate")
    assert code == 1 and json.loads(text)["passed"] is False


def test_sample(tmp_path):
    args = ("sample", "--alpha", "2", "--beta", "1", "--N", "20000", "--seed", "3")
    code, text = run(tmp_path, *args)
    assert code == 0
    assert "# inverse_mean_spacing=" in text and "# i_N=" in text
    contacts = [int(x) for x in text.split("\n") if x and not x.startswith("#")]
    assert contacts[0] == 0 and max(contacts) <= 20000
    assert run(tmp_path, *args)[1] == text
    code, js = run(tmp_path, *args, "--format", "json")
    assert json.loads(js)["contacts"] == contacts


def test_sample_null_recurrent(tmp_path):
    code, text = run(tmp_path, "sample", "--alpha", "0.8", "--beta", "1", "--N", "1000")
    assert code == 0 and "# mean_spacing=inf" in text and "inverse_mean_spacing" not in text


def test_stdout(capsys):
    assert cli.main(["curve", "--beta", "0.5"]) == 0
    assert "beta,lambda" in capsys.readouterr().out


def test_parse_grid():
    assert len(cli.parse_grid("0:2:0.02")) == 101
    assert cli.parse_grid("0.1,0.2") == [0.1, 0.2]
    assert cli.parse_grid("-1:1:1") == [-1.0, 0.0, 1.0]
    with pytest.raises(cli.BadInput):
        cli.parse_grid("0:1:0.3")
