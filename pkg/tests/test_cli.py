import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from hyplab import cli
from hyplab.blockcore import DomainError
from hyplab.operator_model import spectrum_modes
from hyplab.regions import classify


def run(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_classify(capsys):
    code, out, _ = run(["classify", "--alpha", "0.9", "--beta", "0.5"], capsys)
    assert code == 0
    assert out.strip() == "S3; prediction: conditioned polynomial, order 1, O(1/t) on Ran(A)"


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "hyplab", "classify", "--alpha", "0.1", "--beta", "0.8"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("S1; prediction: polynomial")


def test_decay_acceptance_run(tmp_path, capsys):
    out = tmp_path / "decay.csv"
    args = ["decay", "--alpha", "0.9", "--beta", "0.5", "--spectrum", "geometric:1,1e14,400",
            "--weight", "conditioned", "--t", "10,3162", "--points", "60", "--fit", "--out", str(out), "--assert"]
    code, stdout, _ = run(args, capsys)
    assert code == 0
    rows = read_csv(out)
    assert rows[0] == ["t", "norm", "argmax_mu"] and len(rows) == 61
    side = json.loads((tmp_path / "decay.csv.json").read_text())
    assert side["results"]["fit"]["slope"] == pytest.approx(-1, abs=0.15)
    assert set(side) >= {"config", "results", "version", "wall_time_s"}
    assert "slope" in stdout


def test_csv_float_format(tmp_path, capsys):
    out = tmp_path / "r.csv"
    run(["resolvent", "--spectrum", "explicit:1;2", "--s", "0.5,2", "--points", "10", "--out", str(out)], capsys)
    rows = read_csv(out)
    assert rows[0] == ["s", "norm", "argmax_mu"]
    for r in rows[1:]:
        for v in r:
            assert float(v) == float(f"{float(v):.17g}")
    first = float(rows[1][1])
    from hyplab import kernels
    ref = max(kernels.resolvent_norms(0.5, [1.0, 2.0], 0.9, 0.5))
    assert first == ref


@pytest.mark.parametrize(
    "cmd, header",
    [
        (["gap", "--spectrum", "continuum:1,1e6", "--samples", "20"], ["mu", "max_re_lambda"]),
        (["region-map", "--grid", "3"], ["alpha", "beta", "label", "boundary", "near_zero_slope",
                                         "decay_slope", "gap", "note"]),
        (["resolvent", "--points", "12"], ["s", "norm", "argmax_mu"]),
        (["decay", "--points", "12"], ["t", "norm", "argmax_mu"]),
        (["thermoplate", "--alpha", "0.8", "--modes", "50", "--points", "12"], ["t", "norm", "argmax_mu"]),
    ],
)
def test_csv_schemas(cmd, header, tmp_path, capsys):
    out = tmp_path / "x.csv"
    code, _, _ = run(cmd + ["--out", str(out)], capsys)
    assert code == 0
    assert read_csv(out)[0] == header


def test_region_map_labels_match(tmp_path, capsys):
    out = tmp_path / "m.csv"
    assert run(["region-map", "--grid", "11", "--out", str(out), "--assert"], capsys)[0] == 0
    rows = read_csv(out)[1:]
    assert len(rows) == 121
    for r in rows:
        assert r[2] == classify((float(r[0]), float(r[1]))).label
        assert r[3] in ("true", "false") and r[4] == "nan"


@pytest.mark.parametrize(
    "cmd",
    [
        ["resolvent", "--s", "1e-4,1e-1", "--points", "15", "--fit", "--spectrum", "continuum:1,1e14"],
        ["decay", "--points", "20", "--fit", "--weight", "smoothed", "--alpha", "0.1", "--beta", "0.8",
         "--spectrum", "power:1,2,4000", "--t", "10,1000"],
        ["gap", "--alpha", "0.5", "--beta", "0.5", "--spectrum", "continuum:1,1e12"],
        ["bct-check"],
        ["thermoplate", "--alpha", "0.9", "--modes", "2000", "--t", "5,20", "--points", "15", "--fit"],
        ["region-map", "--grid", "3", "--metrics", "label,gap"],
    ],
)
def test_config_replay_is_bit_identical(cmd, tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(cmd + ["--out", str(a)], capsys)[0] == 0
    sub = cmd[0]
    assert run([sub, "--config", str(a) + ".json", "--out", str(b)], capsys)[0] == 0
    if sub != "bct-check":
        assert a.read_bytes() == b.read_bytes()
    ra = json.loads((tmp_path / "a.csv.json").read_text())
    rb = json.loads((tmp_path / "b.csv.json").read_text())
    assert ra["config"] == rb["config"] and ra["results"] == rb["results"]


def test_json_format(tmp_path, capsys):
    out = tmp_path / "g.json"
    run(["gap", "--spectrum", "explicit:1;4", "--format", "json", "--out", str(out)], capsys)
    data = json.loads(out.read_text())
    assert [set(d) for d in data] == [{"mu", "max_re_lambda"}] * 2


def test_stdout_when_no_out(capsys):
    code, out, _ = run(["gap", "--spectrum", "explicit:1;4"], capsys)
    assert code == 0 and "mu,max_re_lambda" in out


@pytest.mark.parametrize(
    "cmd",
    [
        ["classify", "--alpha", "1.5"],
        ["classify", "--beta", "-0.1"],
        ["gap", "--spectrum", "bogus:1,2"],
        ["gap", "--spectrum", "geometric:1,1e4,0"],
        ["resolvent", "--spectrum", "continuum:1,10", "--s", "0,1"],
        ["thermoplate", "--alpha", "0.75"],
        ["decay", "--t", "abc"],
        ["decay", "--frobnicate"],
        ["nonsense"],
        [],
        ["bct-check", "--alpha", "0.5", "--beta", "0.5"],
        ["decay", "--config", "/nonexistent.json"],
    ],
)
def test_exit_code_domain_errors(cmd, capsys):
    try:
        code = cli.main(cmd)
    except SystemExit as exc:
        code = exc.code
    assert code == 2


def test_config_for_other_command_rejected(tmp_path, capsys):
    a = tmp_path / "a.csv"
    run(["gap", "--spectrum", "explicit:1;4", "--out", str(a)], capsys)
    assert run(["decay", "--config", str(a) + ".json"], capsys)[0] == 2


@pytest.mark.parametrize(
    "cmd",
    [
        ["decay", "--points", "12", "--fit", "--assert", "0,0.01"],
        ["resolvent", "--points", "12", "--fit", "--spectrum", "explicit:1;2", "--assert"],
        ["gap", "--spectrum", "explicit:1;4", "--assert", "1,0.5"],
    ],
)
def test_exit_code_assertion_failure(cmd, tmp_path, capsys):
    out = tmp_path / "x.csv"
    code, _, err = run(cmd + ["--out", str(out)], capsys)
    assert code == 3 and "assertion failed" in err
    assert out.exists()  # the table is still written


def test_thermoplate_preset():
    model = cli.thermoplate_preset(0.8, 3)
    np.testing.assert_array_equal(spectrum_modes(model.spectrum), [1, 16, 81])
    assert tuple(model.pair) == (0.8, 0.5)
    assert classify(model.pair).label == "S3"
    cli.thermoplate_preset(0.76, 3)
    with pytest.raises(DomainError, match="3/4 < alpha <= 1"):
        cli.thermoplate_preset(0.75, 3)


def test_thermoplate_command_notes(capsys):
    code, out, err = run(["thermoplate", "--alpha", "0.8", "--modes", "200", "--points", "12"], capsys)
    assert code == 0
    assert out.startswith("S3; prediction")
    assert "alpha/2" in out
    assert "spectrum too small" in err


def test_atomic_write_leaves_no_temp(tmp_path):
    target = tmp_path / "f.txt"
    cli.write_atomic(str(target), "one")
    cli.write_atomic(str(target), "two")
    assert target.read_text() == "two"
    assert [p.name for p in tmp_path.iterdir()] == ["f.txt"]
