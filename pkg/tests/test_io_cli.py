import json
import math
import re
import xml.etree.ElementTree as ET
from fractions import Fraction

import pytest

from painleve_lab import __version__
from painleve_lab.acceptance import PSI_TARGET
from painleve_lab.cli import main
from painleve_lab.io import (column, dumps_csv, dumps_json, read_csv, read_json, to_plain,
                             write_csv, write_json)
from painleve_lab.series import mpctx


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_to_plain_scalars():
    ctx = mpctx(128)
    assert to_plain(Fraction(3, 7)) == "3/7"
    assert to_plain(1 + 2j) == [1.0, 2.0]
    assert to_plain(float("inf")) == "inf"
    s = to_plain(ctx.mpf(1) / 3)
    assert s.startswith("0.33333333333333333333333333333333333") and len(s) > 38
    with pytest.raises(TypeError):
        to_plain(object())


def test_json_round_trip(tmp_path):
    cfg = {"a": Fraction(1, 2), "bits": 256}
    path = write_json(tmp_path / "r.json", {"x": [1, 2.5], "q": Fraction(2, 3)}, cfg)
    config, result = read_json(path)
    assert config == {"a": "1/2", "bits": 256} and result == {"x": [1, 2.5], "q": "2/3"}
    doc = json.loads(path.read_text())
    assert doc["version"] == __version__ and doc["artifact"] == "painleve-lab"


def test_csv_round_trip(tmp_path):
    rows = [(0.1, 1 / 3, Fraction(1, 5)), (0.2, -2.0, Fraction(-7, 3))]
    path = write_csv(tmp_path / "t.csv", ["t", "y", "q"], rows, {"grid": 2})
    config, cols, back = read_csv(path)
    assert config == {"grid": 2} and cols == ["t", "y", "q"]
    assert column(back, cols, "y") == [1 / 3, -2.0]
    assert column(back, cols, "q", Fraction) == [Fraction(1, 5), Fraction(-7, 3)]


def test_readers_reject_foreign_files(tmp_path):
    p = tmp_path / "x.json"
    p.write_text('{"a": 1}')
    with pytest.raises(ValueError):
        read_json(p)
    q = tmp_path / "x.csv"
    q.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_csv(q)


def test_writers_are_deterministic():
    cfg = {"a": Fraction(1, 2)}
    assert dumps_json({"v": 1.25}, cfg) == dumps_json({"v": 1.25}, cfg)
    assert dumps_csv(["x"], [(1.0,)], cfg) == dumps_csv(["x"], [(1.0,)], cfg)


def test_classify_lf(capsys):
    code, out, _ = run(["classify", "--lf", "0.5", "2"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["result"]["verdict"]["has_pp"] is True
    assert doc["config"]["lf"] == ["1/2", "2"]


def test_classify_logistic_false(capsys):
    code, out, _ = run(["classify", "--a", "3/10"], capsys)
    assert code == 0 and json.loads(out)["result"]["verdict"]["has_pp"] is False


def test_usage_errors_exit_2(capsys):
    assert run(["classify"], capsys)[0] == 2
    assert run(["classify", "--map", "a*x*(1-x)"], capsys)[0] == 2  # unbound parameter
    assert run(["nonsense"], capsys)[0] == 2
    assert run(["julia", "--a", "1.5"], capsys)[0] == 2
    assert run(["julia", "--a", "0.5", "--inset", "0.5"], capsys)[0] == 2
    assert run(["psi", "--a", "0.5", "--bits", "200"], capsys)[0] == 2
    assert run(["borel", "--P", "1", "--h", "0.3"], capsys)[0] == 2


def test_numeric_failure_exit_1(capsys):
    code, _, err = run(["borel", "--P", "8", "--tol", "1e-30"], capsys)
    assert code == 1 and "numeric failure" in err


def test_bits_env_var(monkeypatch, capsys, tmp_path):
    monkeypatch.setenv("PAINLEVE_LAB_BITS", "192")
    out = tmp_path / "lin.json"
    assert run(["linearize", "--a", "1/2", "--order", "16", "--out", str(out)], capsys)[0] == 0
    config, result = read_json(out)
    assert config["bits"] == 192 and result["bits"] == 192
    monkeypatch.setenv("PAINLEVE_LAB_BITS", "lots")
    assert run(["linearize", "--a", "1/2"], capsys)[0] == 2


def test_continue_and_barrier(capsys, tmp_path):
    out = tmp_path / "c.json"
    assert run(["continue", "--a", "1/2", "--x0", "1/20", "--z", "3", "1.5+2j", "--order", "48",
                "--out", str(out)], capsys)[0] == 0
    _, result = read_json(out)
    assert len(result["values"]) == 2
    code, stdout, _ = run(["barrier", "--a", "1/2", "--steps", "4"], capsys)
    assert code == 0 and "radius_estimate" in stdout


def test_julia_csv_deterministic_and_svg_closed(tmp_path, capsys):
    a, svg = tmp_path / "a.csv", tmp_path / "j.svg"
    args = ["julia", "--a", "0.5", "--angles", "64", "--inset", "1e-6", "--out", str(a), "--svg", str(svg)]
    assert run(args, capsys)[0] == 0
    first_csv, first_svg = a.read_bytes(), svg.read_bytes()
    assert run(args, capsys)[0] == 0
    assert a.read_bytes() == first_csv and svg.read_bytes() == first_svg
    config, cols, rows = read_csv(a)
    assert cols == ["theta", "re", "im", "err_bound"] and len(rows) == 64
    x0 = complex(float(rows[0][1]), float(rows[0][2]))
    assert abs(x0 + 1) < 1e-2
    ET.parse(svg)
    text = svg.read_text()
    paths = re.findall(r'<path d="([^"]+)"', text)
    longest = max(paths, key=len)
    coords = re.findall(r"(-?\d+\.?\d*) (-?\d+\.?\d*)", longest)
    assert len(coords) == 65 and coords[0] == coords[-1]


def test_borel_json_round_trip(tmp_path, capsys):
    out = tmp_path / "b.json"
    assert run(["borel", "--steps", "10", "--samples", "--out", str(out)], capsys)[0] == 0
    config, result = read_json(out)
    assert config["P"] == 40.0 and result["max_drift"] <= 1e-8
    from painleve_lab.borel import BorelGrid

    g = BorelGrid.from_json(result["grid"])
    assert g.n == 2560 and abs(g.samples[0] + 0.5) < 1e-10


def test_holder_command(capsys):
    code, out, _ = run(["holder", "--a", "1/2", "--points", "8"], capsys)
    res = json.loads(out)["result"]
    assert code == 0 and res["relative_error"] <= 0.05


def test_psi_csv_mean_matches_target_constant(tmp_path, capsys):
    out = tmp_path / "psi.csv"
    code, _, _ = run(["psi", "--a", "0.5", "--N", "300", "--bits", "512", "--grid", "16",
                      "--out", str(out)], capsys)
    assert code == 0
    config, cols, rows = read_csv(out)
    psi = column(rows, cols, "psi")
    assert config["c_used"] == pytest.approx(-sum(psi) / len(psi), rel=1e-12)
    assert abs(-sum(psi) / len(psi) - PSI_TARGET) <= 1e-6


def test_verify_subset(capsys):
    code, out, _ = run(["verify", "--only", "1", "9"], capsys)
    assert code == 0
    assert "[PASS]  1" in out and "[PASS]  9" in out and "2/2 criteria passed" in out
