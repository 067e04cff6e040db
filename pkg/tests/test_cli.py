import csv
import io
import json
import math

import pytest

from masslessfield import cli
from masslessfield._quad import QuadratureError
from masslessfield._special import EULER_GAMMA
from masslessfield.testfn import gaussian


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_form_default_is_gaussian(capsys):
    code, out, _ = run(capsys, "form", "--f1", gaussian().to_json(), "--kernel", "1")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["quantity", "real", "imag", "error_estimate"]
    assert rows[1][0] == "reg_form"
    assert float(rows[1][1]) == pytest.approx(-EULER_GAMMA / (4 * math.pi), abs=1e-12)
    assert float(rows[2][1]) == pytest.approx(1 / (2 * math.sqrt(math.pi)), abs=1e-15)
    assert rows[3][0] == "kernel_W(1)"
    assert float(rows[3][1]) == pytest.approx(-EULER_GAMMA / (2 * math.pi), abs=1e-15)
    assert float(rows[3][2]) == 0.25
    # 17 significant digits.
    assert len(rows[1][1].lstrip("-").replace(".", "").lstrip("0")) >= 16


def test_form_kernel_only(capsys):
    code, out, _ = run(capsys, "form", "--kernel", "2", "--kernel", "-2", "--mu", "3")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert [r[0] for r in rows[1:]] == ["kernel_W(2)", "kernel_W(-2)"]
    assert float(rows[1][2]) == -float(rows[2][2])


def test_form_inline_function(capsys, tmp_path):
    f = tmp_path / "f.json"
    f.write_text(gaussian(0.5, 0.7).to_json(), encoding="utf-8")
    code, out, _ = run(capsys, "form", "--f1", str(f), "--f2", gaussian().to_json())
    assert code == 0 and out.count("\n") == 3


def test_out_file(capsys, tmp_path):
    target = tmp_path / "o.csv"
    code, out, _ = run(capsys, "form", "--out", str(target))
    assert code == 0 and out == ""
    assert target.read_text(encoding="utf-8").startswith("quantity,")


def test_verify_passes(capsys):
    code, out, _ = run(capsys, "verify", "vertex")
    doc = json.loads(out)
    assert code == 0 and doc["passed"]
    assert list(doc) == sorted(doc)


def test_verify_failure_exit(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text('tolerances = {"power_form": -1}\n', encoding="utf-8")
    assert run(capsys, "verify", "vertex", "--config", str(cfg))[0] == 2
    cfg.write_text('tolerances = {"gaussian_regularization": 1e-9}\n', encoding="utf-8")
    code, out, _ = run(capsys, "verify", "vertex", "--config", str(cfg))
    assert code == 1
    assert not json.loads(out)["passed"]


def test_verify_fock_with_config(capsys, tmp_path):
    (tmp_path / "grid.json").write_text('{"kind": "geometric", "kmin": 0.2, "ratio": 2, "size": 2}',
                                        encoding="utf-8")
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# small desk run\ngrid = grid.json\nmax_occupation = 3\nchi = 0, 1.3\nseed = 5\n",
                   encoding="utf-8")
    code, out, _ = run(capsys, "verify", "fock", "--config", str(cfg))
    assert code == 0
    assert json.loads(out)["seed"] == 5


def test_config_errors(tmp_path):
    bad = {"unknown": "colour = blue\n", "duplicate": "mu = 1\nmu = 2\n", "syntax": "mu 1\n",
           "value": "mu = abc\n", "json": "grid = {oops\n", "range": "mu = -1\n"}
    for name, text in bad.items():
        cfg = tmp_path / f"{name}.cfg"
        cfg.write_text(text, encoding="utf-8")
        assert cli.main(["form", "--config", str(cfg)]) == 2, name


def test_parse_config_values(tmp_path):
    vals = cli.parse_config("mu = 2.5\nkmins = 1e-2, 1e-3\nsides = RL\ntolerances = {\"x\": 1}\n")
    assert vals == {"mu": 2.5, "kmins": (1e-2, 1e-3), "sides": "RL", "tolerances": {"x": 1}}
    with pytest.raises(cli.ConfigError):
        cli.parse_config("grid = missing.json", tmp_path)


def test_argparse_errors_exit_2(capsys):
    assert run(capsys, "no-such-command")[0] == 2
    assert run(capsys, "verify", "nothing")[0] == 2
    assert run(capsys, "form", "--mu", "x")[0] == 2


def test_bad_input_exit_2(capsys):
    assert run(capsys, "form", "--f1", '{"atoms": [{"center": 0, "width": -1, "coeffs": [1]}]}')[0] == 2
    assert run(capsys, "vertex", "--spec", '{"right": [[0, 1]], "left": []}')[0] == 2


def test_quadrature_failure_exit_3(capsys, monkeypatch):
    def boom(*a, **k):
        raise QuadratureError("forced", 0.0, 1.0)

    monkeypatch.setattr(cli.fm, "reg_form", boom)
    code, _, err = run(capsys, "form")
    assert code == 3 and "quadrature" in err


def test_weyl_gram(capsys):
    code, out, _ = run(capsys, "weyl-gram", "--count", "3", "--seed", "2")
    doc = json.loads(out)
    assert code == 0 and doc["size"] == 3
    assert doc["min_eigenvalue"] >= -1e-7


def test_vertex(capsys):
    b = math.sqrt(2 * math.pi)
    spec = json.dumps([{"right": [[0, b]], "left": [[0, b]]}, {"right": [[1, -b]], "left": [[1, -b]]}])
    code, out, _ = run(capsys, "vertex", "--spec", spec)
    doc = json.loads(out)
    assert code == 0 and doc["indicator"] == 1
    assert doc["omega"][0] == pytest.approx(-math.exp(-2 * EULER_GAMMA), abs=1e-13)
    assert doc["power_form"][0] == pytest.approx(doc["prefactor"][0], abs=1e-12)


def test_fock_run(capsys):
    exp = json.dumps({"grid": {"kind": "geometric", "kmin": 0.2, "ratio": 2, "size": 2},
                      "truncation": {"max_occupation": 3}, "chi": [0, 1.0], "kmins": [1e-4, 1e-6]})
    code, out, _ = run(capsys, "fock-run", "--experiment", exp)
    doc = json.loads(out)
    assert code == 0
    assert doc["runs"][0]["ground_energy"] == pytest.approx(0.0, abs=1e-12)
    assert doc["runs"][1]["overlap"]["slopes"][0] == pytest.approx(1 / (2 * math.pi), rel=1e-3)
    assert max(doc["runs"][1]["susy_residual"].values()) < 1e-10
    assert run(capsys, "fock-run", "--experiment", '{"colour": 1}')[0] == 2


def test_classical_check(capsys):
    code, out, _ = run(capsys, "classical-check", "--seed", "3")
    doc = json.loads(out)
    assert code == 0 and doc["spread"] < 1e-6
    assert doc["classes"] == ["F10", "F10"] or "commutator_value" not in doc
