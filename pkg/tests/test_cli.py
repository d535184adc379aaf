import json

import pytest

from jtrace.cli import main


def run(tmp_path, command, cfg, *extra):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / "out.txt"
    code = main([command, "--config", str(path), "--out", str(out), *extra])
    return code, out.read_text() if out.exists() else ""


def test_expand_lattice(tmp_path):
    code, text = run(tmp_path, "expand", {"lattice": {"gram": [[2]]}, "trunc": 6})
    assert code == 0
    series = json.loads(text)["series"]
    assert series["offset"] == "-1/24"
    assert [t[2] for t in series["terms"][:5]] == ["1/1", "3/1", "4/1", "7/1", "13/1"]


def test_expand_with_zeta(tmp_path):
    code, text = run(tmp_path, "expand", {"lattice": {"gram": [[2]]}, "h": [[1]], "trunc": 4})
    assert code == 0


def test_odd_gram_is_input_error(tmp_path, capsys):
    code, _ = run(tmp_path, "expand", {"lattice": {"gram": [[3]]}})
    assert code == 2
    assert "diagonal entry 3 is odd" in capsys.readouterr().err


def test_schema_errors_name_fields(tmp_path, capsys):
    code, _ = run(tmp_path, "expand", {"lattice": {"gram": [[2]]}, "trunc": "x", "bogus": 1})
    assert code == 2
    err = capsys.readouterr().err
    assert "config error at /trunc" in err
    assert "bogus" in err


def test_missing_file(tmp_path, capsys):
    assert main(["expand", "--config", str(tmp_path / "nope.json")]) == 2
    assert "cannot read config" in capsys.readouterr().err


def test_verify_pass_and_fail(tmp_path):
    cfg = {"check": "twistedE_S", "m": 2, "samples": 3, "seed": 1}
    code, text = run(tmp_path, "verify", cfg)
    assert code == 0 and json.loads(text)["report"]["pass"]
    code, _ = run(tmp_path, "verify", cfg, "--tol", "1e-30")
    assert code == 1


def test_trunc_override(tmp_path):
    cfg = {"heisenberg": {"norms": [2], "alpha": [1]}, "h": [[1]], "trunc": 3}
    _, a = run(tmp_path, "expand", cfg)
    _, b = run(tmp_path, "expand", cfg, "--trunc", "6")
    assert json.loads(a)["series"]["trunc"] == 3
    assert json.loads(b)["series"]["trunc"] == 6


def test_csv_output(tmp_path):
    cfg = {"function": {"name": "twisted_E", "order": 2, "mu": [1]},
           "points": [{"tau": [0, 1], "z": [[0.3, 0]]}]}
    code, text = run(tmp_path, "eval", cfg, "--format", "csv")
    assert code == 0
    lines = text.strip().splitlines()
    assert lines[0] == "im,re,tau,z" and len(lines) == 2


def test_eval_twisted_P_needs_w(tmp_path):
    cfg = {"function": {"name": "twisted_P", "order": 2, "mu": [1]},
           "points": [{"tau": [0, 1], "z": [[0.3, 0]]}]}
    assert run(tmp_path, "eval", cfg)[0] == 2


def test_fit_and_elliptic(tmp_path):
    code, text = run(tmp_path, "fit-smatrix", {"lattice": {"gram": [[2]]}, "gamma": "T", "tol": 1e-6})
    assert code == 0 and json.loads(text)["expected_T_deviation"] < 1e-6
    code, _ = run(tmp_path, "verify", {"lattice": {"gram": [[2]]}, "h": [[1]], "check": "elliptic_perm",
                                       "lambda": [2], "mu": [1], "samples": 3, "tol": 1e-7})
    assert code == 0


def test_reduce_and_oracle(tmp_path):
    code, text = run(tmp_path, "reduce", {"lattice": {"gram": [[2]]}, "h": [[1]],
                                          "reduction": {"kind": "charged", "p": 2}})
    assert code == 0 and json.loads(text)["terms"]
    cfg = {"heisenberg": {"norms": [2], "alpha": [1]}, "h": [[1]],
           "monomial": {"factors": [[0, 2, 1], [0, 1, 1]]}}
    code, text = run(tmp_path, "oracle", cfg)
    assert code == 0 and json.loads(text)["equal"]


def test_wrong_module_kind(tmp_path):
    assert run(tmp_path, "oracle", {"lattice": {"gram": [[2]]}})[0] == 2
    assert run(tmp_path, "expand", {"lattice": {"gram": [[2]]}, "heisenberg": {"norms": [2]}})[0] == 2


def test_stdout(capsys, tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"check": "E2", "samples": 2}))
    assert main(["verify", "--config", str(path)]) == 0
    assert json.loads(capsys.readouterr().out)["report"]["check"] == "E2"
