import json

import pytest

from amoeba_atlas.cli import InputError, RunConfig, build_config, build_parser, main
from amoeba_atlas.poly import parse_polynomial, polynomial_to_json
from amoeba_atlas.polyhedral import PolyhedralComplex


def run_cli(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_complex_of_line(capsys):
    code, out, _ = run_cli(["complex", "--poly", "1 + x + y"], capsys)
    assert code == 0
    doc = json.loads(out)
    P = PolyhedralComplex.from_json(doc["complex"])
    assert set(P.cells[0].vertices) == {(0.5, 0.0), (0.0, 0.5), (0.5, 0.5)}
    assert out.endswith("\n") and ", " not in out


def test_refusal_exit_code(capsys):
    code, _, err = run_cli(["complex", "--poly", "1 + x + y + x*y", "--method", "direct"], capsys)
    assert code == 2 and "refused" in err


def test_bad_polynomial_exit_code(capsys):
    code, _, err = run_cli(["check", "--poly", "1 + * x"], capsys)
    assert code == 1 and "input error" in err


def test_bad_window_and_grid(capsys):
    assert run_cli(["amoeba", "--poly", "1+x+y", "--window", "1,0,0,1"], capsys)[0] == 1
    assert run_cli(["amoeba", "--poly", "1+x+y", "--grid", "0"], capsys)[0] == 1


def test_three_variables_rejected_for_plane_commands(capsys):
    assert run_cli(["amoeba", "--poly", "1+x+y+z"], capsys)[0] == 1


def test_threads_variable_validated(capsys, monkeypatch):
    monkeypatch.setenv("ATLAS_THREADS", "zero")
    assert run_cli(["check", "--poly", "1+x+y"], capsys)[0] == 1
    monkeypatch.setenv("ATLAS_THREADS", "2")
    assert run_cli(["check", "--poly", "1+x+y"], capsys)[0] == 0


def test_check_report(capsys):
    code, out, _ = run_cli(["check", "--poly", "x + y + x^2*y^2 + x*y/2"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["concave"] is False and doc["concavity_witness"] == [1, 1]


def test_out_file_and_summary(tmp_path, capsys):
    target = tmp_path / "out.json"
    code, out, _ = run_cli(["classify", "--poly", "x+30*x*y+20*x^2*y+x^3*y+y^2", "--out", str(target)], capsys)
    assert code == 0
    assert out.strip() == "optimal: 5 of 5 orders realized"
    assert json.loads(target.read_text())["verdict"] == "optimal"


def test_poly_file_json(tmp_path, capsys):
    src = tmp_path / "f.json"
    src.write_text(json.dumps(polynomial_to_json(parse_polynomial("1 + x + y"))))
    code, out, _ = run_cli(["complex", "--poly-file", str(src)], capsys)
    assert code == 0 and json.loads(out)["polynomial"] == "1 + y + x"


def _args(argv):
    return build_parser().parse_args(argv)


def test_config_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"poly": "1 + x + y", "grid": 50, "thetas": 32, "seed": 4}))
    merged = build_config(_args(["amoeba", "--config", str(cfg), "--grid", "80"]))
    assert (merged.grid, merged.thetas, merged.seed, merged.poly) == (80, 32, 4, "1 + x + y")
    assert merged.slices == RunConfig(command="amoeba", poly="x").slices
    replaced = build_config(_args(["amoeba", "--config", str(cfg), "--poly-file", "f.txt"]))
    assert replaced.poly is None and replaced.poly_file == "f.txt"


def test_config_rejects_unknown_keys(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"poly": "1 + x + y", "colour": "red"}))
    with pytest.raises(InputError):
        build_config(_args(["amoeba", "--config", str(cfg)]))


def test_run_config_validation():
    with pytest.raises(InputError):
        RunConfig(command="amoeba")
    with pytest.raises(InputError):
        RunConfig(command="wca", poly="1+x+y", eps=0)
    with pytest.raises(InputError):
        RunConfig(command="complex", poly="1+x+y", schedule="4,2")


def test_amoeba_svg(tmp_path, capsys):
    svg = tmp_path / "a.svg"
    code, out, _ = run_cli(["amoeba", "--poly", "1+x+y", "--grid", "60", "--thetas", "32", "--svg", str(svg)], capsys)
    assert code == 0
    assert svg.read_text().startswith("<svg")
    assert len(json.loads(out)["components"]) == 3
