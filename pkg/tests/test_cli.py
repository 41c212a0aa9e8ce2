from __future__ import annotations

import csv
import json

import pytest

from measfol import generators as G
from measfol.cli import main
from measfol.formats import complex_to_json, dumps


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv, "--json")
    return code, json.loads(out)


def test_default_output_is_one_line_summary(capsys):
    code, out = run(capsys, "chi", "--generate", "octahedron")
    assert code == 0
    assert out.strip() == "chi octahedron: PASS"


@pytest.mark.parametrize("argv, key, value", [
    (["chi", "--generate", "two_leaf"], "chi_mu", 0.0),
    (["chi", "--generate", "torus_grid", "8", "8", "--weight", "0.3"], "chi_mu", 0.0),
    (["hodge", "--generate", "genus", "2"], "betti", [1.0, 4.0, 1.0]),
    (["hodge", "--generate", "suspension", "1", "5"], "betti", [0.2, 0.4, 0.2]),
    (["index", "--generate", "octahedron"], "weighted_index_sum", 2.0),
    (["obstruction", "--generate", "icosahedron", "--seed", "4"], "weighted_index_sum", 2.0),
    (["approx", "--degree", "-2"], "degree", -2),
])
def test_commands_report_expected_values(capsys, argv, key, value):
    code, rep = run_json(capsys, *argv)
    assert code == 0 and rep["passed"]
    assert rep["results"][key] == value


def test_gauss_bonnet_every_generator(capsys):
    for name in ("octahedron", "icosahedron", "torus_grid", "genus", "two_leaf", "suspension"):
        code, rep = run_json(capsys, "gauss-bonnet", "--generate", name)
        assert code == 0 and rep["passed"]


def test_cancel_with_pairs_and_exhaustion(capsys):
    code, rep = run_json(capsys, "cancel", "--generate", "torus_grid", "16", "16", "--pairs", "6",
                         "--exhaustion", "1", "--seed", "3")
    assert code == 0
    assert rep["checks"]["exhaustion_stable"] and rep["results"]["residual"] == 0.0


def test_cancel_on_sphere_is_an_invariant_failure(capsys):
    code, rep = run_json(capsys, "cancel", "--generate", "octahedron")
    assert code == 1
    assert rep["results"]["residual"] == rep["results"]["lower_bound"] == 2.0
    assert not rep["checks"]["residual_within_tol"]


def test_json_is_byte_stable_and_timings_opt_in(capsys):
    _, a = run(capsys, "obstruction", "--generate", "torus_grid", "4", "4", "--json")
    _, b = run(capsys, "obstruction", "--generate", "torus_grid", "4", "4", "--json")
    assert a == b and "timings" not in json.loads(a)
    _, rep = run_json(capsys, "chi", "--generate", "octahedron", "--timings")
    assert "total_seconds" in rep["timings"]


@pytest.mark.parametrize("argv, error", [
    (["chi"], "BadParameters"),
    (["chi", "--generate", "klein"], "BadParameters"),
    (["chi", "--generate", "torus_grid", "2", "2"], "BadParameters"),
    (["chi", "--generate", "octahedron", "--weight", "-1"], "BadParameters"),
])
def test_bad_input_exits_2_with_error_object(capsys, argv, error):
    code, rep = run_json(capsys, *argv)
    assert code == 2 and rep["error"]["type"] == error


def test_non_closed_input_file(tmp_path, capsys):
    path = tmp_path / "band.json"
    path.write_text(json.dumps({"leaves": [{"id": 0, "facets": [[0, 1, 3], [1, 3, 4], [1, 2, 4]]}]}))
    code, rep = run_json(capsys, "chi", "--input", str(path))
    assert code == 2 and rep["error"]["type"] == "NonClosed"


def test_input_file_and_outputs(tmp_path, capsys):
    model = tmp_path / "torus.json"
    model.write_text(dumps(complex_to_json(G.torus_grid(4, 4))))
    rows, figs, ply = tmp_path / "rows.csv", tmp_path / "figs", tmp_path / "out.ply"
    code, _ = run(capsys, "index", "--input", str(model), "--csv", str(rows), "--figures", str(figs),
                  "--export-ply", str(ply))
    assert code == 0
    with open(rows) as fh:
        table = list(csv.DictReader(fh))
    assert len(table) == 16 + 48 + 32
    assert (figs / "index.png").stat().st_size > 0
    assert ply.read_text().startswith("ply\n")


def test_figures_are_reproducible(tmp_path, capsys):
    for d in ("a", "b"):
        run(capsys, "hodge", "--generate", "octahedron", "--figures", str(tmp_path / d))
    assert (tmp_path / "a" / "hodge.png").read_bytes() == (tmp_path / "b" / "hodge.png").read_bytes()


def test_verify_single_model(capsys):
    code, rep = run_json(capsys, "verify", "--generate", "octahedron")
    assert code == 0 and rep["results"]["failed"] == []
