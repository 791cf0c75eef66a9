import json

import pytest

from l2 import UsageError, cli_main, parse_field, parse_matrix_text, parse_range


def test_parse_field():
    assert parse_field("Q") == "Q"
    assert parse_field("Fp:7") == 7
    with pytest.raises(UsageError):
        parse_field("F7")
    with pytest.raises(UsageError, match="not prime"):
        parse_field("Fp:4")


def test_parse_matrix_text():
    assert parse_matrix_text("2,1;1,1").entries == ((2, 1), (1, 1))
    with pytest.raises(UsageError):
        parse_matrix_text("2,1;1")


def test_parse_range():
    assert parse_range("2..5") == [2, 3, 4, 5]
    assert parse_range("2,7") == [2, 7]
    with pytest.raises(UsageError):
        parse_range("2..x")


def test_mahler(capsys):
    assert cli_main(["mahler", "--poly", "z - 2"]) == 0
    assert float(capsys.readouterr().out) == 2.0


def test_mahler_two_variables(capsys):
    assert cli_main(["mahler", "--poly", "z1 - 2", "--rank", "2", "--grid", "16"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(2.0)


def test_det_approx_csv(capsys):
    assert cli_main(["det-approx", "--poly", "z - 2", "--tower", "pow:2:3"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == (
        "experiment,index,quotient_size,normalized_logdet,exact_nullity,"
        "limit_reference,limit_provenance"
    )
    assert len(lines) == 5


def test_det_approx_to_file(tmp_path, capsys):
    out = tmp_path / "det.json"
    pdf = tmp_path / "det.pdf"
    code = cli_main(["det-approx", "--poly", "z - 2", "--tower", "list:3,5",
                     "--json", "--out", str(out), "--pdf", str(pdf)])
    assert code == 0
    assert capsys.readouterr().out == ""
    assert [row["quotient_size"] for row in json.loads(out.read_text())["rows"]] == [3, 5]
    assert pdf.read_bytes().startswith(b"%PDF")


def test_betti_approx_over_prime_field(capsys):
    assert cli_main(["betti-approx", "--poly", "z + 1", "--tower", "pow:2:2",
                     "--field", "Fp:2", "--json"]) == 0
    rows = json.loads(capsys.readouterr().out)["rows"]
    assert [row["kernel_dim_F2"] for row in rows] == [1.0, 0.5, 0.25]


def test_section9_json(capsys):
    assert cli_main(["section9", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["metadata"]["analysis"]["laplacian_dets"] == pytest.approx(
        [5, 8125, 21125, 13], rel=1e-9
    )
    assert [row["homology"] for row in data["rows"]] == ["0", "Z/5", "0", "0"]


def test_torsion_growth_remark(capsys):
    assert cli_main(["torsion-growth", "--remark", "2,1,3,2,5", "--tower", "list:1,2,3"]) == 0
    assert capsys.readouterr().out.startswith("experiment,index,quotient_size,rho_z")


def test_mapping_torus(capsys):
    assert cli_main(["mapping-torus", "--torus-matrix", "2,1;1,1", "--d-max", "5", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert len(data["rows"]) == 5
    assert data["limit_reference"]["provenance"] == "mahler"


def test_density_checks(capsys):
    assert cli_main(["density", "--n", "2..6"]) == 0
    assert cli_main(["density", "--check", "log-bound"]) == 0


def test_check_identities(capsys):
    assert cli_main(["check-identities", "--count", "5"]) == 0
    assert cli_main(["check-identities", "--family", "section9", "--count", "5"]) == 0


def test_simplicial_fundamental_cycle(tmp_path, capsys):
    path = tmp_path / "sphere.json"
    path.write_text(json.dumps(
        {"vertices": 4, "facets": [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]]}
    ))
    assert cli_main(["simplicial", "--input", str(path), "--fundamental-cycle", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert len(data["metadata"]["fundamental_cycle"]) == 4
    assert data["metadata"]["simplex_counts"] == [4, 6, 4]


@pytest.mark.parametrize("argv", [
    ["frobnicate"],
    [],
    ["det-approx", "--poly", "z - 2", "--tower", "pow:1:3"],
    ["det-approx", "--poly", "z +* 2"],
    ["det-approx"],
    ["betti-approx", "--poly", "z", "--field", "R"],
    ["betti-approx", "--poly", "z", "--field", "Fp:4"],
    ["mapping-torus", "--torus-matrix", "2,1;1,1", "--field", "Fp:1"],
    ["simplicial", "--input", "/nonexistent/complex.json"],
    ["torsion-growth", "--remark", "1,2,3"],
])
def test_usage_errors(argv, capsys):
    assert cli_main(argv) == 2


def test_computation_error_exit_code(capsys):
    assert cli_main(["mapping-torus", "--torus-matrix", "1,2", "--d-max", "2"]) == 3


def test_help_exits_cleanly(capsys):
    assert cli_main(["--help"]) == 0
