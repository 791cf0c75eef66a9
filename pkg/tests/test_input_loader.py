import json

import pytest

from core.groupring import GroupRingMatrix
from core.input_loader import (
    InputLoaderError,
    load_complex,
    load_group_ring_matrix,
    load_int_matrix,
    load_simplicial,
    parse_complex,
    parse_int_matrix,
)
from core.torsion_lab import GRChainComplex, IntChainComplex, integral_torsion


def _write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return path


def test_missing_file(tmp_path):
    with pytest.raises(InputLoaderError, match="not found"):
        load_int_matrix(tmp_path / "nope.json")


def test_invalid_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{rows: 1")
    with pytest.raises(InputLoaderError):
        load_int_matrix(path)


def test_int_matrix(tmp_path):
    path = _write(tmp_path, "m.json", {"rows": 2, "cols": 2, "entries": [[2, 1], ["1", 1]]})
    M = load_int_matrix(path)
    assert M.entries == ((2, 1), (1, 1))


@pytest.mark.parametrize("entries", [[[1.5, 0]], [[2.0, 1]]])
def test_int_matrix_rejects_floats(entries):
    with pytest.raises(InputLoaderError):
        parse_int_matrix({"rows": 1, "cols": 2, "entries": entries})


def test_int_matrix_needs_keys():
    with pytest.raises(InputLoaderError):
        parse_int_matrix({"rows": 1, "entries": [[1]]})


def test_group_ring_matrix(tmp_path):
    path = _write(tmp_path, "a.json",
                  {"ambient_rank": 2, "rows": 1, "cols": 2, "entries": [["z1 - 2", "z2^-1"]]})
    A = load_group_ring_matrix(path)
    assert A == GroupRingMatrix.from_strings(2, [["z1 - 2", "z2^-1"]])


def test_group_ring_matrix_with_bad_polynomial(tmp_path):
    path = _write(tmp_path, "a.json",
                  {"ambient_rank": 1, "rows": 1, "cols": 1, "entries": [["z +* 2"]]})
    with pytest.raises(InputLoaderError):
        load_group_ring_matrix(path)


def test_integer_complex(tmp_path):
    obj = {
        "ring": "Z",
        "ranks": [1, 1],
        "differentials": [{"rows": 1, "cols": 1, "entries": [[6]]}],
    }
    C = load_complex(_write(tmp_path, "c.json", obj))
    assert isinstance(C, IntChainComplex)
    assert integral_torsion(C).torsion_orders == (6, 1)


def test_laurent_complex():
    obj = {
        "ring": {"laurent_rank": 1},
        "ranks": [1, 1],
        "differentials": [{"rows": 1, "cols": 1, "entries": [["1 - 2*z"]]}],
    }
    C = parse_complex(obj)
    assert isinstance(C, GRChainComplex)
    assert C.ambient_rank == 1


def test_complex_with_unknown_ring():
    with pytest.raises(InputLoaderError, match="Unknown ring"):
        parse_complex({"ring": "Q", "ranks": [1], "differentials": []})


def test_complex_must_square_to_zero():
    obj = {
        "ring": "Z",
        "ranks": [1, 1, 1],
        "differentials": [
            {"rows": 1, "cols": 1, "entries": [[1]]},
            {"rows": 1, "cols": 1, "entries": [[1]]},
        ],
    }
    with pytest.raises(InputLoaderError, match="Invalid chain complex"):
        parse_complex(obj)


def test_simplicial(tmp_path):
    obj = {"vertices": 3, "facets": [[0, 1], [1, 2], [0, 2]]}
    S = load_simplicial(_write(tmp_path, "s.json", obj))
    assert S.simplex_counts() == (3, 3)


def test_simplicial_with_bad_vertex(tmp_path):
    obj = {"vertices": 2, "facets": [[0, 3]]}
    with pytest.raises(InputLoaderError):
        load_simplicial(_write(tmp_path, "s.json", obj))
