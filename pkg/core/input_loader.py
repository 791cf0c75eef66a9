# core/input_loader.py

import json
from pathlib import Path

from core.exactalg import ExactAlgebraError, IntMatrix
from core.groupring import GroupRingError, GroupRingMatrix
from core.torsion_lab import (
    ChainComplexError,
    GRChainComplex,
    IntChainComplex,
    SimplicialComplex,
)


class InputLoaderError(Exception):
    pass


def _read_json(path):
    path = Path(path)
    if not path.exists():
        raise InputLoaderError(f"Input file not found: {path}")
    try:
        return json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise InputLoaderError(f"Failed to read {path}: {e}")


def _require(obj, required: set, what: str):
    if not isinstance(obj, dict) or not required.issubset(obj):
        raise InputLoaderError(f"{what} must be a JSON object with keys: {sorted(required)}")


def parse_int_matrix(obj) -> IntMatrix:
    _require(obj, {"rows", "cols", "entries"}, "Integer matrix")
    try:
        return IntMatrix.from_json(obj)
    except ExactAlgebraError as e:
        raise InputLoaderError(str(e))


def parse_group_ring_matrix(obj) -> GroupRingMatrix:
    _require(obj, {"ambient_rank", "rows", "cols", "entries"}, "Group ring matrix")
    try:
        return GroupRingMatrix.from_json(obj)
    except GroupRingError as e:
        raise InputLoaderError(str(e))


def parse_complex(obj) -> IntChainComplex | GRChainComplex:
    """
    Complex JSON: {"ring": "Z" | {"laurent_rank": n}, "ranks": [...],
    "differentials": [matrix_1, ...]} with differentials[k-1] mapping degree k
    to degree k-1. Group ring differentials use the group ring matrix format
    (ambient_rank may be omitted).
    """
    _require(obj, {"ring", "ranks", "differentials"}, "Chain complex")
    ring = obj["ring"]
    try:
        ranks = tuple(int(r) for r in obj["ranks"])
    except (TypeError, ValueError) as e:
        raise InputLoaderError(f"Ranks must be integers: {e}")

    try:
        if ring == "Z":
            differentials = tuple(parse_int_matrix(m) for m in obj["differentials"])
            return IntChainComplex(ranks, differentials)
        if isinstance(ring, dict) and "laurent_rank" in ring:
            n = int(ring["laurent_rank"])
            differentials = tuple(
                parse_group_ring_matrix({"ambient_rank": n, **m})
                for m in obj["differentials"]
            )
            return GRChainComplex(n, ranks, differentials)
    except ChainComplexError as e:
        raise InputLoaderError(f"Invalid chain complex: {e}")
    raise InputLoaderError(f"Unknown ring {ring!r}; use \"Z\" or {{\"laurent_rank\": n}}")


def parse_simplicial(obj) -> SimplicialComplex:
    _require(obj, {"vertices", "facets"}, "Simplicial complex")
    try:
        return SimplicialComplex.from_facets(
            int(obj["vertices"]), [[int(v) for v in f] for f in obj["facets"]]
        )
    except (TypeError, ValueError, ChainComplexError) as e:
        raise InputLoaderError(f"Invalid simplicial complex: {e}")


def load_int_matrix(path) -> IntMatrix:
    return parse_int_matrix(_read_json(path))


def load_group_ring_matrix(path) -> GroupRingMatrix:
    return parse_group_ring_matrix(_read_json(path))


def load_complex(path) -> IntChainComplex | GRChainComplex:
    return parse_complex(_read_json(path))


def load_simplicial(path) -> SimplicialComplex:
    return parse_simplicial(_read_json(path))
