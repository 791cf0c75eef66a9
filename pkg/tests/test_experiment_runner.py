import json
import math

import numpy as np
import pytest

from config.numerics import LEHMER_COEFFICIENTS, LEHMER_MAHLER_MEASURE
from core.exactalg import IntMatrix
from core.experiment_runner import (
    ExperimentError,
    ExperimentReport,
    analysis_report,
    density_report,
    determinant_reference,
    log_bound_report,
    run_betti_approx,
    run_det_approx,
    run_identity_checks,
    run_mapping_torus,
    run_section9_checks,
    run_torsion_growth,
    run_trace_approx,
)
from core.groupring import (
    GroupRingMatrix,
    LaurentPoly,
    Quotient,
    involute,
    matmul,
    push,
    trace_pushed,
    trace_vn,
)
from core.torsion_lab import (
    GRChainComplex,
    mapping_torus_complex,
    remark_complex,
    section9_complex,
)
from core.towers import parse_tower


LN5, LN13 = math.log(5.0), math.log(13.0)
GOLDEN_RATIO_SQUARED = (3 + math.sqrt(5)) / 2


def _one_by_one(text):
    return GroupRingMatrix.from_strings(1, [[text]])


def _list_tower(ns):
    return parse_tower("list:" + ",".join(str(n) for n in ns))


def _lehmer():
    degree = len(LEHMER_COEFFICIENTS) - 1
    p = LaurentPoly.from_dict(1, {(degree - i,): c for i, c in enumerate(LEHMER_COEFFICIENTS)})
    return GroupRingMatrix.from_rows(1, [[p]])


# ---------------- Reports ----------------
def test_report_rows_are_sorted_and_serialized():
    report = ExperimentReport("demo", ["x"], [(2, 4, {"x": 0.5}), (0, 1, {"x": 1 / 3})],
                              limit_reference=0.25, limit_provenance="mahler")
    assert [index for index, _, _ in report.rows] == [0, 2]
    lines = report.to_csv().splitlines()
    assert lines[0] == "experiment,index,quotient_size,x,limit_reference,limit_provenance"
    assert lines[1] == "demo,0,1,0.333333333333,0.25,mahler"
    data = json.loads(report.to_json())
    assert data["limit_reference"] == {"value": 0.25, "provenance": "mahler"}
    assert data["rows"][1] == {"index": 2, "quotient_size": 4, "x": 0.5}


# ---------------- Determinant approximation ----------------
def test_det_approx_z_minus_two():
    report = run_det_approx(_one_by_one("z - 2"), _list_tower(range(1, 31)))
    values = report.column("normalized_logdet")
    for n, value in zip(range(1, 31), values):
        assert value == pytest.approx(math.log(2 ** n - 1) / n, abs=1e-12)
    assert values[-1] == pytest.approx(math.log(2.0), abs=1e-6)
    assert report.limit_provenance == "mahler"
    assert report.limit_reference == pytest.approx(math.log(2.0), abs=1e-10)
    assert report.column("exact_nullity") == [0] * 30


def test_det_approx_lehmer():
    report = run_det_approx(_lehmer(), parse_tower("list:100,200,400,512"))
    assert report.limit_provenance == "paper:lehmer"
    assert report.column("normalized_logdet")[-1] == pytest.approx(
        math.log(LEHMER_MAHLER_MEASURE), abs=1e-2
    )


def test_det_approx_identity_is_zero():
    report = run_det_approx(_one_by_one("1"), parse_tower("pow:2:5"))
    assert report.column("normalized_logdet") == [0.0] * 6


@pytest.mark.parametrize("text", ["z - 2", "2*z - 3", "z^2 - z - 1", "3 - z^-1"])
def test_det_approx_stays_below_limit_envelope(text):
    A = _one_by_one(text)
    report = run_det_approx(A, parse_tower("pow:2:8"))
    l1 = float(A.entries[0][0].l1_norm())
    for (_, n, values) in report.rows:
        bound = report.limit_reference + 1e-6 + 3 * math.log(l1 + 1) / n
        assert values["normalized_logdet"] <= bound


def test_det_approx_serial_and_parallel_agree():
    A = _one_by_one("z^2 - 3*z + 1")
    tower = parse_tower("pow:2:7")
    assert run_det_approx(A, tower, jobs=1).to_csv() == run_det_approx(A, tower, jobs=4).to_csv()


def test_det_approx_respects_size_cap():
    report = run_det_approx(_one_by_one("z - 2"), parse_tower("pow:2:10"), max_size=64)
    assert [size for _, size, _ in report.rows] == [1, 2, 4, 8, 16, 32, 64]


def test_determinant_reference_in_two_variables():
    A = GroupRingMatrix.from_strings(2, [["z1 - 2"]])
    reference, provenance = determinant_reference(A)
    assert provenance == "torus-quadrature"
    assert reference == pytest.approx(math.log(2.0), abs=1e-10)


def test_determinant_reference_of_singular_matrix():
    assert determinant_reference(_one_by_one("0")) == (None, "none")


# ---------------- Betti approximation ----------------
def test_betti_approx_z_minus_one():
    report = run_betti_approx(_one_by_one("z - 1"), parse_tower("pow:2:6"))
    assert report.column("kernel_dim") == [1 / 2 ** i for i in range(7)]
    assert report.column("kernel_dim_exact")[3] == "1/8"


@pytest.mark.parametrize("text,expected", [("z - 2", 0.0), ("0", 1.0)])
def test_betti_approx_constant_columns(text, expected):
    report = run_betti_approx(_one_by_one(text), parse_tower("pow:2:4"))
    assert report.column("kernel_dim") == [expected] * 5


def test_betti_approx_over_prime_field():
    report = run_betti_approx(_one_by_one("z + 1"), parse_tower("pow:2:3"), field=2)
    assert "kernel_dim_F2" in report.columns
    # over F_2, 1 + z = 1 − z has the constants as kernel
    assert report.column("kernel_dim_F2") == [1.0, 1 / 2, 1 / 4, 1 / 8]
    # over Q, z = −1 only on even quotients
    assert report.column("kernel_dim") == [0.0, 1 / 2, 1 / 4, 1 / 8]


# ---------------- Torsion growth ----------------
def test_torsion_growth_of_mapping_torus():
    C = mapping_torus_complex(IntMatrix.from_rows([[2]]))
    report = run_torsion_growth(C, _list_tower(range(1, 13)))
    for n, rho_z, diff in zip(range(1, 13), report.column("rho_z"), report.column("difference")):
        assert rho_z == pytest.approx(math.log(2 ** n - 1) / n, abs=1e-12)
        assert diff == pytest.approx(0.0, abs=1e-9)
    assert report.limit_reference == pytest.approx(math.log(2.0))


def test_torsion_growth_failure_case():
    report = run_torsion_growth(remark_complex(2, 1, 3, 2, 5), _list_tower(range(1, 21)))
    assert report.column("rho_z") == pytest.approx([LN5] * 20, abs=1e-12)
    assert report.column("rho_l2") == pytest.approx([LN5 + (LN5 + LN13) / 2] * 20, abs=1e-9)


def test_torsion_growth_of_golden_torus_matrix():
    C = mapping_torus_complex(IntMatrix.from_rows([[2, 1], [1, 1]]))
    report = run_torsion_growth(C, parse_tower("list:10,20,40"))
    assert report.column("difference") == pytest.approx([0.0] * 3, abs=1e-9)
    assert report.column("rho_l2")[-1] == pytest.approx(math.log(GOLDEN_RATIO_SQUARED), abs=1e-3)


def test_torsion_growth_rejects_higher_rank():
    C = GRChainComplex.from_differentials(2, [GroupRingMatrix.from_strings(2, [["z1 - 1"]])])
    with pytest.raises(ExperimentError):
        run_torsion_growth(C, parse_tower("pow:2:2"))


# ---------------- Trace approximation ----------------
def test_trace_approx_z_minus_two():
    report = run_trace_approx(_one_by_one("z - 2"), parse_tower("pow:2:4"), 1)
    assert report.column("trace_vn_0") == [1.0] * 5
    assert report.column("trace_pushed_0") == [1.0] * 5
    assert report.column("trace_vn_1") == [5.0] * 5
    assert report.column("trace_pushed_1") == [1.0, 5.0, 5.0, 5.0, 5.0]


def _random_group_ring_matrix(rng, size):
    rows = []
    for _ in range(size):
        row = []
        for _ in range(size):
            exponents = rng.integers(-2, 3, size=3)
            coeffs = rng.integers(-3, 4, size=3)
            terms = {}
            for e, c in zip(exponents.tolist(), coeffs.tolist()):
                terms[(e,)] = terms.get((e,), 0) + c
            row.append(LaurentPoly.from_dict(1, terms))
        rows.append(row)
    return GroupRingMatrix.from_rows(1, rows, size)


@pytest.mark.parametrize("seed", range(20))
def test_pushed_trace_stabilizes(seed):
    rng = np.random.default_rng(seed)
    A = _random_group_ring_matrix(rng, 1 if seed % 2 else 2)
    B = matmul(involute(A), A)
    radius = B.max_support_radius()
    power = B
    for j in range(1, 4):
        threshold = 2 * radius * j
        for m in range(threshold + 1, threshold + 4):
            assert trace_pushed(push(power, Quotient((m,)))) == trace_vn(power)
        power = matmul(power, B)


def test_trace_approx_rejects_negative_degree():
    with pytest.raises(ExperimentError):
        run_trace_approx(_one_by_one("z"), parse_tower("pow:2:2"), -1)


# ---------------- Mapping tori ----------------
def test_mapping_torus_report():
    report = run_mapping_torus(IntMatrix.from_rows([[2, 1], [1, 1]]), 40)
    logs = report.column("log_torsion")
    oracle = report.column("eigenvalue_oracle")
    assert logs == pytest.approx(oracle, abs=1e-9)
    assert logs[-1] == pytest.approx(math.log(GOLDEN_RATIO_SQUARED), abs=1e-3)
    assert report.column("b1")[-1] == pytest.approx(1 / 40)
    assert report.column("b0") == pytest.approx([1 / d for d in range(1, 41)])
    assert report.limit_reference == pytest.approx(math.log(GOLDEN_RATIO_SQUARED), abs=1e-10)


def test_mapping_torus_of_identity():
    report = run_mapping_torus(IntMatrix.identity(2), 5)
    assert report.column("log_torsion") == [0.0] * 5
    assert report.column("eigenvalue_oracle") == [None] * 5
    assert report.column("b1")[0] == 3.0


def test_mapping_torus_needs_square_matrix():
    with pytest.raises(ExperimentError):
        run_mapping_torus(IntMatrix.from_rows([[1, 2]]), 3)


# ---------------- Analyses and checks ----------------
def test_golden_analysis_report():
    report = analysis_report("section9", section9_complex(2, 1, 3, 2, 5))
    assert report.column("homology") == ["0", "Z/5", "0", "0"]
    assert report.column("laplacian_det") == pytest.approx([5, 8125, 21125, 13], rel=1e-9)
    assert report.metadata["analysis"]["rho_l2"] == pytest.approx(-LN5, abs=1e-9)


def test_identity_checks_pass():
    report = run_identity_checks(100, seed=0)
    assert len(report.rows) == 100
    assert report.metadata["passed"], report.metadata["worst_defect"]


def test_section9_checks_pass():
    report = run_section9_checks(30, seed=3)
    assert report.metadata["passed"], report.metadata["worst_error"]


def test_density_report():
    report = density_report(range(2, 11))
    assert report.metadata["passed"]
    assert [index for index, _, _ in report.rows] == list(range(2, 11))
    assert all(isinstance(v, bool) for v in report.column("passed"))


def test_log_bound_report():
    grid = [(1.0, 1.0, math.exp(-2.0)), (2.0, 0.5, math.exp(-4.0))]
    report = log_bound_report(grid)
    assert report.metadata["passed"]
    assert report.column("closed_form")[0] == pytest.approx(0.5)
