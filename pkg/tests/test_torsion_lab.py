import math
from fractions import Fraction

import pytest

from core.exactalg import IntMatrix
from core.groupring import Quotient
from core.torsion_lab import (
    ChainComplexError,
    IntChainComplex,
    OrientationError,
    SimplicialComplex,
    analyze,
    direct_sum,
    from_simplicial,
    fundamental_cycle,
    integral_torsion,
    laplacian_dets,
    laplacian_torsion,
    mapping_torus_complex,
    mapping_torus_eigenvalue_oracle,
    mapping_torus_polynomial,
    push_complex,
    regulator,
    regulator_gram_det,
    remark_complex,
    rho2_finite,
    rho2_pushed,
    section9_complex,
    wang_betti,
)
from core.exactalg import elementary_divisors
from core.spectral import int_spectrum, log_detprime
from utils.random_complexes import random_complexes


LN5, LN13 = math.log(5.0), math.log(13.0)


@pytest.fixture
def golden():
    return section9_complex(2, 1, 3, 2, 5)


@pytest.fixture
def circle():
    return from_simplicial(SimplicialComplex.from_facets(3, [[0, 1], [1, 2], [0, 2]]))


@pytest.fixture
def tetrahedron_boundary():
    return SimplicialComplex.from_facets(4, [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]])


# ---------------- Golden example ----------------
def test_golden_homology(golden):
    report = analyze(golden)
    assert [str(h) for h in report.homology] == ["0", "Z/5", "0", "0"]
    assert report.torsion_orders == (1, 5, 1, 1)


def test_golden_detprime(golden):
    expected = [LN5 / 2, LN5 + (LN5 + LN13) / 2, LN13 / 2]
    observed = [log_detprime(int_spectrum(golden.differential(n))) for n in (1, 2, 3)]
    assert observed == pytest.approx(expected, abs=1e-9)


def test_golden_laplacians(golden):
    assert laplacian_dets(golden) == pytest.approx([5, 8125, 21125, 13], rel=1e-9)


def test_golden_torsions(golden):
    assert rho2_finite(golden) == pytest.approx(-LN5, abs=1e-9)
    assert integral_torsion(golden).value == pytest.approx(-LN5, abs=1e-9)
    assert laplacian_torsion(golden) == pytest.approx(-LN5, abs=1e-9)
    assert analyze(golden).identity_defect == pytest.approx(0.0, abs=1e-9)


def test_golden_rejects_bad_parameters():
    with pytest.raises(ChainComplexError):
        section9_complex(2, 4, 3, 2, 5)
    with pytest.raises(ChainComplexError):
        section9_complex(2, 1, 3, 2, 0)


# ---------------- Regulators ----------------
def test_circle_regulators_are_exact(circle):
    assert regulator_gram_det(circle, 1) == 3
    assert regulator_gram_det(circle, 0) == Fraction(1, 3)
    assert regulator(circle, 1) == pytest.approx(math.log(3) / 2)
    assert regulator(circle, 0) == pytest.approx(-math.log(3) / 2)


def test_circle_torsions(circle):
    report = analyze(circle)
    assert report.rho_l2 == pytest.approx(math.log(3))
    assert report.rho_z == 0.0
    assert report.identity_defect == pytest.approx(0.0, abs=1e-12)


def test_identity_quick_check_on_random_complexes():
    # the full 100-complex sweep runs through run_identity_checks
    for C in random_complexes(25, seed=7):
        report = analyze(C)
        assert report.identity_defect == pytest.approx(0.0, abs=1e-8)
        assert report.laplacian_rho == pytest.approx(report.rho_l2, abs=1e-8)


# ---------------- Complexes ----------------
def test_boundary_of_boundary_must_vanish():
    c1 = IntMatrix.from_rows([[1, 0]])
    c2 = IntMatrix.from_rows([[1], [0]])
    with pytest.raises(ChainComplexError):
        IntChainComplex((1, 2, 1), (c1, c2))


def test_shapes_must_chain():
    with pytest.raises(ChainComplexError):
        IntChainComplex((1, 2), (IntMatrix.from_rows([[1, 1, 1]]),))


def test_direct_sum_adds_torsion(golden, circle):
    total = direct_sum(golden, circle)
    assert total.ranks == (4, 5, 2, 1)
    assert integral_torsion(total).value == pytest.approx(-LN5)
    assert rho2_finite(total) == pytest.approx(rho2_finite(golden) + rho2_finite(circle))


# ---------------- Simplicial complexes ----------------
def test_simplex_counts(tetrahedron_boundary):
    assert tetrahedron_boundary.simplex_counts() == (4, 6, 4)
    C = from_simplicial(tetrahedron_boundary)
    assert [str(h) for h in analyze(C).homology] == ["Z", "0", "Z"]


def test_isolated_vertices_count():
    S = SimplicialComplex.from_facets(3, [[0, 1]])
    assert S.simplex_counts() == (3, 1)


def test_fundamental_cycle(tetrahedron_boundary):
    cycle = fundamental_cycle(tetrahedron_boundary)
    assert len(cycle) == 4
    assert all(abs(x) == 1 for x in cycle)
    top = from_simplicial(tetrahedron_boundary).differential(2)
    assert (top @ IntMatrix.from_columns([cycle], rows=top.cols)).is_zero()


def test_fundamental_cycle_needs_closed_manifold():
    with pytest.raises(OrientationError):
        fundamental_cycle(SimplicialComplex.from_facets(3, [[0, 1, 2]]))


def test_simplicial_validation():
    with pytest.raises(ChainComplexError):
        SimplicialComplex.from_facets(2, [[0, 5]])
    with pytest.raises(ChainComplexError):
        SimplicialComplex.from_facets(3, [[0, 1], [1, 0]])


# ---------------- Mapping tori ----------------
def test_mapping_torus_polynomial():
    p = mapping_torus_polynomial(IntMatrix.from_rows([[2, 1], [1, 1]]))
    assert p.univariate_coefficients() == (0, [1, -3, 1])


@pytest.mark.parametrize("d", range(1, 11))
def test_eigenvalue_oracle_matches_snf(d):
    M = IntMatrix.from_rows([[2, 1], [1, 1]])
    divisors = elementary_divisors(IntMatrix.identity(2) - M.power(d))
    assert mapping_torus_eigenvalue_oracle(M, d) == pytest.approx(
        math.log(math.prod(divisors)) / d, abs=1e-9
    )


def test_wang_betti():
    identity = IntMatrix.identity(2)
    assert wang_betti(identity, 1, "Q", 1) == 3
    assert wang_betti(identity, 5, "Q", 2) == 3
    M = IntMatrix.from_rows([[2, 1], [1, 1]])
    for d in range(1, 6):
        assert wang_betti(M, d, "Q", 0) == wang_betti(M, d, "Q", 3) == 1
        assert wang_betti(M, d, "Q", 1) == 1
    with pytest.raises(ChainComplexError):
        wang_betti(M, 1, "Q", 4)


def test_wang_betti_over_prime_field():
    # I − M = [[−1,−1],[−1,0]] is invertible over every field
    M = IntMatrix.from_rows([[2, 1], [1, 1]])
    assert wang_betti(M, 1, 2, 1) == 1
    # I − 3I = −2I vanishes mod 2
    assert wang_betti(IntMatrix.from_rows([[3, 0], [0, 3]]), 1, 2, 1) == 3


# ---------------- Push-down ----------------
@pytest.mark.parametrize("n", [1, 2, 5, 9])
def test_pushed_mapping_torus(n):
    C = mapping_torus_complex(IntMatrix.from_rows([[2]]))
    pushed = push_complex(C, Quotient((n,)))
    assert pushed.ranks == (n, n)
    assert integral_torsion(pushed).value == pytest.approx(math.log(2 ** n - 1))
    assert rho2_pushed(C, Quotient((n,))) == pytest.approx(math.log(2 ** n - 1), abs=1e-9)
    assert rho2_finite(pushed) == pytest.approx(math.log(2 ** n - 1), abs=1e-9)


@pytest.mark.parametrize("n", [1, 4, 20])
def test_remark_complex_is_not_l2_acyclic(n):
    C = remark_complex(2, 1, 3, 2, 5)
    Q = Quotient((n,))
    assert integral_torsion(push_complex(C, Q)).value / n == pytest.approx(LN5, abs=1e-12)
    assert rho2_pushed(C, Q) / n == pytest.approx(LN5 + (LN5 + LN13) / 2, abs=1e-9)
