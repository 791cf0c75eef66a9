# core/torsion_lab.py

"""
Chain complexes over ℤ and ℤ[ℤⁿ]: L²-torsion, integral torsion, regulators,
combinatorial Laplacians, the golden example with H₁ = ℤ/g, simplicial
ingestion and mapping-torus complexes.

Sign conventions (applied literally everywhere):
    ρ^(2) = −Σ_{n≥1} (−1)ⁿ · ln det′(c_n)
    ρ^ℤ   =  Σ_{n≥0} (−1)ⁿ · ln |tors H_n|
With these, ρ^ℤ − ρ^(2) = Σ (−1)ⁿ · R_n.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import numpy as np
import sympy

from config.numerics import ILL_CONDITIONED_EIGENVALUE
from core.exactalg import (
    FGAbelianGroup,
    IntMatrix,
    block_diagonal,
    elementary_divisors,
    homology,
    kernel_basis_saturated,
    rank_over_field,
    rational_determinant,
    rational_gram_projection,
)
from core.groupring import (
    GroupRingMatrix,
    LaurentPoly,
    Quotient,
    regular_rep,
)
from core.spectral import (
    IllConditionedSpectrumError,
    hermitian_eigenvalues,
    int_spectrum,
    log_detprime,
    spectrum_of,
)


logger = logging.getLogger(__name__)


class ChainComplexError(Exception):
    pass


class OrientationError(ChainComplexError):
    """Simplicial complex is not a coherently oriented closed pseudo-manifold."""
    pass


# -------------------------------------------------
# Complexes
# -------------------------------------------------
@dataclass(frozen=True)
class IntChainComplex:
    """ranks[k] = rank of C_k; differentials[k-1] is c_k: C_k → C_{k−1}."""
    ranks: tuple[int, ...]
    differentials: tuple[IntMatrix, ...]

    def __post_init__(self):
        if self.ranks and len(self.differentials) != len(self.ranks) - 1:
            raise ChainComplexError(
                f"{len(self.ranks)} modules need {len(self.ranks) - 1} differentials, "
                f"got {len(self.differentials)}"
            )
        for k, c in enumerate(self.differentials, start=1):
            if (c.rows, c.cols) != (self.ranks[k - 1], self.ranks[k]):
                raise ChainComplexError(
                    f"c_{k} has shape {c.rows}x{c.cols}, expected "
                    f"{self.ranks[k - 1]}x{self.ranks[k]}"
                )
        for k in range(1, len(self.differentials)):
            if not (self.differentials[k - 1] @ self.differentials[k]).is_zero():
                raise ChainComplexError(f"c_{k} · c_{k + 1} ≠ 0")

    @classmethod
    def from_differentials(cls, differentials, top_rank: int | None = None):
        differentials = tuple(differentials)
        if not differentials:
            return cls((top_rank or 0,), ())
        ranks = tuple(c.rows for c in differentials) + (differentials[-1].cols,)
        return cls(ranks, differentials)

    @property
    def top_degree(self) -> int:
        return len(self.ranks) - 1

    def rank(self, k: int) -> int:
        return self.ranks[k] if 0 <= k < len(self.ranks) else 0

    def differential(self, k: int) -> IntMatrix:
        if 1 <= k <= len(self.differentials):
            return self.differentials[k - 1]
        return IntMatrix.zeros(self.rank(k - 1), self.rank(k))

    def degrees(self) -> range:
        return range(len(self.ranks))


@dataclass(frozen=True)
class GRChainComplex:
    ambient_rank: int
    ranks: tuple[int, ...]
    differentials: tuple[GroupRingMatrix, ...]

    def __post_init__(self):
        if len(self.differentials) != len(self.ranks) - 1:
            raise ChainComplexError("Ranks and differentials do not chain")
        for k, c in enumerate(self.differentials, start=1):
            if c.ambient_rank != self.ambient_rank:
                raise ChainComplexError(f"d_{k} lives over a different group ring")
            if (c.rows, c.cols) != (self.ranks[k - 1], self.ranks[k]):
                raise ChainComplexError(f"d_{k} has shape {c.rows}x{c.cols}")
        for k in range(1, len(self.differentials)):
            if not (self.differentials[k - 1] @ self.differentials[k]).is_zero():
                raise ChainComplexError(f"d_{k} · d_{k + 1} ≠ 0 over the group ring")

    @classmethod
    def from_differentials(cls, ambient_rank: int, differentials):
        differentials = tuple(differentials)
        ranks = tuple(c.rows for c in differentials) + (differentials[-1].cols,)
        return cls(ambient_rank, ranks, differentials)


def direct_sum(C: IntChainComplex, D: IntChainComplex) -> IntChainComplex:
    top = max(C.top_degree, D.top_degree)
    return IntChainComplex(
        tuple(C.rank(k) + D.rank(k) for k in range(top + 1)),
        tuple(
            block_diagonal([C.differential(k), D.differential(k)])
            for k in range(1, top + 1)
        ),
    )


# -------------------------------------------------
# Torsion invariants
# -------------------------------------------------
def _log_fraction(x: Fraction) -> float:
    return math.log(x.numerator) - math.log(x.denominator)


def rho2_finite(C: IntChainComplex) -> float:
    """ρ^(2) = −Σ_{n≥1} (−1)ⁿ · ln det′(c_n)."""
    return -math.fsum(
        (-1) ** k * log_detprime(int_spectrum(C.differential(k)))
        for k in range(1, C.top_degree + 1)
    )


@dataclass(frozen=True)
class IntegralTorsion:
    value: float
    torsion_orders: tuple[int, ...]


def torsion_orders(C: IntChainComplex) -> tuple[int, ...]:
    """|tors H_n| for n = 0..top, read off the SNF of c_{n+1}."""
    return tuple(
        math.prod(d for d in elementary_divisors(C.differential(n + 1)) if d > 1)
        for n in C.degrees()
    )


def integral_torsion(C: IntChainComplex) -> IntegralTorsion:
    """ρ^ℤ = Σ_{n≥0} (−1)ⁿ · ln |tors H_n|."""
    orders = torsion_orders(C)
    value = math.fsum((-1) ** n * math.log(t) for n, t in enumerate(orders))
    return IntegralTorsion(value, orders)


def regulator_gram_det(C: IntChainComplex, n: int) -> Fraction:
    """e^{2R_n}: Gram determinant of the harmonic parts of integral lifts of H_n(C)_f."""
    lifts = homology(C, n).free_lifts
    if not lifts:
        return Fraction(1)
    boundaries = C.differential(n + 1).columns()
    gram = rational_gram_projection(lifts, boundaries)
    det = rational_determinant(gram)
    if det <= 0:
        raise ChainComplexError(
            f"Singular harmonic Gram matrix in degree {n}; homology lifts are wrong"
        )
    return det


def regulator(C: IntChainComplex, n: int) -> float:
    return 0.5 * _log_fraction(regulator_gram_det(C, n))


def _laplacian(C: IntChainComplex, n: int) -> IntMatrix:
    down, up = C.differential(n), C.differential(n + 1)
    return down.transpose() @ down + up @ up.transpose()


def _laplacian_log_detprime(laplacian: IntMatrix) -> float:
    if laplacian.rows == 0:
        return 0.0
    eigenvalues = hermitian_eigenvalues(np.array(laplacian.entries, dtype=float))
    nullity = laplacian.rows - rank_over_field(laplacian, "Q")
    retained = eigenvalues[nullity:]
    if retained and retained[0] <= ILL_CONDITIONED_EIGENVALUE:
        raise IllConditionedSpectrumError("Laplacian eigenvalue is numerically zero")
    return math.fsum(math.log(v) for v in retained)


def laplacian_log_dets(C: IntChainComplex) -> list[float]:
    return [_laplacian_log_detprime(_laplacian(C, n)) for n in C.degrees()]


def laplacian_dets(C: IntChainComplex) -> list[float]:
    """det′ (product of nonzero eigenvalues) of Δ_n = c_nᵀc_n + c_{n+1}c_{n+1}ᵀ."""
    return [math.exp(v) for v in laplacian_log_dets(C)]


def laplacian_torsion(C: IntChainComplex) -> float:
    """−½ · Σ (−1)ⁱ · i · ln det′(Δ_i); agrees with rho2_finite."""
    return -0.5 * math.fsum(
        (-1) ** i * i * v for i, v in enumerate(laplacian_log_dets(C))
    )


@dataclass(frozen=True)
class TorsionReport:
    rho_l2: float
    rho_z: float
    regulators: tuple[float, ...]
    laplacian_dets: tuple[float, ...]
    torsion_orders: tuple[int, ...]
    homology: tuple[FGAbelianGroup, ...]
    laplacian_rho: float

    @property
    def regulator_sum(self) -> float:
        return math.fsum((-1) ** n * r for n, r in enumerate(self.regulators))

    @property
    def identity_defect(self) -> float:
        """ρ^ℤ − ρ^(2) − Σ(−1)ⁿRₙ; vanishes up to roundoff."""
        return self.rho_z - self.rho_l2 - self.regulator_sum

    def to_dict(self) -> dict:
        return {
            "rho_l2": self.rho_l2,
            "rho_z": self.rho_z,
            "regulators": list(self.regulators),
            "laplacian_dets": list(self.laplacian_dets),
            "laplacian_rho": self.laplacian_rho,
            "torsion_orders": [str(t) if t >= 2 ** 53 else t for t in self.torsion_orders],
            "homology": [str(h) for h in self.homology],
            "identity_defect": self.identity_defect,
        }


def analyze(C: IntChainComplex) -> TorsionReport:
    logger.info("Analyzing complex with ranks %s", C.ranks)
    integral = integral_torsion(C)
    return TorsionReport(
        rho_l2=rho2_finite(C),
        rho_z=integral.value,
        regulators=tuple(regulator(C, n) for n in C.degrees()),
        laplacian_dets=tuple(laplacian_dets(C)),
        torsion_orders=integral.torsion_orders,
        homology=tuple(homology(C, n).group for n in C.degrees()),
        laplacian_rho=laplacian_torsion(C),
    )


# -------------------------------------------------
# Named complexes
# -------------------------------------------------
def _check_coprime(x: int, y: int, names: str):
    if gcd(x, y) != 1:
        raise ChainComplexError(f"gcd({names}) = gcd({x}, {y}) must be 1")


def section9_matrices(a: int, b: int, k: int, l: int, g: int):
    _check_coprime(a, b, "a, b")
    _check_coprime(k, l, "k, l")
    if g < 1:
        raise ChainComplexError(f"g must be ≥ 1, got {g}")
    c1 = IntMatrix.from_rows([[-b, a]])
    c2 = IntMatrix.from_rows([[g * k * a, g * l * a], [g * k * b, g * l * b]])
    c3 = IntMatrix.from_rows([[-l], [k]])
    return c1, c2, c3


def section9_complex(a: int, b: int, k: int, l: int, g: int) -> IntChainComplex:
    """0 → ℤ → ℤ² → ℤ² → ℤ → 0 with H₁ = ℤ/g and all other homology zero."""
    return IntChainComplex((1, 2, 2, 1), section9_matrices(a, b, k, l, g))


def remark_complex(a: int, b: int, k: int, l: int, g: int) -> GRChainComplex:
    """ℤ[ℤ] ⊗ (0 → ℤ² → ℤ² → 0) with differential the middle golden matrix.

    Not L²-acyclic: ρ^ℤ/n stays ln g on every cyclic quotient while ρ^(2)/n
    carries the extra (ln(a²+b²) + ln(k²+l²))/2.
    """
    _, c2, _ = section9_matrices(a, b, k, l, g)
    return GRChainComplex(1, (2, 2), (GroupRingMatrix.from_int_matrix(c2, 1),))


def mapping_torus_complex(M: IntMatrix) -> GRChainComplex:
    """Two-term complex over ℤ[ℤ] with d₁ = I − z·M."""
    if M.rows != M.cols:
        raise ChainComplexError(f"Mapping torus needs a square matrix, got {M.rows}x{M.cols}")
    r = M.rows
    entries = [
        [
            LaurentPoly.from_dict(1, {(0,): int(i == j), (1,): -M.entries[i][j]})
            for j in range(r)
        ]
        for i in range(r)
    ]
    d1 = GroupRingMatrix.from_rows(1, entries, r)
    return GRChainComplex(1, (r, r), (d1,))


def mapping_torus_polynomial(M: IntMatrix) -> LaurentPoly:
    """det(I − zM) ∈ ℤ[z], read off the characteristic polynomial of M."""
    if M.rows == 0:
        return LaurentPoly.constant(1)
    coeffs = sympy.Matrix(M.entries).charpoly().all_coeffs()
    return LaurentPoly.from_dict(1, {(i,): int(c) for i, c in enumerate(coeffs)})


def mapping_torus_eigenvalue_oracle(M: IntMatrix, d: int) -> float:
    """(1/d) · Σ ln|1 − λᵢᵈ| over the eigenvalues of M."""
    eigenvalues = np.linalg.eigvals(np.array(M.entries, dtype=float).reshape(M.rows, M.cols))
    return math.fsum(math.log(abs(1 - lam ** d)) for lam in eigenvalues) / d


def wang_betti(M: IntMatrix, d: int, field="Q", degree: int = 1) -> int:
    """Betti number of the mapping torus of f^d with H₁(f) = M, over ℚ or F_p."""
    if degree not in range(4):
        raise ChainComplexError(f"Degree {degree} outside 0..3")
    if d < 1:
        raise ChainComplexError(f"Power d must be ≥ 1, got {d}")
    if degree in (0, 3):
        return 1
    difference = IntMatrix.identity(M.rows) - M.power(d)
    return M.rows - rank_over_field(difference, field) + 1


# -------------------------------------------------
# Push-down of group ring complexes
# -------------------------------------------------
def push_complex(C: GRChainComplex, Q: Quotient) -> IntChainComplex:
    """C ⊗_{ℤ[ℤⁿ]} ℤ[Q] as an integer complex of regular representations."""
    pushed = []
    for k, d in enumerate(C.differentials, start=1):
        rep = regular_rep(d, Q)
        if rep.denominator != 1:
            raise ChainComplexError(f"d_{k} has non-integral coefficients")
        pushed.append(rep.matrix)
    return IntChainComplex(tuple(r * Q.size for r in C.ranks), tuple(pushed))


def rho2_pushed(C: GRChainComplex, Q: Quotient) -> float:
    """ρ^(2) of the pushed complex, computed character by character."""
    return -math.fsum(
        (-1) ** k * log_detprime(spectrum_of(d, Q))
        for k, d in enumerate(C.differentials, start=1)
    )


# -------------------------------------------------
# Simplicial complexes
# -------------------------------------------------
@dataclass(frozen=True)
class SimplicialComplex:
    vertices: int
    facets: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(set(self.facets)) != len(self.facets):
            raise ChainComplexError("Facets must be distinct")
        for facet in self.facets:
            if not facet:
                raise ChainComplexError("Empty facet")
            if list(facet) != sorted(set(facet)):
                raise ChainComplexError(f"Facet {facet} is not a sorted vertex tuple")
            if facet[0] < 0 or facet[-1] >= self.vertices:
                raise ChainComplexError(f"Facet {facet} uses unknown vertices")

    @classmethod
    def from_facets(cls, vertices: int, facets):
        return cls(vertices, tuple(tuple(sorted(f)) for f in facets))

    @property
    def dimension(self) -> int:
        return max((len(f) - 1 for f in self.facets), default=-1)

    def simplices(self) -> list[list[tuple[int, ...]]]:
        """Sorted simplices per degree; every vertex counts, even isolated ones."""
        faces: list[set] = [set() for _ in range(max(self.dimension, 0) + 1)]
        faces[0] = {(v,) for v in range(self.vertices)}
        for facet in self.facets:
            for size in range(2, len(facet) + 1):
                faces[size - 1].update(itertools.combinations(facet, size))
        return [sorted(level) for level in faces]

    def simplex_counts(self) -> tuple[int, ...]:
        return tuple(len(level) for level in self.simplices())


def _boundary(lower: list[tuple[int, ...]], upper: list[tuple[int, ...]]) -> IntMatrix:
    index = {s: i for i, s in enumerate(lower)}
    out = [[0] * len(upper) for _ in range(len(lower))]
    for j, simplex in enumerate(upper):
        for i in range(len(simplex)):
            face = simplex[:i] + simplex[i + 1:]
            out[index[face]][j] += (-1) ** i
    return IntMatrix.from_rows(out, cols=len(upper))


def from_simplicial(S: SimplicialComplex) -> IntChainComplex:
    """Simplicial chain complex with ∂[v₀…v_k] = Σ (−1)ⁱ [v₀…v̂ᵢ…v_k]."""
    levels = S.simplices()
    differentials = tuple(
        _boundary(levels[k - 1], levels[k]) for k in range(1, len(levels))
    )
    logger.debug("Simplicial complex with simplex counts %s", S.simplex_counts())
    return IntChainComplex(tuple(len(level) for level in levels), differentials)


def fundamental_cycle(S: SimplicialComplex) -> tuple[int, ...]:
    """±1 coefficients on the top simplices of a closed oriented pseudo-manifold."""
    d = S.dimension
    if d < 1 or any(len(f) - 1 != d for f in S.facets):
        raise OrientationError("Complex is not pure of positive dimension")
    C = from_simplicial(S)
    top = C.differential(d)
    if any(sum(abs(x) for x in row) not in (0, 2) for row in top.entries):
        raise OrientationError("Some codimension-one face does not bound exactly two facets")
    kernel = kernel_basis_saturated(top)
    if kernel.cols != 1:
        raise OrientationError(f"Top homology has rank {kernel.cols}, expected 1")
    cycle = kernel.column(0)
    if any(abs(x) != 1 for x in cycle):
        raise OrientationError("Facets cannot be oriented coherently")
    return cycle

