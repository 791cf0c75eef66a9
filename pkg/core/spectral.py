# core/spectral.py

"""
Spectra of pushed operators A[i]*A[i], the modified determinant det′,
normalized log-determinants, spectral density functions, von Neumann kernel
dimensions and Mahler measures.

Eigenvalues are floating point; everything that decides *which* eigenvalues
vanish (exact nullities) is exact.
"""

from __future__ import annotations

import logging
import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from config.numerics import (
    HERMITIAN_RELATIVE_TOLERANCE,
    ILL_CONDITIONED_EIGENVALUE,
    NEWTON_MAX_STEPS,
    NEWTON_RELATIVE_RESIDUAL,
    TORUS_MAX_SKIPPED_FRACTION,
    TORUS_SKIP_THRESHOLD,
)
from core.exactalg import IntMatrix, rank_over_field
from core.groupring import (
    GroupRingMatrix,
    LaurentPoly,
    Quotient,
    push,
    rational_nullity,
    regular_rank,
)


logger = logging.getLogger(__name__)


class SpectralError(Exception):
    pass


class IllConditionedSpectrumError(SpectralError):
    """A retained eigenvalue is numerically zero although the exact nullity says otherwise."""
    pass


# -------------------------------------------------
# Types
# -------------------------------------------------
@dataclass(frozen=True)
class Spectrum:
    eigenvalues: tuple[float, ...]
    normalization: int
    exact_nullity: int
    cols: int

    def __post_init__(self):
        if len(self.eigenvalues) != self.cols * self.normalization:
            raise SpectralError(
                f"Expected {self.cols * self.normalization} eigenvalues, "
                f"got {len(self.eigenvalues)}"
            )
        if not 0 <= self.exact_nullity <= len(self.eigenvalues):
            raise SpectralError(f"Exact nullity {self.exact_nullity} out of range")
        if any(a > b for a, b in zip(self.eigenvalues, self.eigenvalues[1:])):
            raise SpectralError("Eigenvalues must be sorted ascending")

    @property
    def count(self) -> int:
        return len(self.eigenvalues)

    @property
    def retained(self) -> tuple[float, ...]:
        return self.eigenvalues[self.exact_nullity:]

    @property
    def spectral_radius(self) -> float:
        return self.eigenvalues[-1] if self.eigenvalues else 0.0


@dataclass(frozen=True)
class SpectralDensity:
    underlying: Spectrum


def _assemble(eigenvalues, normalization: int, nullity: int, cols: int) -> Spectrum:
    values = np.sort(np.clip(np.asarray(eigenvalues, dtype=float).ravel(), 0.0, None))
    values[:nullity] = 0.0
    return Spectrum(tuple(float(v) for v in values), normalization, nullity, cols)


# -------------------------------------------------
# Eigenvalues
# -------------------------------------------------
def hermitian_eigenvalues(M) -> tuple[float, ...]:
    """All eigenvalues of a Hermitian matrix, ascending, with multiplicity."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise SpectralError(f"Expected a square matrix, got shape {M.shape}")
    if M.size == 0:
        return ()
    scale = np.linalg.norm(M)
    if np.linalg.norm(M - M.conj().T) > HERMITIAN_RELATIVE_TOLERANCE * max(scale, 1.0):
        raise SpectralError("Matrix is not Hermitian")
    return tuple(float(v) for v in np.linalg.eigvalsh(M))


def block_gram_eigenvalues(blocks: np.ndarray) -> np.ndarray:
    """Eigenvalues of A_χ*A_χ for a stack of blocks, shape (count, cols)."""
    if blocks.shape[2] == 0:
        return np.zeros((blocks.shape[0], 0))
    gram = np.conj(np.swapaxes(blocks, 1, 2)) @ blocks
    return np.linalg.eigvalsh(gram)


def spectrum_of(A: GroupRingMatrix, Q: Quotient) -> Spectrum:
    pushed = push(A, Q)
    eigenvalues = block_gram_eigenvalues(pushed.character_blocks)
    nullity = rational_nullity(A, Q)
    logger.debug("Spectrum over %s: %d eigenvalues, exact nullity %d",
                 Q, eigenvalues.size, nullity)
    return _assemble(eigenvalues, Q.size, nullity, A.cols)


def int_spectrum(M: IntMatrix) -> Spectrum:
    """Spectrum of MᵀM for an integer matrix (normalization 1)."""
    if M.cols == 0:
        return Spectrum((), 1, 0, 0)
    dense = np.array(M.entries, dtype=float).reshape(M.rows, M.cols)
    singular = np.linalg.svd(dense, compute_uv=False) if M.rows else np.zeros(0)
    eigenvalues = np.zeros(M.cols)
    eigenvalues[:singular.size] = singular ** 2
    nullity = M.cols - rank_over_field(M, "Q")
    return _assemble(eigenvalues, 1, nullity, M.cols)


# -------------------------------------------------
# det′ and normalized log-determinants
# -------------------------------------------------
def log_detprime(S: Spectrum) -> float:
    """ln det′ = ½·Σ ln λ over the retained eigenvalues."""
    retained = np.asarray(S.retained)
    if retained.size and retained[0] <= ILL_CONDITIONED_EIGENVALUE:
        raise IllConditionedSpectrumError(
            f"Retained eigenvalue {retained[0]:.3e} is numerically zero "
            f"(exact nullity {S.exact_nullity} of {S.count})"
        )
    return 0.5 * math.fsum(np.log(retained))


def detprime(S: Spectrum) -> float:
    """∏ √λ over the count − exact_nullity largest eigenvalues; 1 on empty product."""
    try:
        return math.exp(log_detprime(S))
    except OverflowError:
        raise SpectralError("det′ overflows a float; use log_detprime")


def normalized_logdet(S: Spectrum) -> float:
    return log_detprime(S) / S.normalization


# -------------------------------------------------
# Spectral density
# -------------------------------------------------
def density(S: Spectrum) -> SpectralDensity:
    return SpectralDensity(S)


def evaluate(F: SpectralDensity, lam: float) -> float:
    """F(λ) = #{eigenvalues ≤ λ}/normalization."""
    if lam < 0:
        raise SpectralError(f"Spectral density evaluated at negative λ={lam}")
    S = F.underlying
    return bisect_right(S.eigenvalues, lam) / S.normalization


def logdet_via_density(S: Spectrum, K: float) -> float:
    """ln(K)·(F(K) − F(0)) − ∫₀₊^K (F(λ) − F(0))/λ dλ for the step function F.

    Equals (1/normalization)·Σ ln λ over the retained eigenvalues, i.e.
    2·normalized_logdet(S).
    """
    if K < S.spectral_radius:
        raise SpectralError(f"K={K} is below the spectral radius {S.spectral_radius}")
    F = density(S)
    F0 = evaluate(F, 0.0)
    nodes = sorted(set(S.retained))
    if nodes and nodes[0] <= 0.0:
        raise IllConditionedSpectrumError("Retained eigenvalue is zero")
    if not nodes:
        return 0.0

    boundary = math.log(K) * (evaluate(F, K) - F0)
    integral = []
    for lo, hi in zip(nodes, nodes[1:] + [K]):
        if hi > lo:
            integral.append((evaluate(F, lo) - F0) * math.log(hi / lo))
    return boundary - math.fsum(integral)


# -------------------------------------------------
# Kernel dimensions
# -------------------------------------------------
def vn_kernel_dim(A: GroupRingMatrix, Q: Quotient) -> Fraction:
    """dim ker(r_{A[i]})/|Q| over ℚ, exact."""
    return Fraction(rational_nullity(A, Q), Q.size)


def kernel_dim_over_field(A: GroupRingMatrix, Q: Quotient, field="Q") -> Fraction:
    if field in ("Q", "q", "QQ"):
        return vn_kernel_dim(A, Q)
    rank = regular_rank(A, Q, field)
    return Fraction(A.cols * Q.size - rank, Q.size)


# -------------------------------------------------
# Mahler measure
# -------------------------------------------------
def _refine_root(coeffs: np.ndarray, root: complex) -> complex:
    derivative = np.polyder(coeffs)
    magnitudes = np.abs(coeffs)

    def residual(z):
        scale = np.polyval(magnitudes, abs(z)) or 1.0
        return abs(np.polyval(coeffs, z)) / scale

    current = residual(root)
    for _ in range(NEWTON_MAX_STEPS):
        if current <= NEWTON_RELATIVE_RESIDUAL:
            return root
        slope = np.polyval(derivative, root)
        if slope == 0:
            break
        candidate = root - np.polyval(coeffs, root) / slope
        candidate_residual = residual(candidate)
        if candidate_residual >= current:
            break
        root, current = candidate, candidate_residual
    if current > NEWTON_RELATIVE_RESIDUAL:
        logger.warning("Newton refinement stopped at relative residual %.2e for root %s",
                       current, root)
    return root


def polynomial_roots(p: LaurentPoly) -> list[complex]:
    """Roots of p with monomial factors stripped (companion matrix + Newton)."""
    _, low_to_high = p.univariate_coefficients()
    coeffs = np.array([float(c) for c in reversed(low_to_high)])
    if coeffs.size <= 1:
        return []
    return [_refine_root(coeffs, complex(r)) for r in np.roots(coeffs)]


def log_mahler(p: LaurentPoly) -> float:
    """ln M(p) = ln|lead| + Σ ln max(1, |root|)."""
    if p.ambient_rank != 1:
        raise SpectralError(f"Mahler measure needs ambient rank 1, got {p.ambient_rank}")
    if p.is_zero():
        raise SpectralError("Mahler measure of the zero polynomial")
    _, low_to_high = p.univariate_coefficients()
    lead = abs(float(low_to_high[-1]))
    return math.log(lead) + math.fsum(
        max(0.0, math.log(abs(r))) for r in polynomial_roots(p)
    )


def mahler(p: LaurentPoly) -> float:
    return math.exp(log_mahler(p))


# ---- Torus quadrature ----
def log_fk_det_torus(p: LaurentPoly, grid: int) -> float:
    """Mean of ln|p| over the half-shifted grid exp(2πi(k+½)/N) per coordinate."""
    if grid < 2:
        raise SpectralError(f"Grid size must be ≥ 2, got {grid}")
    if p.is_zero():
        raise SpectralError("Torus determinant of the zero polynomial")
    axis = np.exp(2j * np.pi * (np.arange(grid) + 0.5) / grid)
    magnitudes = np.abs(p.evaluate_grid([axis] * p.ambient_rank)).ravel()
    skipped = magnitudes < TORUS_SKIP_THRESHOLD
    fraction = skipped.sum() / magnitudes.size
    if fraction > TORUS_MAX_SKIPPED_FRACTION:
        raise SpectralError(
            f"{skipped.sum()} of {magnitudes.size} grid points hit zeros of {p}"
        )
    if skipped.any():
        logger.warning("Torus quadrature skipped %d near-zero grid points", skipped.sum())
    return float(np.mean(np.log(magnitudes[~skipped])))


def fk_det_torus(p: LaurentPoly, grid: int) -> float:
    return math.exp(log_fk_det_torus(p, grid))


def fk_det_torus_sequence(p: LaurentPoly, grid: int) -> list[tuple[int, float]]:
    """Values at N, 2N and 4N for convergence assessment."""
    return [(n, fk_det_torus(p, n)) for n in (grid, 2 * grid, 4 * grid)]
