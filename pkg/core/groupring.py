# core/groupring.py

"""
The group ring ℚ[ℤⁿ]: Laurent polynomials in n variables, matrices over
them, the involution, push-down to finite quotients ℤ/m₁ × … × ℤ/mₙ,
von Neumann traces and the L¹ operator-norm bound.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from math import gcd, lcm, prod
from typing import Mapping, Sequence

import numpy as np
from sympy import Poly, Rational, Symbol, cyclotomic_poly
from sympy.polys.domains import QQ

from core.exactalg import IntMatrix, sparse_rank


logger = logging.getLogger(__name__)

Exponent = tuple[int, ...]


class GroupRingError(Exception):
    pass


class PolynomialSyntaxError(GroupRingError):
    """Polynomial text does not match the grammar; `position` is 0-based."""

    def __init__(self, message: str, text: str, position: int):
        super().__init__(f"{message} at position {position} in {text!r}")
        self.text = text
        self.position = position


# -------------------------------------------------
# Laurent polynomials
# -------------------------------------------------
@dataclass(frozen=True)
class LaurentPoly:
    ambient_rank: int
    terms: tuple[tuple[Exponent, Fraction], ...] = ()

    def __post_init__(self):
        for exponent, coeff in self.terms:
            if len(exponent) != self.ambient_rank:
                raise GroupRingError(
                    f"Exponent {exponent} does not have length {self.ambient_rank}"
                )
            if coeff == 0:
                raise GroupRingError("Zero coefficients are not stored")

    @classmethod
    def from_dict(cls, ambient_rank: int, terms: Mapping[Exponent, object]):
        cleaned = {}
        for exponent, coeff in terms.items():
            coeff = Fraction(coeff)
            if coeff:
                cleaned[tuple(int(e) for e in exponent)] = coeff
        return cls(ambient_rank, tuple(sorted(cleaned.items())))

    @classmethod
    def constant(cls, ambient_rank: int, value=1):
        return cls.from_dict(ambient_rank, {(0,) * ambient_rank: value})

    @classmethod
    def monomial(cls, exponent: Sequence[int], coeff=1):
        return cls.from_dict(len(exponent), {tuple(exponent): coeff})

    @classmethod
    def zero(cls, ambient_rank: int):
        return cls(ambient_rank)

    def as_dict(self) -> dict[Exponent, Fraction]:
        return dict(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, exponent: Sequence[int]) -> Fraction:
        return self.as_dict().get(tuple(exponent), Fraction(0))

    def constant_term(self) -> Fraction:
        return self.coefficient((0,) * self.ambient_rank)

    def l1_norm(self) -> Fraction:
        return sum((abs(c) for _, c in self.terms), Fraction(0))

    def support_radius(self) -> int:
        """Largest |e_i| over the support (0 for constants and zero)."""
        return max((abs(e) for exp, _ in self.terms for e in exp), default=0)

    def has_integer_coefficients(self) -> bool:
        return all(c.denominator == 1 for _, c in self.terms)

    def _check_rank(self, other: "LaurentPoly"):
        if self.ambient_rank != other.ambient_rank:
            raise GroupRingError(
                f"Ambient rank mismatch: {self.ambient_rank} vs {other.ambient_rank}"
            )

    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        self._check_rank(other)
        out = self.as_dict()
        for exponent, coeff in other.terms:
            out[exponent] = out.get(exponent, 0) + coeff
        return LaurentPoly.from_dict(self.ambient_rank, out)

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly(self.ambient_rank, tuple((e, -c) for e, c in self.terms))

    def __sub__(self, other: "LaurentPoly") -> "LaurentPoly":
        return self + (-other)

    def __mul__(self, other) -> "LaurentPoly":
        if not isinstance(other, LaurentPoly):
            return LaurentPoly.from_dict(
                self.ambient_rank, {e: c * Fraction(other) for e, c in self.terms}
            )
        self._check_rank(other)
        out: dict[Exponent, Fraction] = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return LaurentPoly.from_dict(self.ambient_rank, out)

    __rmul__ = __mul__

    def involute(self) -> "LaurentPoly":
        return LaurentPoly.from_dict(
            self.ambient_rank, {tuple(-x for x in e): c for e, c in self.terms}
        )

    def evaluate(self, point: Sequence[complex]) -> complex:
        total = 0j
        for exponent, coeff in self.terms:
            term = complex(coeff)
            for z, e in zip(point, exponent):
                term *= z ** e
            total += term
        return total

    def evaluate_grid(self, axes: Sequence[np.ndarray]) -> np.ndarray:
        """Values on the tensor grid axes[0] × … × axes[n-1]."""
        grids = np.meshgrid(*axes, indexing="ij") if axes else []
        shape = grids[0].shape if grids else ()
        values = np.zeros(shape, dtype=complex)
        for exponent, coeff in self.terms:
            term = np.full(shape, complex(coeff))
            for g, e in zip(grids, exponent):
                term = term * g ** e
            values += term
        return values

    def univariate_coefficients(self) -> tuple[int, list[Fraction]]:
        """(lowest exponent, coefficients from lowest to highest) for rank 1."""
        if self.ambient_rank != 1:
            raise GroupRingError("Univariate coefficients need ambient rank 1")
        if self.is_zero():
            return 0, []
        low = min(e[0] for e, _ in self.terms)
        high = max(e[0] for e, _ in self.terms)
        coeffs = [Fraction(0)] * (high - low + 1)
        for (e,), c in self.terms:
            coeffs[e - low] = c
        return low, coeffs

    def __str__(self):
        if self.is_zero():
            return "0"
        names = (
            ["z"] if self.ambient_rank == 1
            else [f"z{i + 1}" for i in range(self.ambient_rank)]
        )
        pieces = []
        for exponent, coeff in sorted(self.terms, reverse=True):
            factors = []
            for name, e in zip(names, exponent):
                if e == 1:
                    factors.append(name)
                elif e:
                    factors.append(f"{name}^{e}")
            magnitude = abs(coeff)
            if not factors:
                body = str(magnitude)
            elif magnitude == 1:
                body = "*".join(factors)
            else:
                body = "*".join([str(magnitude)] + factors)
            sign = "-" if coeff < 0 else "+"
            pieces.append((sign, body))
        first_sign, first_body = pieces[0]
        out = ("-" if first_sign == "-" else "") + first_body
        for sign, body in pieces[1:]:
            out += f" {sign} {body}"
        return out


# ---- Parsing ----
class _PolyParser:
    def __init__(self, text: str, ambient_rank: int):
        self.text = text
        self.n = ambient_rank
        self.tokens = [(ch, i) for i, ch in enumerate(text) if not ch.isspace()]
        self.k = 0

    def error(self, message, position=None):
        if position is None:
            position = self.tokens[self.k][1] if self.k < len(self.tokens) else len(self.text)
        raise PolynomialSyntaxError(message, self.text, position)

    def peek(self):
        return self.tokens[self.k][0] if self.k < len(self.tokens) else None

    def take(self):
        ch = self.tokens[self.k][0]
        self.k += 1
        return ch

    def digits(self) -> int:
        start = self.k
        while self.peek() is not None and self.peek().isdigit():
            self.k += 1
        if self.k == start:
            self.error("Expected digits")
        return int("".join(ch for ch, _ in self.tokens[start:self.k]))

    def signed_int(self) -> int:
        sign = 1
        if self.peek() in ("+", "-"):
            sign = -1 if self.take() == "-" else 1
        return sign * self.digits()

    def rational(self) -> Fraction:
        value = Fraction(self.digits())
        if self.peek() == "/":
            self.take()
            position = self.tokens[self.k][1] if self.k < len(self.tokens) else len(self.text)
            denominator = self.digits()
            if denominator == 0:
                self.error("Zero denominator", position)
            value /= denominator
        return value

    def factor(self, exponent: list[int]):
        if self.peek() != "z":
            self.error("Expected variable")
        position = self.tokens[self.k][1]
        self.take()
        if self.peek() is not None and self.peek().isdigit():
            index = self.digits()
        elif self.n == 1:
            index = 1
        else:
            self.error("Variable needs an index", position)
        if not 1 <= index <= self.n:
            self.error(f"Variable index {index} out of range 1..{self.n}", position)
        power = 1
        if self.peek() == "^":
            self.take()
            power = self.signed_int()
        exponent[index - 1] += power

    def term(self, sign: int) -> tuple[Exponent, Fraction]:
        coeff = Fraction(sign)
        exponent = [0] * self.n
        if self.peek() is not None and self.peek().isdigit():
            coeff *= self.rational()
            if self.peek() != "*":
                return tuple(exponent), coeff
            self.take()
        self.factor(exponent)
        while self.peek() == "*":
            self.take()
            self.factor(exponent)
        return tuple(exponent), coeff

    def parse(self) -> LaurentPoly:
        if not self.tokens:
            self.error("Empty polynomial", 0)
        out: dict[Exponent, Fraction] = {}
        sign = 1
        if self.peek() in ("+", "-"):
            sign = -1 if self.take() == "-" else 1
        while True:
            exponent, coeff = self.term(sign)
            out[exponent] = out.get(exponent, 0) + coeff
            if self.peek() is None:
                break
            if self.peek() not in ("+", "-"):
                self.error(f"Unexpected {self.peek()!r}")
            sign = -1 if self.take() == "-" else 1
        return LaurentPoly.from_dict(self.n, out)


def parse_poly(text: str, ambient_rank: int) -> LaurentPoly:
    """Parse e.g. "z - 2" (n=1) or "3*z1^2*z2^-1" (n=2)."""
    if ambient_rank < 1:
        raise GroupRingError(f"Ambient rank must be ≥ 1, got {ambient_rank}")
    return _PolyParser(text, ambient_rank).parse()


# -------------------------------------------------
# Matrices over ℚ[ℤⁿ]
# -------------------------------------------------
@dataclass(frozen=True)
class GroupRingMatrix:
    ambient_rank: int
    rows: int
    cols: int
    entries: tuple[tuple[LaurentPoly, ...], ...]

    def __post_init__(self):
        if len(self.entries) != self.rows or any(len(r) != self.cols for r in self.entries):
            raise GroupRingError(f"Entries do not form a {self.rows}x{self.cols} grid")
        for row in self.entries:
            for p in row:
                if p.ambient_rank != self.ambient_rank:
                    raise GroupRingError(
                        f"Entry of ambient rank {p.ambient_rank} in a rank "
                        f"{self.ambient_rank} matrix"
                    )

    @classmethod
    def from_rows(cls, ambient_rank: int, rows: Sequence[Sequence[LaurentPoly]], cols=None):
        entries = tuple(tuple(r) for r in rows)
        if cols is None:
            cols = len(entries[0]) if entries else 0
        return cls(ambient_rank, len(entries), cols, entries)

    @classmethod
    def from_strings(cls, ambient_rank: int, rows: Sequence[Sequence[str]]):
        return cls.from_rows(
            ambient_rank, [[parse_poly(s, ambient_rank) for s in r] for r in rows]
        )

    @classmethod
    def from_int_matrix(cls, M: IntMatrix, ambient_rank: int):
        return cls(
            ambient_rank,
            M.rows,
            M.cols,
            tuple(
                tuple(LaurentPoly.constant(ambient_rank, x) for x in row)
                for row in M.entries
            ),
        )

    @classmethod
    def identity(cls, ambient_rank: int, n: int):
        one, zero = LaurentPoly.constant(ambient_rank), LaurentPoly.zero(ambient_rank)
        return cls.from_rows(
            ambient_rank, [[one if i == j else zero for j in range(n)] for i in range(n)], n
        )

    @classmethod
    def zeros(cls, ambient_rank: int, rows: int, cols: int):
        zero = LaurentPoly.zero(ambient_rank)
        return cls(ambient_rank, rows, cols, tuple((zero,) * cols for _ in range(rows)))

    @classmethod
    def from_json(cls, obj: dict):
        try:
            n, rows, cols = int(obj["ambient_rank"]), int(obj["rows"]), int(obj["cols"])
            texts = obj["entries"]
        except (KeyError, TypeError, ValueError) as e:
            raise GroupRingError(f"Malformed group ring matrix: {e}")
        matrix = cls.from_rows(
            n, [[parse_poly(str(s), n) for s in row] for row in texts], cols
        )
        if matrix.rows != rows:
            raise GroupRingError(f"Expected {rows} rows, got {matrix.rows}")
        return matrix

    def to_json(self) -> dict:
        return {
            "ambient_rank": self.ambient_rank,
            "rows": self.rows,
            "cols": self.cols,
            "entries": [[str(p) for p in row] for row in self.entries],
        }

    def is_zero(self) -> bool:
        return all(p.is_zero() for row in self.entries for p in row)

    def max_support_radius(self) -> int:
        return max((p.support_radius() for row in self.entries for p in row), default=0)

    def involute(self) -> "GroupRingMatrix":
        return involute(self)

    def __matmul__(self, other: "GroupRingMatrix") -> "GroupRingMatrix":
        return matmul(self, other)

    def __add__(self, other: "GroupRingMatrix") -> "GroupRingMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise GroupRingError("Shape mismatch in matrix sum")
        return GroupRingMatrix.from_rows(
            self.ambient_rank,
            [[a + b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)],
            self.cols,
        )

    def __neg__(self) -> "GroupRingMatrix":
        return GroupRingMatrix.from_rows(
            self.ambient_rank, [[-p for p in r] for r in self.entries], self.cols
        )

    def __sub__(self, other: "GroupRingMatrix") -> "GroupRingMatrix":
        return self + (-other)


def involute(A: GroupRingMatrix) -> GroupRingMatrix:
    """Conjugate transpose over the group ring: e ↦ −e, then transpose."""
    return GroupRingMatrix.from_rows(
        A.ambient_rank,
        [[A.entries[i][j].involute() for i in range(A.rows)] for j in range(A.cols)],
        A.rows,
    )


def matmul(A: GroupRingMatrix, B: GroupRingMatrix) -> GroupRingMatrix:
    if A.ambient_rank != B.ambient_rank:
        raise GroupRingError(
            f"Ambient rank mismatch: {A.ambient_rank} vs {B.ambient_rank}"
        )
    if A.cols != B.rows:
        raise GroupRingError(
            f"Shape mismatch {A.rows}x{A.cols} @ {B.rows}x{B.cols}"
        )
    zero = LaurentPoly.zero(A.ambient_rank)
    out = []
    for i in range(A.rows):
        row = []
        for j in range(B.cols):
            acc = zero
            for k in range(A.cols):
                a, b = A.entries[i][k], B.entries[k][j]
                if a.terms and b.terms:
                    acc = acc + a * b
            row.append(acc)
        out.append(row)
    return GroupRingMatrix.from_rows(A.ambient_rank, out, B.cols)


def trace_vn(A: GroupRingMatrix) -> Fraction:
    """von Neumann trace: Σ_i coefficient of A_ii at the identity."""
    if A.rows != A.cols:
        raise GroupRingError(f"Trace of non-square {A.rows}x{A.cols}")
    return sum((A.entries[i][i].constant_term() for i in range(A.rows)), Fraction(0))


def l1_bound(A: GroupRingMatrix) -> float:
    """K^G(A) = rows·cols·max ‖A_ij‖₁, an upper bound for the operator norm."""
    largest = max((p.l1_norm() for row in A.entries for p in row), default=Fraction(0))
    return float(A.rows * A.cols * largest)


def determinant_poly(A: GroupRingMatrix) -> LaurentPoly:
    """Determinant over the commutative ring ℚ[ℤⁿ] by cofactor expansion."""
    if A.rows != A.cols:
        raise GroupRingError(f"Determinant of non-square {A.rows}x{A.cols}")
    n = A.ambient_rank
    memo: dict[tuple[int, frozenset], LaurentPoly] = {}

    def minor(row: int, free_cols: frozenset) -> LaurentPoly:
        if row == A.rows:
            return LaurentPoly.constant(n)
        key = (row, free_cols)
        if key not in memo:
            acc = LaurentPoly.zero(n)
            for position, col in enumerate(sorted(free_cols)):
                entry = A.entries[row][col]
                if entry.is_zero():
                    continue
                term = entry * minor(row + 1, free_cols - {col})
                acc = acc - term if position % 2 else acc + term
            memo[key] = acc
        return memo[key]

    return minor(0, frozenset(range(A.cols)))


# -------------------------------------------------
# Finite quotients and push-down
# -------------------------------------------------
@dataclass(frozen=True)
class Quotient:
    moduli: tuple[int, ...]

    def __post_init__(self):
        if not self.moduli:
            raise GroupRingError("A quotient needs at least one modulus")
        for m in self.moduli:
            if int(m) < 1:
                raise GroupRingError(f"Modulus {m} must be ≥ 1")

    @classmethod
    def cyclic(cls, m: int, ambient_rank: int = 1):
        return cls((m,) * ambient_rank)

    @property
    def rank(self) -> int:
        return len(self.moduli)

    @property
    def size(self) -> int:
        return prod(self.moduli)

    def residues(self) -> np.ndarray:
        """All residue vectors, lexicographic, shape (size, rank)."""
        return np.array(
            list(itertools.product(*(range(m) for m in self.moduli))), dtype=np.int64
        ).reshape(self.size, self.rank)

    def reduce(self, exponent: Sequence[int]) -> tuple[int, ...]:
        return tuple(e % m for e, m in zip(exponent, self.moduli))

    def index_of(self, residue: Sequence[int]) -> int:
        index = 0
        for r, m in zip(residue, self.moduli):
            index = index * m + r
        return index

    def __str__(self):
        return "x".join(str(m) for m in self.moduli)


@dataclass(frozen=True)
class RegularRep:
    """Exact regular representation as matrix / denominator."""
    matrix: IntMatrix
    denominator: int = 1


@dataclass(frozen=True)
class PushedMatrix:
    source: GroupRingMatrix
    quotient: Quotient
    character_blocks: np.ndarray = field(repr=False, compare=False)

    @property
    def rows(self) -> int:
        return self.source.rows

    @property
    def cols(self) -> int:
        return self.source.cols

    @cached_property
    def regular_rep(self) -> RegularRep:
        return regular_rep(self.source, self.quotient)


def _check_compatible(A: GroupRingMatrix, Q: Quotient):
    if Q.rank != A.ambient_rank:
        raise GroupRingError(
            f"Quotient of rank {Q.rank} does not match ambient rank {A.ambient_rank}"
        )


def character_blocks(A: GroupRingMatrix, Q: Quotient) -> np.ndarray:
    """A_χ for every character, shape (|Q|, rows, cols), lexicographic in χ."""
    _check_compatible(A, Q)
    residues = Q.residues()
    period = lcm(*Q.moduli)
    scale = np.array([period // m for m in Q.moduli], dtype=np.int64)
    blocks = np.zeros((Q.size, A.rows, A.cols), dtype=complex)
    for i, row in enumerate(A.entries):
        for j, p in enumerate(row):
            for exponent, coeff in p.terms:
                reduced = np.array(Q.reduce(exponent), dtype=np.int64) * scale
                phases = (residues @ reduced) % period
                blocks[:, i, j] += float(coeff) * np.exp(2j * np.pi * phases / period)
    return blocks


def push(A: GroupRingMatrix, Q: Quotient) -> PushedMatrix:
    logger.debug(
        "Pushing %dx%d matrix to quotient %s (%d characters)",
        A.rows, A.cols, Q, Q.size,
    )
    return PushedMatrix(A, Q, character_blocks(A, Q))


def regular_rep_sparse(
    A: GroupRingMatrix, Q: Quotient
) -> tuple[dict[int, dict[int, int]], int]:
    """Nonzeros {row: {col: value}} of denominator·R together with the denominator.

    R[(i,g),(j,h)] = coefficient of A_ij at g − h; index i·|Q| + idx(g).
    With this convention R(A*) = R(A)ᵀ and R(AB) = R(A)R(B).
    """
    _check_compatible(A, Q)
    size = Q.size
    denominator = lcm(
        1, *(c.denominator for row in A.entries for p in row for _, c in p.terms)
    )
    out: dict[int, dict[int, int]] = {}
    residues = [tuple(int(x) for x in r) for r in Q.residues()]
    for i, row in enumerate(A.entries):
        for j, p in enumerate(row):
            for exponent, coeff in p.terms:
                shift = Q.reduce(exponent)
                value = int(coeff * denominator)
                for h_index, h in enumerate(residues):
                    g = tuple((a + b) % m for a, b, m in zip(h, shift, Q.moduli))
                    r, c = i * size + Q.index_of(g), j * size + h_index
                    target = out.setdefault(r, {})
                    target[c] = target.get(c, 0) + value
    return out, denominator


def regular_rep(A: GroupRingMatrix, Q: Quotient) -> RegularRep:
    sparse, denominator = regular_rep_sparse(A, Q)
    size = Q.size
    dense = [[0] * (A.cols * size) for _ in range(A.rows * size)]
    for r, row in sparse.items():
        for c, value in row.items():
            dense[r][c] = value
    return RegularRep(IntMatrix.from_rows(dense, cols=A.cols * size), denominator)


def regular_rank(A: GroupRingMatrix, Q: Quotient, field="Q") -> int:
    """Rank of the regular representation over ℚ or F_p."""
    sparse, denominator = regular_rep_sparse(A, Q)
    if field not in ("Q", "q", "QQ") and denominator % int(field) == 0:
        raise GroupRingError(
            f"Coefficient denominators are not invertible modulo {field}"
        )
    return sparse_rank(sparse, (A.rows * Q.size, A.cols * Q.size), field)


# ---- Exact nullity by Galois orbits of characters ----
_X = Symbol("x")


@lru_cache(maxsize=None)
def _cyclotomic(d: int) -> Poly:
    return Poly(cyclotomic_poly(d, _X), _X, domain=QQ)


def _character_poly(p: LaurentPoly, k: Sequence[int], scale, period, d) -> Poly:
    step = period // d
    terms: dict[int, Fraction] = {}
    for exponent, coeff in p.terms:
        phase = sum(ki * si * e for ki, si, e in zip(k, scale, exponent)) % period
        power = (phase // step) % d
        terms[power] = terms.get(power, Fraction(0)) + coeff
    nonzero = {(e,): Rational(c.numerator, c.denominator) for e, c in terms.items() if c}
    if not nonzero:
        return Poly(0, _X, domain=QQ)
    return Poly.from_dict(nonzero, _X, domain=QQ).rem(_cyclotomic(d))


def _nullity_over_cyclotomic(A: GroupRingMatrix, k, scale, period, d) -> int:
    phi = _cyclotomic(d)
    rows = [
        [_character_poly(p, k, scale, period, d) for p in row] for row in A.entries
    ]
    rank = 0
    for c in range(A.cols):
        pivot = next((r for r in range(rank, A.rows) if not rows[r][c].is_zero), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inverse = rows[rank][c].invert(phi)
        for r in range(A.rows):
            if r != rank and not rows[r][c].is_zero:
                factor = (rows[r][c] * inverse).rem(phi)
                rows[r] = [
                    (a - factor * b).rem(phi) for a, b in zip(rows[r], rows[rank])
                ]
        rank += 1
    return A.cols - rank


def rational_nullity(A: GroupRingMatrix, Q: Quotient) -> int:
    """cols·|Q| − rank over ℚ of the regular representation.

    The regular representation splits over ℚ into one block per Galois
    orbit of characters; a character of order d contributes the nullity of
    A_χ over ℚ(ζ_d), once per member of its orbit.
    """
    _check_compatible(A, Q)
    period = lcm(*Q.moduli)
    scale = [period // m for m in Q.moduli]
    seen: set[int] = set()
    nullity = 0
    for k in itertools.product(*(range(m) for m in Q.moduli)):
        if Q.index_of(k) in seen:
            continue
        d = period // gcd(period, *(ki * si for ki, si in zip(k, scale)))
        orbit = {
            Q.index_of(tuple(a * ki % m for ki, m in zip(k, Q.moduli)))
            for a in range(1, d + 1)
            if gcd(a, d) == 1
        }
        seen |= orbit
        if A.cols:
            nullity += len(orbit) * _nullity_over_cyclotomic(A, k, scale, period, d)
        logger.debug("Character orbit of order %d: %d members", d, len(orbit))
    return nullity


def trace_pushed(P: PushedMatrix) -> Fraction:
    """Σ_i coefficient of A[i]_ii at the identity of the quotient."""
    A = P.source
    if A.rows != A.cols:
        raise GroupRingError(f"Trace of non-square {A.rows}x{A.cols}")
    total = Fraction(0)
    for i in range(A.rows):
        for exponent, coeff in A.entries[i][i].terms:
            if not any(P.quotient.reduce(exponent)):
                total += coeff
    return total


def pushed_trace_numeric(P: PushedMatrix) -> complex:
    """(1/|Q|)·Σ_χ trace(A_χ); agrees with trace_pushed up to roundoff."""
    return complex(np.trace(P.character_blocks, axis1=1, axis2=2).sum() / P.quotient.size)

