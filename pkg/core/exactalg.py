# core/exactalg.py

"""
Exact integer / rational linear algebra.

Smith normal form over ℤ with unimodular transforms, saturated kernels,
cokernel structure, homology with torsion and free lifts, exact ranks over
ℚ and F_p, and the rational Gram matrix of harmonic projections used by the
regulators.

All integers are Python ints (arbitrary precision). Nothing here touches
floating point.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, prod
from typing import Iterable, Protocol, Sequence

from sympy import isprime
from sympy.polys.domains import GF, QQ, ZZ
from sympy.polys.matrices import DomainMatrix


logger = logging.getLogger(__name__)

_JSON_SAFE_INT = 2 ** 53


class ExactAlgebraError(Exception):
    """Raised for malformed matrices, bad fields and dimension mismatches."""
    pass


# -------------------------------------------------
# Integer matrices
# -------------------------------------------------
@dataclass(frozen=True)
class IntMatrix:
    rows: int
    cols: int
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ExactAlgebraError(f"Negative shape {self.rows}x{self.cols}")
        if len(self.entries) != self.rows:
            raise ExactAlgebraError(
                f"Expected {self.rows} rows, got {len(self.entries)}"
            )
        for row in self.entries:
            if len(row) != self.cols:
                raise ExactAlgebraError(
                    f"Expected rows of length {self.cols}, got {len(row)}"
                )

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]], cols: int | None = None):
        entries = tuple(tuple(int(x) for x in row) for row in rows)
        if cols is None:
            cols = len(entries[0]) if entries else 0
        return cls(len(entries), cols, entries)

    @classmethod
    def zeros(cls, rows: int, cols: int):
        return cls(rows, cols, tuple((0,) * cols for _ in range(rows)))

    @classmethod
    def identity(cls, n: int):
        return cls(
            n, n, tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
        )

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]], rows: int):
        return cls.from_rows(
            [[col[i] for col in columns] for i in range(rows)], cols=len(columns)
        )

    @classmethod
    def from_json(cls, obj: dict):
        """Parse {"rows": r, "cols": c, "entries": [[...], ...]}.

        Entries may be JSON numbers or decimal strings.
        """
        try:
            rows, cols = int(obj["rows"]), int(obj["cols"])
            entries = [[int(x) for x in row] for row in obj["entries"]]
        except (KeyError, TypeError, ValueError) as e:
            raise ExactAlgebraError(f"Malformed integer matrix: {e}")
        if any(isinstance(x, float) for row in obj["entries"] for x in row):
            raise ExactAlgebraError("Integer matrix entries must not be floats")
        return cls(rows, cols, tuple(tuple(row) for row in entries))

    def to_json(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "entries": [
                [x if abs(x) < _JSON_SAFE_INT else str(x) for x in row]
                for row in self.entries
            ],
        }

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(row[j] for row in self.entries)

    def columns(self) -> list[tuple[int, ...]]:
        return [self.column(j) for j in range(self.cols)]

    def transpose(self) -> "IntMatrix":
        if self.rows == 0:
            return IntMatrix.zeros(self.cols, 0)
        return IntMatrix(self.cols, self.rows, tuple(zip(*self.entries)))

    def is_zero(self) -> bool:
        return all(x == 0 for row in self.entries for x in row)

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ExactAlgebraError(
                f"Shape mismatch {self.rows}x{self.cols} @ {other.rows}x{other.cols}"
            )
        other_cols = other.transpose().entries if other.rows else ((),) * other.cols
        return IntMatrix(
            self.rows,
            other.cols,
            tuple(
                tuple(sum(a * b for a, b in zip(row, col)) for col in other_cols)
                for row in self.entries
            ),
        )

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ExactAlgebraError("Shape mismatch in matrix sum")
        return IntMatrix(
            self.rows,
            self.cols,
            tuple(
                tuple(a + b for a, b in zip(r, s))
                for r, s in zip(self.entries, other.entries)
            ),
        )

    def __neg__(self) -> "IntMatrix":
        return IntMatrix(
            self.rows, self.cols, tuple(tuple(-x for x in r) for r in self.entries)
        )

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        return self + (-other)

    def power(self, exponent: int) -> "IntMatrix":
        if self.rows != self.cols:
            raise ExactAlgebraError("Only square matrices have powers")
        result, base = IntMatrix.identity(self.rows), self
        while exponent > 0:
            if exponent & 1:
                result = result @ base
            base = base @ base
            exponent >>= 1
        return result


def block_diagonal(blocks: Sequence[IntMatrix]) -> IntMatrix:
    rows = sum(b.rows for b in blocks)
    cols = sum(b.cols for b in blocks)
    out = [[0] * cols for _ in range(rows)]
    r0 = c0 = 0
    for b in blocks:
        for i, row in enumerate(b.entries):
            out[r0 + i][c0:c0 + b.cols] = row
        r0 += b.rows
        c0 += b.cols
    return IntMatrix.from_rows(out, cols=cols)


# -------------------------------------------------
# Abelian groups and SNF results
# -------------------------------------------------
@dataclass(frozen=True)
class FGAbelianGroup:
    free_rank: int
    elementary_divisors: tuple[int, ...] = ()

    def __post_init__(self):
        if self.free_rank < 0:
            raise ExactAlgebraError("Free rank must be non-negative")
        for d in self.elementary_divisors:
            if d < 2:
                raise ExactAlgebraError(f"Elementary divisor {d} < 2")
        for a, b in zip(self.elementary_divisors, self.elementary_divisors[1:]):
            if b % a:
                raise ExactAlgebraError(f"Divisibility chain broken: {a} ∤ {b}")

    @property
    def torsion_order(self) -> int:
        return prod(self.elementary_divisors)

    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.elementary_divisors

    def __str__(self):
        parts = ["Z"] * self.free_rank + [f"Z/{d}" for d in self.elementary_divisors]
        return " x ".join(parts) if parts else "0"


@dataclass(frozen=True)
class SNFResult:
    diagonal: tuple[int, ...]
    left_transform: IntMatrix | None = None
    right_transform: IntMatrix | None = None
    left_inverse: IntMatrix | None = None

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d != 0)

    def diagonal_matrix(self, rows: int, cols: int) -> IntMatrix:
        out = [[0] * cols for _ in range(rows)]
        for i, d in enumerate(self.diagonal):
            out[i][i] = d
        return IntMatrix.from_rows(out, cols=cols)


# -------------------------------------------------
# Smith normal form
# -------------------------------------------------
class _SmithReducer:
    """Row/column reduction with smallest-magnitude pivots.

    Maintains L·A₀·R = A and Linv·L = I when transforms are tracked.
    """

    def __init__(self, M: IntMatrix, track: bool):
        self.m, self.n = M.rows, M.cols
        self.A = [list(row) for row in M.entries]
        self.track = track
        if track:
            self.L = [[int(i == j) for j in range(self.m)] for i in range(self.m)]
            self.Linv = [[int(i == j) for j in range(self.m)] for i in range(self.m)]
            self.R = [[int(i == j) for j in range(self.n)] for i in range(self.n)]

    def swap_rows(self, i, j):
        if i == j:
            return
        A = self.A
        A[i], A[j] = A[j], A[i]
        if self.track:
            self.L[i], self.L[j] = self.L[j], self.L[i]
            for row in self.Linv:
                row[i], row[j] = row[j], row[i]

    def swap_cols(self, i, j):
        if i == j:
            return
        for row in self.A:
            row[i], row[j] = row[j], row[i]
        if self.track:
            for row in self.R:
                row[i], row[j] = row[j], row[i]

    def add_row(self, dst, src, q):
        # row_dst += q * row_src
        a_dst, a_src = self.A[dst], self.A[src]
        for k in range(self.n):
            if a_src[k]:
                a_dst[k] += q * a_src[k]
        if self.track:
            l_dst, l_src = self.L[dst], self.L[src]
            for k in range(self.m):
                if l_src[k]:
                    l_dst[k] += q * l_src[k]
            for row in self.Linv:
                if row[dst]:
                    row[src] -= q * row[dst]

    def add_col(self, dst, src, q):
        # col_dst += q * col_src
        for row in self.A:
            if row[src]:
                row[dst] += q * row[src]
        if self.track:
            for row in self.R:
                if row[src]:
                    row[dst] += q * row[src]

    def negate_row(self, i):
        self.A[i] = [-x for x in self.A[i]]
        if self.track:
            self.L[i] = [-x for x in self.L[i]]
            for row in self.Linv:
                row[i] = -row[i]

    def _smallest(self, t):
        best = None
        for i in range(t, self.m):
            row = self.A[i]
            for j in range(t, self.n):
                x = row[j]
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
                    if best[0] == 1:
                        return best
        return best

    def _smallest_in_cross(self, t):
        best = None
        for i in range(t + 1, self.m):
            x = self.A[i][t]
            if x and (best is None or abs(x) < best[0]):
                best = (abs(x), i, t)
        for j in range(t + 1, self.n):
            x = self.A[t][j]
            if x and (best is None or abs(x) < best[0]):
                best = (abs(x), t, j)
        return best

    def _non_divisible(self, t):
        p = self.A[t][t]
        for i in range(t + 1, self.m):
            row = self.A[i]
            for j in range(t + 1, self.n):
                if row[j] % p:
                    return i
        return None

    def run(self) -> SNFResult:
        A = self.A
        for t in range(min(self.m, self.n)):
            found = self._smallest(t)
            if found is None:
                break
            _, i, j = found
            self.swap_rows(t, i)
            self.swap_cols(t, j)
            while True:
                for i in range(t + 1, self.m):
                    if A[i][t]:
                        self.add_row(i, t, -(A[i][t] // A[t][t]))
                for j in range(t + 1, self.n):
                    if A[t][j]:
                        self.add_col(j, t, -(A[t][j] // A[t][t]))
                leftover = self._smallest_in_cross(t)
                if leftover is not None:
                    _, i, j = leftover
                    self.swap_rows(t, i)
                    self.swap_cols(t, j)
                    continue
                bad_row = self._non_divisible(t)
                if bad_row is not None:
                    self.add_row(t, bad_row, 1)
                    continue
                break
            if A[t][t] < 0:
                self.negate_row(t)

        diagonal = tuple(A[k][k] for k in range(min(self.m, self.n)))
        if not self.track:
            return SNFResult(diagonal)
        return SNFResult(
            diagonal,
            IntMatrix.from_rows(self.L, cols=self.m),
            IntMatrix.from_rows(self.R, cols=self.n),
            IntMatrix.from_rows(self.Linv, cols=self.m),
        )


def snf(M: IntMatrix) -> SNFResult:
    """Smith normal form with unimodular transforms.

    Returns diagonal d₁ | d₂ | … (length min(rows, cols), trailing zeros for
    the rank deficiency) together with L, R and L⁻¹ such that L·M·R is the
    diagonal embedding.
    """
    logger.debug("SNF of %dx%d matrix", M.rows, M.cols)
    return _SmithReducer(M, track=True).run()


def elementary_divisors(M: IntMatrix) -> tuple[int, ...]:
    """SNF diagonal only; skips the transform bookkeeping."""
    return _SmithReducer(M, track=False).run().diagonal


# -------------------------------------------------
# Exact ranks and determinants
# -------------------------------------------------
def _field_domain(field):
    if field in ("Q", "q", "QQ"):
        return QQ
    try:
        p = int(field)
    except (TypeError, ValueError):
        raise ExactAlgebraError(f"Unknown field: {field!r}")
    if not isprime(p):
        raise ExactAlgebraError(f"Modulus {p} is not prime")
    return GF(p)


def rank_over_field(M: IntMatrix, field="Q") -> int:
    """Rank of M over ℚ (field="Q") or over F_p (field=p)."""
    sparse = {
        i: {j: x for j, x in enumerate(row) if x}
        for i, row in enumerate(M.entries)
    }
    return sparse_rank(sparse, (M.rows, M.cols), field)


def sparse_rank(
    entries: dict[int, dict[int, int]], shape: tuple[int, int], field="Q"
) -> int:
    """Rank of an integer matrix given as {row: {col: value}} nonzeros."""
    domain = _field_domain(field)
    sparse = {}
    for i, row in entries.items():
        if not 0 <= i < shape[0]:
            raise ExactAlgebraError(f"Row {i} outside shape {shape}")
        converted = {j: domain(x) for j, x in row.items() if x}
        converted = {j: x for j, x in converted.items() if x}
        if converted:
            sparse[i] = converted
    if not sparse:
        return 0
    return DomainMatrix(sparse, shape, domain).rank()


def determinant(M: IntMatrix) -> int:
    """Exact determinant via fraction-free elimination."""
    if M.rows != M.cols:
        raise ExactAlgebraError(f"Determinant of non-square {M.rows}x{M.cols}")
    if M.rows == 0:
        return 1
    dense = [[ZZ(x) for x in row] for row in M.entries]
    return int(DomainMatrix(dense, (M.rows, M.cols), ZZ).det())


# -------------------------------------------------
# Kernels, cokernels, homology
# -------------------------------------------------
def _primitive(vector: Sequence[int]) -> tuple[int, ...]:
    content = 0
    for x in vector:
        content = gcd(content, x)
    if content > 1:
        vector = [x // content for x in vector]
    lead = next((x for x in vector if x), 0)
    if lead < 0:
        vector = [-x for x in vector]
    return tuple(vector)


def kernel_basis_saturated(M: IntMatrix) -> IntMatrix:
    """Columns form a ℤ-basis of ker(M) ⊂ ℤ^cols (which is saturated)."""
    result = snf(M)
    R = result.right_transform
    basis = [_primitive(R.column(j)) for j in range(result.rank, M.cols)]
    return IntMatrix.from_columns(basis, rows=M.cols)


def cokernel_structure(M: IntMatrix) -> FGAbelianGroup:
    """Isomorphism type of ℤ^rows / (column span of M)."""
    diagonal = elementary_divisors(M)
    rank = sum(1 for d in diagonal if d)
    return FGAbelianGroup(
        free_rank=M.rows - rank,
        elementary_divisors=tuple(d for d in diagonal if d > 1),
    )


def torsion_order_of_cokernel(M: IntMatrix) -> int:
    return prod(d for d in elementary_divisors(M) if d > 1)


class ChainComplexLike(Protocol):
    def differential(self, k: int) -> IntMatrix: ...


@dataclass(frozen=True)
class HomologyData:
    group: FGAbelianGroup
    free_lifts: tuple[tuple[int, ...], ...]


def _left_inverse_of_saturated(K: IntMatrix) -> IntMatrix:
    result = snf(K)
    if any(d != 1 for d in result.diagonal):
        raise ExactAlgebraError("Kernel basis is not saturated")
    L, R = result.left_transform, result.right_transform
    top = IntMatrix.from_rows(L.entries[:K.cols], cols=L.cols)
    return R @ top


def homology(C: ChainComplexLike, n: int) -> HomologyData:
    """H_n(C) with integral cycles lifting a basis of H_n(C)_f."""
    c_n = C.differential(n)
    c_next = C.differential(n + 1)

    K = kernel_basis_saturated(c_n)
    if K.cols == 0:
        return HomologyData(FGAbelianGroup(0), ())

    X = _left_inverse_of_saturated(K) @ c_next
    result = snf(X)
    rank = result.rank
    divisors = tuple(d for d in result.diagonal if d > 1)
    group = FGAbelianGroup(K.cols - rank, divisors)

    lifts = []
    Linv = result.left_inverse
    for j in range(rank, K.cols):
        coords = Linv.column(j)
        lifts.append(
            tuple(
                sum(K.entries[i][k] * coords[k] for k in range(K.cols))
                for i in range(K.rows)
            )
        )
    return HomologyData(group, tuple(lifts))


# -------------------------------------------------
# Harmonic projection Gram matrix
# -------------------------------------------------
def _qq(x) -> object:
    f = Fraction(x)
    return QQ(f.numerator, f.denominator)


def _to_fraction(x) -> Fraction:
    r = QQ.to_sympy(x)
    return Fraction(int(r.p), int(r.q))


def rational_gram_projection(
    vectors: Sequence[Sequence], subspace_generators: Sequence[Sequence]
) -> tuple[tuple[Fraction, ...], ...]:
    """Gram matrix ⟨h_i, h_j⟩ of the projections h_i of the vectors onto the
    orthogonal complement of span(subspace_generators), exact over ℚ.
    """
    dims = {len(v) for v in vectors} | {len(g) for g in subspace_generators}
    if len(dims) > 1:
        raise ExactAlgebraError(f"Vectors of different dimensions: {sorted(dims)}")
    if not vectors:
        return ()
    dim = dims.pop()

    V = DomainMatrix([[_qq(x) for x in v] for v in vectors], (len(vectors), dim), QQ)
    gram = V.matmul(V.transpose())

    if subspace_generators and dim:
        G = DomainMatrix(
            [[_qq(g[i]) for g in subspace_generators] for i in range(dim)],
            (dim, len(subspace_generators)),
            QQ,
        )
        _, pivots = G.rref()
        if pivots:
            Gp = DomainMatrix(
                [[_qq(subspace_generators[j][i]) for j in pivots] for i in range(dim)],
                (dim, len(pivots)),
                QQ,
            )
            normal = Gp.transpose().matmul(Gp).inv()
            VG = V.matmul(Gp)
            gram = gram - VG.matmul(normal).matmul(VG.transpose())

    dense = gram.to_Matrix()
    return tuple(
        tuple(_to_fraction(QQ.from_sympy(dense[i, j])) for j in range(len(vectors)))
        for i in range(len(vectors))
    )


def rational_determinant(matrix: Sequence[Sequence[Fraction]]) -> Fraction:
    n = len(matrix)
    if n == 0:
        return Fraction(1)
    dm = DomainMatrix([[_qq(x) for x in row] for row in matrix], (n, n), QQ)
    return _to_fraction(dm.det())
