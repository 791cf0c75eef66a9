# utils/random_complexes.py

import numpy as np

from core.exactalg import IntMatrix, kernel_basis_saturated
from core.torsion_lab import IntChainComplex


class RandomComplexError(Exception):
    pass


def _random_matrix(rng, rows: int, cols: int, bound: int) -> IntMatrix:
    values = rng.integers(-bound, bound + 1, size=(rows, cols))
    return IntMatrix.from_rows(values.tolist(), cols=cols)


def random_complex(
    rng: np.random.Generator,
    max_rank: int = 8,
    entry_bound: int = 5,
    mix_bound: int = 2,
) -> IntChainComplex:
    """
    Random 0 → C₃ → C₂ → C₁ → C₀ → 0 with c_{k−1}·c_k = 0 by construction.

    c₂ is uniform with entries in [−entry_bound, entry_bound]; the rows of c₁
    are random combinations of a saturated basis of the left kernel of c₂,
    and the columns of c₃ random combinations of a basis of its kernel.
    """
    if max_rank < 1:
        raise RandomComplexError("max_rank must be ≥ 1")

    r0, r1, r2, r3 = (int(r) for r in rng.integers(1, max_rank + 1, size=4))
    c2 = _random_matrix(rng, r1, r2, entry_bound)

    left_kernel = kernel_basis_saturated(c2.transpose())      # r1 × k
    mix = _random_matrix(rng, r0, left_kernel.cols, mix_bound)
    c1 = mix @ left_kernel.transpose() if left_kernel.cols else IntMatrix.zeros(r0, r1)

    kernel = kernel_basis_saturated(c2)                         # r2 × k'
    mix = _random_matrix(rng, kernel.cols, r3, mix_bound)
    c3 = kernel @ mix if kernel.cols else IntMatrix.zeros(r2, r3)

    return IntChainComplex((r0, r1, r2, r3), (c1, c2, c3))


def random_complexes(count: int, seed: int = 0, **kwargs) -> list[IntChainComplex]:
    rng = np.random.default_rng(seed)
    return [random_complex(rng, **kwargs) for _ in range(count)]
