# core/towers.py

"""
Towers of finite quotients ℤⁿ → ℤ/m₁ × … × ℤ/mₙ.

Text forms
----------
pow:BASE:IMAX
    Index i = 0..IMAX with moduli BASE^i per coordinate. BASE is an integer
    (used for every coordinate) or a vector such as 2x3.
list:n1,n2,...
    Explicit quotients in order; each entry is an integer (cyclic in every
    coordinate) or a vector such as 4x8.
"""

import logging
from dataclasses import dataclass

from core.groupring import Quotient


logger = logging.getLogger(__name__)


class TowerSpecError(Exception):
    pass


@dataclass(frozen=True)
class TowerSpec:
    kind: str                                   # "power" | "explicit"
    base: tuple[int, ...] = ()
    max_index: int = 0
    explicit: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        if self.kind == "power":
            if not self.base or any(b < 2 for b in self.base):
                raise TowerSpecError(f"Power tower base must be ≥ 2, got {self.base}")
            if self.max_index < 0:
                raise TowerSpecError(f"Negative max index {self.max_index}")
        elif self.kind == "explicit":
            if not self.explicit:
                raise TowerSpecError("Explicit tower needs at least one quotient")
        else:
            raise TowerSpecError(f"Unknown tower kind: {self.kind!r}")

    def quotients(self, ambient_rank: int) -> list[tuple[int, Quotient]]:
        """(index, quotient) pairs for a group ring of the given rank."""
        if self.kind == "power":
            base = _broadcast(self.base, ambient_rank)
            return [
                (i, Quotient(tuple(b ** i for b in base)))
                for i in range(self.max_index + 1)
            ]
        # sizes depend on the rank through broadcasting of scalar entries
        quotients = [
            (i, Quotient(_broadcast(moduli, ambient_rank)))
            for i, moduli in enumerate(self.explicit)
        ]
        sizes = [Q.size for _, Q in quotients]
        if any(a >= b for a, b in zip(sizes, sizes[1:])):
            raise TowerSpecError(
                f"Quotient sizes must strictly increase at rank {ambient_rank}: {sizes}"
            )
        return quotients

    def __str__(self):
        if self.kind == "power":
            return f"pow:{'x'.join(map(str, self.base))}:{self.max_index}"
        return "list:" + ",".join("x".join(map(str, m)) for m in self.explicit)


def _broadcast(moduli: tuple[int, ...], ambient_rank: int) -> tuple[int, ...]:
    if len(moduli) == 1:
        return moduli * ambient_rank
    if len(moduli) != ambient_rank:
        raise TowerSpecError(
            f"Tower entry {'x'.join(map(str, moduli))} does not match ambient rank "
            f"{ambient_rank}"
        )
    return moduli


def _parse_vector(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(part) for part in text.strip().split("x"))
    except ValueError:
        raise TowerSpecError(f"Not an integer vector: {text!r}")
    if any(v < 1 for v in values):
        raise TowerSpecError(f"Moduli must be ≥ 1: {text!r}")
    return values


def parse_tower(text: str) -> TowerSpec:
    kind, _, rest = text.strip().partition(":")
    if kind == "pow":
        base, sep, imax = rest.partition(":")
        if not sep:
            raise TowerSpecError(f"Expected pow:BASE:IMAX, got {text!r}")
        try:
            max_index = int(imax)
        except ValueError:
            raise TowerSpecError(f"IMAX is not an integer: {imax!r}")
        return TowerSpec("power", base=_parse_vector(base), max_index=max_index)
    if kind == "list":
        entries = [e for e in rest.split(",") if e.strip()]
        if not entries:
            raise TowerSpecError(f"Empty tower list: {text!r}")
        return TowerSpec("explicit", explicit=tuple(_parse_vector(e) for e in entries))
    raise TowerSpecError(f"Unknown tower form {text!r}; use pow:BASE:IMAX or list:n1,n2,...")


def resolve(spec: TowerSpec, ambient_rank: int, max_size: int) -> list[tuple[int, Quotient]]:
    """Quotients of the tower, dropping those larger than max_size."""
    kept, dropped = [], []
    for index, quotient in spec.quotients(ambient_rank):
        (kept if quotient.size <= max_size else dropped).append((index, quotient))
    if dropped:
        logger.warning(
            "Dropped %d tower indices with quotient size above %d (first: index %d, size %d)",
            len(dropped), max_size, dropped[0][0], dropped[0][1].size,
        )
    logger.info("Tower %s resolved to %d quotients", spec, len(kept))
    return kept
