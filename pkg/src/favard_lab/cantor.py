"""Generations K_n of the four-corner (middle-half) Cantor set.

K_n is the union of 4**n closed squares of side 4**-n.  Each refinement keeps
the four corner sub-squares of side s/4, at offsets 0 and 3s/4 per axis.
A square is addressed by its refinement digits, digit = 2*dy + dx with
dx, dy in {0, 1}; the first digit is the coarsest.

All corners are dyadic rationals, so the float64 coordinates are exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import CapacityError, ValidationError

MAX_GENERATION = 12


def _check_generation(n, limit=MAX_GENERATION):
    if isinstance(n, bool) or int(n) != n:
        raise ValidationError(f"generation must be an integer, got {n!r}")
    n = int(n)
    if n < 0:
        raise ValidationError(f"generation must be nonnegative, got {n}")
    if n > limit:
        raise CapacityError(f"generation {n} exceeds the cap of {limit}")
    return n


@dataclass(frozen=True)
class CantorSquare:
    address: tuple[int, ...]

    def __post_init__(self):
        if any(d not in (0, 1, 2, 3) for d in self.address):
            raise ValidationError(f"address digits must lie in 0..3, got {self.address}")

    @property
    def generation(self) -> int:
        return len(self.address)

    @property
    def side(self) -> float:
        return 0.25 ** self.generation

    @property
    def corner(self) -> tuple[float, float]:
        x0 = y0 = 0.0
        parent = 1.0
        for d in self.address:
            x0 += 0.75 * parent * (d & 1)
            y0 += 0.75 * parent * (d >> 1)
            parent *= 0.25
        return x0, y0

    @property
    def x0(self) -> float:
        return self.corner[0]

    @property
    def y0(self) -> float:
        return self.corner[1]

    @property
    def center(self) -> tuple[float, float]:
        x0, y0 = self.corner
        h = 0.5 * self.side
        return x0 + h, y0 + h

    @property
    def digit_pairs(self) -> tuple[tuple[int, int], ...]:
        """The address as (dx, dy) pairs."""
        return tuple((d & 1, d >> 1) for d in self.address)

    @property
    def address_string(self) -> str:
        return "".join(str(d) for d in self.address)

    def contains(self, x: float, y: float) -> bool:
        x0, y0 = self.corner
        s = self.side
        return x0 <= x <= x0 + s and y0 <= y <= y0 + s


def children(sq: CantorSquare) -> list[CantorSquare]:
    """The four corner sub-squares, in digit order."""
    if sq.generation >= MAX_GENERATION:
        raise CapacityError(f"cannot refine beyond generation {MAX_GENERATION}")
    return [CantorSquare(sq.address + (d,)) for d in range(4)]


class SquareSet:
    """All squares of one generation, stored as coordinate arrays.

    Iteration and indexing yield :class:`CantorSquare` objects in
    lexicographic address order; index i written in base 4 with n digits is
    the address of square i.
    """

    def __init__(self, n: int, x0: np.ndarray, y0: np.ndarray):
        self.n = n
        self.x0 = x0
        self.y0 = y0
        self.x0.flags.writeable = False
        self.y0.flags.writeable = False

    @property
    def side(self) -> float:
        return 0.25 ** self.n

    @property
    def half(self) -> float:
        return 0.5 * self.side

    @property
    def cx(self) -> np.ndarray:
        return self.x0 + self.half

    @property
    def cy(self) -> np.ndarray:
        return self.y0 + self.half

    def __len__(self) -> int:
        return self.x0.size

    def address_of(self, i: int) -> tuple[int, ...]:
        return tuple((i >> (2 * (self.n - 1 - t))) & 3 for t in range(self.n))

    def address_string(self, i: int) -> str:
        return "".join(str(d) for d in self.address_of(i))

    def __getitem__(self, i: int) -> CantorSquare:
        if i < 0:
            i += len(self)
        if not 0 <= i < len(self):
            raise IndexError(i)
        return CantorSquare(self.address_of(i))

    def __iter__(self) -> Iterator[CantorSquare]:
        for i in range(len(self)):
            yield self[i]

    def subset(self, indices: Sequence[int]) -> "SquareSet":
        """A view on selected squares (used for quadrant restrictions)."""
        idx = np.asarray(indices, dtype=np.int64)
        return SquareSet(self.n, self.x0[idx].copy(), self.y0[idx].copy())


def build_generation(n: int) -> SquareSet:
    """All 4**n squares of K_n in lexicographic address order."""
    n = _check_generation(n)
    dx = np.array([0.0, 1.0, 0.0, 1.0])
    dy = np.array([0.0, 0.0, 1.0, 1.0])
    x0 = np.zeros(1)
    y0 = np.zeros(1)
    parent = 1.0
    for _ in range(n):
        off = 0.75 * parent
        x0 = (x0[:, None] + off * dx[None, :]).ravel()
        y0 = (y0[:, None] + off * dy[None, :]).ravel()
        parent *= 0.25
    return SquareSet(n, x0, y0)


def _axis_member(v, n):
    v = np.asarray(v, dtype=float)
    ok = (v >= 0.0) & (v <= 1.0)
    a = np.zeros_like(v)
    length = 1.0
    for _ in range(n):
        first = v <= a + 0.25 * length
        last = v >= a + 0.75 * length
        ok &= first | last
        a = np.where(first, a, a + 0.75 * length)
        length *= 0.25
    return ok


def point_membership(x, y, n: int):
    """True where (x, y) lies in K_n (closed squares), O(n) per point.

    Accepts scalars or arrays; each coordinate must fall in the first or last
    quarter of its current interval at every level.
    """
    n = _check_generation(n)
    out = _axis_member(x, n) & _axis_member(y, n)
    return bool(out) if out.ndim == 0 else out
