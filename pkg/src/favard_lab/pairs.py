"""Pair classes A_{j,k} of Cantor squares in the special frame.

Centers are rotated so that theta = 0 points along arctan(1/2).  A pair with
special-frame center offsets (dx, dy) is in class (j, k) when
    4^-(k+1) < |dy| <= 4^-k   and   4^-(j+1) < |dx / dy| <= 4^-j,
with j >= 1 and k >= 0.  Everything else (dy = 0, dx = 0, j <= 0, k < 0,
indices past the table, or |dx/dy| <= 4^-(n+2)) goes to the degenerate bucket.
Pairs are unordered.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .cantor import CantorSquare, SquareSet
from .errors import CapacityError, ValidationError
from .noodle import Noodle, ShearMap
from .projection import SPECIAL_ANGLE

EXACT_LIMIT = 7
DISTORTED_LIMIT = 6


def kmax_for(n: int) -> int:
    return 2 * n + 4


def special_frame(x, y):
    """Rotate standard coordinates clockwise by arctan(1/2)."""
    c, s = math.cos(SPECIAL_ANGLE), math.sin(SPECIAL_ANGLE)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return x * c + y * s, -x * s + y * c


@dataclass(frozen=True)
class PairClass:
    j: int | None
    k: int | None

    @property
    def degenerate(self) -> bool:
        return self.j is None


DEGENERATE = PairClass(None, None)


def classify_pair(Q: CantorSquare, Q2: CantorSquare) -> PairClass:
    if Q.generation != Q2.generation:
        raise ValidationError("pair classification needs squares of the same generation")
    if Q.address == Q2.address:
        raise ValidationError("pair classification needs two distinct squares")
    n = Q.generation
    (x1, y1), (x2, y2) = special_frame(*Q.center), special_frame(*Q2.center)
    xs = np.array([x1, x2])
    ys = np.array([y1, y2])
    j, k, ok = kernels.classify_pairs(xs, ys, np.array([0]), np.array([1]), n, kmax_for(n))
    if not ok[0]:
        return DEGENERATE
    return PairClass(int(j[0]), int(k[0]))


def total_pairs(count: int) -> int:
    return count * (count - 1) // 2


def unrank_pairs(p):
    """Pair indices p = b(b-1)/2 + a (a < b) back to (a, b)."""
    p = np.asarray(p, dtype=np.int64)
    b = np.floor((1.0 + np.sqrt(1.0 + 8.0 * p.astype(float))) / 2.0).astype(np.int64)
    while True:
        fix = b * (b - 1) // 2 > p
        if not fix.any():
            break
        b -= fix
    while True:
        fix = (b + 1) * b // 2 <= p
        if not fix.any():
            break
        b += fix
    return p - b * (b - 1) // 2, b


@dataclass
class PairClassTable:
    """Counts indexed [j, k]; row j = 0 is unused."""

    n: int
    counts: np.ndarray
    degenerate: float
    total: int
    mode: str = "exact"
    stderr: np.ndarray | None = field(default=None, repr=False)
    degenerate_stderr: float = 0.0
    samples: int | None = None
    seed: int | None = None

    def count(self, j: int, k: int) -> float:
        if 0 <= j < self.counts.shape[0] and 0 <= k < self.counts.shape[1]:
            return self.counts[j, k]
        return 0

    def items(self):
        """(j, k, count) for every nonempty class, in (j, k) order."""
        js, ks = np.nonzero(self.counts)
        for j, k in zip(js, ks):
            yield int(j), int(k), self.counts[j, k]

    @property
    def classified(self):
        return self.counts.sum()


def _special_centers(ks: SquareSet):
    xs, ys = special_frame(ks.cx, ks.cy)
    return np.ascontiguousarray(xs), np.ascontiguousarray(ys)


def pair_table(ks: SquareSet, mode: str = "exact", samples: int = 100_000, seed: int = 0) -> PairClassTable:
    """Class counts |A_{j,k}| by full enumeration or by uniform pair sampling.

    Sampled mode draws pairs without replacement and scales hit counts by
    N/S (Horvitz-Thompson), with finite-population standard errors.
    """
    n = ks.n
    kmax = kmax_for(n)
    xs, ys = _special_centers(ks)
    N = total_pairs(len(ks))
    if mode == "exact":
        if n > EXACT_LIMIT:
            raise CapacityError(
                f"exact pair enumeration is limited to n <= {EXACT_LIMIT}; use sampled mode for n={n}"
            )
        counts, degenerate = kernels.pair_table_exact(xs, ys, n, kmax)
        return PairClassTable(n, np.asarray(counts), int(degenerate), N)
    if mode != "sampled":
        raise ValidationError(f"pair_table mode must be 'exact' or 'sampled', got {mode!r}")
    if N == 0:
        raise ValidationError("no pairs to sample")
    S = min(int(samples), N)
    if S < 1:
        raise ValidationError("sampled mode needs at least one sample")
    rng = np.random.default_rng(seed)
    picks = np.sort(rng.choice(N, size=S, replace=False))
    ia, ib = unrank_pairs(picks)
    j, k, ok = kernels.classify_pairs(xs, ys, ia, ib, n, kmax)
    hits = np.zeros((n + 2, kmax + 1), dtype=np.int64)
    np.add.at(hits, (j[ok], k[ok]), 1)
    deg_hits = int((~ok).sum())
    scale = N / S
    fpc = (N - S) / (N - 1) if N > 1 else 0.0

    def se(h):
        p = h / S
        return N * np.sqrt(p * (1.0 - p) / S * fpc)

    return PairClassTable(
        n, hits * scale, deg_hits * scale, N, mode="sampled",
        stderr=se(hits), degenerate_stderr=float(se(deg_hits)), samples=S, seed=seed,
    )


def bound_ratios(table: PairClassTable):
    """count * 4^(k + 2j - 2n) for every class, and the maximum ratio."""
    ratios = {}
    for j, k, c in table.items():
        if j >= 1:
            ratios[(j, k)] = float(c) * 4.0 ** (k + 2 * j - 2 * table.n)
    return ratios, max(ratios.values(), default=0.0)


@dataclass
class DistortedPairs:
    table: PairClassTable
    angles: np.ndarray
    base_j: np.ndarray
    base_k: np.ndarray
    base_ok: np.ndarray
    dev_j: np.ndarray
    dev_k: np.ndarray


def sorting_grid(n: int) -> np.ndarray:
    """Uniform angles on [0, 2pi) with spacing at most 1/(16n)."""
    M = max(16, math.ceil(2.0 * math.pi * 16 * max(n, 1)))
    return (np.arange(M) + 0.5) * (2.0 * math.pi / M)


def distorted_pair_table(ks: SquareSet, g: Noodle, thetas=None) -> DistortedPairs:
    """Classes A_{j,k,T} for T = sigma^g: a pair is in (j, k) if some grid angle sorts it there.

    Requires Lip(sigma - Id) <= sup|g'| < 1/(8n).
    """
    n = ks.n
    if n < 1:
        raise ValidationError("distorted pair tables need n >= 1")
    if n > DISTORTED_LIMIT:
        raise CapacityError(f"distorted pair tables are limited to n <= {DISTORTED_LIMIT}")
    if not g.sup_g1 < 1.0 / (8 * n):
        raise ValidationError(
            f"sorting needs sup|g'| < 1/(8n) = {1.0 / (8 * n):.6g}; this noodle has {g.sup_g1:.6g}"
        )
    thetas = sorting_grid(n) if thetas is None else np.asarray(thetas, dtype=float)
    kmax = kmax_for(n)
    cx, cy = ks.cx, ks.cy
    sx = np.empty((thetas.size, len(ks)))
    sy = np.empty_like(sx)
    for i, t in enumerate(thetas):
        px, py = ShearMap(g, t).apply(cx, cy)
        sx[i], sy[i] = special_frame(px, py)
    xs, ys = _special_centers(ks)
    ia, ib = unrank_pairs(np.arange(total_pairs(len(ks)), dtype=np.int64))
    base_j, base_k, base_ok = kernels.classify_pairs(xs, ys, ia, ib, n, kmax)
    counts, degenerate, dev_j, dev_k = kernels.distorted_pair_classes(
        np.ascontiguousarray(sx), np.ascontiguousarray(sy), n, kmax,
        np.ascontiguousarray(base_j), np.ascontiguousarray(base_k),
    )
    table = PairClassTable(n, np.asarray(counts), int(degenerate), total_pairs(len(ks)), mode="distorted")
    return DistortedPairs(table, thetas, base_j, base_k, base_ok, dev_j, dev_k)
