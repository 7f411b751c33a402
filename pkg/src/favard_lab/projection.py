"""Orthogonal projections of Cantor squares, interval unions and multiplicity profiles.

Coordinates on the line L_theta are signed inner products <p, u> with
u = (cos theta, sin theta), measured from the global origin.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .cantor import CantorSquare, SquareSet
from .errors import ValidationError

SPECIAL_ANGLE = math.atan(0.5)
FRAMES = ("standard", "special")


@dataclass(frozen=True)
class Direction:
    """A projection direction; in the special frame theta = 0 is arctan(1/2)."""

    theta: float
    frame: str = "standard"

    def __post_init__(self):
        if self.frame not in FRAMES:
            raise ValidationError(f"frame must be one of {FRAMES}, got {self.frame!r}")

    @property
    def standard_angle(self) -> float:
        if self.frame == "special":
            return self.theta + SPECIAL_ANGLE
        return self.theta

    @property
    def u(self) -> tuple[float, float]:
        t = self.standard_angle
        return math.cos(t), math.sin(t)


@dataclass(frozen=True)
class IntervalSet:
    """Sorted, pairwise disjoint closed intervals."""

    starts: np.ndarray
    ends: np.ndarray

    @classmethod
    def union_of(cls, intervals: Iterable[Sequence[float]]) -> "IntervalSet":
        arr = np.asarray(list(intervals), dtype=float).reshape(-1, 2)
        if arr.size == 0:
            return cls(np.empty(0), np.empty(0))
        arr = arr[np.argsort(arr[:, 0], kind="stable")]
        starts = [arr[0, 0]]
        ends = [arr[0, 1]]
        for a, b in arr[1:]:
            if a <= ends[-1]:
                ends[-1] = max(ends[-1], b)
            else:
                starts.append(a)
                ends.append(b)
        return cls(np.array(starts), np.array(ends))

    @property
    def total_length(self) -> float:
        return float(np.sum(self.ends - self.starts))

    def __len__(self) -> int:
        return self.starts.size

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        i = np.searchsorted(self.starts, x, side="right") - 1
        inside = (i >= 0) & (x <= self.ends[np.clip(i, 0, None)]) if len(self) else np.zeros(x.shape, bool)
        return inside

    def distance_to_boundary(self, x):
        """Distance from x to the nearest interval endpoint."""
        x = np.asarray(x, dtype=float)
        if not len(self):
            return np.full(x.shape, np.inf)
        pts = np.sort(np.concatenate([self.starts, self.ends]))
        i = np.clip(np.searchsorted(pts, x), 1, pts.size - 1)
        return np.minimum(np.abs(x - pts[i - 1]), np.abs(x - pts[i]))

    def clip(self, lo: float, hi: float) -> "IntervalSet":
        s = np.maximum(self.starts, lo)
        e = np.minimum(self.ends, hi)
        keep = e > s
        return IntervalSet(s[keep], e[keep])


@dataclass(frozen=True)
class MultiplicityProfile:
    """Piecewise-constant count function: value counts[i] on (breakpoints[i], breakpoints[i+1])."""

    breakpoints: np.ndarray
    counts: np.ndarray = field(repr=False)

    @property
    def piece_lengths(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    def value_at(self, x):
        x = np.asarray(x, dtype=float)
        if self.counts.size == 0:
            return np.zeros(x.shape, dtype=np.int64)
        i = np.searchsorted(self.breakpoints, x, side="right") - 1
        inside = (i >= 0) & (i < self.counts.size)
        return np.where(inside, self.counts[np.clip(i, 0, self.counts.size - 1)], 0)

    def support(self) -> IntervalSet:
        on = self.counts > 0
        if not on.any():
            return IntervalSet(np.empty(0), np.empty(0))
        return IntervalSet.union_of(
            zip(self.breakpoints[:-1][on], self.breakpoints[1:][on])
        )


def intersect_length(I: Sequence[float], J: Sequence[float]) -> float:
    return max(0.0, min(I[1], J[1]) - max(I[0], J[0]))


def project_square(sq: CantorSquare, d: Direction) -> tuple[float, float]:
    ux, uy = d.u
    cx, cy = sq.center
    mid = cx * ux + cy * uy
    w = 0.5 * sq.side * (abs(ux) + abs(uy))
    return mid - w, mid + w


def project_squares(ks: SquareSet, d: Direction) -> np.ndarray:
    """Projection intervals of every square, shape (len(ks), 2)."""
    ux, uy = d.u
    mid = ks.cx * ux + ks.cy * uy
    w = ks.half * (abs(ux) + abs(uy))
    return np.stack([mid - w, mid + w], axis=1)


def multiplicity_profile(intervals, snap: float = 1e-12) -> MultiplicityProfile:
    """Sweep-line construction of the sum of interval indicators.

    Endpoints closer than ``snap`` are merged first, so projected intervals
    that should share an endpoint do not leave float-noise slivers.  Pieces
    with equal neighbouring counts are merged.
    """
    arr = np.asarray(intervals, dtype=float).reshape(-1, 2)
    if arr.shape[0] == 0:
        return MultiplicityProfile(np.empty(0), np.empty(0, dtype=np.int64))
    if np.any(arr[:, 1] < arr[:, 0]):
        raise ValidationError("interval with end before start")
    m = arr.shape[0]
    values = np.concatenate([arr[:, 0], arr[:, 1]])
    opening = np.concatenate([np.ones(m, dtype=bool), np.zeros(m, dtype=bool)])
    order = np.lexsort((opening, values))
    values = values[order]
    delta = np.where(opening[order], 1, -1)
    if snap > 0.0:
        new_cluster = np.concatenate([[True], np.diff(values) > snap])
        values = values[np.flatnonzero(new_cluster)][np.cumsum(new_cluster) - 1]
    starts = np.flatnonzero(np.concatenate([[True], values[1:] != values[:-1]]))
    points = values[starts]
    level = np.cumsum(np.add.reduceat(delta, starts))[:-1]
    if points.size < 2:
        return MultiplicityProfile(np.empty(0), np.empty(0, dtype=np.int64))
    keep = np.concatenate([[True], level[1:] != level[:-1], [True]])
    breakpoints = points[keep]
    counts = level[keep[:-1]]
    return MultiplicityProfile(breakpoints, counts.astype(np.int64))


def project_generation(ks: SquareSet, d: Direction, snap: float = 1e-12) -> MultiplicityProfile:
    """The multiplicity function f_{n,theta} of K_n along d."""
    return multiplicity_profile(project_squares(ks, d), snap=snap)


def support_length(profile: MultiplicityProfile) -> float:
    if profile.counts.size == 0:
        return 0.0
    return float(np.sum(profile.piece_lengths[profile.counts >= 1]))


def moment(profile: MultiplicityProfile, p: int) -> float:
    """Integral of f**p for p in {1, 2}."""
    if p not in (1, 2):
        raise ValidationError(f"moment order must be 1 or 2, got {p!r}")
    if profile.counts.size == 0:
        return 0.0
    c = profile.counts.astype(float)
    return float(np.sum(c ** p * profile.piece_lengths))
