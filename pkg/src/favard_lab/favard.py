"""Favard length, Buffon circle probabilities and the Buffon noodle functional.

Angle integrals use uniform midpoint nodes, which is the trapezoid rule for
periodic integrands.  Monte Carlo draws come from a counter-based stream keyed
by (seed, sample index), so estimates do not depend on the worker count.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .cantor import SquareSet, build_generation
from .errors import ValidationError
from .noodle import ZERO_NOODLE, Noodle, make_noodle

DEFAULT_ANGLES = 2048
SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class AngleGrid:
    """M uniform nodes strictly inside [lo, hi), each with weight (hi - lo)/M."""

    lo: float
    hi: float
    M: int

    def __post_init__(self):
        if self.M < 16:
            raise ValidationError(f"angle grids need at least 16 nodes, got {self.M}")
        if not self.hi > self.lo:
            raise ValidationError("angle grid domain is empty")

    @classmethod
    def half_turn(cls, M: int = DEFAULT_ANGLES) -> "AngleGrid":
        return cls(0.0, math.pi, M)

    @classmethod
    def full_turn(cls, M: int = DEFAULT_ANGLES) -> "AngleGrid":
        return cls(0.0, 2.0 * math.pi, M)

    @property
    def step(self) -> float:
        return (self.hi - self.lo) / self.M

    @property
    def nodes(self) -> np.ndarray:
        return self.lo + (np.arange(self.M) + 0.5) * self.step

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.M, self.step)

    def refined(self, factor: int = 2) -> "AngleGrid":
        return AngleGrid(self.lo, self.hi, self.M * factor)


@dataclass(frozen=True)
class BuffonEstimate:
    value: float
    standard_error: float
    samples: int
    seed: int | None
    method: str = "mc"


def _default_grid(g: Noodle) -> AngleGrid:
    return AngleGrid.half_turn() if g.kind == "zero" else AngleGrid.full_turn()


def angle_stats(ks: SquareSet, g: Noodle, thetas, window=(-math.inf, math.inf), shift=0.0):
    """Per-angle columns (support, int f, int f^2, int over support of (t + shift))."""
    thetas = np.ascontiguousarray(thetas, dtype=float)
    return kernels.angle_stats(
        np.ascontiguousarray(ks.cx), np.ascontiguousarray(ks.cy), ks.half, thetas,
        g.code, g.kernel_params, float(window[0]), float(window[1]), float(shift),
    )


def favard_length(ks: SquareSet, g: Noodle = ZERO_NOODLE, grid: AngleGrid | None = None) -> float:
    """(1/2pi) * integral over theta of |Proj_theta(sigma_theta^g(K_n))|.

    Undistorted projections are pi-periodic, so a half-turn grid is doubled.
    """
    grid = grid or _default_grid(g)
    stats = angle_stats(ks, g, grid.nodes)
    total = float(np.sum(grid.weights * stats[:, 0]))
    if g.kind == "zero" and math.isclose(grid.hi - grid.lo, math.pi, rel_tol=1e-12):
        total *= 2.0
    return total / (2.0 * math.pi)


# --------------------------------------------------------------------------
# circles
# --------------------------------------------------------------------------

def _check_radius(r):
    if not r > 2.0:
        raise ValidationError(
            f"Buffon circle computations need r > 2 so the capped noodle covers the unit square, got r={r}"
        )


def circle_hit_test(z, r: float, ks: SquareSet) -> bool:
    """Does C_r(z) meet K_n?  Hierarchical descent of the 4-adic tree."""
    if not r > 0:
        raise ValidationError("radius must be positive")
    return bool(kernels.circle_hits_cantor(float(z[0]), float(z[1]), float(r), ks.n))


def circle_hit_batch(zx, zy, r: float, n: int) -> np.ndarray:
    return kernels.circle_hits_batch(np.ascontiguousarray(zx, dtype=float),
                                     np.ascontiguousarray(zy, dtype=float), float(r), n)


def circle_hit_flat(zx, zy, r: float, ks: SquareSet) -> np.ndarray:
    """Unpruned scan over every square: mindist <= r <= maxdist for some square."""
    zx = np.atleast_1d(np.asarray(zx, dtype=float))
    zy = np.atleast_1d(np.asarray(zy, dtype=float))
    out = np.zeros(zx.size, dtype=bool)
    s = ks.side
    for i in range(len(ks)):
        x0, y0 = ks.x0[i], ks.y0[i]
        dx = np.maximum(np.maximum(x0 - zx, 0.0), zx - (x0 + s))
        dy = np.maximum(np.maximum(y0 - zy, 0.0), zy - (y0 + s))
        fx = np.maximum(np.abs(zx - x0), np.abs(zx - x0 - s))
        fy = np.maximum(np.abs(zy - y0), np.abs(zy - y0 - s))
        out |= (dx * dx + dy * dy <= r * r) & (fx * fx + fy * fy >= r * r)
    return out


def annulus_radii(r: float) -> tuple[float, float]:
    """Sampling annulus about the unit-square center containing all of A_{n,r}."""
    return r - SQRT2, r + SQRT2


def buffon_circle_mc(n: int, r: float, samples: int, seed: int = 0) -> BuffonEstimate:
    """Monte Carlo estimate of |A_{n,r}| = |{z : C_r(z) meets K_n}|."""
    _check_radius(r)
    if samples < 1000:
        raise ValidationError(f"Monte Carlo needs at least 1000 samples, got {samples}")
    if seed < 0:
        raise ValidationError("seed must be nonnegative")
    build_generation(n)  # range check only
    r_in, r_out = annulus_radii(r)
    hits = int(kernels.annulus_hit_count(int(seed), int(samples), float(r), int(n), 0.5, 0.5, r_in, r_out))
    area = math.pi * (r_out ** 2 - r_in ** 2)
    p = hits / samples
    return BuffonEstimate(
        value=p * area,
        standard_error=area * math.sqrt(p * (1.0 - p) / samples),
        samples=samples,
        seed=seed,
    )


def buffon_circle_quadrature(n: int, r: float, grid: AngleGrid | None = None) -> float:
    """|A_{n,r}| in polar coordinates, exact in the radial variable.

    For each node theta the valid offsets rho form the union S_theta of the
    circle-sheared projections of K_n, and the radial integral of
    (rho + r) over S_theta is evaluated in closed form.
    """
    _check_radius(r)
    grid = grid or AngleGrid.full_turn()
    ks = build_generation(n)
    stats = angle_stats(ks, make_noodle("circle", r=r), grid.nodes, shift=r)
    return float(np.sum(grid.weights * stats[:, 3]))


def single_square_annulus_area(r: float, side: float = 1.0) -> float:
    """Area of {z : mindist(z, Q) <= r <= maxdist(z, Q)} for one square Q of the given side."""
    h = 0.5 * side
    if not r > h * SQRT2:
        raise ValidationError("radius must exceed the half-diagonal")
    reach = side * side + 4.0 * side * r + math.pi * r * r

    def F(t):
        return 0.5 * (t * math.sqrt(r * r - t * t) + r * r * math.asin(t / r))

    t1 = math.sqrt(r * r - h * h)
    quadrant = F(t1) - F(h) - h * (t1 - h)
    return reach - 4.0 * quadrant


def shear_offset_membership(ks: SquareSet, r: float, rho, theta, chunk: int = 4096):
    """Is rho in S_theta?  Also returns the distance from rho to the nearest interval endpoint."""
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    g = make_noodle("circle", r=r)
    member = np.zeros(rho.size, dtype=bool)
    dist = np.full(rho.size, np.inf)
    for start in range(0, rho.size, chunk):
        sl = slice(start, start + chunk)
        lo, hi = kernels.sheared_intervals(ks.cx, ks.cy, ks.half, theta[sl], g.code, g.kernel_params)
        x = rho[sl][:, None]
        member[sl] = np.any((lo <= x) & (x <= hi), axis=1)
        dist[sl] = np.minimum(np.abs(lo - x).min(axis=1), np.abs(hi - x).min(axis=1))
    return member, dist


# --------------------------------------------------------------------------
# noodles
# --------------------------------------------------------------------------

def buffon_noodle(n: int, g: Noodle, L: float = 12.0, tau_steps: int = 64,
                  grid: AngleGrid | None = None, ks: SquareSet | None = None) -> float:
    """Bu^g(K_n): normalized measure on (-2,2) x (-L,L) x (0,2pi) of hitting offsets.

    The sheared projections are clipped to the window (-2, 2).
    """
    if not L > 10:
        raise ValidationError(f"Buffon noodle needs L > 10, got L={L}")
    if tau_steps < 16:
        raise ValidationError(f"tau grid needs at least 16 nodes, got {tau_steps}")
    grid = grid or AngleGrid.full_turn()
    ks = ks if ks is not None else build_generation(n)
    tau_step = 2.0 * L / tau_steps
    taus = -L + (np.arange(tau_steps) + 0.5) * tau_step
    per_tau = np.empty(tau_steps)
    for i, tau in enumerate(taus):
        stats = angle_stats(ks, g.shifted(tau), grid.nodes, window=(-2.0, 2.0))
        per_tau[i] = np.sum(grid.weights * stats[:, 0])
    return float(np.sum(tau_step * per_tau)) / (16.0 * math.pi * L)
