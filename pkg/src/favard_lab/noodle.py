"""Noodles g, the shears sigma_theta^g they induce, and sheared projections.

Rotation convention: R_theta is clockwise,
    R_theta(x, y) = (x cos t + y sin t, -x sin t + y cos t),
so R_theta carries the direction u = (cos t, sin t) to the x-axis and the
projection of sigma_theta^g(p) onto L_theta is X - g(Y) with (X, Y) = R_theta p.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .cantor import CantorSquare, SquareSet
from .errors import ValidationError
from .projection import Direction

KINDS = ("zero", "circle", "sine", "linear")
_CODES = {"zero": kernels.ZERO, "circle": kernels.CIRCLE, "sine": kernels.SINE, "linear": kernels.LINEAR}
# relative guard so that values equal to a threshold up to rounding count as equal
_STRICT_GUARD = 1e-12


@dataclass(frozen=True)
class Noodle:
    """A noodle of one of four kinds, optionally translated: g_tau(y) = g(y - tau).

    circle: radius ``r`` > 2, capped sagitta r - sqrt(r^2 - y^2) for |y| <= 2.
    sine:   generation ``n`` >= 1, 4^(-n/2) sin(4^(n/4) y).
    linear: slope ``m`` and intercept ``b``.
    """

    kind: str
    r: float = 0.0
    n: int = 0
    m: float = 0.0
    b: float = 0.0
    tau: float = 0.0

    @property
    def code(self) -> int:
        return _CODES[self.kind]

    @property
    def amplitude(self) -> float:
        return 4.0 ** (-self.n / 2) if self.kind == "sine" else 0.0

    @property
    def frequency(self) -> float:
        return 4.0 ** (self.n / 4) if self.kind == "sine" else 0.0

    @property
    def kernel_params(self) -> np.ndarray:
        if self.kind == "circle":
            return np.array([self.r, 0.0, self.tau])
        if self.kind == "sine":
            return np.array([self.amplitude, self.frequency, self.tau])
        if self.kind == "linear":
            return np.array([self.m, self.b, self.tau])
        return np.array([0.0, 0.0, self.tau])

    def shifted(self, tau: float) -> "Noodle":
        """The translate y -> g(y - tau)."""
        return replace(self, tau=self.tau + tau)

    def value(self, y):
        return kernels._numpy.g_value(self.code, *self.kernel_params, y)

    def d1(self, y):
        t = np.asarray(y, dtype=float) - self.tau
        if self.kind == "circle":
            inside = np.abs(t) <= 2.0
            return np.where(inside, t / np.sqrt(self.r ** 2 - np.where(inside, t * t, 0.0)), 0.0)
        if self.kind == "sine":
            return self.amplitude * self.frequency * np.cos(self.frequency * t)
        if self.kind == "linear":
            return np.full(t.shape, float(self.m))
        return np.zeros(t.shape)

    def d2(self, y):
        t = np.asarray(y, dtype=float) - self.tau
        if self.kind == "circle":
            inside = np.abs(t) < 2.0
            return np.where(inside, self.r ** 2 / (self.r ** 2 - np.where(inside, t * t, 0.0)) ** 1.5, 0.0)
        if self.kind == "sine":
            k = self.frequency
            return -self.amplitude * k * k * np.sin(k * t)
        return np.zeros(t.shape)

    # sup norms over the active window [-2, 2] of the untranslated noodle
    @property
    def sup_g(self) -> float:
        if self.kind == "circle":
            return self.r - math.sqrt(self.r ** 2 - 4.0)
        if self.kind == "sine":
            return self.amplitude * _sup_abs_sin(self.frequency)
        if self.kind == "linear":
            return abs(self.b) + 2.0 * abs(self.m)
        return 0.0

    @property
    def sup_g1(self) -> float:
        if self.kind == "circle":
            return 2.0 / math.sqrt(self.r ** 2 - 4.0)
        if self.kind == "sine":
            return self.amplitude * self.frequency
        if self.kind == "linear":
            return abs(self.m)
        return 0.0

    @property
    def sup_g2(self) -> float:
        if self.kind == "circle":
            return self.r ** 2 / (self.r ** 2 - 4.0) ** 1.5
        if self.kind == "sine":
            return self.amplitude * self.frequency ** 2 * _sup_abs_sin(self.frequency)
        return 0.0

    @property
    def spec(self) -> str:
        if self.kind == "circle":
            text = f"circle:r={self.r:g}"
        elif self.kind == "sine":
            text = f"sine:n={self.n}"
        elif self.kind == "linear":
            text = f"linear:m={self.m:g},b={self.b:g}"
        else:
            text = "zero"
        return text if self.tau == 0.0 else f"{text}@tau={self.tau:g}"

    def __add__(self, other):
        return NoodleSum((self, other))


def _sup_abs_sin(k):
    # sup of |sin(k y)| over |y| <= 2
    return 1.0 if 2.0 * k >= 0.5 * math.pi else math.sin(2.0 * k)


@dataclass(frozen=True)
class NoodleSum:
    """Pointwise sum of noodles; supports point shears only."""

    parts: tuple

    def value(self, y):
        return sum(p.value(y) for p in self.parts)

    def __add__(self, other):
        return NoodleSum(self.parts + (other,))


def make_noodle(kind: str, **params) -> Noodle:
    if kind not in KINDS:
        raise ValidationError(f"unknown noodle kind {kind!r}; expected one of {KINDS}")
    if kind == "circle":
        r = float(params.get("r", 0.0))
        if not r > 2.0:
            raise ValidationError(f"circle noodle requires r > 2 (sqrt(r^2 - 4) must exist), got r={r}")
        return Noodle("circle", r=r)
    if kind == "sine":
        n = params.get("n", 0)
        if int(n) != n or n < 1:
            raise ValidationError(f"sine noodle requires an integer generation n >= 1, got {n}")
        return Noodle("sine", n=int(n))
    if kind == "linear":
        return Noodle("linear", m=float(params.get("m", 0.0)), b=float(params.get("b", 0.0)))
    return Noodle("zero")


ZERO_NOODLE = Noodle("zero")


def parse_noodle(text: str) -> Noodle:
    """Parse 'circle:r=10', 'sine:n=4', 'linear:m=0.1,b=0' or 'zero'."""
    text = text.strip()
    kind, _, rest = text.partition(":")
    params = {}
    if rest:
        for item in rest.split(","):
            key, eq, val = item.partition("=")
            if not eq:
                raise ValidationError(f"bad noodle parameter {item!r} in {text!r}")
            key = key.strip()
            try:
                params[key] = int(val) if key == "n" else float(val)
            except ValueError:
                raise ValidationError(f"bad noodle parameter value {item!r} in {text!r}") from None
    return make_noodle(kind.strip(), **params)


@dataclass(frozen=True)
class ShearMap:
    """sigma_theta^g = R_{-theta} o sigma_0^g o R_theta with sigma_0^g(x, y) = (x - g(y), y)."""

    noodle: object
    theta: float

    def apply(self, x, y):
        c, s = math.cos(self.theta), math.sin(self.theta)
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if getattr(self.noodle, "kind", None) == "zero":
            return x.copy(), y.copy()
        X = x * c + y * s
        Y = -x * s + y * c
        X = X - self.noodle.value(Y)
        return X * c - Y * s, X * s + Y * c


def shear_apply(sm: ShearMap, p):
    x, y = sm.apply(p[0], p[1])
    return float(x), float(y)


def _require_kernel_noodle(g):
    if not isinstance(g, Noodle):
        raise ValidationError("sheared projections need a single Noodle, not a composite")


def sheared_projection(g: Noodle, d: Direction, sq: CantorSquare) -> tuple[float, float]:
    """[min, max] of X - g(Y) over the rotated closed square."""
    _require_kernel_noodle(g)
    t = d.standard_angle
    cx, cy = sq.center
    lo, hi = kernels.square_interval(
        cx, cy, 0.5 * sq.side, math.cos(t), math.sin(t), g.code, *g.kernel_params
    )
    return float(lo), float(hi)


def sheared_projections(g: Noodle, thetas, ks: SquareSet):
    """Sheared projection intervals of all squares at standard angles ``thetas``.

    Returns (lo, hi), each of shape (len(thetas), len(ks)).
    """
    _require_kernel_noodle(g)
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    return kernels.sheared_intervals(ks.cx, ks.cy, ks.half, thetas, g.code, g.kernel_params)


@dataclass(frozen=True)
class UndercookedReport:
    n: int
    sup_g: float
    sup_g1: float
    sup_g2: float
    weak: bool
    strong: bool
    flexible: bool
    weak_margin: float        # sup_g1 * 4^n, must be < 1
    strong_margin: float      # max(sup_g1, sup_g2) * 4^(n/5), must be < 1
    flexible_product: float   # sup_g1^4 * sup_g2 * 4^n, must be < 1


def _below(x, bound):
    return x < bound * (1.0 - _STRICT_GUARD)


def undercooked_report(g: Noodle, n: int) -> UndercookedReport:
    s0, s1, s2 = g.sup_g, g.sup_g1, g.sup_g2
    weak = _below(s0, 1.0) and _below(s1, 4.0 ** -n)
    strong = _below(s0, 1.0) and _below(s1, 4.0 ** (-n / 5)) and _below(s2, 4.0 ** (-n / 5))
    flexible = _below(s1 ** 4 * s2, 4.0 ** -n) and _below(s1, 0.01)
    return UndercookedReport(
        n=n,
        sup_g=s0,
        sup_g1=s1,
        sup_g2=s2,
        weak=weak,
        strong=strong,
        flexible=flexible,
        weak_margin=s1 * 4.0 ** n,
        strong_margin=max(s1, s2) * 4.0 ** (n / 5),
        flexible_product=s1 ** 4 * s2 * 4.0 ** n,
    )


def lipschitz_defect(sm: ShearMap, samples: int, seed: int = 0) -> float:
    """Sampled lower bound for Lip(sigma - Id) on [-2, 2]^2."""
    if samples < 2:
        raise ValidationError("lipschitz_defect needs at least 2 samples")
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-2.0, 2.0, size=(samples, 2))
    sx, sy = sm.apply(pts[:, 0], pts[:, 1])
    dx = sx - pts[:, 0]
    dy = sy - pts[:, 1]
    best = 0.0
    for i in range(samples - 1):
        num = np.hypot(dx[i + 1:] - dx[i], dy[i + 1:] - dy[i])
        den = np.hypot(pts[i + 1:, 0] - pts[i, 0], pts[i + 1:, 1] - pts[i, 1])
        ok = den > 0
        if ok.any():
            best = max(best, float(np.max(num[ok] / den[ok])))
    return best


def angle_distortion(sm: ShearMap, z, w):
    """|arg(z - w) - arg(T z - T w)| for T = sm, wrapped into [0, pi]."""
    z = np.asarray(z, dtype=float)
    w = np.asarray(w, dtype=float)
    tzx, tzy = sm.apply(z[..., 0], z[..., 1])
    twx, twy = sm.apply(w[..., 0], w[..., 1])
    a = np.arctan2(z[..., 1] - w[..., 1], z[..., 0] - w[..., 0])
    b = np.arctan2(tzy - twy, tzx - twx)
    return np.abs(np.angle(np.exp(1j * (a - b))))
