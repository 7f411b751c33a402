"""Overlap integrals rho_P of pairs of (sheared) square projections.

rho_P = integral over theta in [0, 2pi) of |I_theta(Q) cap I_theta(Q')|.
The integrand vanishes outside two angular windows around the directions
perpendicular to the segment joining the centers, so only those windows are
integrated (trapezoid rule, node count doubled until stable).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .cantor import CantorSquare, SquareSet
from .errors import ValidationError
from .noodle import ZERO_NOODLE, Noodle
from .pairs import EXACT_LIMIT, classify_pair, kmax_for, special_frame, total_pairs, unrank_pairs
from .projection import SPECIAL_ANGLE
from .favard import angle_stats

BASE_NODES = 256
MAX_NODES = 4096
RTOL = 1e-3
LN4 = math.log(4.0)


def support_windows(c1x, c1y, c2x, c2y, half, g: Noodle):
    """Angular windows (start, end) bracketing the support of the overlap integrand.

    Returns arrays of shape (pairs, slots); unused slots have end <= start.
    Pairs whose straight-line windows would cover the whole circle, or are
    mostly slack from bending, get windows from :func:`scan_windows`.
    """
    c1x, c1y, c2x, c2y = (np.asarray(v, dtype=float) for v in (c1x, c1y, c2x, c2y))
    dx = c2x - c1x
    dy = c2y - c1y
    d = np.hypot(dx, dy)
    phi = np.arctan2(dy, dx)
    reach = 2.0 * math.sqrt(2.0) * half * (1.0 + g.sup_g1) + 2.0 * g.sup_g
    arg = reach / np.where(d > 0, d, 1.0) * (1.0 + 1e-9)
    width = np.arcsin(np.minimum(arg, 1.0)) + 2.0 * g.sup_g1
    full = (arg >= 1.0) | (width >= 0.5 * math.pi) | (d == 0)
    # bending dominates: a scan finds far narrower windows
    flat = 2.0 * math.sqrt(2.0) * half * (1.0 + g.sup_g1) / np.where(d > 0, d, 1.0)
    full |= width > 16.0 * np.arcsin(np.minimum(flat, 1.0))
    wa = np.stack([phi + 0.5 * math.pi - width, phi - 0.5 * math.pi - width], axis=1)
    wb = np.stack([phi + 0.5 * math.pi + width, phi - 0.5 * math.pi + width], axis=1)
    if full.any():
        sa, sb = scan_windows(c1x[full], c1y[full], c2x[full], c2y[full], half, g)
        slots = max(2, sa.shape[1])
        pad = ((0, 0), (0, slots - 2))
        wa = np.pad(wa, pad)
        wb = np.pad(wb, pad)
        wa[full] = 0.0
        wb[full] = 0.0
        wa[full, :sa.shape[1]] = sa
        wb[full, :sb.shape[1]] = sb
    return np.ascontiguousarray(wa), np.ascontiguousarray(wb)


def scan_windows(c1x, c1y, c2x, c2y, half, g: Noodle, chunk_cells: int = 1 << 22):
    """Windows from a coarse scan of the center offset D(theta) = h(c1) - h(c2).

    Each square's sheared interval lies within w = sqrt(2) half (1 + sup|g'|) of
    its center value h = X - g(Y), so overlap needs |D| <= 2w.  D is Lipschitz
    with constant d + sup|g'| (|c1| + |c2|); cells of width 2w / Lip whose
    midpoint has |D| > 3w cannot meet the support and are dropped.
    """
    w = math.sqrt(2.0) * half * (1.0 + g.sup_g1)
    d = np.hypot(c2x - c1x, c2y - c1y)
    lip = d + g.sup_g1 * (np.hypot(c1x, c1y) + np.hypot(c2x, c2y))
    cells = np.maximum(np.ceil(2.0 * math.pi * lip / (2.0 * w)).astype(np.int64), 8)
    starts, ends = [], []
    for p in range(c1x.size):
        M = int(cells[p])
        h = 2.0 * math.pi / M
        keep = np.zeros(M, dtype=bool)
        for lo in range(0, M, chunk_cells):
            th = (np.arange(lo, min(lo + chunk_cells, M)) + 0.5) * h
            c, s = np.cos(th), np.sin(th)
            D = np.zeros(th.size)
            for x, y, sign in ((c1x[p], c1y[p], 1.0), (c2x[p], c2y[p], -1.0)):
                X = x * c + y * s
                Y = -x * s + y * c
                D += sign * (X - g.value(Y))
            keep[lo:lo + th.size] = np.abs(D) <= 2.0 * w + 0.5 * lip[p] * h * (1.0 + 1e-9)
        edges = np.diff(np.concatenate([[0], keep.astype(np.int8), [0]]))
        run_a = np.flatnonzero(edges == 1)
        run_b = np.flatnonzero(edges == -1)
        starts.append(run_a * h)
        ends.append(run_b * h)
    slots = max(1, max(a.size for a in starts))
    wa = np.zeros((c1x.size, slots))
    wb = np.zeros((c1x.size, slots))
    for p, (a, b) in enumerate(zip(starts, ends)):
        wa[p, :a.size] = a
        wb[p, :b.size] = b
    return wa, wb


def start_nodes(c1x, c1y, c2x, c2y, half, g: Noodle, wa, wb, base_nodes: int = BASE_NODES):
    """Per-pair starting node count: base_nodes, doubled until one crossing of the
    support (angular width about 2 sqrt(2) s (1 + sup|g'|) / d) spans 32 nodes."""
    d = np.hypot(np.asarray(c2x) - c1x, np.asarray(c2y) - c1y)
    crossing = 4.0 * math.sqrt(2.0) * half * (1.0 + g.sup_g1) / np.maximum(d, 1e-300)
    longest = np.max(np.maximum(wb - wa, 0.0), axis=1)
    need = 32.0 * longest / crossing
    level = np.ceil(np.log2(np.maximum(need / base_nodes, 1.0))).astype(np.int64)
    return base_nodes * 2 ** level


def rho_batch(c1x, c1y, c2x, c2y, half, g: Noodle = ZERO_NOODLE,
              base_nodes: int = BASE_NODES, max_nodes: int = MAX_NODES, rtol: float = RTOL):
    """Overlap integrals for many pairs.  Returns (rho, theta_support, nodes_used).

    Each pair starts from :func:`start_nodes` and doubles until two successive
    changes are below ``rtol``; the cap is max_nodes or four times the start.
    """
    c1x, c1y, c2x, c2y = (np.ascontiguousarray(v, dtype=float) for v in (c1x, c1y, c2x, c2y))
    wa, wb = support_windows(c1x, c1y, c2x, c2y, half, g)
    params = g.kernel_params
    first = start_nodes(c1x, c1y, c2x, c2y, half, g, wa, wb, base_nodes)
    rho = np.zeros(c1x.size)
    supp = np.zeros(c1x.size)
    used = np.zeros(c1x.size, dtype=np.int64)
    for nodes0 in np.unique(first):
        group = np.flatnonzero(first == nodes0)
        cap = max(max_nodes, 4 * int(nodes0))
        nodes = int(nodes0)
        r, t = kernels.rho_windows(c1x[group], c1y[group], c2x[group], c2y[group], half,
                                   g.code, params, wa[group], wb[group], nodes)
        rho[group], supp[group], used[group] = r, t, nodes
        todo = group
        # kinks in the integrand make single small changes unreliable
        calm = np.zeros(group.size, dtype=bool)
        while todo.size and nodes < cap:
            nodes *= 2
            r2, s2 = kernels.rho_windows(c1x[todo], c1y[todo], c2x[todo], c2y[todo], half,
                                         g.code, params, wa[todo], wb[todo], nodes)
            small = np.abs(r2 - rho[todo]) <= rtol * np.abs(r2)
            rho[todo], supp[todo], used[todo] = r2, s2, nodes
            done = small & calm
            calm = small[~done]
            todo = todo[~done]
    return rho, supp, used


def rho_flat(c1, c2, half, g: Noodle = ZERO_NOODLE, nodes: int = 1_000_000, chunk: int = 1 << 16):
    """Unbracketed full-circle midpoint quadrature for one pair (oracle)."""
    h = 2.0 * math.pi / nodes
    total = 0.0
    params = g.kernel_params
    for start in range(0, nodes, chunk):
        th = (np.arange(start, min(start + chunk, nodes)) + 0.5) * h
        lo, hi = kernels.sheared_intervals(np.array([c1[0], c2[0]]), np.array([c1[1], c2[1]]),
                                           half, th, g.code, params)
        ov = np.minimum(hi[:, 0], hi[:, 1]) - np.maximum(lo[:, 0], lo[:, 1])
        total += float(np.sum(np.maximum(ov, 0.0)))
    return total * h


@dataclass(frozen=True)
class OverlapResult:
    q: str
    q2: str
    j: int | None
    k: int | None
    rho: float
    theta_support: float
    nodes: int


def rho_pair(Q: CantorSquare, Q2: CantorSquare, g: Noodle = ZERO_NOODLE,
             base_nodes: int = BASE_NODES, max_nodes: int = MAX_NODES, rtol: float = RTOL) -> OverlapResult:
    if Q.address == Q2.address:
        raise ValidationError("rho_pair needs two distinct squares")
    if Q.generation != Q2.generation:
        raise ValidationError("rho_pair needs squares of the same generation")
    c1, c2 = Q.center, Q2.center
    rho, supp, used = rho_batch([c1[0]], [c1[1]], [c2[0]], [c2[1]], 0.5 * Q.side, g,
                                base_nodes, max_nodes, rtol)
    cls = classify_pair(Q, Q2)
    return OverlapResult(Q.address_string, Q2.address_string, cls.j, cls.k,
                         float(rho[0]), float(supp[0]), int(used[0]))


# --------------------------------------------------------------------------
# surveys
# --------------------------------------------------------------------------

@dataclass
class SurveyRow:
    q: str
    q2: str
    j: int | None
    k: int
    rho: float
    score: float
    theta_support: float


@dataclass
class RhoSurvey:
    n: int
    noodle: str
    seed: int
    rows: list = field(repr=False)
    max_score: float = 0.0
    per_k_max: dict = field(default_factory=dict)
    histogram: tuple = ()
    max_support_score: float = 0.0


def sample_pairs(ks: SquareSet, count: int, seed: int):
    N = total_pairs(len(ks))
    if N == 0:
        raise ValidationError("generation has no pairs")
    rng = np.random.default_rng(seed)
    picks = np.sort(rng.choice(N, size=min(count, N), replace=False))
    return unrank_pairs(picks)


def rho_bound_survey(ks: SquareSet, g: Noodle = ZERO_NOODLE, pairs: int = 500, seed: int = 0,
                     **quad) -> RhoSurvey:
    """Normalized scores rho * 4^(2n - k) over uniformly sampled pairs.

    Pairs with equal special-frame heights (k undefined) are skipped.
    theta_support * 4^(n - k) is reported alongside.
    """
    if pairs < 1:
        raise ValidationError("survey needs at least one pair")
    n = ks.n
    ia, ib = sample_pairs(ks, pairs, seed)
    xs, ys = special_frame(ks.cx, ks.cy)
    js, kk, ok = kernels.classify_pairs(np.ascontiguousarray(xs), np.ascontiguousarray(ys),
                                        ia, ib, n, kmax_for(n))
    defined = kk != kernels.NOT_CLASSIFIED
    ia, ib, js, kk, ok = ia[defined], ib[defined], js[defined], kk[defined], ok[defined]
    cx, cy = ks.cx, ks.cy
    rho, supp, _ = rho_batch(cx[ia], cy[ia], cx[ib], cy[ib], ks.half, g, **quad)
    scores = rho * 4.0 ** (2 * n - kk)
    support_scores = supp * 4.0 ** (n - kk)
    rows = [
        SurveyRow(ks.address_string(int(a)), ks.address_string(int(b)),
                  int(j) if o else None, int(k), float(r), float(s), float(t))
        for a, b, j, k, o, r, s, t in zip(ia, ib, js, kk, ok, rho, scores, supp)
    ]
    per_k = {}
    for k, s in zip(kk, scores):
        per_k[int(k)] = max(per_k.get(int(k), 0.0), float(s))
    hist = np.histogram(scores, bins=10, range=(0.0, max(float(scores.max(initial=0.0)), 1e-300)))
    return RhoSurvey(
        n=n, noodle=g.spec, seed=seed, rows=rows,
        max_score=float(scores.max(initial=0.0)),
        per_k_max=dict(sorted(per_k.items())),
        histogram=(hist[0].tolist(), hist[1].tolist()),
        max_support_score=float(support_scores.max(initial=0.0)),
    )


# --------------------------------------------------------------------------
# linearization diagnostic
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Linearization:
    y0: float
    slope: float
    intercept: float
    delta: float
    sup_eps: float
    sup_deps: float
    bound_eps: float
    bound_deps: float
    alpha: float
    intercept_normalized: float


def _window_g2(g: Noodle, lo: float, hi: float) -> float:
    if g.kind == "circle":
        t = max(abs(lo - g.tau), abs(hi - g.tau))
        return g.r ** 2 / (g.r ** 2 - t * t) ** 1.5
    return g.sup_g2 if g.kind == "sine" else 0.0


def linearize_noodle(g: Noodle, y0: float, delta: float) -> Linearization:
    """Tangent line l(y) = m y + b at y0 and remainder bounds on [y0 - delta, y0 + delta]."""
    if delta <= 0:
        raise ValidationError("window half-width must be positive")
    lo, hi = y0 - delta, y0 + delta
    if g.kind == "circle" and not (abs(lo - g.tau) < 2.0 and abs(hi - g.tau) < 2.0):
        raise ValidationError("linearization window touches the cap kink at |y| = 2")
    m = float(g.d1(y0))
    b = float(g.value(y0)) - m * y0
    ys = np.linspace(lo, hi, 2001)
    eps = g.value(ys) - (m * ys + b)
    deps = g.d1(ys) - m
    g2 = _window_g2(g, lo, hi)
    return Linearization(
        y0=y0, slope=m, intercept=b, delta=delta,
        sup_eps=float(np.max(np.abs(eps))), sup_deps=float(np.max(np.abs(deps))),
        bound_eps=0.5 * g2 * delta * delta, bound_deps=g2 * delta,
        alpha=math.atan(m), intercept_normalized=b / math.sqrt(1.0 + m * m),
    )


# --------------------------------------------------------------------------
# cone second moments
# --------------------------------------------------------------------------

def cone_bounds(j: int) -> tuple[float, float]:
    """J_j in special-frame angles."""
    return math.atan(4.0 ** -j), math.atan(4.0 ** (-j + 1))


def in_pipeline(j: int, n: int) -> bool:
    return n >= 2 and 3 < j < math.log(n) / LN4


@dataclass
class ConeRecord:
    j: int
    n: int
    m1: float
    m2: float
    diagonal: float
    off_diagonal: float
    pair_off_diagonal: float
    pair_sum: float
    pairs_used: int
    class_pair_sum: float
    class_pairs: int
    ratio: float
    in_pipeline: bool


def cone_nodes(j: int, M: int = 256) -> tuple[np.ndarray, float]:
    lo, hi = cone_bounds(j)
    step = (hi - lo) / M
    return SPECIAL_ANGLE + lo + (np.arange(M) + 0.5) * step, step


def windows_meet(wa, wb, a: float, b: float) -> np.ndarray:
    """Does any window [wa, wb] (mod 2pi) meet [a, b]?  Shapes (pairs, slots)."""
    length = wb - wa
    s = np.mod(wa - a, 2.0 * math.pi)
    hit = (length > 0) & ((s <= b - a) | (s + length >= 2.0 * math.pi))
    return hit.any(axis=1)


def cone_second_moment(ks: SquareSet, g: Noodle, j: int, M: int = 256, **quad) -> ConeRecord:
    """int_{J_j} int f^2 computed directly and through pair overlaps.

    ``off_diagonal`` comes from the multiplicity profiles; ``pair_off_diagonal``
    recomputes it as 2 * sum_P int_{J_j} |I(Q) cap I(Q')|.  ``pair_sum`` adds
    the full-circle rho_P of every pair whose support window meets J_j, so
    m2 <= m1 + pair_sum.  ``class_pair_sum`` is the sum restricted to the
    classes j-1, j, j+1.  Pairs are enumerated exactly, so n <= 7.
    """
    if j < 1:
        raise ValidationError("cone index must be >= 1")
    n = ks.n
    if n > EXACT_LIMIT:
        raise ValidationError(f"cone pair sums enumerate pairs exactly and need n <= {EXACT_LIMIT}")
    thetas, step = cone_nodes(j, M)
    stats = angle_stats(ks, g, thetas)
    m1 = float(np.sum(step * stats[:, 1]))
    m2 = float(np.sum(step * stats[:, 2]))
    xs, ys = special_frame(ks.cx, ks.cy)
    ia, ib = unrank_pairs(np.arange(total_pairs(len(ks)), dtype=np.int64))
    js, kk, ok = kernels.classify_pairs(np.ascontiguousarray(xs), np.ascontiguousarray(ys),
                                        ia, ib, n, kmax_for(n))
    cx, cy = ks.cx, ks.cy
    c1x, c1y, c2x, c2y = (np.ascontiguousarray(v) for v in (cx[ia], cy[ia], cx[ib], cy[ib]))
    lo, hi = cone_bounds(j)
    a, b = SPECIAL_ANGLE + lo, SPECIAL_ANGLE + hi
    wa, wb = support_windows(c1x, c1y, c2x, c2y, ks.half, g)
    meet = windows_meet(wa, wb, a, b)
    in_class = ok & (np.abs(js - j) <= 1)
    rho = np.zeros(ia.size)
    need = meet | in_class
    if need.any():
        rho[need], _, _ = rho_batch(c1x[need], c1y[need], c2x[need], c2y[need], ks.half, g, **quad)
    # the pair route integrates each overlap over the cone itself, on the same midpoint nodes
    pair_off = 0.0
    if meet.any():
        pair_off = 2.0 * _cone_overlap(c1x[meet], c1y[meet], c2x[meet], c2y[meet], ks.half, g, thetas, step)
    pair_sum = float(np.sum(rho[meet]))
    bound = m1 + pair_sum
    return ConeRecord(
        j=j, n=n, m1=m1, m2=m2, diagonal=m1, off_diagonal=m2 - m1,
        pair_off_diagonal=pair_off, pair_sum=pair_sum, pairs_used=int(meet.sum()),
        class_pair_sum=float(np.sum(rho[in_class])), class_pairs=int(in_class.sum()),
        ratio=m2 / bound if bound > 0 else math.inf,
        in_pipeline=in_pipeline(j, n),
    )


def _cone_overlap(c1x, c1y, c2x, c2y, half, g, thetas, step, chunk=256):
    total = 0.0
    for start in range(0, c1x.size, chunk):
        sl = slice(start, start + chunk)
        xs = np.concatenate([c1x[sl], c2x[sl]])
        ys = np.concatenate([c1y[sl], c2y[sl]])
        lo, hi = kernels.sheared_intervals(xs, ys, half, thetas, g.code, g.kernel_params)
        m = xs.size // 2
        ov = np.minimum(hi[:, :m], hi[:, m:]) - np.maximum(lo[:, :m], lo[:, m:])
        total += float(np.sum(np.maximum(ov, 0.0)))
    return total * step
