"""numba implementations of the hot loops.

Every public function here has a twin with the same signature in
``_numpy.py``; ``kernels/__init__.py`` picks one of the two at import time.
"""
import math

import numpy as np
from numba import njit, prange

ZERO, CIRCLE, SINE, LINEAR = 0, 1, 2, 3
LN4 = math.log(4.0)
TWO_PI = 2.0 * math.pi
NOT_CLASSIFIED = 1 << 20

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0


# --------------------------------------------------------------------------
# noodles and sheared projections
# --------------------------------------------------------------------------

@njit(cache=True, inline="always")
def g_value(code, a, b, tau, y):
    t = y - tau
    if code == CIRCLE:
        if abs(t) <= 2.0:
            return a - math.sqrt(a * a - t * t)
        return a - math.sqrt(a * a - 4.0)
    if code == SINE:
        return a * math.sin(b * t)
    if code == LINEAR:
        return a * t + b
    return 0.0


@njit(cache=True, inline="always")
def _edge_point(X0, Y0, eX, eY, Y, code, a, b, tau):
    t = (Y - Y0) / eY
    return X0 + t * eX - g_value(code, a, b, tau, Y)


@njit(cache=True)
def _edge_extrema(X0, Y0, X1, Y1, code, a, b, tau, lo, hi):
    # interior critical points of x - g(y) along one edge
    eX = X1 - X0
    eY = Y1 - Y0
    if abs(eY) < 1e-300:
        return lo, hi
    slope = eX / eY
    ylo = min(Y0, Y1)
    yhi = max(Y0, Y1)
    if code == CIRCLE:
        tc = slope * a / math.sqrt(1.0 + slope * slope)
        if abs(tc) < 2.0:
            Yc = tc + tau
            if ylo < Yc < yhi:
                h = _edge_point(X0, Y0, eX, eY, Yc, code, a, b, tau)
                lo = min(lo, h)
                hi = max(hi, h)
        for Yk in (tau - 2.0, tau + 2.0):
            if ylo < Yk < yhi:
                h = _edge_point(X0, Y0, eX, eY, Yk, code, a, b, tau)
                lo = min(lo, h)
                hi = max(hi, h)
    elif code == SINE:
        amp = a * b
        if amp == 0.0 or b <= 0.0:
            return lo, hi
        cval = slope / amp
        if abs(cval) > 1.0:
            return lo, hi
        base = math.acos(cval)
        plo = b * (ylo - tau)
        phi = b * (yhi - tau)
        m0 = int(math.floor((plo - base) / TWO_PI))
        m1 = int(math.ceil((phi + base) / TWO_PI))
        for m in range(m0, m1 + 1):
            for sgn in (-1.0, 1.0):
                Yc = (sgn * base + TWO_PI * m) / b + tau
                if ylo < Yc < yhi:
                    h = _edge_point(X0, Y0, eX, eY, Yc, code, a, b, tau)
                    lo = min(lo, h)
                    hi = max(hi, h)
    return lo, hi


@njit(cache=True)
def square_interval(cx, cy, half, c, s, code, a, b, tau):
    """Range of x - g(y) over the square after clockwise rotation by theta."""
    X = cx * c + cy * s
    Y = -cx * s + cy * c
    if code == ZERO:
        w = half * (abs(c) + abs(s))
        return X - w, X + w
    # corners (-,-), (+,-), (+,+), (-,+) in the rotated frame
    px = half * (c - s)
    py = half * (s + c)
    X0 = X - half * (c + s)
    Y0 = Y + half * (s - c)
    X1 = X + px
    Y1 = Y - py
    X2 = X + half * (c + s)
    Y2 = Y - half * (s - c)
    X3 = X - px
    Y3 = Y + py
    h0 = X0 - g_value(code, a, b, tau, Y0)
    h1 = X1 - g_value(code, a, b, tau, Y1)
    h2 = X2 - g_value(code, a, b, tau, Y2)
    h3 = X3 - g_value(code, a, b, tau, Y3)
    lo = min(min(h0, h1), min(h2, h3))
    hi = max(max(h0, h1), max(h2, h3))
    if code == LINEAR:
        return lo, hi
    lo, hi = _edge_extrema(X0, Y0, X1, Y1, code, a, b, tau, lo, hi)
    lo, hi = _edge_extrema(X1, Y1, X2, Y2, code, a, b, tau, lo, hi)
    lo, hi = _edge_extrema(X2, Y2, X3, Y3, code, a, b, tau, lo, hi)
    lo, hi = _edge_extrema(X3, Y3, X0, Y0, code, a, b, tau, lo, hi)
    return lo, hi


@njit(parallel=True, cache=True)
def sheared_intervals(cx, cy, half, thetas, code, params):
    nt = thetas.size
    nq = cx.size
    a, b, tau = params[0], params[1], params[2]
    lo = np.empty((nt, nq))
    hi = np.empty((nt, nq))
    for it in prange(nt):
        c = math.cos(thetas[it])
        s = math.sin(thetas[it])
        for q in range(nq):
            l, h = square_interval(cx[q], cy[q], half, c, s, code, a, b, tau)
            lo[it, q] = l
            hi[it, q] = h
    return lo, hi


@njit(cache=True)
def _sweep_stats(lo, hi, wlo, whi, shift, out):
    # lo and hi sorted independently; closing events win ties
    n = lo.size
    i = 0
    j = 0
    count = 0
    prev = 0.0
    support = 0.0
    m1 = 0.0
    m2 = 0.0
    weighted = 0.0
    while j < n:
        if i < n and lo[i] < hi[j]:
            x = lo[i]
            i += 1
            delta = 1
        else:
            x = hi[j]
            j += 1
            delta = -1
        if count > 0 and x > prev:
            length = x - prev
            m1 += count * length
            m2 += count * count * length
            pa = max(prev, wlo)
            pb = min(x, whi)
            if pb > pa:
                support += pb - pa
                weighted += (pb - pa) * (0.5 * (pa + pb) + shift)
        count += delta
        prev = x
    out[0] = support
    out[1] = m1
    out[2] = m2
    out[3] = weighted


@njit(parallel=True, cache=True)
def angle_stats(cx, cy, half, thetas, code, params, wlo, whi, shift):
    """Per-angle (support length, first moment, second moment, weighted support).

    The support is clipped to [wlo, whi]; the weighted column integrates
    (t + shift) over the clipped support.
    """
    nt = thetas.size
    nq = cx.size
    a, b, tau = params[0], params[1], params[2]
    out = np.zeros((nt, 4))
    for it in prange(nt):
        c = math.cos(thetas[it])
        s = math.sin(thetas[it])
        lo = np.empty(nq)
        hi = np.empty(nq)
        for q in range(nq):
            l, h = square_interval(cx[q], cy[q], half, c, s, code, a, b, tau)
            lo[q] = l
            hi[q] = h
        lo.sort()
        hi.sort()
        _sweep_stats(lo, hi, wlo, whi, shift, out[it])
    return out


# --------------------------------------------------------------------------
# circle hit test and counter-based random streams
# --------------------------------------------------------------------------

@njit(cache=True)
def circle_hits_cantor(zx, zy, r, n):
    """Does the circle of radius r about (zx, zy) meet the closed set K_n?"""
    size = 3 * n + 8
    sx = np.empty(size)
    sy = np.empty(size)
    sl = np.empty(size, dtype=np.int64)
    sp = 0
    sx[0] = 0.0
    sy[0] = 0.0
    sl[0] = 0
    sp = 1
    r2 = r * r
    while sp > 0:
        sp -= 1
        x0 = sx[sp]
        y0 = sy[sp]
        lev = sl[sp]
        side = 0.25 ** lev
        x1 = x0 + side
        y1 = y0 + side
        dx = max(x0 - zx, 0.0, zx - x1)
        dy = max(y0 - zy, 0.0, zy - y1)
        if dx * dx + dy * dy > r2:
            continue
        fx = max(abs(zx - x0), abs(zx - x1))
        fy = max(abs(zy - y0), abs(zy - y1))
        if fx * fx + fy * fy < r2:
            continue
        if lev == n:
            return True
        off = 0.75 * side
        for d in range(4):
            sx[sp] = x0 + off * (d & 1)
            sy[sp] = y0 + off * (d >> 1)
            sl[sp] = lev + 1
            sp += 1
    return False


@njit(parallel=True, cache=True)
def circle_hits_batch(zx, zy, r, n):
    out = np.zeros(zx.size, dtype=np.bool_)
    for i in prange(zx.size):
        out[i] = circle_hits_cantor(zx[i], zy[i], r, n)
    return out


@njit(cache=True, inline="always")
def splitmix64(x):
    z = x + _GOLDEN
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


@njit(cache=True, inline="always")
def _unit(z):
    return np.float64(z >> _S11) * _INV53


@njit(cache=True)
def counter_uniforms(seed, start, count):
    """Two uniforms per sample index, keyed only by (seed, index)."""
    key = splitmix64(np.uint64(seed))
    out = np.empty((count, 2))
    for i in range(count):
        idx = np.uint64(start + i)
        base = key + np.uint64(2) * idx
        out[i, 0] = _unit(splitmix64(base))
        out[i, 1] = _unit(splitmix64(base + np.uint64(1)))
    return out


@njit(parallel=True, cache=True)
def annulus_hit_count(seed, samples, r, n, ccx, ccy, r_in, r_out):
    key = splitmix64(np.uint64(seed))
    hits = np.zeros(samples, dtype=np.uint8)
    a2 = r_in * r_in
    span = r_out * r_out - a2
    for i in prange(samples):
        base = key + np.uint64(2) * np.uint64(i)
        u1 = _unit(splitmix64(base))
        u2 = _unit(splitmix64(base + np.uint64(1)))
        rad = math.sqrt(a2 + u1 * span)
        ang = TWO_PI * u2
        if circle_hits_cantor(ccx + rad * math.cos(ang), ccy + rad * math.sin(ang), r, n):
            hits[i] = 1
    return np.int64(hits.sum())


# --------------------------------------------------------------------------
# pair classification
# --------------------------------------------------------------------------

@njit(cache=True)
def classify_raw(dx, dy):
    """(j, k) with 4^-(k+1) < |dy| <= 4^-k and 4^-(j+1) < |dx/dy| <= 4^-j."""
    ady = abs(dy)
    if ady == 0.0:
        return NOT_CLASSIFIED, NOT_CLASSIFIED
    k = int(math.floor(-math.log(ady) / LN4))
    while ady > 4.0 ** (-k):
        k -= 1
    while ady <= 4.0 ** (-k - 1):
        k += 1
    ratio = abs(dx) / ady
    if ratio == 0.0:
        return NOT_CLASSIFIED, k
    j = int(math.floor(-math.log(ratio) / LN4))
    while ratio > 4.0 ** (-j):
        j -= 1
    while ratio <= 4.0 ** (-j - 1):
        j += 1
    return j, k


@njit(cache=True, inline="always")
def _in_table(dx, dy, j, k, n, kmax):
    if j == NOT_CLASSIFIED or k == NOT_CLASSIFIED:
        return False
    if j < 1 or k < 0 or k > kmax or j > n + 1:
        return False
    if abs(dx) <= 4.0 ** (-(n + 2)) * abs(dy):
        return False
    return True


@njit(cache=True)
def classify_pairs(xs, ys, ia, ib, n, kmax):
    m = ia.size
    js = np.empty(m, dtype=np.int64)
    ks = np.empty(m, dtype=np.int64)
    ok = np.empty(m, dtype=np.bool_)
    for p in range(m):
        dx = xs[ib[p]] - xs[ia[p]]
        dy = ys[ib[p]] - ys[ia[p]]
        j, k = classify_raw(dx, dy)
        js[p] = j
        ks[p] = k
        ok[p] = _in_table(dx, dy, j, k, n, kmax)
    return js, ks, ok


@njit(parallel=True, cache=True)
def pair_table_exact(xs, ys, n, kmax):
    nq = xs.size
    nb = 64 if nq >= 64 else max(nq, 1)
    tabs = np.zeros((nb, n + 2, kmax + 1), dtype=np.int64)
    degs = np.zeros(nb, dtype=np.int64)
    for blk in prange(nb):
        for a in range(blk, nq, nb):
            xa = xs[a]
            ya = ys[a]
            for b in range(a + 1, nq):
                dx = xs[b] - xa
                dy = ys[b] - ya
                j, k = classify_raw(dx, dy)
                if _in_table(dx, dy, j, k, n, kmax):
                    tabs[blk, j, k] += 1
                else:
                    degs[blk] += 1
    return tabs.sum(axis=0), degs.sum()


@njit(parallel=True, cache=True)
def distorted_pair_classes(sx, sy, n, kmax, base_j, base_k):
    """Classify every unordered pair at every sheared configuration.

    sx, sy have shape (angles, squares).  Pairs are indexed by
    p = b(b-1)/2 + a for a < b.  Returns the table of distinct pairs per
    class, the number of pairs degenerate at some angle, and per-pair
    maximal index deviations from (base_j, base_k).
    """
    nt, nq = sx.shape
    npairs = nq * (nq - 1) // 2
    nb = 64 if nq >= 64 else max(nq, 1)
    tabs = np.zeros((nb, n + 2, kmax + 1), dtype=np.int64)
    degs = np.zeros(nb, dtype=np.int64)
    dev_j = np.zeros(npairs, dtype=np.int64)
    dev_k = np.zeros(npairs, dtype=np.int64)
    for blk in prange(nb):
        seen = np.empty(4 * nt + 1, dtype=np.int64)
        for b in range(1 + blk, nq, nb):
            for a in range(b):
                p = b * (b - 1) // 2 + a
                nseen = 0
                degenerate = False
                dj = 0
                dk = 0
                for it in range(nt):
                    dx = sx[it, b] - sx[it, a]
                    dy = sy[it, b] - sy[it, a]
                    j, k = classify_raw(dx, dy)
                    dj = max(dj, abs(j - base_j[p]))
                    dk = max(dk, abs(k - base_k[p]))
                    if not _in_table(dx, dy, j, k, n, kmax):
                        degenerate = True
                        continue
                    code = j * (kmax + 1) + k
                    found = False
                    for t in range(nseen):
                        if seen[t] == code:
                            found = True
                            break
                    if not found:
                        seen[nseen] = code
                        nseen += 1
                        tabs[blk, j, k] += 1
                if degenerate:
                    degs[blk] += 1
                dev_j[p] = dj
                dev_k[p] = dk
    return tabs.sum(axis=0), degs.sum(), dev_j, dev_k


# --------------------------------------------------------------------------
# overlap integrals
# --------------------------------------------------------------------------

@njit(parallel=True, cache=True)
def rho_windows(c1x, c1y, c2x, c2y, half, code, params, wa, wb, nodes):
    """Trapezoid integral of the projection overlap over up to two windows.

    Returns (integral, measure of angles with positive overlap).
    """
    npair = c1x.size
    a, b, tau = params[0], params[1], params[2]
    rho = np.zeros(npair)
    supp = np.zeros(npair)
    for p in prange(npair):
        acc = 0.0
        sacc = 0.0
        for w in range(wa.shape[1]):
            lo_t = wa[p, w]
            hi_t = wb[p, w]
            if hi_t <= lo_t:
                continue
            h = (hi_t - lo_t) / (nodes - 1)
            for i in range(nodes):
                th = lo_t + i * h
                wt = 0.5 * h if i == 0 or i == nodes - 1 else h
                c = math.cos(th)
                s = math.sin(th)
                l1, h1 = square_interval(c1x[p], c1y[p], half, c, s, code, a, b, tau)
                l2, h2 = square_interval(c2x[p], c2y[p], half, c, s, code, a, b, tau)
                ov = min(h1, h2) - max(l1, l2)
                if ov > 0.0:
                    acc += wt * ov
                    sacc += wt
        rho[p] = acc
        supp[p] = sacc
    return rho, supp
