"""Vectorised numpy twins of the numba kernels in ``_jit.py``.

Used when FAVARD_LAB_PURE_NUMPY=1 or numba is unavailable, and as an
independent second route in the test suite.
"""
import math

import numpy as np

ZERO, CIRCLE, SINE, LINEAR = 0, 1, 2, 3
LN4 = math.log(4.0)
TWO_PI = 2.0 * math.pi
NOT_CLASSIFIED = 1 << 20

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_INV53 = 1.0 / 9007199254740992.0

_CHUNK = 1 << 20


def g_value(code, a, b, tau, y):
    t = np.asarray(y, dtype=float) - tau
    if code == CIRCLE:
        inner = a - np.sqrt(np.maximum(a * a - t * t, 0.0))
        return np.where(np.abs(t) <= 2.0, inner, a - math.sqrt(a * a - 4.0))
    if code == SINE:
        return a * np.sin(b * t)
    if code == LINEAR:
        return a * t + b
    return np.zeros_like(t)


def _edge_extrema(X0, Y0, X1, Y1, code, a, b, tau, lo, hi):
    eX = X1 - X0
    eY = Y1 - Y0
    ok = np.abs(eY) >= 1e-300
    safe_eY = np.where(ok, eY, 1.0)
    slope = eX / safe_eY
    ylo = np.minimum(Y0, Y1)
    yhi = np.maximum(Y0, Y1)

    def consider(Yc, mask):
        nonlocal lo, hi
        mask = mask & ok & (ylo < Yc) & (Yc < yhi)
        if not mask.any():
            return
        t = (Yc - Y0) / safe_eY
        h = X0 + t * eX - g_value(code, a, b, tau, Yc)
        lo = np.where(mask, np.minimum(lo, h), lo)
        hi = np.where(mask, np.maximum(hi, h), hi)

    if code == CIRCLE:
        tc = slope * a / np.sqrt(1.0 + slope * slope)
        consider(tc + tau, np.abs(tc) < 2.0)
        everywhere = np.ones(np.shape(lo), dtype=bool)
        consider(np.full(np.shape(lo), tau - 2.0), everywhere)
        consider(np.full(np.shape(lo), tau + 2.0), everywhere)
    elif code == SINE:
        amp = a * b
        if amp == 0.0 or b <= 0.0:
            return lo, hi
        cval = slope / amp
        valid = np.abs(cval) <= 1.0
        base = np.arccos(np.clip(cval, -1.0, 1.0))
        plo = b * (ylo - tau)
        phi = b * (yhi - tau)
        m0 = np.floor((plo - base) / TWO_PI)
        m1 = np.ceil((phi + base) / TWO_PI)
        if valid.any():
            lo_m = int(m0[valid].min())
            hi_m = int(m1[valid].max())
            for m in range(lo_m, hi_m + 1):
                for sgn in (-1.0, 1.0):
                    Yc = (sgn * base + TWO_PI * m) / b + tau
                    consider(Yc, valid)
    return lo, hi


def square_interval(cx, cy, half, c, s, code, a, b, tau):
    """Elementwise (broadcasting) range of x - g(y) over rotated squares."""
    cx, cy, c, s = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (cx, cy, c, s)))
    X = cx * c + cy * s
    Y = -cx * s + cy * c
    if code == ZERO:
        w = half * (np.abs(c) + np.abs(s))
        return X - w, X + w
    px = half * (c - s)
    py = half * (s + c)
    corners = (
        (X - half * (c + s), Y + half * (s - c)),
        (X + px, Y - py),
        (X + half * (c + s), Y - half * (s - c)),
        (X - px, Y + py),
    )
    hs = [cxk - g_value(code, a, b, tau, cyk) for cxk, cyk in corners]
    lo = np.minimum(np.minimum(hs[0], hs[1]), np.minimum(hs[2], hs[3]))
    hi = np.maximum(np.maximum(hs[0], hs[1]), np.maximum(hs[2], hs[3]))
    if code == LINEAR:
        return lo, hi
    for e in range(4):
        (xa, ya), (xb, yb) = corners[e], corners[(e + 1) % 4]
        lo, hi = _edge_extrema(xa, ya, xb, yb, code, a, b, tau, lo, hi)
    return lo, hi


def sheared_intervals(cx, cy, half, thetas, code, params):
    a, b, tau = float(params[0]), float(params[1]), float(params[2])
    c = np.cos(thetas)[:, None]
    s = np.sin(thetas)[:, None]
    return square_interval(cx[None, :], cy[None, :], half, c, s, code, a, b, tau)


def _sweep_rows(lo, hi, wlo, whi, shift):
    rows, nq = lo.shape
    values = np.concatenate([lo, hi], axis=1)
    # closing events (kind 0) sort before opening events (kind 1) at ties
    kind = np.concatenate([np.ones((rows, nq), dtype=np.int8), np.zeros((rows, nq), dtype=np.int8)], axis=1)
    order = np.lexsort((kind, values), axis=-1)
    values = np.take_along_axis(values, order, axis=1)
    delta = np.where(np.take_along_axis(kind, order, axis=1) == 1, 1, -1)
    count = np.cumsum(delta, axis=1)[:, :-1].astype(float)
    left = values[:, :-1]
    right = values[:, 1:]
    length = right - left
    m1 = np.sum(count * length, axis=1)
    m2 = np.sum(count * count * length, axis=1)
    pa = np.maximum(left, wlo)
    pb = np.minimum(right, whi)
    clipped = np.where((count > 0) & (pb > pa), pb - pa, 0.0)
    support = np.sum(clipped, axis=1)
    weighted = np.sum(clipped * (0.5 * (pa + pb) + shift), axis=1)
    return np.stack([support, m1, m2, weighted], axis=1)


def angle_stats(cx, cy, half, thetas, code, params, wlo, whi, shift):
    thetas = np.asarray(thetas, dtype=float)
    out = np.zeros((thetas.size, 4))
    step = max(1, _CHUNK // max(cx.size, 1))
    for start in range(0, thetas.size, step):
        sl = slice(start, start + step)
        lo, hi = sheared_intervals(cx, cy, half, thetas[sl], code, params)
        out[sl] = _sweep_rows(lo, hi, wlo, whi, shift)
    return out


def circle_hits_batch(zx, zy, r, n):
    zx = np.asarray(zx, dtype=float)
    zy = np.asarray(zy, dtype=float)
    hits = np.zeros(zx.size, dtype=bool)
    r2 = r * r
    for start in range(0, zx.size, 1 << 16):
        idx = np.arange(start, min(start + (1 << 16), zx.size))
        x0 = np.zeros(idx.size)
        y0 = np.zeros(idx.size)
        for lev in range(n + 1):
            side = 0.25 ** lev
            px = zx[idx]
            py = zy[idx]
            dx = np.maximum(np.maximum(x0 - px, 0.0), px - (x0 + side))
            dy = np.maximum(np.maximum(y0 - py, 0.0), py - (y0 + side))
            fx = np.maximum(np.abs(px - x0), np.abs(px - x0 - side))
            fy = np.maximum(np.abs(py - y0), np.abs(py - y0 - side))
            keep = (dx * dx + dy * dy <= r2) & (fx * fx + fy * fy >= r2)
            idx, x0, y0 = idx[keep], x0[keep], y0[keep]
            if lev == n or idx.size == 0:
                break
            off = 0.75 * side
            idx = np.repeat(idx, 4)
            x0 = np.repeat(x0, 4) + off * np.tile([0.0, 1.0, 0.0, 1.0], x0.size)
            y0 = np.repeat(y0, 4) + off * np.tile([0.0, 0.0, 1.0, 1.0], y0.size)
        hits[idx] = True
    return hits


def circle_hits_cantor(zx, zy, r, n):
    return bool(circle_hits_batch(np.array([zx]), np.array([zy]), r, n)[0])


def splitmix64(x):
    # arithmetic is mod 2^64 on purpose
    with np.errstate(over="ignore"):
        z = np.asarray(x, dtype=np.uint64) + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))


def _unit(z):
    return (z >> np.uint64(11)).astype(np.float64) * _INV53


def counter_uniforms(seed, start, count):
    key = splitmix64(np.uint64(seed))
    idx = np.arange(start, start + count, dtype=np.uint64)
    with np.errstate(over="ignore"):
        base = key + np.uint64(2) * idx
    return np.stack([_unit(splitmix64(base)), _unit(splitmix64(base + np.uint64(1)))], axis=1)


def annulus_hit_count(seed, samples, r, n, ccx, ccy, r_in, r_out):
    total = 0
    a2 = r_in * r_in
    span = r_out * r_out - a2
    for start in range(0, samples, 1 << 18):
        count = min(1 << 18, samples - start)
        u = counter_uniforms(seed, start, count)
        rad = np.sqrt(a2 + u[:, 0] * span)
        ang = TWO_PI * u[:, 1]
        total += int(circle_hits_batch(ccx + rad * np.cos(ang), ccy + rad * np.sin(ang), r, n).sum())
    return total


def _classify_arrays(dx, dy):
    dx = np.asarray(dx, dtype=float)
    dy = np.asarray(dy, dtype=float)
    ady = np.abs(dy)
    zero_y = ady == 0.0
    safe_y = np.where(zero_y, 1.0, ady)
    k = np.floor(-np.log(safe_y) / LN4).astype(np.int64)
    while True:
        fix = safe_y > 4.0 ** (-k.astype(float))
        if not fix.any():
            break
        k -= fix
    while True:
        fix = safe_y <= 4.0 ** (-k.astype(float) - 1)
        if not fix.any():
            break
        k += fix
    ratio = np.abs(dx) / safe_y
    zero_x = ratio == 0.0
    safe_r = np.where(zero_x, 1.0, ratio)
    j = np.floor(-np.log(safe_r) / LN4).astype(np.int64)
    while True:
        fix = safe_r > 4.0 ** (-j.astype(float))
        if not fix.any():
            break
        j -= fix
    while True:
        fix = safe_r <= 4.0 ** (-j.astype(float) - 1)
        if not fix.any():
            break
        j += fix
    j = np.where(zero_x | zero_y, NOT_CLASSIFIED, j)
    k = np.where(zero_y, NOT_CLASSIFIED, k)
    return j, k


def classify_raw(dx, dy):
    j, k = _classify_arrays(np.array([dx]), np.array([dy]))
    return int(j[0]), int(k[0])


def _in_table(dx, dy, j, k, n, kmax):
    return (
        (j != NOT_CLASSIFIED) & (k != NOT_CLASSIFIED)
        & (j >= 1) & (k >= 0) & (k <= kmax) & (j <= n + 1)
        & (np.abs(dx) > 4.0 ** (-(n + 2)) * np.abs(dy))
    )


def classify_pairs(xs, ys, ia, ib, n, kmax):
    dx = xs[ib] - xs[ia]
    dy = ys[ib] - ys[ia]
    j, k = _classify_arrays(dx, dy)
    return j, k, _in_table(dx, dy, j, k, n, kmax)


def pair_table_exact(xs, ys, n, kmax):
    table = np.zeros((n + 2, kmax + 1), dtype=np.int64)
    degenerate = 0
    for a in range(xs.size - 1):
        dx = xs[a + 1:] - xs[a]
        dy = ys[a + 1:] - ys[a]
        j, k = _classify_arrays(dx, dy)
        ok = _in_table(dx, dy, j, k, n, kmax)
        np.add.at(table, (j[ok], k[ok]), 1)
        degenerate += int((~ok).sum())
    return table, degenerate


def distorted_pair_classes(sx, sy, n, kmax, base_j, base_k):
    nt, nq = sx.shape
    npairs = nq * (nq - 1) // 2
    table = np.zeros((n + 2, kmax + 1), dtype=np.int64)
    degenerate = 0
    dev_j = np.zeros(npairs, dtype=np.int64)
    dev_k = np.zeros(npairs, dtype=np.int64)
    b_all, a_all = _unrank_all(nq)
    step = max(1, (1 << 22) // max(nt, 1))
    for start in range(0, npairs, step):
        sl = slice(start, min(start + step, npairs))
        ia, ib = a_all[sl], b_all[sl]
        dx = sx[:, ib] - sx[:, ia]
        dy = sy[:, ib] - sy[:, ia]
        j, k = _classify_arrays(dx, dy)
        ok = _in_table(dx, dy, j, k, n, kmax)
        dev_j[sl] = np.abs(j - base_j[sl][None, :]).max(axis=0)
        dev_k[sl] = np.abs(k - base_k[sl][None, :]).max(axis=0)
        degenerate += int((~ok).any(axis=0).sum())
        code = np.where(ok, j * (kmax + 1) + k, -1)
        code = np.sort(code, axis=0)
        first = np.ones_like(code, dtype=bool)
        first[1:] = code[1:] != code[:-1]
        keep = first & (code >= 0)
        vals = code[keep]
        np.add.at(table, (vals // (kmax + 1), vals % (kmax + 1)), 1)
    return table, degenerate, dev_j, dev_k


def _unrank_all(nq):
    b = np.repeat(np.arange(nq, dtype=np.int64), np.arange(nq, dtype=np.int64))
    a = np.arange(b.size, dtype=np.int64) - b * (b - 1) // 2
    return b, a


def rho_windows(c1x, c1y, c2x, c2y, half, code, params, wa, wb, nodes):
    a, b, tau = float(params[0]), float(params[1]), float(params[2])
    npair = c1x.size
    rho = np.zeros(npair)
    supp = np.zeros(npair)
    wt = np.ones(nodes)
    wt[0] = wt[-1] = 0.5
    frac = np.arange(nodes) / (nodes - 1)
    for w in range(wa.shape[1]):
        lo_t = wa[:, w]
        hi_t = wb[:, w]
        live = hi_t > lo_t
        if not live.any():
            continue
        h = np.where(live, (hi_t - lo_t) / (nodes - 1), 0.0)
        th = lo_t[:, None] + frac[None, :] * (hi_t - lo_t)[:, None]
        c = np.cos(th)
        s = np.sin(th)
        l1, h1 = square_interval(c1x[:, None], c1y[:, None], half, c, s, code, a, b, tau)
        l2, h2 = square_interval(c2x[:, None], c2y[:, None], half, c, s, code, a, b, tau)
        ov = np.minimum(h1, h2) - np.maximum(l1, l2)
        pos = ov > 0.0
        rho += h * np.sum(np.where(pos, ov, 0.0) * wt, axis=1)
        supp += h * np.sum(pos * wt, axis=1)
    return rho, supp
