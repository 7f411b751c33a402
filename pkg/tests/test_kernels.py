"""numba and numpy kernels must agree on shared inputs."""
import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from favard_lab import kernels
from favard_lab.cantor import build_generation
from favard_lab.noodle import ZERO_NOODLE, make_noodle
from favard_lab.pairs import _special_centers, kmax_for, sorting_grid
from favard_lab.rho import support_windows

MODS = kernels.backends()
needs_numba = pytest.mark.skipif("numba" not in MODS, reason="numba unavailable")
NOODLES = [ZERO_NOODLE, make_noodle("circle", r=3.0), make_noodle("sine", n=3),
           make_noodle("linear", m=0.3, b=-0.2)]


def both(name, *args):
    return getattr(MODS["numpy"], name)(*args), getattr(MODS["numba"], name)(*args)


def close(a, b, tol=1e-12):
    if isinstance(a, tuple):
        return all(close(x, y, tol) for x, y in zip(a, b))
    return np.allclose(np.asarray(a, dtype=float), np.asarray(b, dtype=float), rtol=tol, atol=tol)


@needs_numba
@pytest.mark.parametrize("g", NOODLES, ids=lambda g: g.spec)
def test_g_value_and_intervals(g):
    for y in np.linspace(-3, 3, 41):
        a = MODS["numpy"].g_value(g.code, *g.kernel_params, np.array([y]))[0]
        assert a == pytest.approx(MODS["numba"].g_value(g.code, *g.kernel_params, y), abs=1e-14)
    ks = build_generation(3)
    th = np.linspace(0, 2 * math.pi, 37)
    a, b = both("sheared_intervals", ks.cx, ks.cy, ks.half, th, g.code, g.kernel_params)
    assert close(a, b)


@needs_numba
@pytest.mark.parametrize("g", NOODLES, ids=lambda g: g.spec)
def test_angle_stats(g):
    ks = build_generation(4)
    th = np.linspace(0.01, 3.1, 29)
    for window, shift in (((-math.inf, math.inf), 0.0), ((-0.3, 0.4), 0.05)):
        a, b = both("angle_stats", ks.cx, ks.cy, ks.half, th, g.code, g.kernel_params, *window, shift)
        assert close(a, b)


@needs_numba
def test_circle_hits_and_mc():
    rng = np.random.default_rng(0)
    zx, zy = rng.uniform(-4, 5, 5000), rng.uniform(-4, 5, 5000)
    a, b = both("circle_hits_batch", zx, zy, 3.0, 4)
    assert np.array_equal(a, b)
    assert MODS["numpy"].circle_hits_cantor(0.5, 3.5, 3.0, 3) == MODS["numba"].circle_hits_cantor(0.5, 3.5, 3.0, 3)
    a, b = both("counter_uniforms", 11, 5, 1000)
    assert np.array_equal(a, b)
    a, b = both("annulus_hit_count", 3, 20_000, 10.0, 3, 0.5, 0.5, 10 - math.sqrt(2), 10 + math.sqrt(2))
    assert a == b


@needs_numba
def test_classification_kernels():
    ks = build_generation(4)
    xs, ys = _special_centers(ks)
    xs, ys = np.ascontiguousarray(xs), np.ascontiguousarray(ys)
    kmax = kmax_for(4)
    ta, tb = both("pair_table_exact", xs, ys, 4, kmax)
    assert np.array_equal(ta[0], tb[0]) and ta[1] == tb[1]
    ia = np.arange(0, 200, dtype=np.int64)
    ib = np.arange(50, 250, dtype=np.int64)
    a, b = both("classify_pairs", xs, ys, ia, ib, 4, kmax)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    for dx, dy in ((0.1, 0.3), (0.0, 1.0), (1.0, 0.0), (1e-9, 0.25)):
        assert MODS["numpy"].classify_raw(dx, dy) == MODS["numba"].classify_raw(dx, dy)


@needs_numba
def test_distorted_classes():
    ks = build_generation(3)
    th = sorting_grid(3)[:5]
    g = make_noodle("circle", r=96.0)
    lo, hi = kernels.sheared_intervals(ks.cx, ks.cy, ks.half, th, g.code, g.kernel_params)
    sx = np.ascontiguousarray(0.5 * (lo + hi))
    sy = np.ascontiguousarray(np.tile(ks.cy, (th.size, 1)))
    nq = len(ks)
    base = np.zeros(nq * (nq - 1) // 2, dtype=np.int64)
    a, b = both("distorted_pair_classes", sx, sy, 3, kmax_for(3), base, base)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))


@needs_numba
@pytest.mark.parametrize("g", NOODLES, ids=lambda g: g.spec)
def test_rho_windows(g):
    ks = build_generation(3)
    ia, ib = np.arange(0, 30), np.arange(30, 60)
    args = (ks.cx[ia], ks.cy[ia], ks.cx[ib], ks.cy[ib])
    wa, wb = support_windows(*args, ks.half, g)
    a, b = both("rho_windows", *args, ks.half, g.code, g.kernel_params, wa, wb, 513)
    assert close(a, b, 1e-10)


def _run(code, **env):
    full = {**os.environ, **env}
    out = subprocess.run([sys.executable, "-c", code], env=full, capture_output=True, text=True, check=True)
    return out.stdout


def test_pure_numpy_flag_selects_fallback():
    code = ("import json; from favard_lab import kernels; from favard_lab.favard import favard_length;"
            "from favard_lab.cantor import build_generation;"
            "print(json.dumps([kernels.BACKEND, favard_length(build_generation(3))]))")
    backend, value = json.loads(_run(code, FAVARD_LAB_PURE_NUMPY="1"))
    assert backend == "numpy"
    if "numba" in MODS:
        other, ref = json.loads(_run(code, FAVARD_LAB_PURE_NUMPY="0"))
        assert other == "numba"
        assert value == pytest.approx(ref, rel=1e-12)


@needs_numba
def test_thread_cap_applies():
    code = "import favard_lab.kernels, numba; print(numba.get_num_threads())"
    assert _run(code, FAVARD_LAB_THREADS="2").strip() == "2"
