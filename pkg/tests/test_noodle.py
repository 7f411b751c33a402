import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from favard_lab.cantor import CantorSquare, build_generation
from favard_lab.errors import ValidationError
from favard_lab.noodle import (
    ZERO_NOODLE,
    Noodle,
    ShearMap,
    angle_distortion,
    lipschitz_defect,
    make_noodle,
    parse_noodle,
    shear_apply,
    sheared_projection,
    sheared_projections,
    undercooked_report,
)
from favard_lab.projection import Direction, project_square


def test_circle_values():
    g = make_noodle("circle", r=10)
    assert g.value(0.0) == 0.0
    assert g.value(2.0) == pytest.approx(10 - math.sqrt(96), abs=1e-15)
    assert g.value(3.0) == g.value(2.0)
    assert g.value(-7.0) == g.value(2.0)


def test_sine_metadata():
    g = make_noodle("sine", n=4)
    assert g.amplitude == 1 / 16 and g.frequency == 4
    assert g.sup_g1 == pytest.approx(0.25, abs=1e-15)
    assert g.sup_g2 == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("bad", [dict(kind="circle", r=2), dict(kind="circle", r=1.5),
                                 dict(kind="sine", n=0), dict(kind="sine", n=1.5),
                                 dict(kind="spiral")])
def test_make_noodle_rejects(bad):
    with pytest.raises(ValidationError):
        make_noodle(**bad)


def test_circle_error_names_requirement():
    with pytest.raises(ValidationError, match="r > 2"):
        make_noodle("circle", r=1)


def test_parse_noodle():
    assert parse_noodle("circle:r=10") == make_noodle("circle", r=10)
    assert parse_noodle("sine:n=4") == make_noodle("sine", n=4)
    assert parse_noodle("linear:m=0.1,b=0") == make_noodle("linear", m=0.1, b=0)
    assert parse_noodle("zero") == ZERO_NOODLE
    for text in ("circle:r", "circle:r=x", "blob"):
        with pytest.raises(ValidationError):
            parse_noodle(text)


@pytest.mark.parametrize("r", [3.0, 10.0, 100.0])
def test_sup_norms_against_dense_grid(r):
    g = make_noodle("circle", r=r)
    y = np.linspace(-2, 2, 200_001)
    assert abs(np.max(np.abs(g.value(y))) - g.sup_g) <= 1e-12
    assert abs(np.max(np.abs(g.d1(y))) - g.sup_g1) <= 1e-12
    assert g.sup_g1 <= 4.0 / r


@pytest.mark.parametrize("n", [1, 2, 3, 4, 8])
def test_sine_sup_norms_against_dense_grid(n):
    g = make_noodle("sine", n=n)
    y = np.linspace(-2, 2, 400_001)
    assert np.max(np.abs(g.value(y))) == pytest.approx(g.sup_g, rel=1e-6)
    assert np.max(np.abs(g.d1(y))) == pytest.approx(g.sup_g1, rel=1e-6)
    assert np.max(np.abs(g.d2(y))) == pytest.approx(g.sup_g2, rel=1e-6)


def test_circle_derivative_bound_needs_moderate_radius():
    # 2 / sqrt(r^2 - 4) <= 4 / r exactly when r >= 4 / sqrt(3)
    assert make_noodle("circle", r=2.4).sup_g1 <= 4 / 2.4
    assert make_noodle("circle", r=2.2).sup_g1 > 4 / 2.2


@pytest.mark.parametrize("r", [10.0, 100.0])
def test_circle_second_derivative_finite_difference(r):
    g = make_noodle("circle", r=r)
    y = np.linspace(-1.9, 1.9, 381)
    h = 1e-5
    fd = (g.d1(y + h) - g.d1(y - h)) / (2 * h)
    assert np.allclose(g.d2(y), fd, rtol=1e-6)
    assert np.allclose(g.d2(y), r * r / (r * r - y * y) ** 1.5, rtol=1e-14)


def test_shear_examples():
    rng = np.random.default_rng(3)
    for _ in range(50):
        p = rng.normal(size=2) * 3
        t = rng.uniform(0, 2 * math.pi)
        assert shear_apply(ShearMap(ZERO_NOODLE, t), p) == pytest.approx(tuple(p), abs=1e-15)
    g = make_noodle("circle", r=7)
    x, y = shear_apply(ShearMap(g, 0.0), (0.3, 1.2))
    assert (x, y) == (pytest.approx(0.3 - (7 - math.sqrt(49 - 1.44)), abs=1e-15), 1.2)
    assert shear_apply(ShearMap(make_noodle("linear", m=0, b=1), 0.0), (0.5, 0.25)) == (-0.5, 0.25)


noodles = st.one_of(
    st.floats(2.5, 500).map(lambda r: make_noodle("circle", r=r)),
    st.integers(1, 10).map(lambda n: make_noodle("sine", n=n)),
    st.tuples(st.floats(-3, 3), st.floats(-2, 2)).map(lambda mb: make_noodle("linear", m=mb[0], b=mb[1])),
    st.just(ZERO_NOODLE),
)
angles = st.floats(0, 2 * math.pi)
points = st.tuples(st.floats(-3, 3), st.floats(-3, 3))


@given(noodles, noodles, angles, points)
def test_group_law(g, h, t, p):
    a = ShearMap(g, t).apply(*ShearMap(h, t).apply(*p))
    b = ShearMap(g + h, t).apply(*p)
    assert math.hypot(a[0] - b[0], a[1] - b[1]) <= 1e-12


@given(st.floats(-3, 3), angles, st.integers(0, 15))
def test_constant_shift(b, t, idx):
    sq = build_generation(2)[idx]
    lo, hi = sheared_projection(make_noodle("linear", m=0, b=b), Direction(t), sq)
    a0, b0 = project_square(sq, Direction(t))
    assert abs(lo - (a0 - b)) <= 1e-12 and abs(hi - (b0 - b)) <= 1e-12


@given(st.floats(-4, 4), angles, st.integers(0, 63))
def test_linear_length_form(m, t, idx):
    sq = build_generation(3)[idx]
    lo, hi = sheared_projection(make_noodle("linear", m=m), Direction(t), sq)
    a0, b0 = project_square(sq, Direction(t - math.atan(m)))
    assert abs((hi - lo) - math.sqrt(1 + m * m) * (b0 - a0)) <= 1e-9


@given(st.floats(-4, 4), st.floats(-2, 2), angles, st.integers(0, 63))
def test_linear_set_form(m, b, t, idx):
    # with this rotation convention the sheared projection is sqrt(1+m^2) Proj_{theta - alpha} - b
    sq = build_generation(3)[idx]
    lo, hi = sheared_projection(make_noodle("linear", m=m, b=b), Direction(t), sq)
    a0, b0 = project_square(sq, Direction(t - math.atan(m)))
    k = math.sqrt(1 + m * m)
    assert abs(lo - (k * a0 - b)) <= 1e-9 and abs(hi - (k * b0 - b)) <= 1e-9


def test_zero_noodle_projection_matches_plain():
    ks = build_generation(3)
    for t in np.linspace(0, 2 * math.pi, 29):
        for sq in list(ks)[::7]:
            assert sheared_projection(ZERO_NOODLE, Direction(t), sq) == pytest.approx(
                project_square(sq, Direction(t)), abs=1e-15)


def _dense_oracle(g, t, sq, m=100):
    # h = X - g(Y) on a dense grid over the closed square
    x0, y0 = sq.corner
    u = np.linspace(0, sq.side, m)
    X, Y = np.meshgrid(x0 + u, y0 + u)
    c, s = math.cos(t), math.sin(t)
    Xr = X * c + Y * s
    Yr = -X * s + Y * c
    h = Xr - g.value(Yr)
    return h.min(), h.max()


def test_circle_projection_against_dense_sampling():
    g = make_noodle("circle", r=100)
    ks = build_generation(4)
    rng = np.random.default_rng(5)
    for _ in range(40):
        sq = ks[int(rng.integers(len(ks)))]
        t = rng.uniform(0, 2 * math.pi)
        lo, hi = sheared_projection(g, Direction(t), sq)
        olo, ohi = _dense_oracle(g, t, sq)
        # the closed form can only widen the sampled range, and not by much
        assert lo <= olo + 1e-15 and hi >= ohi - 1e-15
        assert olo - lo <= 1e-6 and hi - ohi <= 1e-6
        a0, b0 = project_square(sq, Direction(t))
        assert abs(lo - a0) <= 2 / 100 and abs(hi - b0) <= 2 / 100


@pytest.mark.parametrize("kind,params", [("circle", dict(r=2.5)), ("circle", dict(r=3)),
                                         ("sine", dict(n=1)), ("sine", dict(n=6))])
def test_large_square_projection_against_dense_sampling(kind, params):
    # unit square: interior critical points of the edges matter here
    g = make_noodle(kind, **params)
    sq = CantorSquare(())
    for t in np.linspace(0.05, 2 * math.pi, 37):
        lo, hi = sheared_projection(g, Direction(t), sq)
        olo, ohi = _dense_oracle(g, t, sq, m=801)
        assert lo <= olo + 1e-12 and hi >= ohi - 1e-12
        assert olo - lo <= 1e-4 and hi - ohi <= 1e-4


def test_batch_matches_scalar():
    g = make_noodle("sine", n=3)
    ks = build_generation(2)
    thetas = np.linspace(0, 6, 11)
    lo, hi = sheared_projections(g, thetas, ks)
    for i, t in enumerate(thetas):
        for q, sq in enumerate(ks):
            assert (lo[i, q], hi[i, q]) == pytest.approx(sheared_projection(g, Direction(t), sq), abs=1e-15)


def test_undercooked_zero():
    rep = undercooked_report(ZERO_NOODLE, 5)
    assert rep.weak and rep.strong and rep.flexible


@pytest.mark.parametrize("n", range(1, 9))
def test_undercooked_sine_boundary(n):
    rep = undercooked_report(make_noodle("sine", n=n), n)
    assert rep.flexible_product == pytest.approx(1.0, rel=1e-12)
    assert not rep.flexible


@pytest.mark.parametrize("n", range(1, 7))
def test_undercooked_circle_at_scale_four_to_n(n):
    rep = undercooked_report(make_noodle("circle", r=4.0 ** n), n)
    assert rep.sup_g1 <= 4 * 4.0 ** -n
    assert not rep.weak
    # the margin is about 2, comfortably inside the factor 4 allowance
    assert 1.0 < rep.weak_margin <= 4.0


def test_undercooked_strong_passes_for_large_circle():
    rep = undercooked_report(make_noodle("circle", r=4.0 ** 3), 5)
    assert rep.strong


def test_lipschitz_defect():
    assert lipschitz_defect(ShearMap(ZERO_NOODLE, 1.0), 200) == 0.0
    for r in (3.0, 10.0, 100.0):
        for t in (0.0, 0.7, 2.0, 4.5):
            assert lipschitz_defect(ShearMap(make_noodle("circle", r=r), t), 300, seed=1) <= 4 / r
    m = 0.37
    est = [lipschitz_defect(ShearMap(make_noodle("linear", m=m), 0.4), s, seed=2) for s in (20, 200, 800)]
    assert all(e <= m + 1e-12 for e in est)
    assert est[-1] == pytest.approx(m, rel=1e-9)
    with pytest.raises(ValidationError):
        lipschitz_defect(ShearMap(ZERO_NOODLE, 0.0), 1)


@pytest.mark.parametrize("r", [10.0, 100.0])
def test_angle_distortion_bound(r):
    g = make_noodle("circle", r=r)
    rng = np.random.default_rng(int(r))
    z = rng.uniform(-2, 2, size=(10_000, 2))
    w = rng.uniform(-2, 2, size=(10_000, 2))
    for t in rng.uniform(0, 2 * math.pi, 5):
        sm = ShearMap(g, t)
        eps = lipschitz_defect(sm, 300, seed=7)
        assert eps < 0.25
        d = angle_distortion(sm, z, w)
        assert d.max() < 2 * eps
        assert d.max() < 2 * (4 / r)


def test_translate():
    g = make_noodle("circle", r=10).shifted(1.5)
    assert g.value(1.5) == 0.0
    assert g.value(3.5) == pytest.approx(10 - math.sqrt(96))
    assert "tau" in g.spec
    assert isinstance(g, Noodle)
