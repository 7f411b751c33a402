"""Acceptance gates 1-12.  Each test prints one PASS/FAIL line with its runtime.

Run alone with ``pytest tests/test_acceptance.py -s`` to see the lines inline;
they are also written to the terminal when output is captured.
"""
import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from calibration import (
    BV_M1_C,
    BV_M2_C,
    BV_M2_INRANGE_C,
    BV_SCORE_FLOOR,
    PAIR_C_EMP,
    RHO_C_EMP,
    RHO_PAIRS,
    RHO_SEED,
)
from favard_lab.cantor import build_generation
from favard_lab.favard import (
    buffon_circle_mc,
    buffon_circle_quadrature,
    buffon_noodle,
    circle_hit_batch,
    favard_length,
    shear_offset_membership,
)
from favard_lab.harness import bv_report
from favard_lab.noodle import ZERO_NOODLE, ShearMap, angle_distortion, make_noodle, sheared_projection
from favard_lab.pairs import distorted_pair_table, pair_table
from favard_lab.projection import Direction, moment, project_generation, project_square, support_length
from favard_lab.rho import rho_bound_survey

pytestmark = pytest.mark.acceptance


@pytest.fixture
def gate(request, capsys):
    """Yields a dict; the test fills 'detail' and the line is printed on exit."""
    number = request.node.get_closest_marker("criterion").args[0]
    info = {"detail": "", "budget": request.node.get_closest_marker("criterion").args[1]}
    start = time.perf_counter()
    outcome = {"ok": False}
    info["pass"] = lambda: outcome.update(ok=True)
    yield info
    took = time.perf_counter() - start
    within = took < info["budget"]
    status = "PASS" if outcome["ok"] and within else "FAIL"
    budget_note = "" if within else f"; over the {info['budget']:g} s budget"
    with capsys.disabled():
        print(f"\n{status} criterion {number}: {info['detail']} ({took:.1f} s{budget_note})")
    assert within, f"criterion {number} took {took:.1f} s, budget {info['budget']} s"


@pytest.mark.criterion(1, 30)
def test_criterion_01_tiling(gate):
    worst = 0.0
    for n in range(1, 7):
        prof = project_generation(build_generation(n), Direction(0.0, "special"))
        assert np.all(prof.counts == 1), n
        worst = max(worst, abs(support_length(prof) - 3 / math.sqrt(5)))
    gate["detail"] = f"n=1..6 single cover, max |support - 3/sqrt5| = {worst:.1e}"
    assert worst <= 1e-9
    gate["pass"]()


@pytest.mark.criterion(2, 60)
def test_criterion_02_mass(gate):
    worst = 0.0
    rng = np.random.default_rng(20)
    for n in range(0, 7):
        ks = build_generation(n)
        for t in rng.uniform(0, 2 * math.pi, 100):
            m1 = moment(project_generation(ks, Direction(t)), 1)
            worst = max(worst, abs(m1 - (abs(math.cos(t)) + abs(math.sin(t)))))
        prof = project_generation(ks, Direction(0.0))
        worst = max(worst, abs(support_length(prof) - 2.0 ** -n), abs(moment(prof, 2) - 2.0 ** n))
    gate["detail"] = f"n=0..6, 100 angles each plus theta=0, max error {worst:.1e}"
    assert worst <= 1e-9
    gate["pass"]()


@pytest.mark.criterion(3, 300)
def test_criterion_03_buffon_reduction(gate):
    worst = 0.0
    for n in range(0, 5):
        ks = build_generation(n)
        bu = buffon_noodle(n, ZERO_NOODLE, ks=ks)
        worst = max(worst, abs(bu / (favard_length(ks) / 4) - 1))
    gate["detail"] = f"n=0..4, max relative gap {worst:.2e}"
    assert worst <= 1e-3
    gate["pass"]()


@pytest.mark.criterion(4, 120)
def test_criterion_04_circle_hit(gate):
    hard = band = 0
    for n in range(1, 5):
        ks = build_generation(n)
        for r in (3.0, 10.0):
            rng = np.random.default_rng(100 * n + int(r))
            rho = rng.uniform(-2.0, 2.0, 100_000)
            theta = rng.uniform(0, 2 * math.pi, 100_000)
            member, dist = shear_offset_membership(ks, r, rho, theta)
            hits = circle_hit_batch((rho + r) * np.cos(theta), (rho + r) * np.sin(theta), r, n)
            clear = dist > 1e-9
            hard += int(np.sum(member[clear] != hits[clear]))
            band += int(np.sum(~clear))
    gate["detail"] = f"n=1..4, r in {{3,10}}, 1e5 samples each: {hard} hard disagreements, {band} in band"
    assert hard == 0
    gate["pass"]()


@pytest.mark.criterion(5, 300)
def test_criterion_05_mc_vs_quadrature(gate):
    worst_z = 0.0
    worst_gap = math.inf
    for n in range(1, 5):
        ks = build_generation(n)
        for r in (3.0, 10.0):
            est = buffon_circle_mc(n, r, 1_000_000, seed=n)
            quad = buffon_circle_quadrature(n, r)
            worst_z = max(worst_z, abs(est.value - quad) / est.standard_error)
            fav_sigma = favard_length(ks, make_noodle("circle", r=r))
            lower = 2 * math.pi * (r - 2) * fav_sigma
            worst_gap = min(worst_gap, (est.value + 3 * est.standard_error - lower) / est.standard_error)
    gate["detail"] = (f"n=1..4, r in {{3,10}}: max |MC - quad| = {worst_z:.2f} SE; "
                      f"min (MC + 3SE - lower bound) = {worst_gap:.1f} SE")
    assert worst_z <= 3 and worst_gap >= 0
    gate["pass"]()


@pytest.mark.criterion(6, 10)
def test_criterion_06_shear_group(gate):
    rng = np.random.default_rng(6)
    kinds = [lambda: make_noodle("circle", r=rng.uniform(2.5, 500)),
             lambda: make_noodle("sine", n=int(rng.integers(1, 11))),
             lambda: make_noodle("linear", m=rng.uniform(-3, 3), b=rng.uniform(-2, 2)),
             lambda: ZERO_NOODLE]
    comp = lin = 0.0
    # 100 noodle pairs x 100 points each
    for _ in range(100):
        g = kinds[rng.integers(4)]()
        h = kinds[rng.integers(4)]()
        t = rng.uniform(0, 2 * math.pi)
        px, py = rng.uniform(-3, 3, 100), rng.uniform(-3, 3, 100)
        ax, ay = ShearMap(g, t).apply(*ShearMap(h, t).apply(px, py))
        bx, by = ShearMap(g + h, t).apply(px, py)
        comp = max(comp, float(np.max(np.hypot(ax - bx, ay - by))))
    ks = build_generation(3)
    for _ in range(10_000):
        m, b, t = rng.uniform(-4, 4), rng.uniform(-2, 2), rng.uniform(0, 2 * math.pi)
        sq = ks[int(rng.integers(len(ks)))]
        lo, hi = sheared_projection(make_noodle("linear", m=m, b=b), Direction(t), sq)
        a0, b0 = project_square(sq, Direction(t - math.atan(m)))
        k = math.sqrt(1 + m * m)
        lin = max(lin, abs(lo - (k * a0 - b)), abs(hi - (k * b0 - b)))
    gate["detail"] = f"1e4 instances each: composition error {comp:.1e}, linear/constant identity error {lin:.1e}"
    assert comp <= 1e-12 and lin <= 1e-9
    gate["pass"]()


@pytest.mark.criterion(7, 10)
def test_criterion_07_angle_distortion(gate):
    parts = []
    ok = True
    for r in (10.0, 100.0):
        rng = np.random.default_rng(int(r) + 7)
        z = rng.uniform(-2, 2, size=(10_000, 2))
        w = rng.uniform(-2, 2, size=(10_000, 2))
        worst = 0.0
        for t in rng.uniform(0, 2 * math.pi, 8):
            worst = max(worst, float(angle_distortion(ShearMap(make_noodle("circle", r=r), t), z, w).max()))
        parts.append(f"r={r:g}: max {worst:.4f} < {8 / r:.2f}")
        ok &= worst < 2 * (4 / r)
    gate["detail"] = "; ".join(parts)
    assert ok
    gate["pass"]()


@pytest.mark.criterion(8, 300)
def test_criterion_08_pair_counts(gate):
    worst = 0.0
    for n in (4, 5, 6):
        table = pair_table(build_generation(n))
        assert table.classified + table.degenerate == table.total == 4 ** n * (4 ** n - 1) // 2
        for j, k, c in table.items():
            worst = max(worst, c / (PAIR_C_EMP * 4.0 ** (2 * n - k - 2 * j)))
    gate["detail"] = f"n=4..6 exact, totals conserved, max count/bound = {worst:.3f}"
    assert worst <= 1
    gate["pass"]()


@pytest.mark.criterion(9, 600)
def test_criterion_09_rho_surveys(gate):
    zero = {}
    for n in (4, 5, 6):
        zero[n] = rho_bound_survey(build_generation(n), ZERO_NOODLE, RHO_PAIRS, RHO_SEED).max_score
    weak = {}
    for n in (4, 5, 6):
        weak[n] = rho_bound_survey(build_generation(n), make_noodle("circle", r=4.0 ** n),
                                   RHO_PAIRS, RHO_SEED).max_score
    strong = {}
    for n in (5, 6, 7):
        strong[n] = rho_bound_survey(build_generation(n), make_noodle("circle", r=4.0 ** (n / 5)),
                                     RHO_PAIRS, RHO_SEED).max_score
    zero_ok = max(zero.values()) <= RHO_C_EMP
    weak_ratio = max(max(weak[n] / zero[n], zero[n] / weak[n]) for n in weak)
    growth = max(strong.values()) / min(strong.values())
    gate["detail"] = (f"zero max {max(zero.values()):.3f} <= {RHO_C_EMP:.3f}; "
                      f"r=4^n vs zero within x{weak_ratio:.4f}; "
                      f"r=4^(n/5) n=5..7 scores {', '.join(f'{v:.2f}' for v in strong.values())} spread x{growth:.3f}")
    assert zero_ok and weak_ratio <= 2 and growth < 2
    gate["pass"]()


@pytest.mark.criterion(10, 300)
def test_criterion_10_sorting(gate):
    checked = 0
    worst = 0
    for n in range(2, 6):
        ks = build_generation(n)
        d = distorted_pair_table(ks, make_noodle("circle", r=32.0 * n))
        sel = d.base_ok & (d.base_j <= math.log(n, 4))
        checked += int(sel.sum())
        if sel.any():
            worst = max(worst, int(d.dev_j[sel].max()), int(d.dev_k[sel].max()))
    gate["detail"] = f"n=2..5, r=32n, {checked} pairs with j <= log_4 n, max index shift {worst}"
    assert checked > 0 and worst <= 1
    gate["pass"]()


@pytest.mark.criterion(11, 900)
def test_criterion_11_bv_pipeline(gate):
    favs, scores, notes = [], {}, []
    in_range = 0
    m1_lo = m1_hi = None
    m2_worst = 0.0
    cauchy_worst = 0.0
    for n in range(3, 9):
        rep = bv_report(n)
        for row in rep.rows:
            j = row["j"]
            cauchy_worst = max(cauchy_worst, row["cauchy_lb"] - row["e"])
            c = row["m1"] * 4.0 ** j
            m1_lo = c if m1_lo is None else min(m1_lo, c)
            m1_hi = c if m1_hi is None else max(m1_hi, c)
            m2_worst = max(m2_worst, row["m2"] / (BV_M2_C * (4.0 ** -j + n * 4.0 ** (-2 * j))))
            if row["in_range"]:
                in_range += 1
                assert BV_M1_C / 4 <= c <= 4 * BV_M1_C
                assert row["m2"] <= BV_M2_INRANGE_C * n * 4.0 ** (-2 * j)
        favs.append(rep.summary["favard"])
        scores[n] = rep.summary["score"]
    bent = {}
    for n in range(5, 9):
        bent[n] = bv_report(n, make_noodle("circle", r=4.0 ** (n / 5))).summary["score"]
    robust = max(max(bent[n] / scores[n], scores[n] / bent[n]) for n in bent)
    decreasing = all(b < a for a, b in zip(favs, favs[1:]))
    if in_range == 0:
        notes.append("no in-range rows for n <= 8")
    gate["detail"] = (f"n=3..8: Cauchy slack <= {cauchy_worst:.1e}; m1*4^j in [{m1_lo:.2f}, {m1_hi:.2f}] "
                      f"vs c={BV_M1_C:.2f}; m2 bound ratio <= {m2_worst:.3f}; "
                      f"min score {min(scores.values()):.3f}; Fav decreasing={decreasing}; "
                      f"r=4^(n/5) score within x{robust:.3f}" + (f"; {notes[0]}" if notes else ""))
    assert cauchy_worst <= 1e-9
    assert BV_M1_C / 4 <= m1_lo and m1_hi <= 4 * BV_M1_C
    assert m2_worst <= 1
    assert min(scores.values()) >= BV_SCORE_FLOOR and decreasing
    assert robust <= 2
    gate["pass"]()


CLI_RUNS = [
    ["buffon-circle", "--n", "4", "--r", "3", "--samples", "300000", "--seed", "9"],
    ["favard", "--n", "5", "--noodle", "circle:r=10"],
    ["pairs", "--n", "6", "--samples", "50000", "--seed", "4"],
    ["rho", "--n", "4", "--noodle", "circle:r=3", "--pairs", "60", "--seed", "2"],
    ["verify-bv", "--n", "4"],
]


def _cli_bytes(argv, out, threads):
    env = {**os.environ, "FAVARD_LAB_THREADS": str(threads)}
    env.pop("NUMBA_NUM_THREADS", None)
    subprocess.run([sys.executable, "-m", "favard_lab", *argv, "--out", str(out)],
                   env=env, check=True, capture_output=True)
    return out.read_bytes()


@pytest.mark.criterion(12, 600)
def test_criterion_12_determinism(gate, tmp_path):
    same = 0
    for i, argv in enumerate(CLI_RUNS):
        runs = [_cli_bytes(argv, tmp_path / f"{i}_{t}_{rep}.csv", t) for t, rep in ((1, 0), (4, 0), (4, 1))]
        assert runs[0] == runs[1] == runs[2], argv[0]
        same += 1
    gate["detail"] = f"{same} CLI commands, threads 1/4/4 repeat: byte-identical CSV"
    gate["pass"]()
