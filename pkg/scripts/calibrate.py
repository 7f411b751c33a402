"""Recompute the n = 4 calibration constants frozen in tests/calibration.py."""
import math

import numpy as np

from favard_lab.cantor import build_generation
from favard_lab.harness import bv_report
from favard_lab.noodle import ZERO_NOODLE, make_noodle
from favard_lab.pairs import bound_ratios, pair_table
from favard_lab.rho import rho_bound_survey

SEED = 1
PAIRS = 500


def main():
    ks = build_generation(4)
    _, worst = bound_ratios(pair_table(ks))
    print(f"PAIR_MAX_RATIO_N4 = {worst!r}")

    zero = rho_bound_survey(ks, ZERO_NOODLE, PAIRS, SEED)
    print(f"RHO_ZERO_MAX_N4 = {zero.max_score!r}")

    r = 4.0 ** 4
    circ = rho_bound_survey(ks, make_noodle("circle", r=r), PAIRS, SEED)
    c = max(row.theta_support / (4.0 ** (row.k - 4) + 1.0 / r) for row in circ.rows)
    print(f"THETA_SUPPORT_C_N4 = {c!r}")

    rep = bv_report(4)
    c1 = [row["m1"] * 4.0 ** row["j"] for row in rep.rows]
    print(f"BV_M1_C_N4 = {math.exp(np.mean(np.log(c1)))!r}")
    c2 = max(row["m2"] / (4.0 ** -row["j"] + 4 * 4.0 ** (-2 * row["j"])) for row in rep.rows)
    print(f"BV_M2_C_N4 = {c2!r}")


if __name__ == "__main__":
    main()
