"""Per-cone moment report, run configuration and report files.

Cones J_j = (arctan 4^-j, arctan 4^(1-j)) are taken in the special frame.
The cone rows and the remaining angles are integrated on one composite
midpoint grid, so the same per-angle profiles give both the rows and the
Favard value in the summary.  The j-range 3 < j < log n uses log base 4.
"""
from __future__ import annotations

import csv
import json
import dataclasses
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .cantor import build_generation
from .errors import CapacityError, ValidationError
from .favard import angle_stats
from .noodle import ZERO_NOODLE, Noodle, parse_noodle
from .projection import SPECIAL_ANGLE
from .rho import cone_bounds, in_pipeline

SCHEMA_VERSION = 1
CONE_NODES = 256
REST_NODES = 2048
TAIL_NODES = 64
BV_LIMIT = 10
LOG_NOTE = "in_range uses 3 < j < log_4(n)"


@dataclass(frozen=True)
class BVRow:
    j: int
    m1: float
    m2: float
    e: float
    cauchy_lb: float
    in_range: bool


@dataclass
class Report:
    """Generic tabular result: config, rows (list of dicts) and a summary dict."""

    kind: str
    config: dict
    rows: list
    summary: dict = field(default_factory=dict)
    header: str = ""


@dataclass(frozen=True)
class CompositeGrid:
    """Midpoint nodes per cone plus two pieces covering the rest of the domain."""

    cone_nodes: int = CONE_NODES
    rest_nodes: int = REST_NODES
    tail_nodes: int = TAIL_NODES

    def __post_init__(self):
        if min(self.cone_nodes, self.rest_nodes, self.tail_nodes) < 16:
            raise ValidationError("every grid piece needs at least 16 nodes")

    def pieces(self, n: int, full_turn: bool):
        """(label, lo, hi, M) in special-frame angles; cones carry their index."""
        out = [(j, *cone_bounds(j), self.cone_nodes) for j in range(1, n + 1)]
        out.append(("tail", 0.0, math.atan(4.0 ** -n), self.tail_nodes))
        end = 2.0 * math.pi if full_turn else math.pi
        rest = self.rest_nodes * (2 if full_turn else 1)
        out.append(("rest", math.pi / 4, end, rest))
        return out


def bv_report(n: int, g: Noodle = ZERO_NOODLE, grids: CompositeGrid | None = None) -> Report:
    """Cone rows (m1, m2, e, Cauchy bound) for j = 1..n and the summary."""
    if isinstance(n, bool) or int(n) != n or n < 2:
        raise ValidationError(f"the pipeline report needs an integer n >= 2, got {n!r}")
    if n > BV_LIMIT:
        raise CapacityError(f"the pipeline report is limited to n <= {BV_LIMIT}")
    grids = grids or CompositeGrid()
    ks = build_generation(n)
    full_turn = g.kind != "zero"
    rows = []
    outside = 0.0
    for label, lo, hi, M in grids.pieces(n, full_turn):
        step = (hi - lo) / M
        thetas = SPECIAL_ANGLE + lo + (np.arange(M) + 0.5) * step
        st = angle_stats(ks, g, thetas)
        e, m1, m2 = (float(np.sum(step * st[:, c])) for c in range(3))
        if isinstance(label, int):
            rows.append(BVRow(label, m1, m2, e, m1 * m1 / m2 if m2 > 0 else 0.0, in_pipeline(label, n)))
        else:
            outside += e
    cone_e = sum(r.e for r in rows)
    # undistorted projections repeat every half turn
    total = (cone_e + outside) * (1.0 if full_turn else 2.0)
    fav = total / (2.0 * math.pi)
    summary = {
        "in_range_e": sum(r.e for r in rows if r.in_range),
        "in_range_rows": sum(r.in_range for r in rows),
        "cone_e": cone_e,
        "out_of_cone": outside,
        "favard": fav,
        "score": fav * n / math.log(n),
    }
    config = {"n": n, "noodle": g.spec, "cone_nodes": grids.cone_nodes,
              "rest_nodes": grids.rest_nodes, "tail_nodes": grids.tail_nodes,
              "domain": "full_turn" if full_turn else "half_turn"}
    return Report("verify-bv", config, [dataclasses.asdict(r) for r in rows], summary, LOG_NOTE)


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------

@dataclass
class RunConfig:
    """Settings for one CLI run after merging the config file and flags."""

    command: str
    n: int | None = None
    noodle: str = "zero"
    angles: int | None = None
    tau_steps: int | None = None
    L: float | None = None
    seed: int | None = None
    out: str | None = None
    format: str | None = None
    modes: dict = field(default_factory=dict)

    def noodle_obj(self) -> Noodle:
        return parse_noodle(self.noodle)

    def as_dict(self) -> dict:
        # output location stays out so that reports written to different paths agree
        skip = ("modes", "out", "format")
        d = {k: v for k, v in dataclasses.asdict(self).items() if k not in skip and v is not None}
        d.update({k: v for k, v in self.modes.items() if v is not None})
        return d


def load_config(path: str) -> dict:
    """Flat key=value text into a dict of strings; '#' starts a comment."""
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ValidationError(f"cannot read config file {path}: {exc}") from None
    for no, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, raw = line.partition("=")
        if not eq or not key.strip():
            raise ValidationError(f"{path}:{no}: expected key=value, got {line!r}")
        values[key.strip().replace("-", "_")] = raw.strip()
    return values


# --------------------------------------------------------------------------
# emission
# --------------------------------------------------------------------------

def format_number(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_, int, float, np.integer, np.floating)):
        return format_number(v)
    return str(v)


def _json(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format_number(v) if math.isfinite(v) else "null"
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json(x)}" for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_json(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v).__name__}")


def emit_report(report: Report, path: str, format: str | None = None) -> None:
    """Write ``report`` as CSV (header plus one line per row) or JSON."""
    fmt = format or ("json" if str(path).lower().endswith(".json") else "csv")
    if fmt not in ("csv", "json"):
        raise ValidationError(f"format must be csv or json, got {fmt!r}")
    try:
        if fmt == "json":
            body = (
                "{\n"
                f'  "schema_version": {SCHEMA_VERSION},\n'
                f'  "kind": {_json(report.kind)},\n'
                f'  "config": {_json(report.config)},\n'
                f'  "rows": {_json(report.rows)},\n'
                f'  "summary": {_json(report.summary)}'
                + (f',\n  "note": {_json(report.header)}' if report.header else "")
                + "\n}\n"
            )
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(body)
        else:
            columns = list(report.rows[0]) if report.rows else []
            with open(path, "w", encoding="utf-8", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(columns)
                for row in report.rows:
                    w.writerow([_csv_cell(row.get(c)) for c in columns])
    except OSError as exc:
        raise RuntimeError(f"cannot write report to {os.fspath(path)}: {exc}") from exc
