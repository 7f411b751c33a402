"""Command line entry point.

Exit codes: 0 success, 1 usage error, 2 validation error, 3 capacity or
runtime error.  ``--config FILE`` reads key=value defaults; flags win.
"""
from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import kernels
from .cantor import build_generation
from .errors import CapacityError, FavardLabError, ValidationError
from .favard import (
    AngleGrid,
    buffon_circle_mc,
    buffon_circle_quadrature,
    buffon_noodle,
    favard_length,
)
from .harness import CompositeGrid, Report, RunConfig, bv_report, emit_report, load_config
from .noodle import parse_noodle
from .pairs import EXACT_LIMIT, bound_ratios, distorted_pair_table, pair_table
from .projection import Direction, moment, project_generation, support_length
from .rho import rho_bound_survey

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2, 3
PREVIEW_ROWS = 40


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# (dest, type, default) per subcommand; defaults are applied after the config file
_COMMON = [("config", str, None), ("out", str, None), ("format", str, None)]
_SPECS = {
    "generate": [("n", int, None)],
    "project": [("n", int, None), ("theta", float, 0.0), ("frame", str, "standard")],
    "favard": [("n", int, None), ("noodle", str, "zero"), ("angles", int, None)],
    "buffon-circle": [("n", int, None), ("r", float, None), ("samples", int, None),
                      ("seed", int, 0), ("quadrature", bool, False), ("angles", int, None)],
    "buffon-noodle": [("n", int, None), ("noodle", str, "zero"), ("L", float, 12.0),
                      ("tau_steps", int, 64), ("angles", int, None)],
    "pairs": [("n", int, None), ("exact", bool, False), ("samples", int, None),
              ("seed", int, 0), ("noodle", str, "zero")],
    "rho": [("n", int, None), ("noodle", str, "zero"), ("pairs", int, 500), ("seed", int, 0)],
    "verify-bv": [("n", int, None), ("noodle", str, "zero"), ("cone_nodes", int, 256),
                  ("rest_nodes", int, 2048)],
}


def _flag(dest):
    return "--" + dest.replace("_", "-") if dest != "L" else "--L"


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="favard-lab", description="Favard length and Buffon noodle computations")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name, spec in _SPECS.items():
        p = sub.add_parser(name)
        for dest, typ, _ in spec + _COMMON:
            if typ is bool:
                p.add_argument(_flag(dest), dest=dest, action="store_const", const=True, default=None)
            else:
                p.add_argument(_flag(dest), dest=dest, type=typ, default=None)
    return parser


def _bool(raw: str) -> bool:
    v = raw.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValidationError(f"bad boolean {raw!r}")


def resolve(args) -> RunConfig:
    """Flags over config-file values over defaults."""
    spec = _SPECS[args.command]
    values = {dest: getattr(args, dest) for dest, _, _ in spec + _COMMON}
    if args.config:
        known = {dest: typ for dest, typ, _ in spec + _COMMON}
        for key, raw in load_config(args.config).items():
            if key not in known:
                raise ValidationError(f"config key {key!r} does not apply to {args.command}")
            if values[key] is None:
                try:
                    values[key] = _bool(raw) if known[key] is bool else known[key](raw)
                except ValueError:
                    raise ValidationError(f"bad config value for {key}: {raw!r}") from None
    for dest, _, default in spec:
        if values[dest] is None:
            values[dest] = default
    if values["n"] is None:
        raise UsageError(f"favard-lab {args.command}: --n is required")
    shared = {"n", "noodle", "angles", "tau_steps", "L", "seed", "out", "format"}
    modes = {k: v for k, v in values.items() if k not in shared and k != "config"}
    return RunConfig(command=args.command, **{k: v for k, v in values.items() if k in shared},
                     modes=modes)


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def _cmd_generate(cfg: RunConfig) -> Report:
    ks = build_generation(cfg.n)
    rows = [{"address": ks.address_string(i), "x0": float(ks.x0[i]), "y0": float(ks.y0[i]),
             "side": ks.side} for i in range(len(ks))]
    return Report("generate", cfg.as_dict(), rows, {"squares": len(ks)})


def _cmd_project(cfg: RunConfig) -> Report:
    ks = build_generation(cfg.n)
    prof = project_generation(ks, Direction(cfg.modes["theta"], cfg.modes["frame"]))
    bp = prof.breakpoints
    rows = [{"left": float(bp[i]), "right": float(bp[i + 1]), "count": int(c)}
            for i, c in enumerate(prof.counts)]
    summary = {"support": support_length(prof), "m1": moment(prof, 1), "m2": moment(prof, 2)}
    return Report("project", cfg.as_dict(), rows, summary)


def _estimate_row(method, cfg, noodle, value, stderr, nodes, seed):
    return {"method": method, "n": cfg.n, "noodle": noodle, "value": value,
            "stderr": stderr, "nodes": nodes, "seed": seed}


def _grid_for(g, angles):
    if angles is None:
        return None
    return AngleGrid.half_turn(angles) if g.kind == "zero" else AngleGrid.full_turn(angles)


def _cmd_favard(cfg: RunConfig) -> Report:
    g = cfg.noodle_obj()
    grid = _grid_for(g, cfg.angles)
    ks = build_generation(cfg.n)
    value = favard_length(ks, g, grid)
    nodes = grid.M if grid else (AngleGrid.half_turn() if g.kind == "zero" else AngleGrid.full_turn()).M
    return Report("favard", cfg.as_dict(), [_estimate_row("quadrature", cfg, g.spec, value, None, nodes, None)])


def _cmd_buffon_circle(cfg: RunConfig) -> Report:
    r, samples, quad = cfg.modes["r"], cfg.modes["samples"], cfg.modes["quadrature"]
    if r is None:
        raise UsageError("favard-lab buffon-circle: --r is required")
    if quad and samples is not None:
        raise UsageError("favard-lab buffon-circle: --samples and --quadrature are exclusive")
    spec = f"circle:r={r:g}"
    if quad:
        grid = AngleGrid.full_turn(cfg.angles) if cfg.angles else AngleGrid.full_turn()
        value = buffon_circle_quadrature(cfg.n, r, grid)
        row = _estimate_row("quadrature", cfg, spec, value, None, grid.M, None)
    else:
        est = buffon_circle_mc(cfg.n, r, samples if samples is not None else 1_000_000, cfg.seed)
        row = _estimate_row("mc", cfg, spec, est.value, est.standard_error, est.samples, est.seed)
    return Report("buffon-circle", cfg.as_dict(), [row])


def _cmd_buffon_noodle(cfg: RunConfig) -> Report:
    g = cfg.noodle_obj()
    grid = AngleGrid.full_turn(cfg.angles) if cfg.angles else AngleGrid.full_turn()
    value = buffon_noodle(cfg.n, g, L=cfg.L, tau_steps=cfg.tau_steps, grid=grid)
    return Report("buffon-noodle", cfg.as_dict(),
                  [_estimate_row("quadrature", cfg, g.spec, value, None, grid.M * cfg.tau_steps, None)])


def _cmd_pairs(cfg: RunConfig) -> Report:
    ks = build_generation(cfg.n)
    g = cfg.noodle_obj()
    exact, samples = cfg.modes["exact"], cfg.modes["samples"]
    if exact and samples is not None:
        raise UsageError("favard-lab pairs: --exact and --samples are exclusive")
    if g.kind != "zero":
        table = distorted_pair_table(ks, g).table
    elif samples is not None:
        table = pair_table(ks, "sampled", samples, cfg.seed)
    else:
        if not exact and cfg.n > EXACT_LIMIT:
            raise CapacityError(f"exact enumeration is limited to n <= {EXACT_LIMIT}; pass --samples")
        table = pair_table(ks, "exact")
    ratios, worst = bound_ratios(table)
    rows = [{"j": j, "k": k, "count": c if table.mode == "sampled" else int(c), "ratio": ratios.get((j, k))}
            for j, k, c in table.items()]
    rows.append({"j": None, "k": None,
                 "count": table.degenerate if table.mode == "sampled" else int(table.degenerate),
                 "ratio": None})
    summary = {"mode": table.mode, "total": table.total, "classified": float(table.classified),
               "degenerate": float(table.degenerate), "max_ratio": worst}
    return Report("pairs", cfg.as_dict(), rows, summary)


def _cmd_rho(cfg: RunConfig) -> Report:
    ks = build_generation(cfg.n)
    survey = rho_bound_survey(ks, cfg.noodle_obj(), cfg.modes["pairs"], cfg.seed)
    rows = [{"qAddress": r.q, "q′Address": r.q2, "j": r.j, "k": r.k, "rho": r.rho,
             "score": r.score, "thetaSupport": r.theta_support} for r in survey.rows]
    summary = {"max_score": survey.max_score, "max_support_score": survey.max_support_score,
               "pairs": len(rows)}
    return Report("rho", cfg.as_dict(), rows, summary)


def _cmd_verify_bv(cfg: RunConfig) -> Report:
    grids = CompositeGrid(cone_nodes=cfg.modes["cone_nodes"], rest_nodes=cfg.modes["rest_nodes"])
    rep = bv_report(cfg.n, cfg.noodle_obj(), grids)
    rep.config = {**cfg.as_dict(), **rep.config}
    return rep


_COMMANDS = {
    "generate": _cmd_generate,
    "project": _cmd_project,
    "favard": _cmd_favard,
    "buffon-circle": _cmd_buffon_circle,
    "buffon-noodle": _cmd_buffon_noodle,
    "pairs": _cmd_pairs,
    "rho": _cmd_rho,
    "verify-bv": _cmd_verify_bv,
}


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------

def _cell(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, (bool, np.bool_)):
        return "yes" if v else "no"
    if isinstance(v, (float, np.floating)):
        return f"{v:.10g}" if math.isfinite(v) else str(v)
    return str(v)


def render_table(report: Report, limit: int = PREVIEW_ROWS) -> str:
    lines = [f"# {report.kind}  backend={kernels.BACKEND}"]
    if report.header:
        lines.append(f"# {report.header}")
    if report.rows:
        cols = list(report.rows[0])
        shown = [[_cell(r.get(c)) for c in cols] for r in report.rows[:limit]]
        widths = [max(len(c), *(len(s[i]) for s in shown)) for i, c in enumerate(cols)]
        lines.append("  ".join(c.rjust(w) for c, w in zip(cols, widths)))
        lines.extend("  ".join(s.rjust(w) for s, w in zip(row, widths)) for row in shown)
        if len(report.rows) > limit:
            lines.append(f"... {len(report.rows) - limit} more rows")
    for k, v in report.summary.items():
        lines.append(f"{k}: {_cell(v)}")
    return "\n".join(lines)


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        cfg = resolve(args)
        report = _COMMANDS[args.command](cfg)
        print(render_table(report))
        if cfg.out:
            emit_report(report, cfg.out, cfg.format)
        return EXIT_OK
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ValidationError, FavardLabError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (RuntimeError, OSError, MemoryError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    sys.exit(run_cli())
