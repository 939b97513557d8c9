"""Command-line front end.

Subcommands: sixj | dft | volume | gram | conjecture.  Exit codes partition
the failure classes: 0 success, 2 invalid input, 3 geometry (existence
criterion / branch tracking), 4 solver non-convergence.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import (
    COLORING_RULES,
    DEFAULT_COLORING_RULE,
    RunRecord,
    fit_growth,
    run_conjecture,
)
from .geometry import (
    ExistenceError,
    GeometryError,
    SolverError,
    TetraSpec,
    cofactor,
    deep_angles,
    gram_matrix,
    lengths_from_angles,
    tetra_exists,
    volume,
    covolume,
)
from .qcore import RootContext, admissible_six, sixj
from .transform import DeepPartition, DftInput, dft_tetra

EXIT_INPUT = 2
EXIT_GEOMETRY = 3
EXIT_SOLVER = 4

CSV_COLUMNS = ("r", "b_I", "a_J", "log_mag_Y", "phase_Y", "scaled", "half_scaled",
               "target", "rel_err", "rule", "wall_time")

_ANGLE_RE = re.compile(r"^(\d*)\s*pi\s*(?:/\s*(\d+))?$")


def parse_angle(text: str) -> float:
    """Angles as plain floats or exact fractions of pi ('pi/5', '2pi/13')."""
    s = str(text).strip().lower().replace(" ", "")
    m = _ANGLE_RE.match(s)
    if m:
        num = int(m.group(1)) if m.group(1) else 1
        den = int(m.group(2)) if m.group(2) else 1
        return num * math.pi / den
    try:
        return float(s)
    except ValueError:
        raise ValueError(f"cannot parse angle {text!r} (use a float or 'Npi/M')") from None


def _parse_int_list(text: str) -> list[int]:
    if not text.strip():
        return []
    return [int(v) for v in text.split(",")]


def _parse_angle_list(text: str) -> list[float]:
    if not text.strip():
        return []
    return [parse_angle(v) for v in text.split(",")]


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _build_spec(deep_edges: list[int], lengths: list[float] | None,
                deep_angle_vals: list[float] | None, regular: list[float]) -> TetraSpec:
    partition = DeepPartition(tuple(deep_edges))
    if lengths is not None and deep_angle_vals is not None:
        raise ValueError("give either --lengths or --deep-angles, not both")
    if deep_edges and lengths is None and deep_angle_vals is None:
        raise ValueError("deep edges need --lengths or --deep-angles")
    if lengths is not None:
        return TetraSpec(partition, tuple(regular), lengths=tuple(lengths))
    if deep_angle_vals is not None:
        return TetraSpec(partition, tuple(regular), angles=tuple(deep_angle_vals))
    return TetraSpec(partition, tuple(regular), lengths=())


# ---------------------------------------------------------------------------
# subcommands


def cmd_sixj(args) -> int:
    if args.r % 2 == 0 or args.r < 3:
        print("error: r must be odd and >= 3", file=sys.stderr)
        return EXIT_INPUT
    colors = _parse_int_list(args.colors)
    if len(colors) != 6:
        print("error: --colors needs six comma-separated integers", file=sys.stderr)
        return EXIT_INPUT
    ctx = RootContext(args.r)
    if not admissible_six(ctx, colors):
        print(f"error: {tuple(colors)} is not admissible for r={args.r}", file=sys.stderr)
        return EXIT_INPUT
    val = sixj(ctx, colors, compensated=args.compensated)
    if val.zero:
        print("log_mag=-inf phase=0 value=0")
        return 0
    line = f"log_mag={_fmt(val.log_mag)} phase={_fmt(val.phase)}"
    if abs(val.log_mag) < 600:
        mag = math.exp(val.log_mag)
        if abs(math.sin(val.phase)) < 1e-12:      # phase 0 or pi: real value
            line += f" value={_fmt(math.copysign(mag, math.cos(val.phase)))}"
        elif abs(math.cos(val.phase)) < 1e-12:    # phase +-pi/2: imaginary
            line += f" value={_fmt(math.copysign(mag, val.phase))}j"
        else:
            line += f" value={val.value():.17g}"
    print(line)
    return 0


def cmd_dft(args) -> int:
    if args.r % 2 == 0 or args.r < 3:
        print("error: r must be odd and >= 3", file=sys.stderr)
        return EXIT_INPUT
    deep = _parse_int_list(args.deep_edges)
    b = _parse_int_list(args.b) if args.b else []
    a = _parse_int_list(args.a) if args.a else []
    ctx = RootContext(args.r)
    inp = DftInput(ctx, DeepPartition(tuple(deep)), tuple(b), tuple(a))
    res = dft_tetra(inp, threads=args.threads, compensated=args.compensated)
    log_mag, sign = res.signed_log
    print(f"log_mag={_fmt(log_mag)} phase={_fmt(0.0 if res.value.zero else res.value.phase)} "
          f"sign={int(sign)} term_count={res.term_count} empty_sum={res.empty_sum} "
          f"nonreal_phase={res.nonreal_phase}")
    return 0


def _geometry_spec_from_args(args) -> TetraSpec:
    deep = _parse_int_list(args.deep_edges) if args.deep_edges else []
    lengths = [float(v) for v in args.lengths.split(",")] if args.lengths else None
    dangles = _parse_angle_list(args.deep_angles) if args.deep_angles else None
    regular = _parse_angle_list(args.angles)
    return _build_spec(deep, lengths, dangles, regular)


def cmd_volume(args) -> int:
    spec = _geometry_spec_from_args(args)
    if spec.lengths is not None and len(spec.partition.deep) > 0:
        work = spec
    elif spec.angles is not None:
        work = spec.with_lengths(lengths_from_angles(spec))
    else:
        work = spec
    verdict = tetra_exists(gram_matrix(work))
    if verdict is not True:
        print(f"criterion={'indeterminate' if verdict is None else 'fail'}",
              file=sys.stderr)
        return EXIT_GEOMETRY
    print("criterion=pass")
    if len(work.partition.deep) > 0:
        thetas = deep_angles(work)
        print("deep_edges=" + ",".join(str(e) for e in work.partition.deep))
        print("deep_lengths=" + ",".join(_fmt(v) for v in work.lengths))
        print("deep_angles=" + ",".join(_fmt(v) for v in thetas))
        print(f"covolume={_fmt(covolume(work))}")
    print(f"volume={_fmt(volume(work))}")
    return 0


def cmd_gram(args) -> int:
    spec = _geometry_spec_from_args(args)
    if spec.angles is not None:
        spec = spec.with_lengths(lengths_from_angles(spec))
    G = gram_matrix(spec)
    for row in G:
        print(" ".join(_fmt(v) for v in row))
    eig = np.linalg.eigvalsh(G)
    print("eigenvalues=" + ",".join(_fmt(v) for v in eig))
    print(f"signature=({int(np.sum(eig > 0))},{int(np.sum(eig < 0))})")
    diag = [cofactor(G, s, s) for s in range(4)]
    off = [cofactor(G, s, t) for s in range(4) for t in range(s + 1, 4)]
    print("diagonal_cofactors=" + ",".join(_fmt(v) for v in diag))
    print("offdiag_cofactors=" + ",".join(_fmt(v) for v in off))
    verdict = tetra_exists(G)
    print(f"exists={'indeterminate' if verdict is None else str(verdict).lower()}")
    return 0


def _load_runspec(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    deep_edges = [int(v) for v in raw.get("partition", [])]
    deep = raw.get("deep", {"mode": "angle", "values": []})
    mode = deep.get("mode", "angle")
    if mode not in ("angle", "length"):
        raise ValueError(f"deep mode must be 'angle' or 'length', got {mode!r}")
    values = [parse_angle(v) if isinstance(v, str) else float(v) for v in deep.get("values", [])]
    regular = [parse_angle(v) if isinstance(v, str) else float(v)
               for v in raw.get("regular_angles", [])]
    r_values = [int(v) for v in raw.get("r_values", [])]
    if not r_values:
        raise ValueError("r_values must not be empty")
    for r in r_values:
        if r < 3 or r % 2 == 0:
            raise ValueError(f"r_values must be odd integers >= 3, got {r}")
    rule = raw.get("coloring_rule", DEFAULT_COLORING_RULE)
    if rule not in COLORING_RULES:
        raise ValueError(f"coloring_rule must be one of {COLORING_RULES}, got {rule!r}")
    precision = raw.get("precision", "auto")
    if not (precision in ("double", "compensated", "auto")
            or (isinstance(precision, int) and not isinstance(precision, bool)
                and precision >= 16)):
        raise ValueError("precision must be 'auto', 'double', 'compensated' or an "
                         f"integer digit count >= 16, got {precision!r}")
    spec = _build_spec(deep_edges,
                       values if mode == "length" else None,
                       values if mode == "angle" else None,
                       regular)
    return {"spec": spec, "r_values": r_values, "rule": rule, "precision": precision,
            "output": raw.get("output", {})}


def _records_csv_lines(records: list[RunRecord], rule: str, precision: str) -> list[str]:
    lines = [f"# sixjvol={__version__}", f"# rule={rule}", f"# precision={precision}"]
    lines.append(",".join(CSV_COLUMNS))
    for rec in records:
        lines.append(",".join((
            str(rec.r),
            ";".join(str(v) for v in rec.b_deep),
            ";".join(str(v) for v in rec.a_regular),
            _fmt(rec.log_mag_Y),
            _fmt(rec.phase_Y),
            _fmt(rec.scaled),
            _fmt(rec.half_scaled),
            _fmt(rec.target),
            _fmt(rec.rel_err),
            rule,
            _fmt(rec.wall_time),
        )))
    return lines


def parse_records_csv(text: str) -> list[dict]:
    """Parse the conjecture CSV back into dictionaries (used by tests)."""
    rows = []
    for line in text.splitlines():
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if parts[0] == "r":
            continue
        rows.append({
            "r": int(parts[0]),
            "b_I": tuple(int(v) for v in parts[1].split(";")) if parts[1] else (),
            "a_J": tuple(int(v) for v in parts[2].split(";")) if parts[2] else (),
            "log_mag_Y": float(parts[3]),
            "phase_Y": float(parts[4]),
            "scaled": float(parts[5]),
            "half_scaled": float(parts[6]),
            "target": float(parts[7]),
            "rel_err": float(parts[8]),
            "rule": parts[9],
            "wall_time": float(parts[10]),
        })
    return rows


def _render_plot(records: list[RunRecord], fit, path: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rs = [rec.r for rec in records if not rec.empty]
    ys = [rec.half_scaled for rec in records if not rec.empty]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(rs, ys, "o-", label="(pi/r) log|Y_r|")
    if records:
        half_target = records[0].target / 2.0
        ax.axhline(half_target, color="k", ls="--", lw=1, label="volume")
    if fit is not None:
        ax.axhline(fit.limit_estimate / 2.0, color="C3", ls=":", lw=1,
                   label="fit limit / 2")
    ax.set_xlabel("r")
    ax.set_ylabel("scaled growth rate / 2")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def cmd_conjecture(args) -> int:
    runspec = _load_runspec(args.specfile)
    out_cfg = runspec["output"] or {}
    out_path = args.output or out_cfg.get("path")
    out_format = args.format or out_cfg.get("format", "csv")
    if out_format not in ("csv", "json"):
        raise ValueError(f"format must be csv or json, got {out_format!r}")
    records = run_conjecture(runspec["spec"], rule=runspec["rule"],
                             r_list=runspec["r_values"], threads=args.threads,
                             precision=runspec["precision"])
    fit = None
    fit_error = None
    if len({rec.r for rec in records if not rec.empty}) >= 3:
        fit = fit_growth(records)
    else:
        fit_error = "fit skipped: fewer than 3 usable r values"
    fit_doc = ({"limit_estimate": fit.limit_estimate,
                "coef_logr_over_r": fit.coef_logr_over_r,
                "coef_1_over_r": fit.coef_1_over_r,
                "residual_rms": fit.residual_rms}
               if fit is not None else {"error": fit_error})

    if out_format == "csv":
        payload = "\n".join(_records_csv_lines(records, runspec["rule"],
                                               runspec["precision"])) + "\n"
    else:
        payload = json.dumps({
            "rule": runspec["rule"],
            "precision": runspec["precision"],
            "records": [{
                "r": rec.r,
                "b_I": list(rec.b_deep),
                "a_J": list(rec.a_regular),
                "log_mag_Y": rec.log_mag_Y,
                "phase_Y": rec.phase_Y,
                "scaled": rec.scaled,
                "half_scaled": rec.half_scaled,
                "target": rec.target,
                "rel_err": rec.rel_err,
                "wall_time": rec.wall_time,
            } for rec in records],
            "fit": fit_doc,
        }, indent=2)

    if out_path:
        Path(out_path).write_text(payload, encoding="utf-8")
        Path(str(out_path) + ".fit.json").write_text(json.dumps(fit_doc, indent=2),
                                                     encoding="utf-8")
    else:
        sys.stdout.write(payload)
        print(json.dumps(fit_doc), file=sys.stderr)

    if args.plot:
        _render_plot(records, fit, args.plot)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sixjvol",
                                description="quantum 6j-symbol transforms and "
                                            "hyperbolic volumes of truncated tetrahedra")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("sixj", help="evaluate one 6j-symbol")
    ps.add_argument("--r", type=int, required=True)
    ps.add_argument("--colors", required=True, help="a1,...,a6")
    ps.add_argument("--compensated", action="store_true")
    ps.set_defaults(func=cmd_sixj)

    pd = sub.add_parser("dft", help="evaluate one transform value")
    pd.add_argument("--r", type=int, required=True)
    pd.add_argument("--deep-edges", default="", help="comma list of edges in 1..6")
    pd.add_argument("--b", default="", help="kernel colors on the deep edges")
    pd.add_argument("--a", default="", help="fixed colors on the regular edges")
    pd.add_argument("--threads", type=int, default=None)
    pd.add_argument("--compensated", action="store_true")
    pd.set_defaults(func=cmd_dft)

    pv = sub.add_parser("volume", help="volume / co-volume of a tetrahedron")
    pv.add_argument("--deep-edges", default="")
    pv.add_argument("--lengths", default=None)
    pv.add_argument("--deep-angles", default=None)
    pv.add_argument("--angles", required=True, help="regular angles, e.g. pi/5,pi/4,...")
    pv.set_defaults(func=cmd_volume)

    pg = sub.add_parser("gram", help="Gram matrix and existence criterion")
    pg.add_argument("--deep-edges", default="")
    pg.add_argument("--lengths", default=None)
    pg.add_argument("--deep-angles", default=None)
    pg.add_argument("--angles", required=True)
    pg.set_defaults(func=cmd_gram)

    pc = sub.add_parser("conjecture", help="growth-rate run from a JSON spec file")
    pc.add_argument("specfile")
    pc.add_argument("--output", default=None, help="CSV/JSON path (default stdout)")
    pc.add_argument("--format", default=None, choices=("csv", "json"))
    pc.add_argument("--threads", type=int, default=None)
    pc.add_argument("--plot", default=None, help="also render a PNG figure here")
    pc.set_defaults(func=cmd_conjecture)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ExistenceError, GeometryError) as exc:
        print(f"geometry error: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
