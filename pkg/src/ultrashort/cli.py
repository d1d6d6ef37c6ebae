"""Command-line interface.

    ultrashort bounds --dx 5 --mass 1
    ultrashort solve --potential well.json --backend fd
    ultrashort validate --family square-well --dx 5 --depth-range 1e-4:1:log:20 --out sweep.csv

Lengths in nm, energies reported in meV, masses in electron masses.
Exit codes: 0 success, 1 invalid input or failure, 2 no bound state.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

from . import fd_solver, oracles, paper_method, validation
from .potentials import PotentialFormatError, load_potential
from .units import PhysicalContext

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NO_STATE = 2


class CLIError(Exception):
    pass


def _context(mass: float) -> PhysicalContext:
    try:
        return PhysicalContext(mass)
    except ValueError as exc:
        raise CLIError(str(exc)) from None


def _fmt9(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".9g")
    return str(v)


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        try:
            with open(out_path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise CLIError(f"cannot write {out_path}: {exc.strerror}") from None
    else:
        sys.stdout.write(text)


def _rows_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(rows[0]))
    for row in rows:
        writer.writerow([_fmt9(v) for v in row.values()])
    return buf.getvalue()


def _rows_table(rows: list[dict]) -> str:
    cols = list(rows[0])
    cells = [[_fmt9(r[c]) for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
    lines = ["  ".join(c.rjust(w) for c, w in zip(cols, widths))]
    lines += ["  ".join(v.rjust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------


def bounds_report(dx: float, mass: float) -> dict:
    if not (math.isfinite(dx) and dx > 0):
        raise CLIError(f"--dx must be a positive length in nm, got {dx!r}")
    ctx = _context(mass)
    b = paper_method.compute_bounds(dx, ctx)
    return {
        "dx_nm": dx,
        "mass_me": mass,
        "P_max": b.p_max,
        "P_max_percent": 100.0 * b.p_max,
        "z_star": b.z_star,
        "z_star_squared": b.z_star**2,
        "constant_printed": paper_method.PRINTED_CONSTANT,
        "constant_recomputed": paper_method.RECOMPUTED_CONSTANT,
        "E_bound_paper_meV": b.e_bound_paper * 1e3,
        "E_bound_recomp_meV": b.e_bound_recomputed * 1e3,
        "ratio_paper_to_recomp": b.ratio,
    }


def _bounds_table(r: dict) -> str:
    return "\n".join([
        f"confinement width dx          {r['dx_nm']:g} nm",
        f"particle mass                 {r['mass_me']:g} m_e",
        f"max interior probability      P_max = {r['P_max']:.9f} "
        f"({r['P_max_percent']:.7f}%, i.e. {r['P_max_percent']:.1f}%)",
        f"double root at P_max          z* = {r['z_star']:.9f} (z*^2 = {r['z_star_squared']:.9f} = 2/7)",
        f"|E| bound, printed constant   {r['E_bound_paper_meV']:.6f} meV  "
        f"[(sqrt14-1)/(7-sqrt14) = {r['constant_printed']:.7f}]",
        f"|E| bound, recomputed 2/7     {r['E_bound_recomp_meV']:.6f} meV  "
        f"[z*^2 = {r['constant_recomputed']:.7f}]",
        f"printed / recomputed          {r['ratio_paper_to_recomp']:.6f}",
    ]) + "\n"


def cmd_bounds(args) -> int:
    r = bounds_report(args.dx, args.mass)
    if args.format == "json":
        text = json.dumps(r, indent=2) + "\n"
    elif args.format == "csv":
        text = _rows_csv([r])
    else:
        text = _bounds_table(r)
    _emit(text, args.out)
    return EXIT_OK


def solve_rows(potential, ctx: PhysicalContext, backend: str,
               grid: fd_solver.GridConfig = fd_solver.GridConfig()) -> list[dict]:
    rows = []
    if backend == "tm":
        for i, s in enumerate(oracles.transfer_matrix_states(potential, ctx)):
            rows.append({"index": i, "E_meV": s.energy * 1e3, "z": s.z,
                         "p_inside": s.p_inside, "k_fit": s.k})
    else:
        for s in fd_solver.solve_bound_states(potential, ctx, grid):
            rows.append({"index": s.index, "E_meV": s.energy * 1e3, "z": s.z,
                         "p_inside": s.p_inside, "k_fit": s.k_fit})
    return rows


def cmd_solve(args) -> int:
    ctx = _context(args.mass)
    try:
        potential = load_potential(args.potential)
    except OSError as exc:
        raise CLIError(f"cannot read {args.potential}: {exc.strerror}") from None
    except PotentialFormatError as exc:
        raise CLIError(f"{args.potential}: {exc}") from None
    if args.grid_n is not None and args.grid_n < 3:
        raise CLIError("--grid-n must be at least 3")
    if args.pad is not None and not args.pad > 0:
        raise CLIError("--pad must be positive")
    grid = fd_solver.GridConfig(n=args.grid_n, pad=args.pad)
    try:
        rows = solve_rows(potential, ctx, args.backend, grid)
    except (fd_solver.GridAlignmentError, fd_solver.ConvergenceError) as exc:
        raise CLIError(f"solver failure: {exc}") from None
    if not rows:
        print("no bound state", file=sys.stderr)
        return EXIT_NO_STATE
    if args.format == "json":
        text = json.dumps(rows, indent=2) + "\n"
    elif args.format == "csv":
        text = _rows_csv(rows)
    else:
        text = _rows_table(rows)
    _emit(text, args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    ctx = _context(args.mass)
    if not (math.isfinite(args.dx) and args.dx > 0):
        raise CLIError(f"--dx must be a positive length in nm, got {args.dx!r}")
    try:
        depths = validation.parse_range(args.depth_range)
    except ValueError as exc:
        raise CLIError(str(exc)) from None
    if depths.size and not (depths > 0).all():
        raise CLIError("depths must be positive")
    spec = validation.SweepSpec(args.family, tuple(depths), (args.dx,))
    records = validation.sweep(spec, ctx, args.backend, workers=args.workers)
    try:
        validation.write_csv(records, args.out)
    except OSError as exc:
        raise CLIError(f"cannot write {args.out}: {exc.strerror}") from None
    summary = validation.summarize(records)
    print(f"records: {summary.count}")
    print(summary.recomputed.describe() + f" (expected z = {validation.Z_LIMIT_RECOMPUTED:.6g})")
    print(summary.paper.describe() + f" (expected z = {validation.Z_LIMIT_PAPER:.6g})")
    print(f"worst |residual|: {_fmt9(summary.worst_residual)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ultrashort", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="probability cap and energy bounds for a width dx")
    p.add_argument("--dx", type=float, required=True, help="confinement width in nm")
    p.add_argument("--mass", type=float, default=1.0, help="mass in electron masses")
    p.add_argument("--format", choices=("table", "csv", "json"), default="table")
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("solve", help="bound states of a potential file")
    p.add_argument("--potential", required=True, help="potential JSON file")
    p.add_argument("--mass", type=float, default=1.0)
    p.add_argument("--backend", choices=("tm", "fd"), default="tm")
    p.add_argument("--grid-n", type=int, help="finite-difference grid points")
    p.add_argument("--pad", type=float, help="finite-difference padding in nm")
    p.add_argument("--format", choices=("table", "csv", "json"), default="table")
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("validate", help="sweep well depths and write a CSV report")
    p.add_argument("--family", choices=("square-well",), default="square-well")
    p.add_argument("--dx", type=float, default=5.0)
    p.add_argument("--depth-range", default="1e-4:1:log:20", help="lo:hi:log|lin:count in eV")
    p.add_argument("--mass", type=float, default=1.0)
    p.add_argument("--backend", choices=("tm", "fd"), default="tm")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    try:
        return args.func(args)
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
