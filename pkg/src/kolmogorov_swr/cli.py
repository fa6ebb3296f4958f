"""Command-line experiment runner.

    kswr run --mode oswr-p --p 4.23 --out run.csv
    kswr table1 --levels 0,1,2 --out table1.csv
    kswr sweep-p --p-range 4 5 0.05 --out sweep_p.csv
    kswr sweep-pq --p-range 2 12 1 --q-range 1 5 0.5 --out sweep_pq.csv
    kswr history --out histories/
    kswr monodomain-verify
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import warnings
from pathlib import Path

from . import checks
from .grid import BASE_STEP, GridConfig, build_grid
from .sweep import SweepSpec, sweep_one_sided, sweep_two_sided
from .swr import SwrConfig, TransmissionKind, swr_run

logger = logging.getLogger("kolmogorov_swr")

P_STAR = 4.23
PQ_STAR = (11.0, 2.5)
MODES = ("cswr", "oswr-p", "oswr-pq")
TABLE_LEVELS = (0, 1, 2)
LARGE_LEVELS = (3, 4)


def transmission_for(mode: str, p: float | None, q: float | None) -> TransmissionKind:
    if mode == "cswr":
        return TransmissionKind.classical()
    if mode == "oswr-p":
        return TransmissionKind.one_sided(P_STAR if p is None else p)
    return TransmissionKind.two_sided(PQ_STAR[0] if p is None else p, PQ_STAR[1] if q is None else q)


def _grid_config(args, refine=None, overlap=None) -> GridConfig:
    return GridConfig(
        T=args.T,
        dt=args.base_step,
        hx=args.base_step,
        hv=args.base_step,
        refine_level=args.refine if refine is None else refine,
        overlap_elems=args.overlap_elems if overlap is None else overlap,
    )


def _swr_config(args, kind: TransmissionKind) -> SwrConfig:
    return SwrConfig(
        transmission=kind,
        schedule=args.schedule,
        eps=args.eps,
        max_iters=args.max_iters,
        rng_seed=args.seed,
        substep_full_dt=args.substep_full_dt,
        derivative=args.derivative,
    )


def _say(args, *msg):
    if not args.quiet:
        print(*msg)


def cmd_run(args) -> int:
    grid = build_grid(_grid_config(args))
    report = swr_run(grid, _swr_config(args, transmission_for(args.mode, args.p, args.q)))
    _say(args, f"{report.config['transmission']}: iterations={report.iterations} "
               f"converged={report.converged} final_error={report.error_history[-1]:.3e} "
               f"trace_size={report.trace_size}")
    if args.out:
        report.write_csv(args.out, timing=args.timing)
    return 0


def _parse_levels(text: str) -> list[int]:
    return [int(s) for s in text.split(",") if s.strip()]


def cmd_table1(args) -> int:
    levels = _parse_levels(args.levels) if args.levels is not None else list(TABLE_LEVELS)
    if args.large and args.levels is None:
        levels += list(LARGE_LEVELS)
    bad = [j for j in levels if j not in range(5)]
    if bad:
        raise SystemExit(f"levels must lie in 0..4, got {bad}")
    gated = [j for j in levels if j in LARGE_LEVELS]
    if gated and not args.large:
        raise SystemExit(f"levels {gated} need --large")
    overlaps = _parse_levels(args.overlaps)
    methods = [("CSWR", "cswr"), ("OSWR(p)", "oswr-p"), ("OSWR(p,q)", "oswr-pq")]

    rows = []
    for ov in overlaps:
        for name, mode in methods:
            for j in levels:
                row = {"decomposition": "overlapping" if ov else "non-overlapping",
                       "overlap_elems": ov, "method": name, "j": j}
                try:
                    with warnings.catch_warnings():
                        warnings.simplefilter("ignore")
                        grid = build_grid(_grid_config(args, refine=j, overlap=ov))
                        rep = swr_run(grid, _swr_config(args, transmission_for(mode, None, None)))
                    row.update(iterations=rep.iterations, converged=int(rep.converged),
                               final_error=repr(rep.error_history[-1]), status="ok")
                except Exception as exc:  # a failed cell must not stop the table
                    logger.exception("cell %s j=%d overlap=%d failed", name, j, ov)
                    row.update(iterations="", converged=0, final_error="", status=f"error: {exc}")
                rows.append(row)
                _say(args, f"{row['decomposition']:>15} {name:<10} j={j} "
                           f"iterations={row['iterations']} converged={bool(row['converged'])}")

    fields = ["decomposition", "overlap_elems", "method", "j", "iterations", "converged",
              "final_error", "status"]
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(f"# max_iters={args.max_iters} eps={args.eps} seed={args.seed}\n")
            w = csv.DictWriter(fh, fields, lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
    if rows:
        _say(args, format_table(rows, levels, args.max_iters))
    return 0


def format_table(rows, levels, max_iters) -> str:
    """Text rendering of the table: methods as rows, levels as columns."""
    out = []
    for deco in ("overlapping", "non-overlapping"):
        sel = [r for r in rows if r["decomposition"] == deco]
        if not sel:
            continue
        out.append(f"{deco:<12}" + "".join(f"{'j=' + str(j):>8}" for j in levels))
        for name in ("CSWR", "OSWR(p)", "OSWR(p,q)"):
            cells = []
            for j in levels:
                r = next((r for r in sel if r["method"] == name and r["j"] == j), None)
                if r is None or r["status"] != "ok":
                    cells.append("err")
                else:
                    cells.append(str(r["iterations"]) if r["converged"] else f">{max_iters}")
            out.append(f"{name:<12}" + "".join(f"{c:>8}" for c in cells))
    return "\n".join(out)


def _sweep_spec(args, two_sided: bool) -> SweepSpec:
    kind = TransmissionKind.two_sided(1, 1) if two_sided else TransmissionKind.one_sided(1)
    return SweepSpec(
        p_range=tuple(args.p_range),
        q_range=tuple(args.q_range) if two_sided else None,
        fixed_iters=args.fixed_iters,
        grid=_grid_config(args),
        swr=_swr_config(args, kind),
        workers=args.workers,
    )


def cmd_sweep(args, two_sided: bool) -> int:
    spec = _sweep_spec(args, two_sided)
    result = sweep_two_sided(spec) if two_sided else sweep_one_sided(spec)
    if args.out:
        result.write_csv(args.out)
    b = result.best
    _say(args, f"{len(result.records)} samples; best p={b.p:g}"
               + (f" q={b.q:g}" if b.q is not None else "")
               + f" iterations={b.iterations} error_at_K={b.error_at_K:.3e}")
    return 0


def cmd_history(args) -> int:
    if args.mode is None:
        modes = list(MODES)
    else:
        modes = [args.mode]
    out = Path(args.out) if args.out else Path(".")
    out.mkdir(parents=True, exist_ok=True)
    grid = build_grid(_grid_config(args))
    for mode in modes:
        report = swr_run(grid, _swr_config(args, transmission_for(mode, args.p, args.q)))
        path = out / f"history_{mode}_j{args.refine}.csv"
        report.write_csv(path, timing=args.timing)
        _say(args, f"{mode}: {report.iterations_performed} iterations -> {path}")
    return 0


def cmd_verify(args) -> int:
    results = checks.run_all(stiffness_perturbation=args.perturb_stiffness)
    for r in results:
        _say(args, r.line())
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", choices=MODES, default=None)
    common.add_argument("--p", type=float, default=None)
    common.add_argument("--q", type=float, default=None)
    common.add_argument("--refine", type=int, default=None,
                        help="dyadic refinement level j (default 0; 2 for history)")
    common.add_argument("--overlap-elems", type=int, default=3)
    common.add_argument("--eps", type=float, default=1e-6)
    common.add_argument("--max-iters", type=int, default=150)
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--schedule", choices=("serial", "parallel"), default="serial")
    common.add_argument("--substep-full-dt", action="store_true",
                        help="use tau = dt instead of dt/2 in both substeps")
    common.add_argument("--derivative", choices=("flux", "fd"), default="flux")
    common.add_argument("--T", type=float, default=2.0)
    common.add_argument("--base-step", type=float, default=BASE_STEP,
                        help="dt = hx = hv before refinement")
    common.add_argument("--out", default=None)
    common.add_argument("--large", action="store_true", help="allow levels j = 3, 4")
    common.add_argument("--timing", action="store_true",
                        help="write wall-clock times into history CSVs")
    common.add_argument("--quiet", action="store_true")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="kswr", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("run", parents=[common], help="one SWR run")
    t1 = sub.add_parser("table1", parents=[common], help="iteration-count table")
    t1.add_argument("--levels", default=None, help="comma-separated j values (default 0,1,2)")
    t1.add_argument("--overlaps", default="3,0", help="comma-separated overlap_elems values")
    for name, two in (("sweep-p", False), ("sweep-pq", True)):
        sp = sub.add_parser(name, parents=[common], help="Robin parameter sweep")
        sp.add_argument("--p-range", nargs=3, type=float, default=[4.0, 5.0, 0.05],
                        metavar=("LO", "HI", "STEP"))
        if two:
            sp.add_argument("--q-range", nargs=3, type=float, default=[1.0, 5.0, 0.5],
                            metavar=("LO", "HI", "STEP"))
        sp.add_argument("--fixed-iters", type=int, default=15)
        sp.add_argument("--workers", type=int, default=1)
    sub.add_parser("history", parents=[common], help="convergence histories")
    ver = sub.add_parser("monodomain-verify", parents=[common], help="solver self-checks")
    ver.add_argument("--perturb-stiffness", type=float, default=0.0,
                     help="fault injection: scale the stiffness diagonal by (1 + value)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    if args.max_iters < 1 or args.eps <= 0:
        parser.error("--max-iters must be >= 1 and --eps positive")
    if args.command == "run" and args.mode is None:
        args.mode = "cswr"
    if args.refine is None:
        args.refine = 2 if args.command == "history" else 0
    handlers = {
        "run": cmd_run,
        "table1": cmd_table1,
        "sweep-p": lambda a: cmd_sweep(a, False),
        "sweep-pq": lambda a: cmd_sweep(a, True),
        "history": cmd_history,
        "monodomain-verify": cmd_verify,
    }
    try:
        # validate the grid before any computation
        build_grid(_grid_config(args))
    except ValueError as exc:
        parser.error(str(exc))
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
