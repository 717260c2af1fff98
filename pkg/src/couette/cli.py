"""``couette`` command-line front end.

Every command writes its outputs into ``--out`` (created if needed).  On an
error the command prints a JSON object ``{"error": ..., "message": ...}`` to
stderr, writes the same object to ``error.json`` and exits with status 2.
``verify`` exits with status 1 when any suite fails.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import __version__
from .bvp import REFINEMENT_LEVELS, ProblemSpec, refine_until_converged
from .errors import CouetteError
from .operators import ModeParams
from .presets import PRESETS, get_preset, load_tabulated
from .reporting import (
    DELTA_COLUMNS,
    EIGS_COLUMNS,
    PROFILE_COLUMNS,
    RESOLVENT_COLUMNS,
    ResultRecord,
    delta_rows,
    eigs_rows,
    line_plot_svg,
    profile_rows,
    resolvent_rows,
    write_csv,
)
from .resolvent import rightmost_eigenvalue
from .grid import build_grid
from .sweep import SweepSpec, run_delta_sweep, run_resolvent_sweep
from .verify import SUITES, run_suites

FORMATS = ("csv", "json", "svg")


def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _formats(values: Optional[Sequence[str]], default: Sequence[str]) -> List[str]:
    if not values:
        return list(default)
    out = []
    for v in values:
        for part in v.split(","):
            part = part.strip().lower()
            if part not in FORMATS:
                raise ValueError(f"unknown format {part!r}; choose from {FORMATS}")
            if part not in out:
                out.append(part)
    return out


def _levels(nodes: Optional[int]) -> tuple:
    if nodes is None:
        return REFINEMENT_LEVELS
    finer = tuple(n for n in REFINEMENT_LEVELS if n > nodes)
    return (nodes,) + (finer or (2 * nodes,))


def _reynolds_list(args) -> List[float]:
    if args.r_list:
        return args.r_list
    if args.reynolds is not None:
        return [args.reynolds]
    raise ValueError("give --r-list or --reynolds")


def cmd_solve(args) -> ResultRecord:
    if args.forcing_file:
        forcing = load_tabulated(args.forcing_file)
    else:
        forcing = get_preset(args.forcing)
    if args.reynolds is None:
        raise ValueError("solve needs --reynolds")
    params = ModeParams.imaginary(args.k, args.xi, args.reynolds)
    problem = ProblemSpec(params, forcing=lambda grid: forcing.scalar(grid, params))
    sol = refine_until_converged(problem, args.rel_tol, _levels(args.nodes))
    grid = sol.grid
    payload = {
        "k": params.k, "xi": args.xi, "reynolds": params.reynolds, "forcing": forcing.name,
        "n_nodes": grid.n_nodes, "norm_sq": sol.norms.norm_sq, "dnorm_sq": sol.norms.dnorm_sq,
        "d2norm_sq": sol.norms.d2norm_sq, "energy": sol.norms.dnorm_sq + params.k**2 * sol.norms.norm_sq,
        "residual_max": sol.residual_max, "rcond": sol.rcond,
    }
    if forcing.manufactured:
        exact = grid.sample(forcing.exact).values
        scale = float(np.max(np.abs(exact))) or 1.0
        payload["mms_error"] = float(np.max(np.abs(sol.psi.values - exact)) / scale)
    elif params.k == 0:
        f_sq = forcing.mode(grid).norm_sq
        bound = params.reynolds**2 / math.pi**6 * f_sq
        payload["k0_bound"] = bound
        payload["k0_bound_holds"] = bool(sol.norms.norm_sq <= bound)
    conv = sol.convergence
    convergence = {"levels": list(conv.levels), "converged_at": conv.converged_at,
                   "rel_change": conv.rel_change}
    out = args.out
    if "csv" in args.formats:
        write_csv(out / "profile.csv", PROFILE_COLUMNS, profile_rows(sol))
    return ResultRecord("solve", _echo(args), [payload], convergence)


def _plot(path, xs, series, title, ylabel, **kw):
    line_plot_svg(path, xs, series, title=title, ylabel=ylabel, **kw)


def cmd_sweep_delta(args) -> ResultRecord:
    spec = SweepSpec(tuple(_reynolds_list(args)), args.xi_points, args.target, args.rel_tol,
                     args.nodes, refine=not args.no_refine)
    results = run_delta_sweep(spec)
    out, stem = args.out, f"sweep_{args.target}"
    if "csv" in args.formats:
        write_csv(out / f"{stem}.csv", DELTA_COLUMNS, delta_rows(results))
    if "svg" in args.formats:
        kept = [r for r in results if not r.skipped]
        if kept:
            xs = [r.reynolds for r in kept]
            j = args.target[-1]
            _plot(out / f"{stem}_k2norm.svg", xs, {f"max k^2 ||delta{j}||^2": [r.max_k2_norm_sq for r in kept]},
                  f"delta{j}: max over (k, xi) of k^2 ||delta||^2", "max", reference=1.0)
            _plot(out / f"{stem}_dnorm.svg", xs, {f"max ||delta{j}'||^2": [r.max_dnorm_sq for r in kept]},
                  f"delta{j}: max over (k, xi) of ||delta'||^2", "max", reference=1.0)
    payload = [
        {"reynolds": r.reynolds, "target": r.target, "skipped": r.skipped,
         "max_k2_norm_sq": r.max_k2_norm_sq, "max_dnorm_sq": r.max_dnorm_sq,
         "argmax_k2": r.argmax_k2, "argmax_dnorm": r.argmax_dnorm,
         "points_evaluated": r.points_evaluated, "refine_evaluations": r.refine_evaluations,
         "n_nodes": r.n_nodes, "failures": r.failures,
         "converged_k2": r.converged_k2, "converged_dnorm": r.converged_dnorm}
        for r in results
    ]
    return ResultRecord("sweep-delta", _echo(args), payload, {"n_nodes": [r.n_nodes for r in results]})


def cmd_sweep_resolvent(args) -> ResultRecord:
    spec = SweepSpec(tuple(_reynolds_list(args)), args.xi_points, "resolvent", args.rel_tol,
                     args.nodes, refine=not args.no_refine, k_max=args.k_max)
    results = run_resolvent_sweep(spec)
    out = args.out
    if "csv" in args.formats:
        write_csv(out / "sweep_resolvent.csv", RESOLVENT_COLUMNS, resolvent_rows(results))
    if "svg" in args.formats:
        xs = [r.reynolds for r in results]
        _plot(out / "sweep_resolvent_sup.svg", xs,
              {"sup over s = i xi": [r.sup_norm for r in results],
               "|s| >= 2 sqrt(2) (1 + sqrt(R))": [r.region_sup for r in results]},
              "resolvent norm against R", "norm", logy=True)
    payload = [
        {"reynolds": r.reynolds, "sup_norm": r.sup_norm, "argmax_s": r.argmax_s,
         "argmax_k": r.argmax_k, "region_sup": r.region_sup, "full_sup": r.full_sup,
         "theorem1_max_ratio": r.theorem1_max_ratio, "k_max": r.k_max, "truncated": r.truncated,
         "points_evaluated": r.points_evaluated, "refine_evaluations": r.refine_evaluations,
         "n_nodes": r.n_nodes, "failures": r.failures, "converged_sup": r.converged_sup}
        for r in results
    ]
    return ResultRecord("sweep-resolvent", _echo(args), payload,
                        {"n_nodes": [r.n_nodes for r in results]})


def cmd_eigs(args) -> ResultRecord:
    grid = build_grid(args.nodes or 96)
    reports = [rightmost_eigenvalue(args.k, R, grid) for R in _reynolds_list(args)]
    if "csv" in args.formats:
        write_csv(args.out / "eigs.csv", EIGS_COLUMNS, eigs_rows(reports))
    if "svg" in args.formats:
        xs = [r.reynolds for r in reports]
        _plot(args.out / "eigs_gap.svg", xs, {"|Re lambda| R": [abs(r.rightmost_eig.real) * r.reynolds for r in reports]},
              f"rightmost eigenvalue, k = {args.k}", "|Re lambda| R")
    payload = [
        {"k": r.k, "reynolds": r.reynolds, "rightmost_eig": r.rightmost_eig,
         "all_eigs_stable": r.all_eigs_stable, "n_nodes": r.n_nodes,
         "refinement_shift": r.refinement_shift}
        for r in reports
    ]
    return ResultRecord("eigs", _echo(args), payload, {"n_nodes": grid.n_nodes})


def cmd_verify(args) -> ResultRecord:
    results = run_suites(args.suite, args.scale, args.tol_scale, args.seed, echo=print)
    payload = [
        {"name": r.name, "criterion": r.criterion, "passed": r.passed, "measured": r.measured,
         "threshold": r.threshold, "elapsed": r.elapsed, "budget": r.budget, "detail": r.detail}
        for r in results
    ]
    failed = [r.name for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} suites passed"
          + (f"; failing: {', '.join(failed)}" if failed else ""))
    return ResultRecord("verify", _echo(args), payload, {"failed": failed})


def _echo(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "func"}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="couette", description="Resolvent estimates for 2-D plane Couette flow.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, default_formats):
        sp.add_argument("--out", type=Path, default=Path("."), help="output directory")
        sp.add_argument("--format", dest="format", action="append",
                        help=f"output formats, comma separated or repeated; default {','.join(default_formats)}")
        sp.add_argument("--nodes", type=int, help="collocation nodes (default: chosen per R)")
        sp.add_argument("--rel-tol", type=float, default=1e-6, help="grid-refinement tolerance")
        sp.set_defaults(default_formats=default_formats)

    sp = sub.add_parser("solve", help="solve one forced mode problem")
    common(sp, ("csv", "json"))
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--xi", type=float, required=True, help="s = i xi")
    sp.add_argument("--reynolds", type=float, required=True)
    sp.add_argument("--forcing", default="sin", choices=sorted(PRESETS))
    sp.add_argument("--forcing-file", type=Path, help="CSV with y,f_re,f_im,g_re,g_im")
    sp.set_defaults(func=cmd_solve)

    for name, func, help_ in (("sweep-delta", cmd_sweep_delta, "maximize the delta-problem norms over (k, xi)"),
                              ("sweep-resolvent", cmd_sweep_resolvent, "resolvent norm sup over the imaginary axis")):
        sp = sub.add_parser(name, help=help_)
        common(sp, ("csv", "json", "svg"))
        sp.add_argument("--r-list", type=_float_list, help="comma-separated increasing Reynolds numbers")
        sp.add_argument("--reynolds", type=float)
        sp.add_argument("--xi-points", type=int, default=8, help="base xi lattice density")
        sp.add_argument("--no-refine", action="store_true", help="lattice only, no band points or polishing")
        if name == "sweep-delta":
            sp.add_argument("--target", choices=("delta1", "delta2"), required=True)
        else:
            sp.add_argument("--k-max", type=int)
        sp.set_defaults(func=func)

    sp = sub.add_parser("eigs", help="rightmost eigenvalue of one mode")
    common(sp, ("csv", "json"))
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--r-list", type=_float_list)
    sp.add_argument("--reynolds", type=float)
    sp.set_defaults(func=cmd_eigs)

    sp = sub.add_parser("verify", help="run the acceptance suites")
    common(sp, ("json",))
    sp.add_argument("--suite", action="append", choices=sorted(SUITES),
                    help="run only this suite (repeatable)")
    sp.add_argument("--scale", choices=("desk", "quick"), default="desk")
    sp.add_argument("--tol-scale", type=float, default=1.0, help="multiplies every threshold; 0 forces failure")
    sp.add_argument("--seed", type=int, help="seed for the randomized suites")
    sp.set_defaults(func=cmd_verify)
    return p


def _fail(out: Optional[Path], exc: BaseException) -> int:
    err = {"error": type(exc).__name__, "message": str(exc)}
    rcond = getattr(exc, "rcond", None)
    if rcond is not None:
        err["rcond"] = rcond
    text = json.dumps(err, sort_keys=True)
    print(text, file=sys.stderr)
    if out is not None:
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / "error.json").write_text(text + "\n")
        except OSError:
            pass
    return 2


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = args.out
    try:
        args.formats = _formats(args.format, args.default_formats)
        del args.format, args.default_formats
        out.mkdir(parents=True, exist_ok=True)
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            record = args.func(args)
        if "json" in args.formats:
            record.write(out / f"{record.command}.json")
    except (CouetteError, ValueError, ArithmeticError, OSError) as exc:
        return _fail(out, exc)
    if record.command == "verify":
        return 0 if not record.convergence["failed"] else 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
