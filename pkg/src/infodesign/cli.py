"""Command-line front end: ``infodesign <subcommand> SCENARIO [options]``.

Exit codes: 0 success, 1 invalid input or I/O failure, 2 a solve finished
but a residual, feasibility or certificate check failed.
"""
from __future__ import annotations

import argparse
import csv
import io
import os
import sys
import time

import numpy as np

from . import __version__
from .equilibrium import EquilibriumError, RESIDUAL_TOL, bne_indirect, first_best, social_cost
from .moments import (
    MomentError,
    build_diagonal_relaxation,
    build_diagonal_sdp,
    build_gpm_fixed_y,
    build_private_relaxation,
    export_sdpa,
    lower_bound,
    solve_moment_sdp,
)
from .private_design import DesignError, atom_bound, optimize_diagonal, optimize_private, sweep_nu
from .public_design import canonical_policy, evaluate_public, optimize_public
from .scenario import ScenarioError
from .estimators import check_scenario

CSV_COLUMNS = ["nu", "mode", "cost", "lower_bound", "gap", "max_obedience_residual",
               "max_nash_residual", "starts", "seed", "wall_ms"]
EXIT_OK, EXIT_INPUT, EXIT_CHECK = 0, 1, 2
ORDER_TOL = 1e-3


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Usage errors are input errors (exit 1); exit 2 is reserved for failed checks."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _timing_enabled(args):
    return bool(getattr(args, "timing", False)) or os.environ.get("INFODESIGN_TIMING", "") not in ("", "0")


def _threads(args):
    if args.threads is not None:
        return args.threads
    env = os.environ.get("INFODESIGN_THREADS")
    return int(env) if env else None


def _fmt_matrix(A, digits=2):
    A = np.atleast_2d(A)
    return "\n".join("  [" + "  ".join(f"{v:{digits + 5}.{digits}f}" for v in row) + " ]" for row in A)


def _fmt_vec(v, digits=4):
    return "(" + ", ".join(f"{x:.{digits}f}" for x in np.ravel(v)) + ")"


def _num(v):
    if v is None:
        return ""
    v = float(v)
    return "nan" if np.isnan(v) else repr(v + 0.0)


def _parse_policy(text, s):
    if text in ("no-info", "no", "full-info", "full"):
        return canonical_policy(text, s).weights
    try:
        rows = [[float(v) for v in r.split(",")] for r in text.split(";")]
    except ValueError as exc:
        raise CliError(f"cannot parse policy matrix {text!r}; use rows like '1,0;0,1'") from exc
    return np.array(rows)


def _parse_grid(text):
    try:
        grid = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise CliError(f"cannot parse grid {text!r}") from exc
    if not grid or any(v < 0 or v > 1 for v in grid):
        raise CliError("grid values must lie in [0, 1]")
    return grid


def _header(scenario, command, seed):
    return [
        f"# infodesign {__version__}",
        f"# scenario sha256 {scenario.digest()}",
        f"# command: {command}",
        f"# seed: {seed}",
    ]


def _write_csv(path, header, rows):
    buf = io.StringIO()
    for line in header:
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([r.get(c, "") for c in CSV_COLUMNS])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def _row(nu, mode, cost, starts, seed, wall, ob=None, na=None, lb=None, gap=None):
    return {
        "nu": _num(nu),
        "mode": mode,
        "cost": _num(cost),
        "lower_bound": _num(lb),
        "gap": _num(gap),
        "max_obedience_residual": _num(ob),
        "max_nash_residual": _num(na),
        "starts": str(starts),
        "seed": str(seed),
        "wall_ms": str(wall),
    }


def _command_line(args, keys):
    parts = [args.command, args.scenario_name]
    for k in keys:
        v = getattr(args, k, None)
        if v is None or v is False:
            continue
        flag = "--" + k.replace("_", "-")
        parts.append(flag if v is True else f"{flag} {v}")
    return " ".join(parts)


def cmd_equilibrium(args):
    sc = args.scenario
    W = _parse_policy(args.policy, sc.n_states)
    eq = bne_indirect(sc, W, args.nu)
    cost = social_cost(sc, eq.atoms, W, eq.y)
    print(f"scenario {sc.name or args.scenario_name}  nu={args.nu:g}  policy={args.policy}")
    print("participant flows (columns = messages):")
    print(_fmt_matrix(eq.atoms.T))
    print(f"y = {_fmt_vec(eq.y)}")
    print(f"potential = {eq.potential:.8f}")
    print(f"social cost = {cost:.6f}")
    print(f"kkt residual = {eq.kkt_residual:.3e}  iterations = {eq.iterations}")
    if args.csv:
        _write_csv(args.csv, _header(sc, _command_line(args, ["policy", "nu"]), 0),
                   [_row(args.nu, "equilibrium", cost, 0, 0, 0, 0.0, eq.kkt_residual)])
    return EXIT_OK if eq.kkt_residual <= RESIDUAL_TOL else EXIT_CHECK


def cmd_first_best(args):
    sc = args.scenario
    res = first_best(sc)
    print(f"scenario {sc.name or args.scenario_name}  first-best")
    for w, f, c in zip(sc.states, res.flows, res.state_costs):
        print(f"  state {w}: flow {_fmt_vec(f)}  cost {c:.6f}")
    print(f"expected cost = {res.cost:.6f}")
    return EXIT_OK if res.converged else EXIT_CHECK


def _design(sc, mode, nu, m, starts, seed, threads):
    if mode == "diagonal":
        return optimize_diagonal(sc, nu, starts=starts, seed=seed, threads=threads)
    if mode == "private":
        return optimize_private(sc, nu, m=m, starts=starts, seed=seed, threads=threads)
    if mode == "public":
        return optimize_public(sc, nu, m=m, starts=starts, seed=seed, threads=threads)
    raise CliError(f"unknown mode {mode!r}")


def _resolve_m(args, sc):
    if args.certified_m:
        return atom_bound(sc.n_states, sc.n_routes, sc.degree)
    return args.atoms


def _print_solution(sol, sc):
    label = "messages" if sol.mode == "public" else "atoms"
    print(f"mode {sol.mode}  nu={sol.nu:g}  m={sol.m}")
    print(f"participant flows (columns = {label}):")
    print(_fmt_matrix(sol.atoms.T))
    print("weights (rows = states):")
    print(_fmt_matrix(sol.weights))
    print(f"y = {_fmt_vec(sol.y, 2)}")
    print(f"cost = {sol.cost:.6f}")
    print(f"max obedience residual = {sol.max_obedience_residual:.3e}")
    print(f"max nash residual = {sol.max_nash_residual:.3e}")
    if sol.lower_bound is not None:
        print(f"lower bound = {sol.lower_bound:.6f}  gap = {sol.gap:.3e}")


def _gap_ok(sol):
    return sol.gap is None or sol.gap >= -1e-6 * (1.0 + abs(sol.cost))


def cmd_design(args):
    sc = args.scenario
    m = _resolve_m(args, sc)
    t0 = time.perf_counter()
    sol = _design(sc, args.mode, args.nu, m, args.starts, args.seed, _threads(args))
    if args.certify:
        cert = lower_bound(sc, args.nu, args.mode)
        sol.certify_with(cert.lower_bound)
        sol.info["certificate"] = cert.method
    wall = int(round((time.perf_counter() - t0) * 1000)) if _timing_enabled(args) else 0
    _print_solution(sol, sc)
    if args.certify:
        print(f"certificate: {sol.info['certificate']}")
    if args.csv:
        cmd = _command_line(args, ["mode", "nu", "atoms", "certified_m", "starts", "seed", "certify"])
        _write_csv(args.csv, _header(sc, cmd, args.seed),
                   [_row(args.nu, sol.mode, sol.cost, args.starts, args.seed, wall, sol.max_obedience_residual,
                         sol.max_nash_residual, sol.lower_bound, sol.gap)])
    return EXIT_OK if sol.feasible and _gap_ok(sol) else EXIT_CHECK


def sweep_rows(sc, grid, modes, m, starts, seed, threads, certify=False, timing=False):
    """Rows of the sweep report (one per nu and mode) and whether all checks passed."""
    grid = sorted(set(grid))
    fb = first_best(sc)
    per_mode = {}
    for mode in modes:
        t0 = time.perf_counter()
        sols = sweep_nu(sc, grid, mode=mode, m=m, starts=starts, seed=seed, threads=threads)
        per_mode[mode] = (sols, (time.perf_counter() - t0) * 1000 / max(1, len(grid)))
    rows, ok = [], fb.converged
    for i, nu in enumerate(grid):
        rows.append(_row(nu, "first-best", fb.cost, 0, seed, 0))
        for mode in modes:
            sols, per = per_mode[mode]
            sol = sols[i]
            if certify and sol.feasible:
                sol.certify_with(lower_bound(sc, nu, mode).lower_bound)
            ok = ok and sol.feasible and _gap_ok(sol)
            rows.append(_row(nu, mode, sol.cost, starts, seed, int(round(per)) if timing else 0,
                             sol.max_obedience_residual, sol.max_nash_residual, sol.lower_bound, sol.gap))
        for kind in ("full-info", "no-info"):
            try:
                sol = evaluate_public(sc, canonical_policy(kind, sc.n_states).weights, nu)
            except (DesignError, EquilibriumError):
                ok = False
                rows.append(_row(nu, kind, float("nan"), 0, seed, 0))
                continue
            rows.append(_row(nu, kind, sol.cost, 0, seed, 0, sol.max_obedience_residual, sol.max_nash_residual))
    for r in rows:
        c = float(r["cost"])
        if r["mode"] != "first-best" and not np.isnan(c) and fb.cost > c + ORDER_TOL:
            ok = False
    return rows, ok


def cmd_sweep(args):
    sc = args.scenario
    grid = _parse_grid(args.grid)
    modes = [v.strip() for v in args.modes.split(",") if v.strip()]
    for mode in modes:
        if mode not in ("diagonal", "private", "public"):
            raise CliError(f"unknown mode {mode!r}")
    m = _resolve_m(args, sc)
    rows, ok = sweep_rows(sc, grid, modes, m, args.starts, args.seed, _threads(args), args.certify,
                          _timing_enabled(args))
    cmd = _command_line(args, ["grid", "modes", "atoms", "certified_m", "starts", "seed", "certify"])
    _write_csv(args.out, _header(sc, cmd, args.seed), rows)
    width = max(len(r["mode"]) for r in rows)
    print(f"{'nu':>6}  {'mode':<{width}}  {'cost':>12}")
    for r in rows:
        print(f"{float(r['nu']):6.3f}  {r['mode']:<{width}}  {float(r['cost']):12.4f}")
    print(f"wrote {args.out}")
    return EXIT_OK if ok else EXIT_CHECK


def cmd_certify(args):
    sc = args.scenario
    m = _resolve_m(args, sc)
    sol = _design(sc, args.mode, args.nu, m, args.starts, args.seed, _threads(args))
    cert = lower_bound(sc, args.nu, args.mode)
    sol.certify_with(cert.lower_bound)
    print(f"mode {args.mode}  nu={args.nu:g}")
    print(f"design cost = {sol.cost:.6f}")
    for name, val in cert.bounds.items():
        res = cert.results[name]
        tms = res.tms
        if isinstance(tms, dict):
            verdict = ", ".join(f"{k}: {v.verdict}" for k, v in tms.items())
        else:
            verdict = tms.verdict if tms is not None else "n/a"
        print(f"bound {name} = {val:.6f}  relative gap {res.relative_gap:.1e}  rank check: {verdict}")
    print(f"lower bound = {sol.lower_bound:.6f}  gap = {sol.gap:.3e}  (relative {sol.gap / max(1.0, abs(sol.cost)):.3e})")
    return EXIT_OK if sol.feasible and _gap_ok(sol) else EXIT_CHECK


def _program_for(sc, kind, nu):
    if kind == "auto":
        kind = "diagonal"
    if kind == "diagonal":
        return build_diagonal_sdp(sc, nu) if sc.degree == 1 else build_diagonal_relaxation(sc, nu)
    if kind == "gpm":
        y = np.zeros(sc.n_routes) if nu == 1.0 else None
        if y is None:
            raise CliError("the fixed-y program is exported at nu = 1 (y = 0) only")
        return build_gpm_fixed_y(sc, y, 1.0)
    if kind == "joint":
        return build_private_relaxation(sc, nu)
    raise CliError(f"unknown program {kind!r}")


def cmd_export_sdpa(args):
    sc = args.scenario
    prog = _program_for(sc, args.program, args.nu)
    prob = export_sdpa(prog, args.out)
    print(f"wrote {args.out}: {prob.m} variables, block sizes {' '.join(str(b) for b in prob.block_sizes)}")
    if args.solve:
        res = solve_moment_sdp(prog)
        print(f"value = {res.value:.8f}")
    return EXIT_OK


def build_parser():
    p = _Parser(prog="infodesign", description="Information design for Bayesian routing games.")
    p.add_argument("--version", action="version", version=f"infodesign {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def scenario_arg(sp):
        sp.add_argument("scenario", help="scenario file or built-in name")

    def design_args(sp, with_csv=True):
        sp.add_argument("--mode", choices=["private", "diagonal", "public"], default="private")
        sp.add_argument("--nu", type=float, default=1.0)
        sp.add_argument("--atoms", type=int, default=None, help="atoms (private) or messages (public); default s")
        sp.add_argument("--certified-m", action="store_true", help="use the sufficient atom count s*C(D+n, D+1)")
        sp.add_argument("--starts", type=int, default=100)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threads", type=int, default=None)

    sp = sub.add_parser("equilibrium", help="Bayes Nash flow of a fixed public policy")
    scenario_arg(sp)
    sp.add_argument("--policy", default="no-info", help="no-info, full-info or rows like '1,0;0,1'")
    sp.add_argument("--nu", type=float, default=0.0)
    sp.add_argument("--csv", default=None)
    sp.set_defaults(func=cmd_equilibrium)

    sp = sub.add_parser("first-best", help="state-wise system optimum")
    scenario_arg(sp)
    sp.set_defaults(func=cmd_first_best)

    sp = sub.add_parser("design", help="optimize a signaling policy")
    scenario_arg(sp)
    design_args(sp)
    sp.add_argument("--certify", action="store_true", help="add a moment lower bound and the gap")
    sp.add_argument("--csv", default=None)
    sp.add_argument("--timing", action="store_true", help="record wall time in the CSV (breaks byte-identity)")
    sp.set_defaults(func=cmd_design)

    sp = sub.add_parser("sweep", help="design costs across participation rates, as CSV")
    scenario_arg(sp)
    sp.add_argument("--grid", default="0,0.25,0.5,0.75,1")
    sp.add_argument("--modes", default="private,public")
    sp.add_argument("--atoms", type=int, default=None)
    sp.add_argument("--certified-m", action="store_true")
    sp.add_argument("--starts", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threads", type=int, default=None)
    sp.add_argument("--certify", action="store_true")
    sp.add_argument("--timing", action="store_true", help="record wall time in the CSV (breaks byte-identity)")
    sp.add_argument("--out", "-o", required=True)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("certify", help="design plus moment lower bound and gap")
    scenario_arg(sp)
    design_args(sp)
    sp.set_defaults(func=cmd_certify)

    sp = sub.add_parser("export-sdpa", help="write a moment program in sparse SDPA format")
    scenario_arg(sp)
    sp.add_argument("--nu", type=float, default=1.0)
    sp.add_argument("--program", choices=["auto", "diagonal", "gpm", "joint"], default="auto")
    sp.add_argument("--solve", action="store_true", help="also solve it and print the value")
    sp.add_argument("--out", "-o", required=True)
    sp.set_defaults(func=cmd_export_sdpa)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.scenario_name = args.scenario
        args.scenario = check_scenario(args.scenario)
        if hasattr(args, "nu") and not 0.0 <= args.nu <= 1.0:
            raise CliError("--nu must lie in [0, 1]")
        if getattr(args, "starts", 1) < 1:
            raise CliError("--starts must be at least 1")
        return args.func(args)
    except (ScenarioError, CliError, DesignError, EquilibriumError, MomentError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
