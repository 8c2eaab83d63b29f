"""Experiment orchestration CLI.

Subcommands:
    run <config.toml>       build problem + topology, sweep (algorithm, K,
                            topology) cells, write CSV traces, summary.csv,
                            SVG convergence panels, and a meta.json manifest
    bounds <flags>          evaluate the closed-form round bounds / step size
    validate <config.toml>  static config validation, no run

`--threads 0` (default) is the sequential canonical mode; with N > 0 the
independent cells run on a thread pool (outputs are written to cell-unique
paths, so results are identical either way).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import sys
from pathlib import Path

from . import algorithms, metrics, problems, svgplot, theory
from .config import build_problem, build_topology_points, load_config
from .topology import RNG_ALGORITHM

TOOL_VERSION = "0.1.0"

__all__ = ["main", "run_experiment"]


def _cell_step_size(policy, consts, k_local, rho, prob, mixing, algo, stop,
                    grid_points, f_star, x_star):
    """Resolve the step-size policy for one cell: (eta, trace-or-None)."""
    if isinstance(policy, float):
        return policy, None
    if policy == "thm1":
        b = theory.BoundInputs(L=consts.L, mu=max(consts.mu, 1e-300),
                               delta=consts.delta, beta=consts.beta,
                               rho=rho, K=k_local,
                               epsilon=max(stop.epsilon, 1e-300))
        return theory.stepsize_thm1(b), None
    grid = algorithms.default_step_grid(consts.L, count=grid_points)
    eta, trace = algorithms.tune_step_size(
        prob, mixing, algo, k_local, grid, stop,
        f_star=f_star, x_star=x_star)
    return eta, trace


def run_experiment(cfg, threads: int = 0) -> dict:
    """Run every (topology, algorithm, K) cell of a validated config.

    Returns the summary dict that also lands in summary.csv / errors.csv.
    Cell failures are recorded and do not abort the other cells.
    """
    if cfg.errors:
        raise SystemExit("config invalid:\n  " + "\n  ".join(cfg.errors))

    outdir = Path(cfg.output) / cfg.name
    outdir.mkdir(parents=True, exist_ok=True)

    prob = build_problem(cfg)
    points = build_topology_points(cfg)
    consts = problems.measure_constants(prob, delta_samples=20, seed=cfg.seed)

    f_star = x_star = None
    if prob.kind == problems.LEAST_SQUARES:
        opt = metrics.reference_optimum(prob)
        f_star, x_star = opt["f_star"], opt["x_star"]

    r = cfg.run
    stop = algorithms.StoppingRule(
        max_rounds=int(r.get("max_rounds", 1000)),
        epsilon=float(r.get("epsilon", 0.0)),
        measure=r.get("measure", "avg_grad_norm"),
    )
    policy = r.get("step_size", "grid")
    if not isinstance(policy, str):
        policy = float(policy)
    grid_points = int(r.get("grid_points", 8))
    x0_policy = r.get("x0", "zeros")

    cells = [
        (point, algo, k_local)
        for point in points
        for algo in r["algorithms"]
        for k_local in r["K"]
    ]

    def run_cell(cell):
        point, algo, k_local = cell
        mixing = point.mixing
        eta, tuned_trace = _cell_step_size(
            policy, consts, k_local, mixing.rho, prob, mixing, algo, stop,
            grid_points, f_star, x_star)
        state = algorithms.init(prob, mixing, algo, k_local, eta,
                                x0_policy=x0_policy, seed=cfg.seed)
        trace = algorithms.run(state, prob, mixing, stop,
                               f_star=f_star, x_star=x_star)
        cell_dir = outdir / point.label
        cell_dir.mkdir(parents=True, exist_ok=True)
        (cell_dir / f"{algo}_K{k_local}.csv").write_text(
            metrics.trace_to_csv(trace))
        reached = metrics.rounds_to_epsilon(trace, stop.measure, stop.epsilon)
        try:
            fit = metrics.fit_linear_rate(trace, stop.measure)
        except metrics.MetricsError:
            fit = {"slope": None, "r_squared": None}
        return {
            "topology": point.label,
            "algo": algo,
            "K": k_local,
            "rho": mixing.rho,
            "eta": eta,
            "rounds_to_eps": reached,
            "final_measure": trace.final.measure(stop.measure),
            "slope": fit["slope"],
            "r_squared": fit["r_squared"],
            "termination": trace.termination,
            "trace": trace,
        }

    rows, errors = [], []
    if threads and threads > 0:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {pool.submit(run_cell, c): c for c in cells}
            for fut in concurrent.futures.as_completed(futures):
                point, algo, k_local = futures[fut]
                try:
                    rows.append(fut.result())
                except Exception as exc:  # noqa: BLE001 - cell isolation
                    errors.append((point.label, algo, k_local, str(exc)))
    else:
        for cell in cells:
            try:
                rows.append(run_cell(cell))
            except Exception as exc:  # noqa: BLE001 - cell isolation
                errors.append((cell[0].label, cell[1], cell[2], str(exc)))

    rows.sort(key=lambda row: (row["topology"], row["algo"], row["K"]))

    def cell_str(v):
        return "" if v is None else (f"{v:.17g}" if isinstance(v, float) else str(v))

    summary_lines = ["topology,algo,K,rho,eta,rounds_to_eps,final_measure,slope,r_squared"]
    for row in rows:
        summary_lines.append(",".join(cell_str(row[k]) for k in (
            "topology", "algo", "K", "rho", "eta", "rounds_to_eps",
            "final_measure", "slope", "r_squared")))
    (outdir / "summary.csv").write_text("\n".join(summary_lines) + "\n")

    if errors:
        err_lines = ["topology,algo,K,error"]
        err_lines += [f'{t},{a},{k},"{msg}"' for t, a, k, msg in errors]
        (outdir / "errors.csv").write_text("\n".join(err_lines) + "\n")

    # One SVG panel per (topology, algorithm): measure vs round, curve per K.
    panels = {}
    for row in rows:
        panels.setdefault((row["topology"], row["algo"]), []).append(row)
    for (topo_label, algo), panel_rows in panels.items():
        series = []
        for row in sorted(panel_rows, key=lambda r: r["K"]):
            trace = row["trace"]
            xs = [rm.r for rm in trace.rounds]
            ys = trace.measure_series(stop.measure)
            series.append((f"K={row['K']}", xs, ys))
        svg = svgplot.line_plot_svg(
            series, title=f"{algo} on {topo_label} (rho={panel_rows[0]['rho']:.4f})",
            xlabel="communication round", ylabel=stop.measure, log_y=True)
        (outdir / topo_label / f"{algo}.svg").write_text(svg)

    manifest = {
        "tool_version": TOOL_VERSION,
        "rng_algorithm": RNG_ALGORITHM,
        "experiment": cfg.name,
        "master_seed": cfg.seed,
        "config_hash": _config_hash(cfg),
        "measured_constants": {
            "L": consts.L, "mu": consts.mu,
            "delta": consts.delta, "beta": consts.beta,
        },
        "cells": len(rows),
        "failed_cells": len(errors),
    }
    (outdir / "meta.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return {"rows": rows, "errors": errors, "outdir": str(outdir)}


def _config_hash(cfg) -> str:
    blob = json.dumps(
        {"name": cfg.name, "seed": cfg.seed, "problem": cfg.problem,
         "topology": cfg.topology, "run": cfg.run},
        sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.out:
        cfg.output = args.out
    if args.seed is not None:
        cfg.seed = args.seed
    result = run_experiment(cfg, threads=args.threads)
    print(f"wrote {len(result['rows'])} cells to {result['outdir']}"
          + (f" ({len(result['errors'])} failed)" if result["errors"] else ""))
    return 1 if result["errors"] else 0


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    if cfg.errors:
        for err in cfg.errors:
            print(f"error: {err}")
        return 1
    print("ok")
    return 0


def _cmd_bounds(args) -> int:
    b = theory.BoundInputs(L=args.L, mu=args.mu, delta=args.delta,
                           beta=args.beta, rho=args.rho, K=args.K,
                           epsilon=args.eps)
    rows = [("eta (tracking, tuned form)", f"{theory.stepsize_thm1(b):.6g}")]
    rows.append(("rounds: tracking, strongly convex", f"{theory.rounds_dgt_scvx(b):.6g}"))
    rows.append(("rounds: tracking, PL", f"{theory.rounds_dgt_pl(b):.6g}"))
    try:
        rows.append(("zeta", f"{theory.zeta(b):.6g}"))
        rows.append(("rounds: DGD, shared-minimizer PL", f"{theory.rounds_dgd_pl(b):.6g}"))
    except theory.RegimeError:
        rows.append(("zeta", "regime: inapplicable (delta >= mu)"))
        rows.append(("rounds: DGD, shared-minimizer PL",
                     "regime: inapplicable (delta >= mu)"))
    rows.append(("rounds: DGD, over-param least squares", f"{theory.rounds_dgd_ols(b):.6g}"))
    rows.append(("rounds: tracking, over-param least squares", f"{theory.rounds_dgt_ols(b):.6g}"))
    rows.append(("K_star", str(theory.optimal_k(b))))
    width = max(len(name) for name, _ in rows)
    for name, val in rows:
        print(f"{name:<{width}}  {val}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="meshgrad",
        description="Local-update decentralized gradient method experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--out", help="output directory (overrides config)")
    p_run.add_argument("--seed", type=int, help="master seed (overrides config)")
    p_run.add_argument("--threads", type=int, default=0,
                       help="worker threads; 0 = sequential canonical mode")
    p_run.set_defaults(func=_cmd_run)

    p_val = sub.add_parser("validate", help="validate a config without running")
    p_val.add_argument("config")
    p_val.set_defaults(func=_cmd_validate)

    p_bounds = sub.add_parser("bounds", help="evaluate theoretical bounds")
    p_bounds.add_argument("--L", type=float, required=True)
    p_bounds.add_argument("--mu", type=float, required=True)
    p_bounds.add_argument("--delta", type=float, default=0.0)
    p_bounds.add_argument("--beta", type=float, default=0.0)
    p_bounds.add_argument("--rho", type=float, default=0.0)
    p_bounds.add_argument("--K", type=int, default=0)
    p_bounds.add_argument("--eps", type=float, default=1e-6)
    p_bounds.set_defaults(func=_cmd_bounds)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except theory.TheoryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
