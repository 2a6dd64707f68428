"""Command-line surface.

Subcommands: project, gen-ws, gen-worst, bench, worst, identify.  Benchmark
and worst-case runs write CSV records plus SVG box plots, with a manifest
(full config and seeds) sufficient to regenerate every instance bitwise.

Exit codes: 0 success, 1 input error, 2 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import statistics
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .core import build_row_subproblem, kkt_residual, validate_laplacian
from .fileio import (
    FileFormatError,
    read_graph,
    read_matrix,
    read_trajectory,
    write_graph,
    write_manifest,
    write_matrix,
)
from .instances import (
    NoiseParams,
    WSParams,
    generate_noisy_instance,
    generate_ws_graph,
    worst_case_matrix,
)
from .loopy import nearest_loopy_laplacian
from .plots import convergence_plot, timing_box_plot
from .solvers import METHODS, RowSolveError, SolverConfig, nearest_laplacian
from .sysid import SysidConfig, identify_laplacian

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_SOLVER = 2

BENCH_FIELDS = [
    "instance_id",
    "n",
    "mean_degree",
    "method",
    "seed",
    "wall_time_ms",
    "objective",
    "kkt_residual",
    "max_row_iterations",
    "parallel",
]


@dataclass
class BenchRecord:
    instance_id: int
    n: int
    mean_degree: int
    method: str
    seed: int
    wall_time_ms: float
    objective: float
    kkt_residual: float
    max_row_iterations: int
    parallel: bool = False


def _canonical_method(name: str) -> str:
    return "interior_point" if name == "ip" else name


def _solver_config(args) -> SolverConfig:
    eps = getattr(args, "eps", None)
    if eps is None:
        return SolverConfig()
    return SolverConfig(ip_epsilon=eps, vfista_epsilon=eps)


def _summarize(a, laplacian, g, solutions, method):
    objective_value = a.frobenius_distance_sq(laplacian)
    worst_residual = 0.0
    max_iters = 0
    for i, sol in enumerate(solutions):
        p = build_row_subproblem(a, g, i)
        x_eval = sol.x_raw if sol.x_raw is not None else sol.x
        worst_residual = max(worst_residual, kkt_residual(x_eval, sol.lam, p))
        max_iters = max(max_iters, sol.iterations)
    return objective_value, worst_residual, max_iters


def cmd_project(args) -> int:
    g = read_graph(args.graph)
    a = read_matrix(args.matrix, g)
    cfg = _solver_config(args)
    method = _canonical_method(args.method)
    if args.loopy:
        laplacian = nearest_loopy_laplacian(a, g, method, cfg)
        summaries = None
    else:
        laplacian, summaries = nearest_laplacian(a, g, method, cfg)
    write_matrix(args.out, laplacian, g)
    cert = validate_laplacian(laplacian, g, loopy=args.loopy)
    print(f"objective {a.frobenius_distance_sq(laplacian):.12g}")
    print(
        f"validation: sign violation {cert.max_sign_violation:.3g}, "
        f"row-sum violation {cert.max_row_sum_violation:.3g}"
    )
    if summaries is not None:
        print(f"rows solved: {len(summaries)} with method {method}")
    return EXIT_OK


def cmd_gen_ws(args) -> int:
    ws = WSParams(n=args.n, mean_degree=args.mean_degree, rewire_p=args.rewire_p, seed=args.seed)
    noise = NoiseParams(
        weight_scale=args.weight_scale, noise_scale=args.noise_scale, seed=args.seed
    )
    g = generate_ws_graph(ws)
    a, x_true = generate_noisy_instance(g, noise)
    prefix = Path(args.out)
    write_graph(f"{prefix}.graph.txt", g)
    write_matrix(f"{prefix}.A.mtx", a, g)
    write_matrix(f"{prefix}.X.mtx", x_true, g)
    write_manifest(f"{prefix}.manifest.txt", {**asdict(ws), **asdict(noise), "kind": "ws"})
    print(f"wrote {prefix}.graph.txt / .A.mtx / .X.mtx / .manifest.txt")
    return EXIT_OK


def cmd_gen_worst(args) -> int:
    ws = WSParams(n=args.n, mean_degree=args.mean_degree, rewire_p=args.rewire_p, seed=args.seed)
    g = generate_ws_graph(ws)
    a = worst_case_matrix(g)
    prefix = Path(args.out)
    write_graph(f"{prefix}.graph.txt", g)
    write_matrix(f"{prefix}.A.mtx", a, g)
    write_manifest(f"{prefix}.manifest.txt", {**asdict(ws), "kind": "worst"})
    print(f"wrote {prefix}.graph.txt / .A.mtx / .manifest.txt")
    return EXIT_OK


def _time_methods(a, g, methods, cfg, parallel=False):
    """Wall-clock each method on one instance; timing covers the solve only."""
    rows = []
    for method in methods:
        canonical = _canonical_method(method)
        start = time.perf_counter()
        laplacian, solutions = nearest_laplacian(a, g, canonical, cfg, parallel=parallel)
        elapsed_ms = (time.perf_counter() - start) * 1e3
        rows.append((method, elapsed_ms, laplacian, solutions))
    return rows


def cmd_bench(args) -> int:
    with open(args.config) as fh:
        config = json.load(fh)
    n = config["n"]
    mean_degree = config["mean_degree"]
    rewire_p = config.get("rewire_p", 0.2)
    reps = config["repetitions"]
    methods = config.get("methods", list(METHODS))
    base_seed = config.get("seed", 0)
    parallel = config.get("parallel", False)
    cfg = SolverConfig(
        ip_epsilon=config.get("eps", 1e-6), vfista_epsilon=config.get("eps", 1e-6)
    )
    out_dir = Path(config.get("out_dir", "bench_out"))
    out_dir.mkdir(parents=True, exist_ok=True)

    records: list[BenchRecord] = []
    times_by_method: dict[str, list[float]] = {m: [] for m in methods}
    csv_path = out_dir / "bench.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=BENCH_FIELDS)
        writer.writeheader()
        for rep in range(reps):
            seed = base_seed + rep
            g = generate_ws_graph(WSParams(n=n, mean_degree=mean_degree, rewire_p=rewire_p, seed=seed))
            a, _ = generate_noisy_instance(g, NoiseParams(seed=seed))
            try:
                timed = _time_methods(a, g, methods, cfg, parallel=parallel)
            except RowSolveError as exc:
                print(f"instance {rep}: {exc}", file=sys.stderr)
                fh.flush()
                continue
            for method, elapsed_ms, laplacian, solutions in timed:
                obj, residual, max_iters = _summarize(a, laplacian, g, solutions, method)
                record = BenchRecord(
                    instance_id=rep,
                    n=n,
                    mean_degree=mean_degree,
                    method=method,
                    seed=seed,
                    wall_time_ms=elapsed_ms,
                    objective=obj,
                    kkt_residual=residual,
                    max_row_iterations=max_iters,
                    parallel=parallel,
                )
                writer.writerow(asdict(record))
                records.append(record)
                times_by_method[method].append(elapsed_ms)
            fh.flush()
    svg_path = out_dir / "bench_times.svg"
    timing_box_plot(times_by_method, svg_path, title=f"n={n}, mean degree {mean_degree}")
    write_manifest(
        out_dir / "manifest.txt",
        {
            "n": n,
            "mean_degree": mean_degree,
            "rewire_p": rewire_p,
            "repetitions": reps,
            "methods": ",".join(methods),
            "seed": base_seed,
            "weight_scale": 10.0,
            "noise_scale": 5.0,
            "parallel": parallel,
            "eps": cfg.ip_epsilon,
        },
    )
    for method in methods:
        if times_by_method[method]:
            print(f"{method}: median {statistics.median(times_by_method[method]):.3f} ms")
    print(f"wrote {csv_path} and {svg_path}")
    return EXIT_OK


def cmd_worst(args) -> int:
    methods = args.methods.split(",") if args.methods else list(METHODS)
    ws = WSParams(n=args.n, mean_degree=args.mean_degree, rewire_p=args.rewire_p, seed=args.seed)
    g = generate_ws_graph(ws)
    a = worst_case_matrix(g)
    cfg = _solver_config(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "worst.csv"
    times_by_method: dict[str, list[float]] = {m: [] for m in methods}
    with open(csv_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=BENCH_FIELDS)
        writer.writeheader()
        for method, elapsed_ms, laplacian, solutions in _time_methods(a, g, methods, cfg):
            obj, residual, max_iters = _summarize(a, laplacian, g, solutions, method)
            writer.writerow(
                asdict(
                    BenchRecord(
                        instance_id=0,
                        n=args.n,
                        mean_degree=args.mean_degree,
                        method=method,
                        seed=args.seed,
                        wall_time_ms=elapsed_ms,
                        objective=obj,
                        kkt_residual=residual,
                        max_row_iterations=max_iters,
                    )
                )
            )
            times_by_method[method].append(elapsed_ms)
            print(f"{method}: {elapsed_ms:.3f} ms, max row iterations {max_iters}")
    timing_box_plot(
        times_by_method, out_dir / "worst_times.svg", title=f"worst case, n={args.n}"
    )
    write_manifest(out_dir / "manifest.txt", {**asdict(ws), "kind": "worst", "methods": args.methods})
    print(f"wrote {csv_path}")
    return EXIT_OK


def cmd_identify(args) -> int:
    g = read_graph(args.graph)
    data = read_trajectory(args.trajectory)
    if data.n != g.n:
        raise FileFormatError(f"trajectory has {data.n} states, graph has {g.n} nodes")
    cfg = SysidConfig(max_iter=args.max_iter, grad_tol=args.grad_tol, loopy=args.loopy)
    history: list[float] = []
    laplacian = identify_laplacian(data, g, cfg, history=history)
    write_matrix(args.out, laplacian, g)
    log_path = Path(args.out).with_suffix(".log.csv")
    with open(log_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "objective"])
        for k, value in enumerate(history):
            writer.writerow([k, f"{value:.17g}"])
    convergence_plot(history, Path(args.out).with_suffix(".convergence.svg"))
    print(f"final objective {history[-1]:.12g} after {len(history) - 1} iterations")
    print(f"wrote {args.out} and {log_path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nearlap", description="Nearest directed graph Laplacian toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("project", help="project a matrix onto the Laplacian set")
    p.add_argument("matrix", help="Matrix Market file")
    p.add_argument("graph", help="graph structure file")
    p.add_argument("--method", choices=["active_set", "sort_kkt", "ip", "vfista"], default="sort_kkt")
    p.add_argument("--loopy", action="store_true")
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("gen-ws", help="generate a noisy Watts-Strogatz instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mean-degree", type=int, required=True)
    p.add_argument("--rewire-p", type=float, default=0.2)
    p.add_argument("--weight-scale", type=float, default=10.0)
    p.add_argument("--noise-scale", type=float, default=5.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output path prefix")
    p.set_defaults(func=cmd_gen_ws)

    p = sub.add_parser("gen-worst", help="generate an active-set worst-case instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mean-degree", type=int, required=True)
    p.add_argument("--rewire-p", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output path prefix")
    p.set_defaults(func=cmd_gen_worst)

    p = sub.add_parser("bench", help="benchmark all methods on random instances")
    p.add_argument("config", help="JSON config: n, mean_degree, rewire_p, repetitions, methods, seed, out_dir")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("worst", help="benchmark methods on the worst-case instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mean-degree", type=int, required=True)
    p.add_argument("--rewire-p", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--methods", default=None, help="comma-separated subset of methods")
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_worst)

    p = sub.add_parser("identify", help="identify Laplacian dynamics from a trajectory")
    p.add_argument("trajectory", help="trajectory CSV")
    p.add_argument("graph", help="graph structure file")
    p.add_argument("--loopy", action="store_true")
    p.add_argument("--max-iter", type=int, default=5000)
    p.add_argument("--grad-tol", type=float, default=1e-10)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_identify)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FileFormatError, FileNotFoundError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except RowSolveError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
