"""Command-line harness.

Subcommands: refine (score files), simulate (synthetic experiment),
sweep (fpr/fnr grids), gradcheck (finite-difference audit), polytree
(graph generation). Exit codes: 0 success, 1 usage or validation
failure, 2 domain error such as an epoch with every score missing.
All machine-readable output goes to files; stdout is for humans.
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
from pathlib import Path

import numpy as np

from .errors import AllScoresMissing, CausalRefineError
from .graph import PolytreeSpec, leaf_density, load_graph_json, make_polytree, save_graph_json
from .gradcheck import run_gradient_check
from .metrics import run_experiment, sweep, write_report_json, write_reports_csv
from .refine import ConfidencePartition, RefineConfig, refine
from .simulate import ScenarioSpec, generate, write_scenario_csv

_USAGE_EXIT = 1
_DOMAIN_EXIT = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; the scripting contract is 1
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(_USAGE_EXIT)


def _add_refine_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha-floor", type=float, default=0.2)
    p.add_argument("--mu", type=float, default=100.0,
                   help="penalty weight on constraint violations")
    p.add_argument("--c", type=float, default=10.0,
                   help="smooth-maximum sharpness")
    p.add_argument("--step-size", type=float, default=0.05)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--grad-tol", type=float, default=1e-4)
    p.add_argument("--no-backtracking", action="store_true")
    p.add_argument("--seed", type=int, default=0)


def _refine_config(args) -> RefineConfig:
    return RefineConfig(
        alpha_floor=args.alpha_floor,
        penalty_weight=args.mu,
        sharpness=args.c,
        step_size=args.step_size,
        max_iterations=args.max_iters,
        gradient_tolerance=args.grad_tol,
        backtracking_enabled=not args.no_backtracking,
        seed=args.seed,
    )


def _build_parser() -> _Parser:
    parser = _Parser(prog="causalrefine",
                     description="Refine anomaly scores with a causality graph.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("refine", parents=[], help="refine a scores CSV")
    p.add_argument("--graph", required=True, help="graph JSON path")
    p.add_argument("--scores", required=True, help="scores CSV path")
    p.add_argument("--out", required=True, help="refined output CSV path")
    p.add_argument("--parallel", type=int, default=1)
    _add_refine_flags(p)

    p = sub.add_parser("simulate", help="run one synthetic experiment")
    p.add_argument("--graph", help="graph JSON path (alternative to --r/--h)")
    p.add_argument("--r", type=int, help="polytree branching factor")
    p.add_argument("--h", type=int, help="polytree height")
    p.add_argument("--fpr", type=float, default=0.1)
    p.add_argument("--fnr", type=float, default=0.1)
    p.add_argument("--epochs", type=int, default=5000)
    p.add_argument("--path-length", type=int, default=None,
                   help="anomaly path length in edges (default: polytree height)")
    p.add_argument("--out", required=True, help="report path (.json or .csv)")
    p.add_argument("--dump-scenario", default=None,
                   help="also write the generated epochs to this CSV")
    p.add_argument("--parallel", type=int, default=1)
    _add_refine_flags(p)

    p = sub.add_parser("sweep", help="vary fpr or fnr over a grid")
    p.add_argument("--graph")
    p.add_argument("--r", type=int)
    p.add_argument("--h", type=int)
    p.add_argument("--axis", required=True, choices=["fpr", "fnr"])
    p.add_argument("--values", required=True,
                   help="comma-separated grid, e.g. 0,0.05,0.1")
    p.add_argument("--fpr", type=float, default=0.0, help="fixed fpr when sweeping fnr")
    p.add_argument("--fnr", type=float, default=0.0, help="fixed fnr when sweeping fpr")
    p.add_argument("--epochs", type=int, default=2000)
    p.add_argument("--path-length", type=int, default=None)
    p.add_argument("--out", required=True, help="report path (.json or .csv)")
    p.add_argument("--parallel", type=int, default=1)
    _add_refine_flags(p)

    p = sub.add_parser("gradcheck", help="verify the gradient by finite differences")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--max-n", type=int, default=31)
    p.add_argument("--tolerance", type=float, default=1e-5)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("polytree", help="write a balanced polytree graph JSON")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--h", type=int, required=True)
    p.add_argument("--out", required=True)
    return parser


def _load_scores_csv(path: Path, node_names):
    """Rows of scores matching the graph header; empty cells mean missing."""
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        if list(header) != list(node_names):
            raise ValueError(
                f"{path}: header {header!r} does not match graph nodes {list(node_names)!r}")
        rows, missing_sets = [], []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(node_names):
                raise ValueError(f"{path}:{lineno}: expected {len(node_names)} cells")
            values = np.zeros(len(node_names))
            missing = set()
            for i, cell in enumerate(row):
                cell = cell.strip()
                if not cell:
                    missing.add(i)
                    continue
                try:
                    v = float(cell)
                except ValueError:
                    raise ValueError(f"{path}:{lineno}: bad number {cell!r}") from None
                if not 0.0 <= v <= 1.0:
                    raise ValueError(f"{path}:{lineno}: score {v} outside [0, 1]")
                values[i] = v
            rows.append(values)
            missing_sets.append(frozenset(missing))
    return rows, missing_sets


def _refine_epoch(task):
    epoch, values, missing, key_idx, n, cfg = task
    part = ConfidencePartition(n, key_set=key_idx, missing_set=missing)
    t0 = time.perf_counter()
    res = refine(values, _refine_epoch.graph, part, cfg, epoch=epoch, keep_trace=False)
    return epoch, res, time.perf_counter() - t0


def _cmd_refine(args) -> int:
    graph, key_names = load_graph_json(args.graph)
    cfg = _refine_config(args)
    rows, missing_sets = _load_scores_csv(Path(args.scores), graph.node_names)
    key_idx = frozenset(graph.index(name) for name in key_names)

    tasks = [(epoch, rows[epoch], missing_sets[epoch], key_idx, graph.node_count, cfg)
             for epoch in range(len(rows))]
    _refine_epoch.graph = graph
    if args.parallel > 1 and len(tasks) > 1:
        import concurrent.futures as cf
        import multiprocessing as mp
        # spawn: forked workers would inherit broken compiled-kernel thread state
        with cf.ProcessPoolExecutor(max_workers=args.parallel,
                                    mp_context=mp.get_context("spawn"),
                                    initializer=_set_worker_graph,
                                    initargs=(graph,)) as pool:
            outputs = list(pool.map(_refine_epoch, tasks, chunksize=8))
    else:
        outputs = [_refine_epoch(t) for t in tasks]

    with Path(args.out).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch"]
                        + [f"y_{n}" for n in graph.node_names]
                        + [f"alpha_{n}" for n in graph.node_names])
        for epoch, res, elapsed in outputs:
            writer.writerow([epoch]
                            + [repr(float(v)) for v in res.refined]
                            + [repr(float(v)) for v in res.confidence])
            print(f"epoch {epoch}: objective={res.final_objective:.9g} "
                  f"iterations={res.iterations_used} wall={elapsed * 1e3:.1f}ms")
    print(f"wrote {len(outputs)} refined epochs to {args.out}")
    return 0


def _set_worker_graph(graph):
    _refine_epoch.graph = graph


def _scenario_from_args(args) -> ScenarioSpec:
    if args.graph and (args.r is not None or args.h is not None):
        raise ValueError("give either --graph or --r/--h, not both")
    if args.graph:
        graph, _ = load_graph_json(args.graph)
        r = h = None
        if args.path_length is None:
            raise ValueError("--path-length is required with --graph")
        length = args.path_length
    elif args.r is not None and args.h is not None:
        graph = make_polytree(PolytreeSpec(args.r, args.h))
        r, h = args.r, args.h
        length = args.h if args.path_length is None else args.path_length
    else:
        raise ValueError("a graph is required: --graph or both --r and --h")
    if args.epochs < 1:
        raise ValueError("--epochs must be positive")
    return ScenarioSpec(graph=graph, epochs=args.epochs, fpr=args.fpr, fnr=args.fnr,
                        path_length=length, seed=args.seed, r=r, h=h)


def _write_report_file(out: Path, reports: list) -> None:
    if out.suffix.lower() == ".csv":
        write_reports_csv(reports, out)
    elif len(reports) == 1:
        write_report_json(reports[0], out)
    else:
        import json
        out.write_text(json.dumps([r.to_dict() for r in reports], indent=2) + "\n")


def _cmd_simulate(args) -> int:
    spec = _scenario_from_args(args)
    cfg = _refine_config(args)
    report = run_experiment(spec, cfg)
    if args.dump_scenario:
        write_scenario_csv(spec, generate(spec), args.dump_scenario)
    _write_report_file(Path(args.out), [report])
    print(f"auc_original={report.auc_original:.9g} auc_refined={report.auc_refined:.9g}")
    return 0


def _cmd_sweep(args) -> int:
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        raise ValueError(f"--values: bad grid {args.values!r}") from None
    if not all(0.0 <= v <= 1.0 for v in values):
        raise ValueError("--values entries must lie in [0, 1]")
    spec = _scenario_from_args(args)
    cfg = _refine_config(args)
    reports = sweep(spec, cfg, args.axis, values)
    _write_report_file(Path(args.out), reports)
    for v, rep in zip(values, reports):
        print(f"{args.axis}={v:g}: auc_original={rep.auc_original:.9g} "
              f"auc_refined={rep.auc_refined:.9g}")
    return 0


def _cmd_gradcheck(args) -> int:
    if args.trials < 1:
        raise ValueError("--trials must be >= 1")
    report = run_gradient_check(trials=args.trials, max_nodes=args.max_n,
                                tolerance=args.tolerance, seed=args.seed)
    print(f"trials={report.trials} worst_relative_error={report.worst_error:.3e} "
          f"failures={len(report.failures)}")
    if not report.passed:
        print(f"failing trials: {report.failures}")
        return 1
    return 0


def _cmd_polytree(args) -> int:
    spec = PolytreeSpec(args.r, args.h)
    graph = make_polytree(spec)
    save_graph_json(args.out, graph)
    density = leaf_density(spec)
    print(f"nodes={graph.node_count} edges={graph.edge_count} leaf_density={density}")
    return 0


_COMMANDS = {
    "refine": _cmd_refine,
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "gradcheck": _cmd_gradcheck,
    "polytree": _cmd_polytree,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except AllScoresMissing as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _DOMAIN_EXIT
    except (CausalRefineError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _USAGE_EXIT


if __name__ == "__main__":
    sys.exit(main())
