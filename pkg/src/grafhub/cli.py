"""Command line interface: synth, detect, baseline, bench, analyze.

Exit codes: 0 success, 2 usage/input error, 3 numerical failure. Every
subcommand writes a manifest.json (resolved config, input digests, output
list, timestamps) from which the run can be reproduced.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, baselines, io, metrics, scoring
from .experiments import (
    DEFAULT_METHODS,
    ExperimentGrid,
    run_experiment1,
    run_experiment2,
)
from .graph import filter_response, normalized_laplacian, spectral_decompose
from .solver import GrafhubConfig, SolverError, fit
from .synth import SynthConfig, generate_instance

EXIT_USAGE = 2
EXIT_NUMERICAL = 3


class UsageError(Exception):
    pass


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if dataclasses.is_dataclass(obj):
        return dataclasses.asdict(obj)
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, default=_json_default) + "\n")


def _write_manifest(
    out_dir: Path, subcommand: str, config: dict, inputs: list[Path],
    outputs: list[Path], started: float,
) -> None:
    manifest = {
        "tool_version": __version__,
        "subcommand": subcommand,
        "config": config,
        "inputs": {str(p): _digest(p) for p in inputs},
        "outputs": [str(p) for p in outputs],
        "started_at": started,
        "finished_at": time.time(),
    }
    tmp = out_dir / "manifest.json.tmp"
    _write_json(tmp, manifest)
    os.replace(tmp, out_dir / "manifest.json")


def _require_file(path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"input file not found: {p}")
    return p


def _load_graph_and_signals(args):
    graph_path = _require_file(args.graph)
    signals_path = _require_file(args.signals)
    g = io.read_graph_csv(graph_path)
    signals = io.read_signals_csv(signals_path, headered=args.signals_headered)
    if signals.shape[0] != g.n_nodes:
        raise UsageError(
            f"dimension mismatch: graph has {g.n_nodes} nodes, "
            f"signals have {signals.shape[0]} rows"
        )
    return g, signals, [graph_path, signals_path]


def cmd_synth(args) -> int:
    started = time.time()
    try:
        cfg = SynthConfig(
            model=args.model,
            n_nodes=args.n,
            er_p=args.p,
            ba_m=args.m,
            n_signals=args.signals,
            gamma=args.gamma,
            hub_fraction=args.hub_fraction,
            hub_strength=args.u,
            seed=args.seed,
            sigma_mode=args.sigma_mode,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    inst = generate_instance(cfg)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.write_graph_csv(out / "graph.csv", inst.graph)
    io.write_signals_csv(out / "signals.csv", inst.signals)
    io.write_signals_csv(out / "clean_signals.csv", inst.clean_signals)
    io.write_labels_csv(out / "labels.csv", inst.hub_labels)
    _write_json(out / "config.json", dataclasses.asdict(cfg))
    outputs = [out / n for n in
               ("graph.csv", "signals.csv", "clean_signals.csv", "labels.csv", "config.json")]
    _write_manifest(out, "synth", dataclasses.asdict(cfg), [], outputs, started)
    return 0


def cmd_detect(args) -> int:
    started = time.time()
    g, signals, inputs = _load_graph_and_signals(args)
    cfg = GrafhubConfig(
        alpha=args.alpha,
        rho=args.rho,
        filter_order=args.order,
        max_iter=args.max_iter,
        tol=args.tol,
        seed=args.seed,
    )
    try:
        result = fit(g, signals, cfg)
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    decomp = spectral_decompose(normalized_laplacian(g))
    reports = {}
    for metric, scores in (
        ("reconstruction_error", scoring.score_reconstruction(signals, result.filtered)),
        ("smoothness", scoring.score_smoothness(g, signals, result.filtered)),
    ):
        report = scoring.build_report(
            g, scores, metric, selection=args.select, k=args.k,
            z_cut=args.z_cut, seed=args.seed, n_restarts=args.louvain_restarts,
        )
        reports[metric] = {
            "scores": report.scores,
            "selection": report.selection,
            "selection_params": report.selection_params,
            "hub_set": report.hub_set,
            "connector_set": report.connector_set,
            "communities": report.communities,
            "participation": report.participation,
        }

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "config": dataclasses.asdict(cfg),
        "coefficients": result.coefficients,
        "iterations": result.iterations,
        "converged": result.converged,
        "objective_trace": result.objective_trace,
        "filter_response": filter_response(result.coefficients, decomp.eigenvalues),
        "eigenvalues": decomp.eigenvalues,
        "metrics": reports,
    }
    _write_json(out / "report.json", payload)
    io.write_signals_csv(out / "filtered.csv", result.filtered)
    io.write_signals_csv(out / "residual.csv", result.residual)
    outputs = [out / n for n in ("report.json", "filtered.csv", "residual.csv")]
    _write_manifest(out, "detect", dataclasses.asdict(cfg), inputs, outputs, started)
    return 0


def cmd_baseline(args) -> int:
    started = time.time()
    needs_graph, needs_signals = baselines.BASELINE_KINDS[args.method]
    if needs_graph and not args.graph:
        raise UsageError(f"method {args.method!r} requires --graph")
    if needs_signals and not args.signals:
        raise UsageError(f"method {args.method!r} requires --signals")
    inputs: list[Path] = []
    g = signals = None
    if needs_graph and needs_signals:
        g, signals, inputs = _load_graph_and_signals(args)
    elif needs_graph:
        graph_path = _require_file(args.graph)
        g = io.read_graph_csv(graph_path)
        inputs = [graph_path]
    else:
        signals_path = _require_file(args.signals)
        signals = io.read_signals_csv(signals_path, headered=args.signals_headered)
        inputs = [signals_path]

    method = args.method
    if method in ("degree", "eigenvector", "closeness", "betweenness"):
        scores = getattr(baselines, f"{method}_centrality")(g)
    elif method in ("ghf_re", "ghf_sm", "direct_re", "direct_sm"):
        if method.startswith("ghf"):
            filtered = baselines.ghf_filter(g, signals, beta=args.beta, xi=2.0 / args.alpha)
        else:
            filtered = baselines.direct_f_recovery(
                g, signals, args.alpha, max_iter=args.max_iter, strict=False
            ).filtered
        if method.endswith("_re"):
            scores = scoring.score_reconstruction(signals, filtered)
        else:
            scores = scoring.score_smoothness(g, signals, filtered)
    elif method == "lof":
        scores = baselines.lof_scores(signals, k=args.k)
    else:
        scores = baselines.isolation_forest_scores(
            signals, n_trees=args.trees, seed=args.seed
        )

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    config = {
        "method": method, "alpha": args.alpha, "beta": args.beta,
        "k": args.k, "trees": args.trees, "seed": args.seed,
    }
    _write_json(out / "scores.json", {"method": method, "scores": scores})
    io.write_signals_csv(out / "scores.csv", np.asarray(scores, dtype=float)[:, None])
    outputs = [out / "scores.json", out / "scores.csv"]
    _write_manifest(out, "baseline", config, inputs, outputs, started)
    return 0


def _grid_from_file(path: Path) -> ExperimentGrid:
    raw = json.loads(path.read_text())
    base = SynthConfig(**raw.pop("base", {}))
    for key in ("models", "u_values", "hub_fractions", "methods",
                "alpha_grid", "order_grid"):
        if key in raw:
            raw[key] = tuple(raw[key])
    try:
        return ExperimentGrid(base=base, **raw)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid grid config: {exc}") from exc


def cmd_bench(args) -> int:
    started = time.time()
    grid_path = _require_file(args.grid) if args.grid else None
    grid = _grid_from_file(grid_path) if grid_path else ExperimentGrid()
    if args.threads is not None:
        grid = dataclasses.replace(grid, n_workers=args.threads)
    runner = run_experiment1 if args.experiment == 1 else run_experiment2
    result = runner(grid)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    outputs = []
    for model in grid.models:
        summary_path = out / f"experiment{args.experiment}_{model}_summary.csv"
        raw_path = out / f"experiment{args.experiment}_{model}_runs.csv"
        with open(summary_path, "w") as fh:
            fh.write("method,x_value,mean_auc,std_auc,chosen_params\n")
            for (m, method, x), cell in sorted(result.cells.items()):
                if m != model:
                    continue
                chosen = json.dumps(cell.chosen_params or {}).replace(",", ";")
                fh.write(f"{method},{x!r},{cell.mean_auc!r},{cell.std_auc!r},{chosen}\n")
        with open(raw_path, "w") as fh:
            fh.write("method,x_value,run,auc\n")
            for (m, method, x), cell in sorted(result.cells.items()):
                if m != model:
                    continue
                for run, auc in enumerate(cell.aucs):
                    fh.write(f"{method},{x!r},{run},{auc!r}\n")
        outputs += [summary_path, raw_path]
    config = dataclasses.asdict(grid)
    config["experiment"] = args.experiment
    inputs = [grid_path] if grid_path else []
    _write_manifest(out, "bench", config, inputs, outputs, started)
    return 0


def cmd_analyze(args) -> int:
    started = time.time()
    g, signals, inputs = _load_graph_and_signals(args)
    decomp = spectral_decompose(normalized_laplacian(g))
    profile = metrics.sed_profile(decomp, signals)
    payload = {
        "sed": {
            "eigenvalues": profile.eigenvalues,
            "sed": profile.sed,
            "sed_ratio": profile.sed_ratio,
        }
    }

    hub_set = np.array([], dtype=int)
    if args.report:
        report_path = _require_file(args.report)
        inputs.append(report_path)
        report = json.loads(report_path.read_text())
        hub_set = np.asarray(
            report["metrics"][args.metric]["hub_set"], dtype=int
        )
    if hub_set.size:
        rng = np.random.default_rng(args.seed)
        non_hubs = np.setdiff1d(np.arange(g.n_nodes), hub_set)
        sampled = rng.choice(non_hubs, size=min(hub_set.size, non_hubs.size), replace=False)
        hub_delta = metrics.knockout_delta_ge(g, hub_set)
        normal_delta = metrics.knockout_delta_ge(g, sampled)
        payload["knockout"] = {
            "hub_nodes": hub_set,
            "hub_delta_ge": hub_delta,
            "sampled_normal_nodes": sampled,
            "normal_delta_ge": normal_delta,
            "mean_hub_delta": float(hub_delta.mean()),
            "mean_normal_delta": float(normal_delta.mean()),
        }
    else:
        payload["knockout"] = {}

    if args.counts:
        counts_path = _require_file(args.counts)
        inputs.append(counts_path)
        counts = np.loadtxt(counts_path, delimiter=",", ndmin=1)
        payload["normalized_entropy"] = metrics.normalized_entropy(counts)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "diagnostics.json", payload)
    config = {k: v for k, v in vars(args).items() if k not in ("func", "command")}
    _write_manifest(out, "analyze", config, inputs, [out / "diagnostics.json"], started)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="grafhub",
        description="Hub node detection on attributed graphs via learned "
        "polynomial graph filters.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic benchmark instance")
    p.add_argument("--model", choices=("ER", "BAdegree", "BAMixed"), default="ER")
    p.add_argument("--n", type=int, default=1000, help="number of nodes")
    p.add_argument("--p", type=float, default=0.1, help="ER edge probability")
    p.add_argument("--m", type=int, default=3, help="BA attachment parameter")
    p.add_argument("--signals", type=int, default=100, help="number of signal columns")
    p.add_argument("--gamma", type=float, default=30.0, help="smoothing strength")
    p.add_argument("--hub-fraction", type=float, default=0.1)
    p.add_argument("--u", type=float, default=2.0, help="hub noise strength")
    p.add_argument("--sigma-mode", choices=("row_norms", "column_norms"),
                   default="row_norms")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("detect", help="learn a filter and report hub nodes")
    p.add_argument("--graph", required=True)
    p.add_argument("--signals", required=True)
    p.add_argument("--signals-headered", action="store_true",
                   help="signal CSV has a header row and node ids in column 0")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--order", type=int, default=4, help="filter order T")
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--select", choices=("zthresh", "topk", "elbow"), default="zthresh")
    p.add_argument("--k", type=int, default=None, help="K for top-K selection")
    p.add_argument("--z-cut", type=float, default=3.0)
    p.add_argument("--louvain-restarts", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("baseline", help="run a comparison detector")
    p.add_argument("--method", required=True, choices=sorted(baselines.BASELINE_KINDS))
    p.add_argument("--graph")
    p.add_argument("--signals")
    p.add_argument("--signals-headered", action="store_true")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--k", type=int, default=20, help="LOF neighbor count")
    p.add_argument("--trees", type=int, default=100)
    p.add_argument("--max-iter", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("bench", help="run a benchmark experiment sweep")
    p.add_argument("--experiment", type=int, choices=(1, 2), required=True)
    p.add_argument("--grid", help="JSON file mirroring ExperimentGrid")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("analyze", help="SED, knockout and entropy diagnostics")
    p.add_argument("--graph", required=True)
    p.add_argument("--signals", required=True)
    p.add_argument("--signals-headered", action="store_true")
    p.add_argument("--report", help="report.json from `detect`")
    p.add_argument("--metric", choices=("reconstruction_error", "smoothness"),
                   default="smoothness")
    p.add_argument("--counts", help="CSV of per-bin hub counts for entropy")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
