"""Command-line front end: ``semipassive {decompose,certify,simulate}``.

Exit codes: 0 pass, 1 usage or input error, 2 graph precondition failure
(no spanning tree), 3 verified property violated.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, _kernels
from .decomposition import block_triangularize, verify_decomposition
from .dynamics import builtin_model, certify_semipassivity, model_from_config
from .errors import NoSpanningTree, SemipassiveError
from .formats import dumps, graph_from_dict, read_graph
from .graph import has_spanning_tree, is_strongly_connected
from .simulator import (
    ESCAPE_THRESHOLD,
    NetworkSystem,
    Trajectory,
    _check_grid,
    boundedness_verdict,
    lyapunov_monitor,
)
from .simulator import simulate as run_simulation
from .spectral import block_certificates, left_null_vector

EXIT_OK, EXIT_INPUT, EXIT_GRAPH, EXIT_VIOLATION = 0, 1, 2, 3
OUT_DIR_ENV = "SEMIPASSIVE_OUT_DIR"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _out_path(path) -> Path:
    override = os.environ.get(OUT_DIR_ENV)
    path = Path(path)
    if override:
        path = Path(override) / path.name
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _manifest(subcommand, inputs, seed=None, config=None, outputs=()) -> dict:
    return {
        "subcommand": subcommand,
        "inputs": {str(p): _sha256(Path(p).read_bytes()) for p in inputs},
        "config_hash": _sha256(dumps(config).encode()) if config is not None else None,
        "seed": seed,
        "outputs": [str(p) for p in outputs],
        "tool_version": __version__,
        "backend": _kernels.BACKEND,
    }


def _fail(code, message) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def cmd_decompose(args) -> int:
    try:
        g = read_graph(args.graph)
    except OSError as exc:
        return _fail(EXIT_INPUT, f"{args.graph}: {exc.strerror}")
    except SemipassiveError as exc:
        return _fail(EXIT_INPUT, f"{args.graph}: {exc}")
    try:
        d = block_triangularize(g)
    except NoSpanningTree as exc:
        return _fail(EXIT_GRAPH, f"{args.graph}: {exc}")
    report = verify_decomposition(g, d)
    out = _out_path(args.out or Path(args.graph).with_suffix(".decomposition.json").name)
    doc = {
        "manifest": _manifest("decompose", [args.graph], outputs=[out]),
        "m": d.m,
        "decomposition": d.to_dict(),
        "report": report.to_dict(),
        "certificates": [c.to_dict() for c in block_certificates(d)],
    }
    out.write_text(dumps(doc))
    print(f"m={d.m} block_sizes={list(d.block_sizes)} passed={report.passed} -> {out}")
    return EXIT_OK if report.passed else EXIT_VIOLATION


def _load_model(spec: str):
    path = Path(spec)
    if path.suffix == ".json" or path.is_file():
        return model_from_config(json.loads(path.read_text())), [path]
    return builtin_model(spec), []


def cmd_certify(args) -> int:
    try:
        model, inputs = _load_model(args.model)
    except (SemipassiveError, OSError, ValueError) as exc:
        return _fail(EXIT_INPUT, str(exc))
    box = args.box if args.box is not None else 5.0 * model.rho
    try:
        cert = certify_semipassivity(model, box, args.samples)
    except SemipassiveError as exc:
        return _fail(EXIT_INPUT, str(exc))
    outputs = [_out_path(args.out)] if args.out else []
    doc = {
        "manifest": _manifest("certify", inputs, config={"model": model.to_dict(), "box": box,
                                                         "samples": args.samples},
                              outputs=outputs),
        "model": model.to_dict(),
        "certificate": cert.to_dict(),
    }
    text = dumps(doc)
    sys.stdout.write(text)
    for p in outputs:
        p.write_text(text)
    return EXIT_OK if cert.passed else EXIT_VIOLATION


def _load_config(args):
    path = Path(args.config)
    cfg = json.loads(path.read_text())
    if not isinstance(cfg, dict):
        raise ValueError("config must be a JSON object")
    graph_spec = cfg.get("graph")
    inputs = [path]
    if isinstance(graph_spec, dict):
        g = graph_from_dict(graph_spec)
    elif isinstance(graph_spec, str):
        gpath = (path.parent / graph_spec) if not Path(graph_spec).is_absolute() else Path(graph_spec)
        g = read_graph(gpath)
        inputs.append(gpath)
    else:
        raise ValueError("config needs a 'graph' file path or inline graph object")
    for key, flag in (("dt", args.dt), ("t_end", args.t_end), ("threshold", args.threshold),
                      ("seed", args.seed)):
        if flag is not None:
            cfg[key] = flag
    cfg.setdefault("threshold", ESCAPE_THRESHOLD)
    cfg.setdefault("seed", 0)
    cfg.setdefault("monitor", False)
    cfg.setdefault("record_every", 1)
    for key in ("dt", "t_end"):
        if not isinstance(cfg.get(key), (int, float)) or isinstance(cfg.get(key), bool):
            raise ValueError(f"config field {key!r} must be a number")
    models = cfg.get("models", "cubic")
    if isinstance(models, (str, dict)):
        models = [models] * g.node_count
    sys_ = NetworkSystem.from_graph(g, tuple(model_from_config(m) for m in models))
    return cfg, g, sys_, inputs


def _initial_state(cfg, sys_, seed):
    x0 = cfg.get("x0", {"uniform": 10.0})
    if isinstance(x0, dict):
        half = float(x0.get("uniform", 10.0))
        rng = np.random.default_rng(np.uint64(seed))
        return rng.uniform(-half, half, size=sys_.size)
    x0 = np.asarray(x0, dtype=float).ravel()
    if x0.size != sys_.size:
        raise ValueError(f"x0 has {x0.size} entries, network needs {sys_.size}")
    return x0


def _monitor(cfg, g, sys_, traj: Trajectory):
    if is_strongly_connected(g):
        cert = left_null_vector(sys_.laplacian)
        return {"block": "network", "certificate": cert.to_dict(),
                **lyapunov_monitor(traj, sys_.models, cert.mu).to_dict()}
    if not has_spanning_tree(g):
        return {"block": None, "passed": True,
                "skipped": "no spanning tree, so no unique unperturbed root block"}
    # only the root block is unperturbed; monitor it inside the full run
    d = block_triangularize(g)
    nodes = list(d.block_nodes(0))
    n = sys_.state_dim
    cols = [k * n + c for k in nodes for c in range(n)]
    root = NetworkSystem(d.laplacian_parts[0], tuple(sys_.models[k] for k in nodes))
    cert = left_null_vector(root.laplacian)
    sub = Trajectory(traj.t0, traj.dt, traj.steps, traj.record_every, traj.states[:, cols],
                     traj.sup[cols], traj.sup_step[cols], traj.final_state[cols],
                     traj.threshold, system=root)
    return {"block": "root", "nodes": nodes, "certificate": cert.to_dict(),
            **lyapunov_monitor(sub, root.models, cert.mu).to_dict()}


def _run_one(cfg, g, sys_, inputs, seed, out_dir: Path, suffix: str):
    x0 = _initial_state(cfg, sys_, seed)
    traj = run_simulation(sys_, x0, cfg["t_end"], cfg["dt"], threshold=cfg["threshold"],
                          record_every=int(cfg["record_every"]))
    verdict = boundedness_verdict(traj)
    csv_path = out_dir / f"trajectory{suffix}.csv"
    json_path = out_dir / f"verdict{suffix}.json"
    header = ",".join(["t"] + [f"x_{k + 1}" for k in range(sys_.size)])
    np.savetxt(csv_path, np.column_stack([traj.times, traj.states]), delimiter=",",
               header=header, comments="", fmt="%.17g")
    doc = {
        "manifest": _manifest("simulate", inputs, seed=int(seed), config=cfg,
                              outputs=[csv_path, json_path]),
        "spanning_tree": has_spanning_tree(g),
        "steps": traj.steps,
        "verdict": verdict.to_dict(),
        "node_sup": traj.node_sup.tolist(),
        "offender": traj.offender,
    }
    monitor_ok = True
    if cfg["monitor"]:
        doc["monitor"] = _monitor(cfg, g, sys_, traj)
        monitor_ok = doc["monitor"]["passed"]
    json_path.write_text(dumps(doc))
    return verdict.bounded, monitor_ok, str(json_path)


def _run_seed(payload):
    config_path, overrides, seed, out_dir, suffix = payload
    args = argparse.Namespace(config=config_path, **overrides)
    cfg, g, sys_, inputs = _load_config(args)
    return _run_one(cfg, g, sys_, inputs, seed, Path(out_dir), suffix)


def cmd_simulate(args) -> int:
    try:
        cfg, g, sys_, inputs = _load_config(args)
        _initial_state(cfg, sys_, cfg["seed"])
        # fail fast on a bad grid before any output is written
        _check_grid(cfg["t_end"], cfg["dt"])
    except (OSError, ValueError, SemipassiveError) as exc:
        return _fail(EXIT_INPUT, f"{args.config}: {exc}")
    out_dir = _out_path(Path(args.out or ".") / "_").parent
    seed = int(cfg["seed"])
    if not args.batch:
        bounded, monitor_ok, path = _run_one(cfg, g, sys_, inputs, seed, out_dir, "")
        print(f"bounded={bounded} monitor_ok={monitor_ok} -> {path}")
        return EXIT_OK if bounded and monitor_ok else EXIT_VIOLATION
    overrides = {k: getattr(args, k) for k in ("dt", "t_end", "threshold", "seed")}
    seeds = [seed + k for k in range(args.batch)]
    payloads = [(args.config, overrides, s, str(out_dir), f"_seed{s}") for s in seeds]
    workers = min(args.batch, os.cpu_count() or 1)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_seed, payloads))
    else:
        results = [_run_seed(p) for p in payloads]
    summary_path = out_dir / "batch.json"
    summary = {
        "manifest": _manifest("simulate", inputs, seed=seed, config=cfg,
                              outputs=[r[2] for r in results] + [summary_path]),
        "runs": [{"seed": s, "bounded": b, "monitor_ok": m, "verdict": p}
                 for s, (b, m, p) in zip(seeds, results)],
    }
    summary_path.write_text(dumps(summary))
    ok = all(b and m for b, m, _ in results)
    print(f"{sum(b for b, _, _ in results)}/{len(results)} bounded -> {summary_path}")
    return EXIT_OK if ok else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="semipassive", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("decompose", help="block-triangularize a graph Laplacian")
    p.add_argument("--graph", required=True, help="edge-list or JSON graph file")
    p.add_argument("--out", help="output JSON path")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("certify", help="sample-check semi-passivity of a node model")
    p.add_argument("model", help="catalog name or JSON model file")
    p.add_argument("--box", type=float, help="sampling box half-width (default 5*rho)")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--out", help="also write the certificate JSON here")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("simulate", help="simulate a network and judge boundedness")
    p.add_argument("--config", required=True, help="simulation config JSON")
    p.add_argument("--out", help="output directory (default: current directory)")
    p.add_argument("--seed", type=int, help="64-bit seed for random initial states")
    p.add_argument("--dt", type=float)
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--threshold", type=float)
    p.add_argument("--batch", type=int, metavar="K", help="run K consecutive seeds in parallel")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
