"""Command-line entry point: ``clique-explain {features,solve,explain,oracle,generate,rerun}``."""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .decoder import DecoderConfig, decode_clique
from .explainer import METRICS, ExplainerConfig, explain, graph_transactions
from .features import FEATURE_SETS, compute_features
from .graph import (
    Graph,
    GraphParseError,
    GraphTooLarge,
    brute_force_max_clique,
    load_graph,
    planted_clique,
    stats,
    to_dimacs,
)
from .scorer import ScorerConfig, optimize_probabilities

DATA_ENV = "CLIQUE_EXPLAIN_DATA"
GRAPH_SUFFIXES = {".clq", ".col", ".dimacs", ".txt", ".edges", ".edgelist"}
SUMMARY_HEADER = ("Instance", "Number of Nodes", "Number of Edges", "Density", "Clique Size")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INPUT = 3
EXIT_LIMIT = 4


class CliError(Exception):
    def __init__(self, category: str, message: str, code: int):
        self.category = category
        self.code = code
        super().__init__(message)


# -- input resolution ---------------------------------------------------------


def resolve_inputs(inputs: list[str]) -> list[Path]:
    root = os.environ.get(DATA_ENV)
    paths: list[Path] = []
    for raw in inputs:
        p = Path(raw)
        if not p.exists() and root and not p.is_absolute():
            p = Path(root) / raw
        if p.is_dir():
            found = sorted(q for q in p.iterdir() if q.suffix.lower() in GRAPH_SUFFIXES)
            if not found:
                raise CliError("input", f"{p}: directory holds no graph files", EXIT_INPUT)
            paths.extend(found)
        elif p.is_file():
            paths.append(p)
        else:
            raise CliError("input", f"{raw}: no such file", EXIT_INPUT)
    return paths


def read_graphs(paths: list[Path]) -> list[Graph]:
    graphs = []
    for p in paths:
        try:
            graphs.append(load_graph(p))
        except GraphParseError as exc:
            raise CliError("parse", f"{p}: {exc}", EXIT_INPUT) from exc
        except OSError as exc:
            raise CliError("io", f"{p}: {exc}", EXIT_INPUT) from exc
    return graphs


def _map(fn, items, jobs: int):
    # Output order always follows input order.
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


# -- output bookkeeping ---------------------------------------------------------


class Run:
    def __init__(self, args: argparse.Namespace, argv: list[str]):
        self.args = args
        self.argv = argv
        self.out = Path(args.out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.outputs: list[str] = []
        self.timings: dict[str, float] = {}
        self._t = time.perf_counter()

    def stage(self, name: str) -> None:
        now = time.perf_counter()
        self.timings[name] = round(now - self._t, 6)
        self._t = now

    def write(self, name: str, text: str) -> Path:
        path = self.out / name
        path.write_text(text)
        self.outputs.append(name)
        return path

    def manifest(self, inputs: list[Path], config: dict) -> None:
        digests = {
            name: hashlib.sha256((self.out / name).read_bytes()).hexdigest() for name in self.outputs
        }
        doc = {
            "command": self.args.command,
            "argv": self.argv,
            "cwd": os.getcwd(),
            "inputs": [str(p) for p in inputs],
            "config": config,
            "version": __version__,
            "timings_s": self.timings,
            "outputs": digests,
        }
        (self.out / "manifest.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _scorer_cfg(args) -> ScorerConfig:
    base = ScorerConfig()
    if getattr(args, "scorer_config", None):
        base = ScorerConfig.from_text(Path(args.scorer_config).read_text())
    kw = {
        "beta": args.beta,
        "iterations": args.iterations,
        "step_size": args.step_size,
        "init": args.init,
        "seed": args.seed,
    }
    merged = {k: v for k, v in kw.items() if v is not None}
    return ScorerConfig(**{**base.__dict__, **merged})


def _stem(g: Graph, i: int) -> str:
    return g.name or f"graph{i:03d}"


# -- commands -----------------------------------------------------------------


def _features_one(task):
    g, names = task
    return compute_features(g, names).to_csv(g.node_ids)


def cmd_features(args, run: Run) -> None:
    paths = resolve_inputs(args.inputs)
    graphs = read_graphs(paths)
    run.stage("load")
    names = FEATURE_SETS[args.set]
    tables = _map(_features_one, [(g, names) for g in graphs], args.jobs)
    run.stage("features")
    for i, (g, table) in enumerate(zip(graphs, tables)):
        run.write(f"{_stem(g, i)}.features.csv", table)
    run.manifest(paths, {"set": args.set, "features": [f.value for f in names]})


def _solve_one(task):
    g, scfg, dcfg, probs = task
    if probs is None:
        fm = compute_features(g, FEATURE_SETS["three"]) if scfg.init == "feature-linear" else None
        pv = optimize_probabilities(g, fm, scfg)
        p, csv_text = pv.p, pv.to_csv(g.node_ids)
    else:
        p, csv_text = probs, None
    return decode_clique(g, p, dcfg), csv_text


def _read_probabilities(path: Path, g: Graph):
    import numpy as np

    index = {str(nid): i for i, nid in enumerate(g.node_ids)}
    p = np.full(g.node_count, np.nan)
    with path.open() as fh:
        for row in csv.DictReader(fh):
            try:
                p[index[row["node_id"]]] = float(row["probability"])
            except (KeyError, ValueError) as exc:
                raise CliError("parse", f"{path}: bad probability row {row}", EXIT_INPUT) from exc
    if np.isnan(p).any():
        raise CliError("input", f"{path}: probabilities missing for some nodes", EXIT_INPUT)
    return p


def cmd_solve(args, run: Run) -> None:
    paths = resolve_inputs(args.inputs)
    graphs = read_graphs(paths)
    run.stage("load")
    scfg = _scorer_cfg(args)
    dcfg = DecoderConfig(num_starts=args.num_starts)
    probs = [None] * len(graphs)
    if args.probabilities:
        if len(graphs) != 1:
            raise CliError("usage", "--probabilities needs exactly one input graph", EXIT_ERROR)
        probs = [_read_probabilities(Path(args.probabilities), graphs[0])]
    results = _map(_solve_one, [(g, scfg, dcfg, pr) for g, pr in zip(graphs, probs)], args.jobs)
    run.stage("score+decode")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_HEADER)
    for i, (g, (clique, prob_csv)) in enumerate(zip(graphs, results)):
        stem = _stem(g, i)
        if prob_csv is not None:
            run.write(f"{stem}.probabilities.csv", prob_csv)
        run.write(f"{stem}.clique.json", json.dumps(clique.to_json(g)) + "\n")
        st = stats(g)
        w.writerow([stem, st.node_count, st.edge_count, f"{st.density:.4f}", clique.size])
    run.write("summary.csv", buf.getvalue())
    if not args.quiet:
        sys.stdout.write(buf.getvalue())
    run.manifest(paths, {"scorer": scfg.__dict__, "decoder": dcfg.__dict__})


def _explain_one(task):
    g, feats, scfg = task
    return graph_transactions(g, feats, scfg)


def cmd_explain(args, run: Run) -> None:
    paths = resolve_inputs(args.inputs)
    graphs = read_graphs(paths)
    run.stage("load")
    feats = FEATURE_SETS[args.set]
    scfg = _scorer_cfg(args)
    ecfg = ExplainerConfig(
        min_support=args.min_support,
        min_confidence=args.min_confidence,
        epsilon=args.epsilon,
        sort_metric=args.metric,
        per_graph=args.per_graph,
    )
    txs = _map(_explain_one, [(g, feats, scfg) for g in graphs], args.jobs)
    run.stage("features+score")
    report = explain(graphs, feats, scfg, ecfg, dataset=args.dataset, transactions_per_graph=txs)
    run.stage("mine+select")
    run.write("report.json", report.to_json())
    run.write("report.csv", report.to_csv())
    if not args.quiet:
        sys.stdout.write(report.to_csv())
    run.manifest(paths, report.config | {"set": args.set, "dataset": args.dataset})


def cmd_oracle(args, run: Run) -> None:
    paths = resolve_inputs(args.inputs)
    graphs = read_graphs(paths)
    for p, g in zip(paths, graphs):
        if g.node_count > args.node_limit:
            raise CliError(
                "limit",
                f"{p}: {g.node_count} nodes exceeds the exact-oracle limit of {args.node_limit}",
                EXIT_LIMIT,
            )
    results = _map(brute_force_max_clique, graphs, args.jobs)
    run.stage("oracle")
    rows = []
    for i, (g, res) in enumerate(zip(graphs, results)):
        run.write(f"{_stem(g, i)}.oracle.json", json.dumps(res.to_json(g)) + "\n")
        rows.append(f"{_stem(g, i)}\t{res.size}")
    if not args.quiet:
        print("\n".join(rows))
    run.manifest(paths, {"node_limit": args.node_limit})


def cmd_generate(args, run: Run) -> None:
    base = args.seed or 0
    for i in range(args.count):
        seed = base + i
        g, planted = planted_clique(args.n, args.p, args.k, seed)
        comment = f"planted clique seed={seed} nodes={' '.join(str(v + 1) for v in sorted(planted))}"
        run.write(f"planted_{i:03d}.clq", to_dimacs(g, comment=comment))
    run.stage("generate")
    run.manifest([], {"n": args.n, "p": args.p, "k": args.k, "count": args.count, "seed": base})


def cmd_rerun(args, run: Run | None) -> int:
    """Replay a manifest's command and compare output digests."""
    manifest = json.loads(Path(args.manifest).read_text())
    argv = list(manifest["argv"])
    if args.out:
        argv = _replace_out(argv, args.out)
    prev = os.getcwd()
    os.chdir(manifest.get("cwd", prev))
    try:
        code = main(argv)
    finally:
        os.chdir(prev)
    if code != EXIT_OK:
        return code
    out_dir = Path(manifest.get("cwd", ".")) / _out_of(argv)
    mismatched = [
        name for name, digest in manifest["outputs"].items()
        if hashlib.sha256((out_dir / name).read_bytes()).hexdigest() != digest
    ]
    if mismatched:
        print(f"error[reproducibility]: outputs differ: {', '.join(mismatched)}", file=sys.stderr)
        return EXIT_ERROR
    print(f"reproduced {len(manifest['outputs'])} outputs byte-identically")
    return EXIT_OK


def _out_of(argv: list[str]) -> str:
    for i, tok in enumerate(argv):
        if tok == "--out":
            return argv[i + 1]
        if tok.startswith("--out="):
            return tok.split("=", 1)[1]
    return "out"


def _replace_out(argv: list[str], out: str) -> list[str]:
    argv = [t for t in argv]
    for i, tok in enumerate(argv):
        if tok == "--out":
            argv[i + 1] = out
            return argv
        if tok.startswith("--out="):
            argv[i] = f"--out={out}"
            return argv
    return argv + ["--out", out]


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clique-explain", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, inputs=True):
        if inputs:
            p.add_argument("inputs", nargs="+", help=f"graph files or directories (relative paths also tried under ${DATA_ENV})")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--quiet", action="store_true")

    def scorer_flags(p):
        p.add_argument("--beta", type=float)
        p.add_argument("--iterations", type=int)
        p.add_argument("--step-size", type=float)
        p.add_argument("--init", choices=["degree-proportional", "uniform", "feature-linear"])
        p.add_argument("--scorer-config", help="flat key=value file (beta, step_size, iterations, seed, init)")

    p = sub.add_parser("features", help="compute node feature tables")
    common(p)
    p.add_argument("--set", choices=sorted(FEATURE_SETS), default="ten")

    p = sub.add_parser("solve", help="score nodes and decode a clique per graph")
    common(p)
    scorer_flags(p)
    p.add_argument("--num-starts", type=int, default=DecoderConfig().num_starts)
    p.add_argument("--probabilities", help="node_id,probability CSV to decode instead of scoring")

    p = sub.add_parser("explain", help="mine and select explanatory association rules")
    common(p)
    scorer_flags(p)
    p.add_argument("--set", choices=sorted(FEATURE_SETS), default="ten")
    p.add_argument("--min-support", type=float, default=0.05)
    p.add_argument("--min-confidence", type=float, default=0.1)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--metric", choices=METRICS, default="support")
    p.add_argument("--dataset", default="dataset")
    p.add_argument("--per-graph", action="store_true", help="mine each graph separately")

    p = sub.add_parser("oracle", help="exact maximum clique for small graphs")
    common(p)
    p.add_argument("--node-limit", type=int, default=60)

    p = sub.add_parser("generate", help="write planted-clique graphs as DIMACS files")
    common(p, inputs=False)
    p.add_argument("--n", type=int, default=60)
    p.add_argument("--p", type=float, default=0.2)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--count", type=int, default=50)

    p = sub.add_parser("rerun", help="replay a manifest and verify byte-identical outputs")
    p.add_argument("manifest")
    p.add_argument("--out", default=None, help="write to a different directory")
    return parser


COMMANDS = {
    "features": cmd_features,
    "solve": cmd_solve,
    "explain": cmd_explain,
    "oracle": cmd_oracle,
    "generate": cmd_generate,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "rerun":
            return cmd_rerun(args, None)
        if args.jobs < 1:
            raise CliError("usage", "--jobs must be >= 1", EXIT_ERROR)
        COMMANDS[args.command](args, Run(args, argv))
    except CliError as exc:
        print(f"error[{exc.category}]: {exc}", file=sys.stderr)
        return exc.code
    except GraphTooLarge as exc:
        print(f"error[limit]: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except (ValueError, OSError) as exc:
        print(f"error[{type(exc).__name__}]: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
