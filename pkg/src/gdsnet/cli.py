"""Command-line front end: ``gdsnet simulate | learn | score | te | benchmark``.

Every command that writes files also writes ``<output>.manifest.json``
holding the fully resolved configuration and the SHA-256 of inputs and
outputs. ``gdsnet replay <manifest>`` re-runs a command from its manifest and
checks that the outputs hash identically.

Exit codes: 0 success, 1 validation error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time

from . import __version__
from .benchmark import resolve_suite, run_suite, write_rows
from .dataset import EmbeddingSpec, discretize, load_csv
from .errors import GdsError, ParamError, ParseError
from .estimators import collective_te, select_embedding
from .scoring import CandidateGraph, Criterion, score
from .search import SearchConfig, search, to_dot
from .sim import load_spec, simulate, write_trajectory_csv

EXIT_OK, EXIT_VALIDATION, EXIT_IO = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _int_list(text):
    try:
        values = [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("expected at least one integer")
    return values


def _embedding(m, kappa, tau):
    k = kappa * m if len(kappa) == 1 else kappa
    t = tau * m if len(tau) == 1 else tau
    if len(k) != m or len(t) != m:
        raise ParamError("embedding", f"give one value or {m} comma-separated values")
    return EmbeddingSpec(tuple(k), tuple(t))


def _vertex(names, token):
    token = str(token)
    if token in names:
        return names.index(token)
    try:
        i = int(token)
    except ValueError:
        raise ParamError("vertex", f"unknown vertex {token!r}") from None
    if not 0 <= i < len(names):
        raise ParamError("vertex", f"index {i} out of range")
    return i


def _load_symbolic(args):
    data = load_csv(args.data)
    emb = _embedding(data.m, args.kappa, args.tau)
    return data, discretize(data, args.bins, args.scheme, emb)


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dumps(obj):
    return json.dumps(obj, indent=2) + "\n"


# -- commands ----------------------------------------------------------------


def cmd_simulate(args):
    spec = load_spec(args.spec)
    if args.seed is not None:
        from dataclasses import replace

        spec = replace(spec, seed=args.seed)
    traj = simulate(spec, args.n, args.burn_in)
    write_trajectory_csv(traj, args.out, include_hidden=args.hidden)
    return {"inputs": [args.spec], "outputs": [args.out], "seed": spec.seed}


def cmd_learn(args):
    data = load_csv(args.data)
    if args.auto_embed:
        chosen = [
            select_embedding(data, i, args.kappa_max, args.tau_max, args.knn) for i in range(data.m)
        ]
        emb = EmbeddingSpec(tuple(c[0] for c in chosen), tuple(c[1] for c in chosen))
    else:
        emb = _embedding(data.m, args.kappa, args.tau)
    sym = discretize(data, args.bins, args.scheme, emb)
    config = SearchConfig(
        args.method, args.max_parents, args.restarts, args.seed, Criterion(args.criterion)
    )
    result = search(sym, config=config)
    record = result.to_dict(list(data.names))
    record["embedding"] = {"kappa": list(emb.kappa), "tau": list(emb.tau)}
    _emit(_dumps(record), args.out)
    outputs = [args.out] if args.out else []
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(to_dot(result.graph, data.names))
        outputs.append(args.dot)
    return {"inputs": [args.data], "outputs": outputs, "seed": args.seed}


def _read_graph(path, names):
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, line=exc.lineno) from exc
    if not isinstance(doc, dict) or "edges" not in doc:
        raise ParseError("graph JSON needs an 'edges' list")
    vertices = [str(v) for v in doc.get("vertices", names)]
    if sorted(vertices) != sorted(names):
        raise ParamError("vertices", "graph vertices must match the data columns")
    edges = []
    for e in doc["edges"]:
        if not isinstance(e, list) or len(e) != 2:
            raise ParseError(f"bad edge {e!r}")
        # Integer endpoints index the graph's own vertex list.
        ends = [vertices[x] if isinstance(x, int) and 0 <= x < len(vertices) else x for x in e]
        edges.append((_vertex(names, ends[0]), _vertex(names, ends[1])))
    return CandidateGraph.from_edges(len(names), edges)


def cmd_score(args):
    data, sym = _load_symbolic(args)
    graph = _read_graph(args.graph, list(data.names))
    report = score(sym, graph, args.criterion)
    _emit(_dumps(report.to_dict(list(data.names))), args.out)
    return {
        "inputs": [args.data, args.graph],
        "outputs": [args.out] if args.out else [],
        "seed": None,
    }


def cmd_te(args):
    data, sym = _load_symbolic(args)
    names = list(data.names)
    dest = _vertex(names, args.dest)
    sources = [_vertex(names, s) for s in str(args.sources).split(",") if s.strip()]
    if not sources:
        raise ParamError("sources", "at least one source is required")
    te = collective_te(sym, dest, sources)
    from .dataset import valid_transition_range

    record = {
        "dest": names[dest],
        "sources": [names[s] for s in sources],
        "kappa": list(sym.embedding.kappa),
        "tau": list(sym.embedding.tau),
        "te_bits": te,
        "n_eff": valid_transition_range(sym, sym.embedding).n_eff,
    }
    _emit(_dumps(record), args.out)
    return {"inputs": [args.data], "outputs": [args.out] if args.out else [], "seed": None}


def cmd_benchmark(args):
    with open(args.suite, encoding="utf-8") as fh:
        try:
            config = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, line=exc.lineno) from exc
    if args.seed is not None:
        config["seed"] = args.seed
    try:
        settings = resolve_suite(config)
    except ValueError as exc:
        raise ParamError("suite", str(exc)) from None
    rows, runtimes = run_suite(settings, workers=args.workers)
    write_rows(rows, args.out)
    return {
        "inputs": [args.suite],
        "outputs": [args.out],
        "seed": settings["seed"],
        "cell_runtimes_s": runtimes,
    }


COMMANDS = {
    "simulate": cmd_simulate,
    "learn": cmd_learn,
    "score": cmd_score,
    "te": cmd_te,
    "benchmark": cmd_benchmark,
}


def _add_discretisation(p):
    p.add_argument("--bins", type=int, default=2, help="symbols per series (default 2)")
    p.add_argument(
        "--scheme",
        choices=("equal_frequency", "equal_width"),
        default="equal_frequency",
        help="binning scheme (default equal_frequency)",
    )
    p.add_argument("--kappa", type=_int_list, default=[2], help="embedding dimension, one value or per-vertex list (default 2)")
    p.add_argument("--tau", type=_int_list, default=[1], help="time delay, one value or per-vertex list (default 1)")


def build_parser():
    parser = _Parser(prog="gdsnet", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"gdsnet {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="simulate a GDS spec to CSV")
    p.add_argument("spec", help="GDS spec JSON file")
    p.add_argument("--n", type=int, default=10000, help="recorded steps (default 10000)")
    p.add_argument("--burn-in", type=int, default=1000, help="discarded steps (default 1000)")
    p.add_argument("--seed", type=int, default=None, help="override the seed stored in the system JSON")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--hidden", action="store_true", help="also write hidden-state columns")

    p = sub.add_parser("learn", help="learn the coupling DAG from observations")
    p.add_argument("data", help="observation CSV")
    _add_discretisation(p)
    p.add_argument("--auto-embed", action="store_true", help="pick kappa/tau per vertex by k-NN prediction")
    p.add_argument("--kappa-max", type=int, default=3, help="largest kappa tried by --auto-embed")
    p.add_argument("--tau-max", type=int, default=3, help="largest tau tried by --auto-embed")
    p.add_argument("--knn", type=int, default=4, help="neighbours used by --auto-embed")
    p.add_argument("--criterion", choices=("ml", "aic", "bic"), default="bic")
    p.add_argument("--method", choices=("auto", "exhaustive", "greedy"), default="auto",
                   help="auto = exhaustive for up to 5 vertices, else greedy")
    p.add_argument("--max-parents", type=int, default=3)
    p.add_argument("--restarts", type=int, default=1, help="greedy restarts")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="result JSON path (default stdout)")
    p.add_argument("--dot", help="also write the best graph as DOT")

    p = sub.add_parser("score", help="score one candidate graph")
    p.add_argument("data", help="observation CSV")
    p.add_argument("graph", help='graph JSON {"vertices": [...], "edges": [[src, dst], ...]}')
    _add_discretisation(p)
    p.add_argument("--criterion", choices=("ml", "aic", "bic"), default="bic")
    p.add_argument("--out", help="report JSON path (default stdout)")

    p = sub.add_parser("te", help="collective transfer entropy into one vertex")
    p.add_argument("data", help="observation CSV")
    p.add_argument("--dest", required=True, help="destination vertex (name or index)")
    p.add_argument("--sources", required=True, help="comma-separated source vertices")
    _add_discretisation(p)
    p.add_argument("--out", help="record JSON path (default stdout)")

    p = sub.add_parser("benchmark", help="run a structure-recovery suite")
    p.add_argument("suite", help="suite config JSON")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--seed", type=int, default=None, help="override the suite's base seed")
    p.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")

    p = sub.add_parser("replay", help="re-run a command from its manifest and verify outputs")
    p.add_argument("manifest", help="manifest JSON written by a previous run")
    return parser


def _write_manifest(command, config, info, duration):
    outputs = info["outputs"]
    if not outputs:
        return None
    manifest = {
        "command": command,
        "config": config,
        "inputs": {p: _sha256(p) for p in info["inputs"]},
        "outputs": {p: _sha256(p) for p in outputs},
        "tool_version": __version__,
        "seed": info.get("seed"),
        "duration_s": duration,
    }
    if "cell_runtimes_s" in info:
        manifest["cell_runtimes_s"] = info["cell_runtimes_s"]
    path = f"{outputs[0]}.manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_dumps(manifest))
    return path


def _execute(command, config):
    args = argparse.Namespace(**config)
    start = time.perf_counter()
    info = COMMANDS[command](args)
    _write_manifest(command, config, info, time.perf_counter() - start)
    return info


def replay(manifest_path):
    """Re-run the command recorded in a manifest; True iff outputs match."""
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    expected = manifest["outputs"]
    _execute(manifest["command"], manifest["config"])
    return all(_sha256(p) == h for p, h in expected.items())


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "replay":
            ok = replay(args.manifest)
            print("outputs reproduced" if ok else "outputs differ", file=sys.stderr)
            return EXIT_OK if ok else EXIT_VALIDATION
        config = {k: v for k, v in vars(args).items() if k != "command"}
        _execute(args.command, config)
    except (GdsError, OverflowError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
