"""Structure-recovery experiments on simulated coupled logistic maps.

A suite is a grid over vertex count, topology, coupling strength,
observation noise and series length. Each cell simulates ``seeds`` systems,
learns a graph from each, and reports how often the truth is recovered.
"""

from __future__ import annotations

import csv
import itertools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .dataset import EmbeddingSpec, discretize
from .scoring import CandidateGraph, Criterion
from .search import SearchConfig, exhaustive_search, search
from .sim import make_spec, simulate

TOPOLOGIES = ("chain", "fork", "collider", "empty")

COLUMNS = (
    "m",
    "topology",
    "coupling",
    "obs_noise",
    "n",
    "n_seeds",
    "exact_match_rate",
    "skeleton_match_rate",
    "mean_extra_edges",
    "mean_missing_edges",
    "mean_visited",
    "greedy_optimum_rate",
    "error",
)

SUITE_DEFAULTS = {
    "m": [3],
    "topology": ["chain"],
    "coupling": [0.0, 0.4],
    "obs_noise": [0.01],
    "n": [10000],
    "seeds": 20,
    "seed": 0,
    "r": 4.0,
    "burn_in": 1000,
    "bins": 2,
    "scheme": "equal_frequency",
    "kappa": 2,
    "tau": 1,
    "criterion": "bic",
    "method": "auto",
    "max_parents": 3,
    "restarts": 1,
    "compare_greedy": False,
}


def topology_edges(m, topology):
    if topology == "chain":
        return [(i, i + 1) for i in range(m - 1)]
    if topology == "fork":
        return [(0, i) for i in range(1, m)]
    if topology == "collider":
        return [(i, m - 1) for i in range(m - 1)]
    if topology == "empty":
        return []
    raise ValueError(f"unknown topology {topology!r}; choose from {TOPOLOGIES}")


def true_graph(m, topology, coupling):
    """Graph the learner should find: no edges carry influence when coupling is 0."""
    edges = topology_edges(m, topology) if coupling > 0 else []
    return CandidateGraph.from_edges(m, edges)


@dataclass(frozen=True)
class Trial:
    learned: CandidateGraph
    truth: CandidateGraph
    visited: int
    score: float
    greedy_score: float | None = None


def run_trial(
    m=3,
    topology="chain",
    coupling=0.4,
    obs_noise=0.01,
    n=10000,
    seed=0,
    r=4.0,
    burn_in=1000,
    bins=2,
    scheme="equal_frequency",
    kappa=2,
    tau=1,
    criterion="bic",
    method="auto",
    max_parents=3,
    restarts=1,
    compare_greedy=False,
) -> Trial:
    """Simulate one system, learn its graph, and return both graphs."""
    spec = make_spec(
        m,
        topology_edges(m, topology),
        coupling=coupling,
        family="logistic",
        params={"r": r},
        obs_noise=obs_noise,
        seed=seed,
    )
    data = simulate(spec, n, burn_in).to_dataset()
    sym = discretize(data, bins, scheme, EmbeddingSpec.uniform(m, kappa, tau))
    config = SearchConfig(method, max_parents, restarts, seed, Criterion(criterion))
    result = search(sym, config=config)
    greedy_score = None
    if compare_greedy:
        greedy = search(sym, config=SearchConfig("greedy", max_parents, restarts, seed, Criterion(criterion)))
        greedy_score = greedy.best.total_score
        if result.method != "exhaustive":
            result = exhaustive_search(sym, config=config)
    return Trial(
        result.graph,
        true_graph(m, topology, coupling),
        result.visited,
        result.best.total_score,
        greedy_score,
    )


def _skeleton(graph):
    return {frozenset(e) for e in graph.edges}


def _cell_row(cell, settings):
    m, topology, coupling, obs_noise, n = cell
    row = {
        "m": m,
        "topology": topology,
        "coupling": coupling,
        "obs_noise": obs_noise,
        "n": n,
        "n_seeds": settings["seeds"],
    }
    trial_args = {
        k: settings[k]
        for k in (
            "r", "burn_in", "bins", "scheme", "kappa", "tau", "criterion",
            "method", "max_parents", "restarts", "compare_greedy",
        )
    }
    start = time.perf_counter()
    try:
        trials = [
            run_trial(m, topology, coupling, obs_noise, n, settings["seed"] + k, **trial_args)
            for k in range(settings["seeds"])
        ]
    except Exception as exc:  # recorded per cell; the suite keeps going
        row.update({c: "" for c in COLUMNS if c not in row})
        row["error"] = f"{type(exc).__name__}: {exc}"
        return row, time.perf_counter() - start
    k = len(trials)
    exact = sum(t.learned.edges == t.truth.edges for t in trials)
    skel = sum(_skeleton(t.learned) == _skeleton(t.truth) for t in trials)
    extra = sum(len(set(t.learned.edges) - set(t.truth.edges)) for t in trials)
    missing = sum(len(set(t.truth.edges) - set(t.learned.edges)) for t in trials)
    row.update(
        exact_match_rate=exact / k,
        skeleton_match_rate=skel / k,
        mean_extra_edges=extra / k,
        mean_missing_edges=missing / k,
        mean_visited=sum(t.visited for t in trials) / k,
        greedy_optimum_rate="",
        error="",
    )
    if settings["compare_greedy"]:
        hits = sum(
            abs(t.greedy_score - t.score) <= 1e-9 * max(1.0, abs(t.score)) for t in trials
        )
        row["greedy_optimum_rate"] = hits / k
    return row, time.perf_counter() - start


def _run_cell(args):
    return _cell_row(*args)


def resolve_suite(config: dict) -> dict:
    unknown = set(config) - set(SUITE_DEFAULTS)
    if unknown:
        raise ValueError(f"unknown suite fields {sorted(unknown)}")
    settings = {**SUITE_DEFAULTS, **config}
    for key in ("m", "topology", "coupling", "obs_noise", "n"):
        if not isinstance(settings[key], list):
            settings[key] = [settings[key]]
    if int(settings["seeds"]) < 0:
        raise ValueError("seeds must be >= 0")
    return settings


def run_suite(config: dict, workers: int = 1):
    """Run every cell; returns ``(rows, runtimes)`` in grid order.

    A suite with zero seeds has no cells.
    """
    settings = resolve_suite(config)
    if settings["seeds"] == 0:
        return [], []
    cells = list(
        itertools.product(
            settings["m"], settings["topology"], settings["coupling"],
            settings["obs_noise"], settings["n"],
        )
    )
    jobs = [(cell, settings) for cell in cells]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(_run_cell, jobs))
    else:
        out = [_run_cell(job) for job in jobs]
    return [row for row, _ in out], [t for _, t in out]


def write_rows(rows, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
