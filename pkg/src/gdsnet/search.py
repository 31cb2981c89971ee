"""Score-and-search over DAGs: exhaustive enumeration and hill climbing.

Only inter-subsystem edges are searched. A vertex's own past is always in its
context, so self-edges never appear.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .dataset import EmbeddingSpec, SymbolicDataset, valid_transition_range
from .errors import ParamError, TooLargeError
from .scoring import (
    CandidateGraph,
    Criterion,
    FamilyCache,
    ScoreReport,
    as_criterion,
    family_score,
    score,
)

METHODS = ("exhaustive", "greedy", "auto")
EXHAUSTIVE_MAX_VERTICES = 5
DEFAULT_MAX_PARENTS = 3


def is_acyclic(graph: CandidateGraph) -> bool:
    """Kahn's algorithm: True iff every vertex can be removed in topological order."""
    indeg = [len(ps) for ps in graph.parents]
    children = [[] for _ in range(graph.m)]
    for i, ps in enumerate(graph.parents):
        for p in ps:
            children[p].append(i)
    ready = [i for i in range(graph.m) if indeg[i] == 0]
    removed = 0
    while ready:
        v = ready.pop()
        removed += 1
        for c in children[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
    return removed == graph.m


def _subsets(m, v, cap):
    others = [u for u in range(m) if u != v]
    masks = []
    for bits in range(1 << len(others)):
        mask = 0
        for k, u in enumerate(others):
            if bits >> k & 1:
                mask |= 1 << u
        if bin(mask).count("1") <= cap:
            masks.append(mask)
    masks.sort(key=lambda s: (bin(s).count("1"), s))
    return masks


def enumerate_dags(m: int, max_parents: int | None = None) -> Iterator[CandidateGraph]:
    """Yield every labelled DAG on ``m`` vertices exactly once.

    Parent sets are assigned vertex by vertex; a parent set is rejected as
    soon as it would close a cycle with the edges already placed. Order is
    deterministic, starting with the empty graph.
    """
    if m < 0:
        raise ParamError("m", "vertex count must be >= 0")
    if m > EXHAUSTIVE_MAX_VERTICES:
        raise TooLargeError(f"exhaustive enumeration is limited to {EXHAUSTIVE_MAX_VERTICES} vertices")
    cap = m if max_parents is None else max_parents
    if cap < 0:
        raise ParamError("max_parents", "must be >= 0")
    options = [_subsets(m, v, cap) for v in range(m)]
    masks = [0] * m

    def descendants(v):
        seen = 0
        stack = [v]
        while stack:
            u = stack.pop()
            for w in range(m):
                if masks[w] >> u & 1 and not seen >> w & 1:
                    seen |= 1 << w
                    stack.append(w)
        return seen

    def assign(v):
        if v == m:
            yield CandidateGraph(
                m, tuple(tuple(p for p in range(m) if mk >> p & 1) for mk in masks)
            )
            return
        blocked = descendants(v)
        for s in options[v]:
            if s & blocked:
                continue
            masks[v] = s
            yield from assign(v + 1)
        masks[v] = 0

    yield from assign(0)


@dataclass(frozen=True)
class SearchConfig:
    method: str = "auto"
    max_parents: int = DEFAULT_MAX_PARENTS
    restarts: int = 1
    seed: int = 0
    criterion: Criterion = field(default_factory=Criterion)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ParamError("method", f"unknown method {self.method!r}; choose from {METHODS}")
        if self.max_parents < 0:
            raise ParamError("max_parents", "must be >= 0")
        if self.restarts < 1:
            raise ParamError("restarts", "must be >= 1")
        object.__setattr__(self, "criterion", as_criterion(self.criterion))

    def resolve(self, m):
        """Concrete method for ``m`` vertices (``auto`` picks by size)."""
        if self.method != "auto":
            return self.method
        return "exhaustive" if m <= EXHAUSTIVE_MAX_VERTICES else "greedy"


@dataclass(frozen=True)
class SearchResult:
    best: ScoreReport
    visited: int
    method: str
    seed: int
    trace: tuple = ()
    initial_score: float | None = None
    search_total: float | None = None

    @property
    def graph(self):
        return self.best.graph

    def to_dict(self, names=None) -> dict:
        label = (lambda i: names[i]) if names is not None else (lambda i: i)
        return {
            "method": self.method,
            "criterion": self.best.criterion.tag,
            "best_graph": [[label(s), label(d)] for s, d in self.best.graph.edges],
            "best_score": self.best.total_score,
            "visited": self.visited,
            "seed": self.seed,
            "report": self.best.to_dict(names),
        }

    def to_json(self, names=None) -> str:
        return json.dumps(self.to_dict(names), indent=2)


def _tol(a, b):
    return 1e-9 * max(1.0, abs(a), abs(b))


def _better(score_a, graph_a, score_b, graph_b):
    """Higher score wins; near-ties go to fewer edges, then the smaller edge list."""
    if score_a > score_b + _tol(score_a, score_b):
        return True
    if score_b > score_a + _tol(score_a, score_b):
        return False
    if graph_a.n_edges != graph_b.n_edges:
        return graph_a.n_edges < graph_b.n_edges
    return graph_a.edges < graph_b.edges


def exhaustive_search(
    data: SymbolicDataset,
    embedding: EmbeddingSpec | None = None,
    config: SearchConfig | None = None,
    cache: FamilyCache | None = None,
) -> SearchResult:
    """Score every DAG within the parent cap and return the best one."""
    config = config or SearchConfig(method="exhaustive")
    if data.m > EXHAUSTIVE_MAX_VERTICES:
        raise TooLargeError(
            f"exhaustive search is limited to {EXHAUSTIVE_MAX_VERTICES} vertices, got {data.m}"
        )
    emb = embedding or data.embedding
    tr = valid_transition_range(data, emb)
    crit = config.criterion
    cache = cache if cache is not None else FamilyCache()
    family_totals = {}

    def fam(i, ps):
        key = (i, ps)
        if key not in family_totals:
            family_totals[key] = family_score(data, i, ps, crit, tr, emb, cache).family_total
        return family_totals[key]

    best_graph, best_score, visited = None, -math.inf, 0
    for graph in enumerate_dags(data.m, config.max_parents):
        visited += 1
        total = math.fsum(fam(i, ps) for i, ps in enumerate(graph.parents))
        if best_graph is None or _better(total, graph, best_score, best_graph):
            best_graph, best_score = graph, total
    report = score(data, best_graph, crit, emb, cache)
    return SearchResult(report, visited, "exhaustive", config.seed, search_total=best_score)


def _random_dag(m, cap, rng):
    order = rng.permutation(m)
    parents = [set() for _ in range(m)]
    for a in range(m):
        for b in range(a + 1, m):
            u, v = int(order[a]), int(order[b])
            if len(parents[v]) < cap and rng.random() < 0.5:
                parents[v].add(u)
    return parents


def _reaches(parents, src, dst, skip=None):
    """True iff a directed path ``src -> ... -> dst`` exists (optionally ignoring one edge)."""
    m = len(parents)
    children = [[] for _ in range(m)]
    for v, ps in enumerate(parents):
        for p in ps:
            if (p, v) != skip:
                children[p].append(v)
    stack, seen = [src], {src}
    while stack:
        u = stack.pop()
        if u == dst:
            return True
        for w in children[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return False


def _hill_climb(m, start, cap, fam):
    parents = [set(ps) for ps in start]
    cur = [fam(i, parents[i]) for i in range(m)]
    initial = math.fsum(cur)
    trace = []
    while True:
        best_delta, best_move = 0.0, None
        for u in range(m):
            for v in range(m):
                if u == v:
                    continue
                if u in parents[v]:
                    new_v = fam(v, parents[v] - {u})
                    delta = new_v - cur[v]
                    if delta > best_delta + _tol(delta, best_delta):
                        best_delta, best_move = delta, ("delete", u, v)
                    if len(parents[u]) < cap and not _reaches(parents, u, v, skip=(u, v)):
                        delta = new_v - cur[v] + fam(u, parents[u] | {v}) - cur[u]
                        if delta > best_delta + _tol(delta, best_delta):
                            best_delta, best_move = delta, ("reverse", u, v)
                elif v not in parents[u]:
                    if len(parents[v]) < cap and not _reaches(parents, v, u):
                        delta = fam(v, parents[v] | {u}) - cur[v]
                        if delta > best_delta + _tol(delta, best_delta):
                            best_delta, best_move = delta, ("add", u, v)
        if best_move is None:
            break
        kind, u, v = best_move
        if kind == "add":
            parents[v].add(u)
        elif kind == "delete":
            parents[v].discard(u)
        else:
            parents[v].discard(u)
            parents[u].add(v)
            cur[u] = fam(u, parents[u])
        cur[v] = fam(v, parents[v])
        trace.append((best_move, best_delta))
    graph = CandidateGraph(m, tuple(tuple(sorted(ps)) for ps in parents))
    return graph, math.fsum(cur), initial, trace


def greedy_search(
    data: SymbolicDataset,
    embedding: EmbeddingSpec | None = None,
    config: SearchConfig | None = None,
    cache: FamilyCache | None = None,
) -> SearchResult:
    """Hill-climb with add / delete / reverse moves from the empty graph.

    Each step applies the single acyclicity-preserving move with the largest
    strict score gain; only the families a move touches are re-scored.
    Restarts beyond the first begin from random DAGs drawn from ``seed``.
    ``visited`` counts the distinct families scored.
    """
    config = config or SearchConfig(method="greedy")
    emb = embedding or data.embedding
    tr = valid_transition_range(data, emb)
    crit = config.criterion
    cache = cache if cache is not None else FamilyCache()
    m = data.m
    cap = min(config.max_parents, max(m - 1, 0))
    family_totals = {}

    def fam(i, ps):
        key = (i, tuple(sorted(ps)))
        if key not in family_totals:
            family_totals[key] = family_score(data, i, key[1], crit, tr, emb, cache).family_total
        return family_totals[key]

    best = None
    for r in range(config.restarts):
        if r == 0:
            start = [set() for _ in range(m)]
        else:
            start = _random_dag(m, cap, np.random.default_rng([config.seed, r]))
        run = _hill_climb(m, start, cap, fam)
        if best is None or _better(run[1], run[0], best[1], best[0]):
            best = run
    graph, total, initial, trace = best
    report = score(data, graph, crit, emb, cache)
    return SearchResult(
        report,
        len(family_totals),
        "greedy",
        config.seed,
        trace=tuple(trace),
        initial_score=initial,
        search_total=total,
    )


def search(data, embedding=None, config=None, cache=None) -> SearchResult:
    """Dispatch to exhaustive or greedy search according to ``config``."""
    config = config or SearchConfig()
    method = config.resolve(data.m)
    if method == "exhaustive":
        return exhaustive_search(data, embedding, config, cache)
    return greedy_search(data, embedding, config, cache)


def to_dot(graph: CandidateGraph, names=None) -> str:
    """Graphviz DOT text for ``graph`` with vertex names as labels."""
    names = list(names) if names is not None else [f"v{i}" for i in range(graph.m)]
    lines = ["digraph G {"]
    for name in names:
        lines.append(f"  {json.dumps(name)};")
    for s, d in graph.edges:
        lines.append(f"  {json.dumps(names[s])} -> {json.dumps(names[d])};")
    lines.append("}")
    return "\n".join(lines) + "\n"
