"""Information-criterion scores for candidate coupling graphs.

The score of a graph is, in bits,

    g(G) = -N_eff * sum_i H(y_i' | past_i, pasts of parents(i))  -  f(N_eff) * C(G)

where ``C(G)`` counts free multinomial parameters and ``f`` is 0 (ML), 1
(AIC) or ``log2(N_eff) / 2`` (BIC). Graph-independent terms of the
log-likelihood are omitted, so only differences between scores of graphs on
the same dataset are meaningful.
"""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .dataset import EmbeddingSpec, SymbolicDataset, TransitionRange, valid_transition_range
from .errors import CycleError, ParamError, SelfLoopError
from .estimators import family_entropy

CRITERIA = ("ml", "aic", "bic")
#: Model dimensions above this are reported as overflow.
MAX_DIMENSION = 2**63 - 1


@dataclass(frozen=True)
class CandidateGraph:
    """Parent lists over ``m`` vertices. May be cyclic; see :meth:`is_acyclic`."""

    m: int
    parents: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        parents = tuple(tuple(int(p) for p in ps) for ps in self.parents)
        if len(parents) != self.m:
            raise ParamError("parents", f"expected {self.m} parent lists, got {len(parents)}")
        for i, ps in enumerate(parents):
            if i in ps:
                raise SelfLoopError(f"vertex {i} lists itself as a parent")
            if len(set(ps)) != len(ps):
                raise ParamError("parents", f"duplicate parent of vertex {i}")
            if any(not 0 <= p < self.m for p in ps):
                raise ParamError("parents", f"parent index of vertex {i} out of range")
        object.__setattr__(self, "parents", parents)

    @classmethod
    def empty(cls, m):
        return cls(m, ((),) * m)

    @classmethod
    def from_edges(cls, m, edges):
        parents = [[] for _ in range(m)]
        for s, d in edges:
            if not (0 <= s < m and 0 <= d < m):
                raise ParamError("edges", f"edge ({s}, {d}) out of range")
            parents[d].append(s)
        return cls(m, tuple(tuple(sorted(ps)) for ps in parents))

    @property
    def edges(self):
        """Edges as sorted ``(source, destination)`` pairs."""
        return sorted((p, i) for i, ps in enumerate(self.parents) for p in ps)

    @property
    def n_edges(self):
        return sum(len(ps) for ps in self.parents)

    def is_acyclic(self):
        from .search import is_acyclic

        return is_acyclic(self)

    def relabel(self, perm):
        """Graph with vertex ``i`` renamed to ``perm[i]``."""
        parents = [()] * self.m
        for i, ps in enumerate(self.parents):
            parents[perm[i]] = tuple(sorted(perm[p] for p in ps))
        return CandidateGraph(self.m, tuple(parents))


@dataclass(frozen=True)
class Criterion:
    """Penalty schedule: ``ml`` (none), ``aic`` (1 per parameter) or ``bic``."""

    tag: str = "bic"

    def __post_init__(self):
        if self.tag not in CRITERIA:
            raise ParamError("criterion", f"unknown criterion {self.tag!r}; choose from {CRITERIA}")

    def f_of_n(self, n_eff):
        if self.tag == "ml":
            return 0.0
        if self.tag == "aic":
            return 1.0
        return math.log2(n_eff) / 2.0


def as_criterion(criterion) -> Criterion:
    return criterion if isinstance(criterion, Criterion) else Criterion(str(criterion))


class FamilyScore(NamedTuple):
    entropy_bits: float
    dimension: int
    family_total: float


@dataclass(frozen=True)
class ScoreReport:
    graph: CandidateGraph
    criterion: Criterion
    family_entropy: tuple[float, ...]
    family_dimension: tuple[int, ...]
    family_total: tuple[float, ...]
    total_score: float
    n_eff: int

    @property
    def penalty_weight(self):
        return self.criterion.f_of_n(self.n_eff)

    def to_dict(self, names=None) -> dict:
        label = (lambda i: names[i]) if names is not None else (lambda i: i)
        return {
            "criterion": self.criterion.tag,
            "n_eff": self.n_eff,
            "total": self.total_score,
            "families": [
                {
                    "vertex": label(i),
                    "parents": [label(p) for p in self.graph.parents[i]],
                    "entropy_bits": self.family_entropy[i],
                    "dimension": self.family_dimension[i],
                    "family_total": self.family_total[i],
                }
                for i in range(self.graph.m)
            ],
        }

    def to_json(self, names=None) -> str:
        return json.dumps(self.to_dict(names), indent=2)


def _family_dimension(i, parents, alphabet, embedding):
    b = alphabet[i]
    dim = b ** embedding.kappa[i] * (b - 1)
    for p in parents:
        dim *= alphabet[p] ** embedding.kappa[p]
    if dim > MAX_DIMENSION:
        raise OverflowError(f"family of vertex {i} needs {dim} parameters")
    return dim


def model_dimension(graph: CandidateGraph, alphabet: Sequence[int], embedding: EmbeddingSpec):
    """Free parameter count per vertex and in total (exact integers).

    Vertex ``i`` contributes ``b_i**kappa_i * (b_i - 1) * prod_p b_p**kappa_p``
    over its parents ``p``.

    Raises ``OverflowError`` when a count exceeds ``MAX_DIMENSION``.
    """
    per_vertex = [
        _family_dimension(i, graph.parents[i], alphabet, embedding) for i in range(graph.m)
    ]
    total = sum(per_vertex)
    if total > MAX_DIMENSION:
        raise OverflowError(f"graph needs {total} parameters")
    return per_vertex, total


class FamilyCache:
    """Memo of family entropies keyed by dataset, vertex, parent set and embedding.

    Entropy does not depend on the criterion, so one entry serves all three.
    Parent sets are stored sorted; conditional entropy does not depend on
    context order. Concurrent inserts of the same key write the same value.
    """

    def __init__(self):
        self._store = {}
        self._lock = threading.Lock()
        self.misses = 0

    def key(self, data, i, parents, embedding, trange):
        return (
            data.fingerprint,
            i,
            tuple(sorted(parents)),
            embedding.kappa,
            embedding.tau,
            tuple(trange),
        )

    def entropy(self, data, i, parents, embedding, trange):
        key = self.key(data, i, parents, embedding, trange)
        h = self._store.get(key)
        if h is None:
            h = family_entropy(data, i, tuple(sorted(parents)), embedding, trange)
            with self._lock:
                if key not in self._store:
                    self.misses += 1
                self._store[key] = h
        return h

    def __len__(self):
        return len(self._store)


def family_score(
    data: SymbolicDataset,
    i: int,
    parents=(),
    criterion="bic",
    trange: TransitionRange | None = None,
    embedding: EmbeddingSpec | None = None,
    cache: FamilyCache | None = None,
) -> FamilyScore:
    """Contribution of vertex ``i`` with the given parents to the total score."""
    parents = tuple(parents)
    if i in parents:
        raise SelfLoopError(f"vertex {i} cannot be its own parent")
    crit = as_criterion(criterion)
    emb = embedding or data.embedding
    tr = trange or valid_transition_range(data, emb)
    if cache is not None:
        h = cache.entropy(data, i, parents, emb, tr)
    else:
        h = family_entropy(data, i, parents, emb, tr)
    dim = _family_dimension(i, parents, data.alphabet, emb)
    return FamilyScore(h, dim, -tr.n_eff * h - crit.f_of_n(tr.n_eff) * dim)


def score(
    data: SymbolicDataset,
    graph: CandidateGraph,
    criterion="bic",
    embedding: EmbeddingSpec | None = None,
    cache: FamilyCache | None = None,
) -> ScoreReport:
    """Score ``graph`` on ``data``; the total is the sum of family scores.

    Raises ``CycleError`` for a cyclic graph.
    """
    from .search import is_acyclic

    if graph.m != data.m:
        raise ParamError("graph", f"graph has {graph.m} vertices, data has {data.m}")
    if not is_acyclic(graph):
        raise CycleError("candidate graph contains a directed cycle")
    crit = as_criterion(criterion)
    emb = embedding or data.embedding
    if len(emb) != data.m:
        raise ParamError("embedding", f"expected {data.m} entries")
    tr = valid_transition_range(data, emb)
    fams = [family_score(data, i, graph.parents[i], crit, tr, emb, cache) for i in range(graph.m)]
    return ScoreReport(
        graph=graph,
        criterion=crit,
        family_entropy=tuple(f.entropy_bits for f in fams),
        family_dimension=tuple(f.dimension for f in fams),
        family_total=tuple(f.family_total for f in fams),
        total_score=math.fsum(f.family_total for f in fams),
        n_eff=tr.n_eff,
    )


def loglik_ratio(
    data: SymbolicDataset,
    graph: CandidateGraph,
    embedding: EmbeddingSpec | None = None,
) -> float:
    """Log-likelihood gain of ``graph`` over the empty graph, in bits.

    Equal to ``N_eff`` times the summed collective transfer entropy from each
    vertex's parents into it.
    """
    from .estimators import collective_te
    from .search import is_acyclic

    if not is_acyclic(graph):
        raise CycleError("candidate graph contains a directed cycle")
    emb = embedding or data.embedding
    tr = valid_transition_range(data, emb)
    te = [
        collective_te(data, i, ps, emb, tr) for i, ps in enumerate(graph.parents) if ps
    ]
    return tr.n_eff * math.fsum(te)
