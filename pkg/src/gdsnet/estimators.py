"""Plug-in entropy estimates over delay-vector contexts.

Counts are sparse: only ``(next symbol, context)`` tuples that actually occur
are stored. All entropies are in bits and use the maximum-likelihood
(multinomial plug-in) estimate with no bias correction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple

import numpy as np
from scipy.spatial import cKDTree

from .dataset import (
    EmbeddingSpec,
    ObservationDataset,
    SymbolicDataset,
    TransitionRange,
    delay_embed,
    valid_transition_range,
)
from .errors import DegenerateSeriesError, EmptyTableError, ParamError, TooShortError


@dataclass(frozen=True)
class ContextSpec:
    """Target subsystem and the ordered sources whose pasts condition it.

    The target's own delay vector is always part of the context.
    """

    target: int
    sources: tuple[int, ...] = ()
    embedding: EmbeddingSpec | None = None

    def __post_init__(self):
        sources = tuple(int(s) for s in self.sources)
        if self.target in sources:
            raise ParamError("sources", "target cannot be one of its own sources")
        if len(set(sources)) != len(sources):
            raise ParamError("sources", "duplicate source")
        object.__setattr__(self, "sources", sources)

    @property
    def members(self):
        return (self.target, *self.sources)


@dataclass(frozen=True)
class CountTable:
    """Sparse joint counts of ``(next_symbol, context_tuple)``."""

    joint: Mapping[tuple, int]
    contexts: Mapping[tuple, int] = field(default_factory=dict)
    total: int = 0

    @classmethod
    def from_joint(cls, joint: Mapping) -> "CountTable":
        """Build a table (and its context marginals) from joint counts.

        Keys are ``(x, context)``; a non-tuple context is wrapped as a
        1-tuple. Zero counts are dropped.
        """
        clean = {}
        contexts = {}
        for (x, c), n in joint.items():
            if n < 0:
                raise ParamError("joint", "counts must be non-negative")
            if n == 0:
                continue
            c = c if isinstance(c, tuple) else (c,)
            clean[(x, c)] = clean.get((x, c), 0) + int(n)
            contexts[c] = contexts.get(c, 0) + int(n)
        return cls(clean, contexts, sum(clean.values()))


def _context_columns(data: SymbolicDataset, ctx: ContextSpec, tr: TransitionRange):
    emb = ctx.embedding or data.embedding
    blocks = [
        delay_embed(data.symbols[v], emb.kappa[v], emb.tau[v], tr.first, tr.last)
        for v in ctx.members
    ]
    return np.concatenate(blocks, axis=1)


def build_counts(
    data: SymbolicDataset, ctx: ContextSpec, trange: TransitionRange | None = None
) -> CountTable:
    """Count ``(y[target, n+1], context(n))`` over every transition in range.

    The context tuple is the target's delay vector followed by each source's
    delay vector, in ``ctx.sources`` order.
    """
    emb = ctx.embedding or data.embedding
    tr = trange or valid_transition_range(data, emb)
    nxt = data.symbols[ctx.target, tr.first + 1 : tr.last + 2]
    cols = _context_columns(data, ctx, tr)
    radices = [data.alphabet[v] for v in ctx.members for _ in range(emb.kappa[v])]
    if math.prod(radices) * data.alphabet[ctx.target] < 2**62:
        joint, contexts = _count_coded(nxt, cols, radices, data.alphabet[ctx.target])
    else:
        joint, contexts = _count_rows(nxt, cols)
    return CountTable(joint, contexts, int(tr.n_eff))


def _count_coded(nxt, cols, radices, b_next):
    # Mixed-radix code per row; the next symbol is the lowest digit.
    ctx_code = np.zeros(len(nxt), dtype=np.int64)
    for c, r in zip(cols.T, radices):
        ctx_code = ctx_code * r + c
    codes, counts = np.unique(ctx_code * b_next + nxt, return_counts=True)

    def decode(code):
        digits = []
        for r in reversed(radices):
            code, d = divmod(code, r)
            digits.append(d)
        return tuple(reversed(digits))

    joint = {}
    contexts = {}
    for code, n in zip(codes.tolist(), counts.tolist()):
        c, x = divmod(code, b_next)
        key = decode(c)
        joint[(x, key)] = n
        contexts[key] = contexts.get(key, 0) + n
    return joint, contexts


def _count_rows(nxt, cols):
    rows = np.column_stack([nxt, cols])
    keys, counts = np.unique(rows, axis=0, return_counts=True)
    joint = {(int(k[0]), tuple(int(v) for v in k[1:])): int(n) for k, n in zip(keys, counts)}
    contexts = {}
    for (_, c), n in joint.items():
        contexts[c] = contexts.get(c, 0) + n
    return joint, contexts


def conditional_entropy(table: CountTable) -> float:
    """Plug-in ``H(next | context)`` in bits; ``0 log 0`` counts as zero."""
    if table.total <= 0:
        raise EmptyTableError("count table has no transitions")
    n = table.total
    terms = [
        c * math.log2(c / table.contexts[ctx]) for (_, ctx), c in table.joint.items() if c > 0
    ]
    h = -math.fsum(terms) / n
    return h if h > 0.0 else 0.0


def family_entropy(data, target, sources=(), embedding=None, trange=None) -> float:
    """``H(y[target, n+1] | target past, sources' pasts)`` in bits."""
    ctx = ContextSpec(target, tuple(sources), embedding)
    return conditional_entropy(build_counts(data, ctx, trange))


def collective_te(
    data: SymbolicDataset,
    dest: int,
    sources,
    embedding: EmbeddingSpec | None = None,
    trange: TransitionRange | None = None,
) -> float:
    """Collective transfer entropy from ``sources`` to ``dest`` in bits.

    Both conditional entropies are evaluated on the same transitions, so the
    plug-in estimate is never negative.
    """
    sources = tuple(sources)
    if not sources:
        raise ParamError("sources", "transfer entropy needs at least one source")
    if dest in sources:
        raise ParamError("sources", "destination cannot be one of its sources")
    emb = embedding or data.embedding
    tr = trange or valid_transition_range(data, emb)
    h_self = family_entropy(data, dest, (), emb, tr)
    h_full = family_entropy(data, dest, sources, emb, tr)
    return h_self - h_full


class KnnPrediction(NamedTuple):
    predictions: np.ndarray
    targets: np.ndarray
    rmse: float
    trange: TransitionRange


def _zscore(x):
    sd = x.std()
    if sd == 0:
        raise DegenerateSeriesError("cannot z-score a constant series")
    return (x - x.mean()) / sd


def knn_predict(
    data: ObservationDataset,
    ctx: ContextSpec,
    embedding: EmbeddingSpec | None = None,
    k: int = 4,
    trange: TransitionRange | None = None,
) -> KnnPrediction:
    """Leave-one-out nearest-neighbour forecast of ``y[target, n+1]``.

    Each transition is predicted by averaging the successors of its ``k``
    nearest neighbours (excluding itself) in the joint delay space of
    ``ctx.members``. Coordinates are z-scored per subsystem and compared
    with the Euclidean metric.
    """
    if k < 1:
        raise ParamError("k", "need at least one neighbour")
    emb = embedding or ctx.embedding
    if emb is None:
        raise ParamError("embedding", "an embedding is required")
    tr = trange or valid_transition_range(data, emb)
    if tr.n_eff <= k:
        raise TooShortError(f"{tr.n_eff} transitions cannot supply {k} neighbours")

    blocks = [
        delay_embed(_zscore(data.values[v]), emb.kappa[v], emb.tau[v], tr.first, tr.last)
        for v in ctx.members
    ]
    coords = np.concatenate(blocks, axis=1)
    targets = np.asarray(data.values[ctx.target, tr.first + 1 : tr.last + 2], dtype=float)

    _, idx = cKDTree(coords).query(coords, k=k + 1)
    idx = np.asarray(idx).reshape(len(coords), k + 1)
    # Drop the query point itself; if duplicates pushed it out of the
    # candidate list, drop the farthest candidate instead.
    is_self = idx == np.arange(len(coords))[:, None]
    is_self[~is_self.any(axis=1), -1] = True
    keep = idx[~is_self].reshape(len(coords), k)
    predictions = targets[keep].mean(axis=1)
    rmse = float(np.sqrt(np.mean((predictions - targets) ** 2)))
    return KnnPrediction(predictions, targets, rmse, tr)


def select_embedding(
    data: ObservationDataset,
    i: int,
    kappa_max: int = 3,
    tau_max: int = 3,
    k: int = 4,
    rtol: float = 0.05,
) -> tuple[int, int]:
    """Grid-search ``(kappa, tau)`` for subsystem ``i`` by self-prediction error.

    Every candidate is evaluated on the same targets (the range allowed by
    the largest candidate). The smallest ``kappa`` (then ``tau``) whose RMSE
    is within ``rtol`` of the best RMSE wins, so statistically
    indistinguishable errors resolve toward the simpler embedding.
    """
    if kappa_max < 1 or tau_max < 1:
        raise ParamError("kappa_max/tau_max", "must be >= 1")
    grid = [(1, 1)] + [(kap, tau) for kap in range(2, kappa_max + 1) for tau in range(1, tau_max + 1)]
    first = max((kap - 1) * tau for kap, tau in grid)
    if data.n_steps <= first + 1:
        raise TooShortError(f"{data.n_steps} steps too short for kappa_max={kappa_max}, tau_max={tau_max}")
    tr = TransitionRange(first, data.n_steps - 2, data.n_steps - 2 - first + 1)
    m = data.m
    errors = {}
    for kap, tau in grid:
        kappa = [1] * m
        taus = [1] * m
        kappa[i], taus[i] = kap, tau
        emb = EmbeddingSpec(tuple(kappa), tuple(taus))
        errors[(kap, tau)] = knn_predict(data, ContextSpec(i), emb, k, tr).rmse
    best = min(errors.values())
    for cand in grid:
        if errors[cand] <= best * (1.0 + rtol):
            return cand
    return grid[0]
