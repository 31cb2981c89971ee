"""Observation data, discretisation and delay embedding.

Scores for different candidate graphs are only comparable when they are
computed over the same transitions, so :func:`valid_transition_range` derives
one range per dataset from the largest embedding offset over *all*
subsystems, independent of any graph.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DegenerateSeriesError, EmptyError, ParamError, ParseError, TooShortError

DEFAULT_BINS = 2
DEFAULT_SCHEME = "equal_frequency"
DEFAULT_KAPPA = 2
DEFAULT_TAU = 1
SCHEMES = ("equal_frequency", "equal_width")


@dataclass(frozen=True)
class ObservationDataset:
    """Real-valued observations, one row per subsystem (``values`` is M x N)."""

    names: tuple[str, ...]
    values: np.ndarray
    source: str = ""

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim == 1:
            values = values[None, :]
        if values.ndim != 2 or values.shape[0] < 1:
            raise EmptyError("need at least one subsystem")
        if values.shape[1] < 2:
            raise TooShortError("need at least two time steps")
        if not np.all(np.isfinite(values)):
            raise ParamError("values", "observations must be finite")
        names = tuple(str(n) for n in self.names)
        if len(names) != values.shape[0]:
            raise ParamError("names", f"{len(names)} names for {values.shape[0]} series")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "names", names)

    @classmethod
    def from_array(cls, values, names=None, source="array"):
        values = np.atleast_2d(np.asarray(values, dtype=float))
        if names is None:
            names = [f"v{i}" for i in range(values.shape[0])]
        return cls(tuple(names), values, source)

    @property
    def m(self):
        return self.values.shape[0]

    @property
    def n_steps(self):
        return self.values.shape[1]


@dataclass(frozen=True)
class EmbeddingSpec:
    """Per-subsystem embedding dimension ``kappa`` and delay ``tau``."""

    kappa: tuple[int, ...]
    tau: tuple[int, ...]

    def __post_init__(self):
        kappa = tuple(int(k) for k in self.kappa)
        tau = tuple(int(t) for t in self.tau)
        if len(kappa) != len(tau):
            raise ParamError("embedding", "kappa and tau must have the same length")
        if any(k < 1 for k in kappa):
            raise ParamError("kappa", "embedding dimensions must be >= 1")
        if any(t < 1 for t in tau):
            raise ParamError("tau", "time delays must be >= 1")
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "tau", tau)

    @classmethod
    def uniform(cls, m, kappa=DEFAULT_KAPPA, tau=DEFAULT_TAU):
        return cls((kappa,) * m, (tau,) * m)

    @classmethod
    def broadcast(cls, m, kappa, tau):
        """Accept scalars or length-``m`` sequences for either field."""
        k = (kappa,) * m if np.isscalar(kappa) else tuple(kappa)
        t = (tau,) * m if np.isscalar(tau) else tuple(tau)
        if len(k) != m or len(t) != m:
            raise ParamError("embedding", f"expected {m} entries")
        return cls(k, t)

    def __len__(self):
        return len(self.kappa)

    def offset(self, i):
        """Oldest lag used by subsystem ``i``'s delay vector."""
        return (self.kappa[i] - 1) * self.tau[i]

    @property
    def max_offset(self):
        return max((k - 1) * t for k, t in zip(self.kappa, self.tau))


@dataclass(frozen=True)
class SymbolicDataset:
    """Discretised observations together with the embedding used to score them.

    ``symbols[i]`` takes values in ``range(alphabet[i])``; ``bin_edges[i]``
    holds the interior cut points of subsystem ``i``.
    """

    names: tuple[str, ...]
    symbols: np.ndarray
    alphabet: tuple[int, ...]
    embedding: EmbeddingSpec
    bin_edges: tuple[tuple[float, ...], ...] = ()
    scheme: str = DEFAULT_SCHEME

    def __post_init__(self):
        symbols = np.array(self.symbols, dtype=np.int64)
        if symbols.ndim != 2:
            raise ParamError("symbols", "expected an M x N matrix")
        m = symbols.shape[0]
        alphabet = tuple(int(b) for b in self.alphabet)
        if len(alphabet) != m or len(self.names) != m:
            raise ParamError("alphabet", "one alphabet size and name per subsystem")
        if any(b < 2 for b in alphabet):
            raise ParamError("alphabet", "alphabet sizes must be >= 2")
        if symbols.size and (symbols.min() < 0 or np.any(symbols.max(axis=1) >= alphabet)):
            raise ParamError("symbols", "symbol outside its alphabet")
        if len(self.embedding) != m:
            raise ParamError("embedding", f"expected {m} entries")
        for i, edges in enumerate(self.bin_edges):
            if any(b <= a for a, b in zip(edges, edges[1:])):
                raise ParamError(f"bin_edges[{i}]", "cut points must be strictly increasing")
        symbols.setflags(write=False)
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "names", tuple(self.names))

    @classmethod
    def from_array(cls, symbols, alphabet=None, embedding=None, names=None):
        """Wrap an integer matrix that is already discretised."""
        symbols = np.atleast_2d(np.asarray(symbols, dtype=np.int64))
        m = symbols.shape[0]
        if alphabet is None:
            alphabet = [max(2, int(row.max()) + 1) for row in symbols]
        elif np.isscalar(alphabet):
            alphabet = [int(alphabet)] * m
        if embedding is None:
            embedding = EmbeddingSpec.uniform(m)
        if names is None:
            names = [f"v{i}" for i in range(m)]
        return cls(tuple(names), symbols, tuple(alphabet), embedding)

    @property
    def m(self):
        return self.symbols.shape[0]

    @property
    def n_steps(self):
        return self.symbols.shape[1]

    def with_embedding(self, embedding):
        return replace(self, embedding=embedding)

    @cached_property
    def fingerprint(self):
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.symbols).tobytes())
        h.update(repr((self.symbols.shape, self.alphabet)).encode())
        return h.hexdigest()


class TransitionRange(NamedTuple):
    """Transitions ``n -> n+1`` for ``first <= n <= last`` (0-based)."""

    first: int
    last: int
    n_eff: int


def load_csv(path) -> ObservationDataset:
    """Read a header-plus-rows CSV into an :class:`ObservationDataset`.

    The header row names the subsystems; every later row is one time step.

    Raises
    ------
    ParseError
        Ragged rows or non-numeric / non-finite cells (reports the line).
    EmptyError
        No header or no data rows.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        if not header or all(h == "" for h in header):
            raise EmptyError(f"{path}: missing header")
        rows = []
        for row in reader:
            line = reader.line_num
            if not row or all(c.strip() == "" for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} cells, found {len(row)}", line=line)
            values = []
            for name, cell in zip(header, row):
                try:
                    v = float(cell)
                except ValueError:
                    raise ParseError(f"non-numeric cell {cell!r}", line=line, column=name) from None
                if not math.isfinite(v):
                    raise ParseError(f"non-finite cell {cell!r}", line=line, column=name)
                values.append(v)
            rows.append(values)
    if not rows:
        raise EmptyError(f"{path}: no data rows")
    values = np.array(rows, dtype=float).T
    return ObservationDataset(tuple(header), values, source=str(path))


def write_csv(data: ObservationDataset, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(data.names)
        for row in data.values.T.tolist():
            writer.writerow([repr(v) for v in row])


def _cut_points(x, bins, scheme, name):
    if scheme == "equal_frequency":
        if np.unique(x).size < bins:
            raise DegenerateSeriesError(
                f"series {name!r} has fewer than {bins} distinct values"
            )
        cuts = np.quantile(x, np.arange(1, bins) / bins)
        if np.any(np.diff(cuts) <= 0):
            raise DegenerateSeriesError(f"series {name!r} has tied quantiles; use fewer bins")
    elif scheme == "equal_width":
        lo, hi = float(x.min()), float(x.max())
        if hi <= lo:
            raise DegenerateSeriesError(f"series {name!r} is constant")
        cuts = lo + (hi - lo) * np.arange(1, bins) / bins
    else:
        raise ParamError("scheme", f"unknown scheme {scheme!r}; choose from {SCHEMES}")
    return cuts


def discretize(
    data: ObservationDataset,
    bins: int = DEFAULT_BINS,
    scheme: str = DEFAULT_SCHEME,
    embedding: EmbeddingSpec | None = None,
) -> SymbolicDataset:
    """Bin every series independently into ``bins`` symbols.

    Cut points are computed from the whole series. A value equal to a cut
    point goes to the lower bin, so symbols are a monotone function of value.
    ``embedding`` defaults to ``kappa=2, tau=1`` for every subsystem.
    """
    if bins < 2:
        raise ParamError("bins", "need at least two bins")
    symbols = np.empty(data.values.shape, dtype=np.int64)
    edges = []
    for i, (name, x) in enumerate(zip(data.names, data.values)):
        cuts = _cut_points(x, bins, scheme, name)
        symbols[i] = np.searchsorted(cuts, x, side="left")
        edges.append(tuple(float(c) for c in cuts))
    if embedding is None:
        embedding = EmbeddingSpec.uniform(data.m)
    return SymbolicDataset(
        data.names, symbols, (bins,) * data.m, embedding, tuple(edges), scheme
    )


def delay_vector(series: Sequence, n: int, kappa: int, tau: int) -> tuple:
    """``(y[n], y[n - tau], ..., y[n - (kappa - 1) tau])``, most recent first."""
    if kappa < 1 or tau < 1:
        raise ParamError("embedding", "kappa and tau must be >= 1")
    if n < (kappa - 1) * tau or n >= len(series):
        raise IndexError(
            f"delay vector at n={n} needs indices {n - (kappa - 1) * tau}..{n}"
            f" within a series of length {len(series)}"
        )
    return tuple(series[n - k * tau] for k in range(kappa))


def delay_embed(series, kappa: int, tau: int, first: int, last: int) -> np.ndarray:
    """Stack :func:`delay_vector` for ``n = first..last`` into a matrix.

    Row ``r`` is the delay vector at ``n = first + r``.
    """
    series = np.asarray(series)
    if first < (kappa - 1) * tau or last >= len(series) or last < first:
        raise IndexError(f"rows {first}..{last} not embeddable with kappa={kappa}, tau={tau}")
    cols = [series[first - k * tau : last - k * tau + 1] for k in range(kappa)]
    return np.stack(cols, axis=1)


def valid_transition_range(data, embedding: EmbeddingSpec) -> TransitionRange:
    """Shared range of scorable transitions for a dataset and embedding.

    ``data`` may be a dataset or a plain series length.
    """
    n = data if isinstance(data, (int, np.integer)) else data.n_steps
    first = embedding.max_offset
    if n <= first + 1:
        raise TooShortError(
            f"{n} steps cannot host an embedding reaching back {first} steps"
        )
    last = n - 2
    return TransitionRange(first, last, last - first + 1)


def write_symbolic(data: SymbolicDataset, path):
    """Write symbols as CSV plus a ``<path>.json`` sidecar with binning metadata."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(data.names)
        writer.writerows(data.symbols.T.tolist())
    meta = {
        "alphabet": list(data.alphabet),
        "bin_edges": [list(e) for e in data.bin_edges],
        "scheme": data.scheme,
        "embedding": {"kappa": list(data.embedding.kappa), "tau": list(data.embedding.tau)},
    }
    with open(f"{path}.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")


def read_symbolic(path) -> SymbolicDataset:
    obs = load_csv(path)
    with open(f"{path}.json", encoding="utf-8") as fh:
        meta = json.load(fh)
    emb = meta["embedding"]
    return SymbolicDataset(
        obs.names,
        obs.values.astype(np.int64),
        tuple(meta["alphabet"]),
        EmbeddingSpec(tuple(emb["kappa"]), tuple(emb["tau"])),
        tuple(tuple(e) for e in meta["bin_edges"]),
        meta.get("scheme", DEFAULT_SCHEME),
    )
