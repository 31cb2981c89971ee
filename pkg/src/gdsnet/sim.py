"""Ground-truth simulator for synchronous graph dynamical systems.

Every vertex carries a scalar hidden state driven by a local map, coupled to
its parents along a DAG, and emits a noisy scalar observation::

    x[i, n+1] = f_i(x[i, n], x[parents(i), n]) + process noise
    y[i, n+1] = psi_i(x[i, n+1]) + observation noise

All vertices update synchronously from the time-``n`` values.

Built-in map families (``g`` is the vertex's own local map):

``logistic``  ``g(x) = r x (1 - x)``, ``r`` in (0, 4]
``tent``      ``g(x) = mu min(x, 1 - x)``, ``mu`` in (0, 2]
``linear_ar`` ``x' = a x + sum_j eps_j x_j``, ``|a| < 1``

The bounded families (logistic, tent) use convex coupling,
``x' = (1 - sum_j eps_j) g(x) + sum_j eps_j g(x_j)``, and states are clipped
to ``[0, 1]`` after the process noise is added.

Random numbers come from one substream per vertex, keyed by the seed and the
vertex *name*, so removing an edge never perturbs the noise seen by the
vertex's ancestors and relabelling vertices does not change any series.
"""

from __future__ import annotations

import dataclasses
import hashlib
import heapq
import json
import math
import zlib
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import CycleError, DivergenceError, ParamError, SelfLoopError

MAP_FAMILIES = ("logistic", "tent", "linear_ar")
OBSERVATION_KINDS = ("identity", "affine", "tanh")
BOUNDED_FAMILIES = ("logistic", "tent")

#: Bounded-family states may overshoot [0, 1] by at most this much (before
#: clipping) without raising ``DivergenceError``.
GUARD_BAND = 0.5
#: Unbounded (linear_ar) states beyond this magnitude raise ``DivergenceError``.
LINEAR_LIMIT = 1e6

DEFAULT_BURN_IN = 1000

_MAP_DEFAULTS = {"logistic": {"r": 4.0}, "tent": {"mu": 2.0}, "linear_ar": {"a": 0.5}}
_OBS_DEFAULTS = {
    "identity": {},
    "affine": {"scale": 1.0, "offset": 0.0},
    "tanh": {"gain": 1.0, "offset": 0.0},
}


@dataclass(frozen=True)
class MapSpec:
    """Local map family of one vertex and its parameters."""

    family: str = "logistic"
    params: Mapping[str, float] = field(default_factory=dict)

    def param(self, name):
        return float(self.params.get(name, _MAP_DEFAULTS[self.family][name]))


@dataclass(frozen=True)
class ObservationSpec:
    """Observation function of one vertex."""

    kind: str = "identity"
    params: Mapping[str, float] = field(default_factory=dict)

    def param(self, name):
        return float(self.params.get(name, _OBS_DEFAULTS[self.kind][name]))


@dataclass(frozen=True)
class GdsSpec:
    """Generative description of a synchronous GDS.

    ``coupling[e]`` is the weight of ``edges[e]``, given as
    ``(source, destination)`` vertex indices. Per-vertex sequences all have
    length ``len(vertices)``. ``topo_order`` is filled in by
    :func:`validate_spec`.
    """

    vertices: tuple[str, ...]
    edges: tuple[tuple[int, int], ...] = ()
    coupling: tuple[float, ...] = ()
    maps: tuple[MapSpec, ...] = ()
    state_dim: tuple[int, ...] = ()
    process_noise_sigma: tuple[float, ...] = ()
    observations: tuple[ObservationSpec, ...] = ()
    obs_noise_sigma: tuple[float, ...] = ()
    seed: int = 0
    initial_state: tuple[float, ...] | None = None
    topo_order: tuple[int, ...] | None = field(default=None, compare=False)

    @property
    def m(self):
        return len(self.vertices)

    def parents(self, i):
        """Parent indices of vertex ``i`` with their coupling weights."""
        return [(s, w) for (s, d), w in zip(self.edges, self.coupling) if d == i]


@dataclass(frozen=True)
class Trajectory:
    """Simulated hidden states and observations, each ``(M, N)``."""

    names: tuple[str, ...]
    hidden: np.ndarray
    observed: np.ndarray
    spec_fingerprint: str

    def to_dataset(self, source="simulation"):
        from .dataset import ObservationDataset

        return ObservationDataset(self.names, self.observed, source=source)


def make_spec(
    vertices,
    edges=(),
    coupling=0.0,
    family="logistic",
    params=None,
    process_noise=0.0,
    observation="identity",
    obs_params=None,
    obs_noise=0.0,
    seed=0,
    initial_state=None,
) -> GdsSpec:
    """Build a :class:`GdsSpec`, broadcasting scalars to every vertex/edge.

    ``vertices`` may be a count (names become ``"v0"``, ``"v1"``, ...).
    ``edges`` may use vertex indices or names.
    """
    if isinstance(vertices, int):
        vertices = [f"v{i}" for i in range(vertices)]
    vertices = tuple(str(v) for v in vertices)
    m = len(vertices)
    edges = tuple(_edge_indices(vertices, e) for e in edges)

    def per(value, n, cast):
        if isinstance(value, (str, int, float)) or value is None or isinstance(value, Mapping):
            return tuple(cast(value) for _ in range(n))
        values = tuple(cast(v) for v in value)
        return values

    maps = tuple(
        MapSpec(fam, dict(p or {}))
        for fam, p in zip(per(family, m, str), per(params, m, lambda p: p))
    )
    obs = tuple(
        ObservationSpec(kind, dict(p or {}))
        for kind, p in zip(per(observation, m, str), per(obs_params, m, lambda p: p))
    )
    return GdsSpec(
        vertices=vertices,
        edges=edges,
        coupling=per(coupling, len(edges), float),
        maps=maps,
        state_dim=(1,) * m,
        process_noise_sigma=per(process_noise, m, float),
        observations=obs,
        obs_noise_sigma=per(obs_noise, m, float),
        seed=int(seed),
        initial_state=None if initial_state is None else tuple(float(v) for v in initial_state),
    )


def _edge_indices(vertices, edge):
    src, dst = edge[0], edge[1]
    out = []
    for end in (src, dst):
        if isinstance(end, str):
            if end not in vertices:
                raise ParamError("edges", f"unknown vertex {end!r}")
            out.append(vertices.index(end))
        else:
            out.append(int(end))
    return tuple(out)


def validate_spec(spec: GdsSpec) -> GdsSpec:
    """Check every invariant of ``spec`` and attach a topological order.

    Raises
    ------
    SelfLoopError
        An edge starts and ends at the same vertex.
    CycleError
        The edges contain a directed cycle.
    ParamError
        Any other out-of-range field; the message names the field.
    """
    m = spec.m
    if m < 1:
        raise ParamError("vertices", "at least one vertex is required")
    if len(set(spec.vertices)) != m:
        raise ParamError("vertices", "vertex names must be unique")
    for name, values in (
        ("maps", spec.maps),
        ("state_dim", spec.state_dim),
        ("process_noise_sigma", spec.process_noise_sigma),
        ("observations", spec.observations),
        ("obs_noise_sigma", spec.obs_noise_sigma),
    ):
        if len(values) != m:
            raise ParamError(name, f"expected {m} entries, got {len(values)}")
    if len(spec.coupling) != len(spec.edges):
        raise ParamError("coupling", "one weight per edge is required")
    if spec.initial_state is not None and len(spec.initial_state) != m:
        raise ParamError("initial_state", f"expected {m} entries")
    if spec.seed < 0:
        raise ParamError("seed", "must be a non-negative integer")

    seen = set()
    for src, dst in spec.edges:
        if not (0 <= src < m and 0 <= dst < m):
            raise ParamError("edges", f"edge ({src}, {dst}) references a missing vertex")
        if src == dst:
            raise SelfLoopError(f"self-loop on vertex {spec.vertices[src]!r}")
        if (src, dst) in seen:
            raise ParamError("edges", f"duplicate edge ({src}, {dst})")
        seen.add((src, dst))

    for e, w in enumerate(spec.coupling):
        if not 0.0 <= w < 1.0:
            raise ParamError(f"coupling[{e}]", f"weight {w} outside [0, 1)")
    for i in range(m):
        if spec.state_dim[i] != 1:
            raise ParamError(f"state_dim[{i}]", "built-in map families are one-dimensional")
        if spec.process_noise_sigma[i] < 0:
            raise ParamError(f"process_noise_sigma[{i}]", "must be >= 0")
        if spec.obs_noise_sigma[i] < 0:
            raise ParamError(f"obs_noise_sigma[{i}]", "must be >= 0")
        _check_map(spec, i)
        obs = spec.observations[i]
        if obs.kind not in OBSERVATION_KINDS:
            raise ParamError(f"observations[{i}]", f"unknown kind {obs.kind!r}")
        unknown = set(obs.params) - set(_OBS_DEFAULTS[obs.kind])
        if unknown:
            raise ParamError(f"observations[{i}]", f"unknown parameters {sorted(unknown)}")

    order = _topological_order(m, spec.edges)
    if order is None:
        raise CycleError("edges contain a directed cycle")
    return dataclasses.replace(spec, topo_order=tuple(order))


def _check_map(spec, i):
    ms = spec.maps[i]
    where = f"maps[{i}]"
    if ms.family not in MAP_FAMILIES:
        raise ParamError(where, f"unknown family {ms.family!r}")
    unknown = set(ms.params) - set(_MAP_DEFAULTS[ms.family])
    if unknown:
        raise ParamError(where, f"unknown parameters {sorted(unknown)}")
    if ms.family == "logistic" and not 0.0 < ms.param("r") <= 4.0:
        raise ParamError(f"{where}.r", "logistic rate must lie in (0, 4]")
    if ms.family == "tent" and not 0.0 < ms.param("mu") <= 2.0:
        raise ParamError(f"{where}.mu", "tent slope must lie in (0, 2]")
    if ms.family == "linear_ar" and not abs(ms.param("a")) < 1.0:
        raise ParamError(f"{where}.a", "AR coefficient must satisfy |a| < 1")
    if ms.family in BOUNDED_FAMILIES:
        total = sum(w for _, w in spec.parents(i))
        if total > 1.0:
            raise ParamError("coupling", f"incoming weights of vertex {i} sum to {total} > 1")
        if spec.initial_state is not None and not 0.0 <= spec.initial_state[i] <= 1.0:
            raise ParamError(f"initial_state[{i}]", "bounded maps start in [0, 1]")


def _topological_order(m, edges):
    """Kahn's algorithm, smallest ready index first; ``None`` on a cycle."""
    indeg = [0] * m
    children = [[] for _ in range(m)]
    for s, d in edges:
        children[s].append(d)
        indeg[d] += 1
    ready = [i for i in range(m) if indeg[i] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        v = heapq.heappop(ready)
        order.append(v)
        for c in children[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                heapq.heappush(ready, c)
    return order if len(order) == m else None


def _vertex_streams(seed, name):
    key = zlib.crc32(name.encode("utf-8"))
    init, proc, obs = np.random.SeedSequence(seed, spawn_key=(key,)).spawn(3)
    return np.random.default_rng(init), np.random.default_rng(proc), np.random.default_rng(obs)


def spec_fingerprint(spec: GdsSpec) -> str:
    blob = json.dumps(spec_to_dict(spec), sort_keys=True).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def simulate(spec: GdsSpec, n_steps: int, burn_in: int = DEFAULT_BURN_IN) -> Trajectory:
    """Run the GDS forward and record ``n_steps`` states and observations.

    The first ``burn_in`` updates are discarded. Column ``t`` of the returned
    matrices holds ``x_{burn_in + t + 1}`` (the initial state is never
    recorded). Output is a deterministic function of ``spec``.
    """
    if n_steps < 1:
        raise ParamError("n_steps", "must be >= 1")
    if burn_in < 0:
        raise ParamError("burn_in", "must be >= 0")
    spec = validate_spec(spec)
    m = spec.m
    total = burn_in + n_steps

    # Parents are summed in name order so the arithmetic does not depend on
    # how vertices happen to be indexed.
    parents = [
        sorted(spec.parents(i), key=lambda pw: spec.vertices[pw[0]]) for i in range(m)
    ]
    x = [0.0] * m
    proc_noise = []
    obs_noise = []
    for i, name in enumerate(spec.vertices):
        r_init, r_proc, r_obs = _vertex_streams(spec.seed, name)
        bounded = spec.maps[i].family in BOUNDED_FAMILIES
        if spec.initial_state is not None:
            x[i] = float(spec.initial_state[i])
        elif bounded:
            x[i] = float(r_init.uniform(0.05, 0.95))
        else:
            x[i] = float(r_init.normal())
        sp, so = spec.process_noise_sigma[i], spec.obs_noise_sigma[i]
        proc_noise.append(r_proc.normal(0.0, sp, total).tolist() if sp > 0 else None)
        obs_noise.append(r_obs.normal(0.0, so, n_steps) if so > 0 else None)

    kinds = [spec.maps[i].family for i in range(m)]
    coef = []
    for i in range(m):
        ms = spec.maps[i]
        if ms.family == "logistic":
            coef.append(ms.param("r"))
        elif ms.family == "tent":
            coef.append(ms.param("mu"))
        else:
            coef.append(ms.param("a"))
    self_weight = [1.0 - sum(w for _, w in parents[i]) for i in range(m)]

    hidden = np.empty((m, n_steps))
    for t in range(total):
        new = [0.0] * m
        for i in range(m):
            kind, c = kinds[i], coef[i]
            if kind == "logistic":
                xi = x[i]
                v = self_weight[i] * (c * xi * (1.0 - xi))
                for j, w in parents[i]:
                    xj = x[j]
                    v += w * (c * xj * (1.0 - xj))
            elif kind == "tent":
                xi = x[i]
                v = self_weight[i] * (c * min(xi, 1.0 - xi))
                for j, w in parents[i]:
                    xj = x[j]
                    v += w * (c * min(xj, 1.0 - xj))
            else:
                v = c * x[i]
                for j, w in parents[i]:
                    v += w * x[j]
            if proc_noise[i] is not None:
                v += proc_noise[i][t]
            if kind in BOUNDED_FAMILIES:
                if not (-GUARD_BAND <= v <= 1.0 + GUARD_BAND):
                    raise DivergenceError(
                        f"vertex {spec.vertices[i]!r} reached {v!r} at step {t + 1}"
                    )
                v = min(1.0, max(0.0, v))
            elif not (math.isfinite(v) and abs(v) <= LINEAR_LIMIT):
                raise DivergenceError(f"vertex {spec.vertices[i]!r} reached {v!r} at step {t + 1}")
            new[i] = v
        x = new
        if t >= burn_in:
            hidden[:, t - burn_in] = x

    observed = np.empty_like(hidden)
    for i in range(m):
        obs = spec.observations[i]
        row = hidden[i]
        if obs.kind == "identity":
            y = row.copy()
        elif obs.kind == "affine":
            y = obs.param("scale") * row + obs.param("offset")
        else:
            y = np.tanh(obs.param("gain") * row + obs.param("offset"))
        if obs_noise[i] is not None:
            y = y + obs_noise[i]
        observed[i] = y

    hidden.setflags(write=False)
    observed.setflags(write=False)
    return Trajectory(spec.vertices, hidden, observed, spec_fingerprint(spec))


# -- serialisation -----------------------------------------------------------


def spec_to_dict(spec: GdsSpec) -> dict:
    d = {
        "vertices": list(spec.vertices),
        "edges": [list(e) for e in spec.edges],
        "coupling": list(spec.coupling),
        "maps": [{"family": ms.family, **dict(ms.params)} for ms in spec.maps],
        "state_dim": list(spec.state_dim),
        "process_noise_sigma": list(spec.process_noise_sigma),
        "observations": [{"kind": o.kind, **dict(o.params)} for o in spec.observations],
        "obs_noise_sigma": list(spec.obs_noise_sigma),
        "seed": spec.seed,
    }
    if spec.initial_state is not None:
        d["initial_state"] = list(spec.initial_state)
    return d


def spec_from_dict(d: Mapping) -> GdsSpec:
    """Parse the JSON form of a spec; per-vertex scalars are broadcast.

    Missing per-vertex fields take the defaults: logistic map with ``r = 4``,
    identity observation, zero noise, ``state_dim = 1``.
    """
    from .errors import ParseError

    try:
        vertices = tuple(str(v) for v in d["vertices"])
    except (KeyError, TypeError) as exc:
        raise ParseError("spec needs a 'vertices' list") from exc
    unknown = set(d) - {
        "vertices", "edges", "coupling", "maps", "state_dim", "process_noise_sigma",
        "observations", "obs_noise_sigma", "seed", "initial_state",
    }
    if unknown:
        raise ParseError(f"unknown spec fields {sorted(unknown)}")
    m = len(vertices)
    edges = tuple(_edge_indices(vertices, e) for e in d.get("edges", []))

    def per(key, default, n=m):
        value = d.get(key, default)
        if isinstance(value, Sequence) and not isinstance(value, (str, bytes)):
            return list(value)
        return [value] * n

    maps = []
    for entry in per("maps", {"family": "logistic"}):
        if isinstance(entry, str):
            entry = {"family": entry}
        entry = dict(entry)
        fam = entry.pop("family", "logistic")
        maps.append(MapSpec(fam, {k: float(v) for k, v in entry.items()}))
    obs = []
    for entry in per("observations", {"kind": "identity"}):
        if isinstance(entry, str):
            entry = {"kind": entry}
        entry = dict(entry)
        kind = entry.pop("kind", "identity")
        obs.append(ObservationSpec(kind, {k: float(v) for k, v in entry.items()}))
    init = d.get("initial_state")
    return GdsSpec(
        vertices=vertices,
        edges=edges,
        coupling=tuple(float(w) for w in per("coupling", 0.0, len(edges))),
        maps=tuple(maps),
        state_dim=tuple(int(v) for v in per("state_dim", 1)),
        process_noise_sigma=tuple(float(v) for v in per("process_noise_sigma", 0.0)),
        observations=tuple(obs),
        obs_noise_sigma=tuple(float(v) for v in per("obs_noise_sigma", 0.0)),
        seed=int(d.get("seed", 0)),
        initial_state=None if init is None else tuple(float(v) for v in init),
    )


def load_spec(path) -> GdsSpec:
    from .errors import ParseError

    with open(path, encoding="utf-8") as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, line=exc.lineno) from exc
    return spec_from_dict(d)


def save_spec(spec: GdsSpec, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(spec_to_dict(spec), fh, indent=2)
        fh.write("\n")


def write_trajectory_csv(traj: Trajectory, path, include_hidden=False):
    """Write observations (and optionally hidden states) as CSV.

    One column per vertex, one row per time index. Hidden-state columns are
    appended after the observations and named ``<vertex>_hidden``.
    """
    import csv

    header = list(traj.names)
    cols = [traj.observed]
    if include_hidden:
        header += [f"{name}_hidden" for name in traj.names]
        cols.append(traj.hidden)
    table = np.vstack(cols).T
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in table.tolist():
            writer.writerow([repr(v) for v in row])
