"""Monte-Carlo harness: random layered DAGs, truth assignment, p-value
models and replication-averaged FDR / power.

Randomness comes from numpy ``SeedSequence`` streams keyed by
``(seed, purpose, replication)``, so every replication is reproducible on
its own and results do not depend on how replications are scheduled.
Methods evaluated under the same seed see identical graphs, truths and
p-values.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.special import ndtr, ndtri

from . import baselines
from .combine import CombineMethod, propagate_intersection
from .counts import compute_effective_counts
from .errors import ConfigError, InsufficientParents
from .graph import DagGraph, build_graph
from .io import fmt
from .procedure import BY_SUGGESTED, PLAIN, RESHAPED, DaggerConfig, fdp_power, run_batch

GAUSSIAN = "gaussian"
SIMES_PROPAGATED = "simes-propagated"

METHODS = ("dagger-plain", "dagger-reshaped", "bh", "by")

# stream purposes
_GRAPH, _TRUTH, _PVALUES = 0, 1, 2

# preset layered shapes: (layer sizes, parents per node for layers 2..)
SHAPES = {
    "shallow": ((250, 250), (None, 2)),
    "deep": ((125, 125, 125, 125), (None, 2, 2, 2)),
    "diamond": ((125, 250, 125), (None, 1, 2)),
    "hourglass": ((200, 100, 200), (None, 2, 1)),
    "mountain": ((83, 166, 249), (None, 1, 1)),
    "valley": ((249, 166, 83), (None, 2, 2)),
    "two-layer": ((100, 100), (None, 2)),
}


def stream(seed: int, purpose: int, rep: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(purpose, rep))
    return np.random.Generator(np.random.PCG64(ss))


def _parents_list(layers: Sequence[int], k) -> list:
    if isinstance(k, int):
        return [None] + [k] * (len(layers) - 1)
    k = list(k)
    if len(k) == len(layers) - 1:
        k = [None] + k
    if len(k) != len(layers):
        raise ConfigError("parents_per_node must give one entry per layer")
    return k


def _distinct_draws(rng: np.random.Generator, n_rows: int, n_choices: int, k: int) -> np.ndarray:
    """``n_rows`` sorted rows of ``k`` distinct integers from ``range(n_choices)``."""
    if 2 * k > n_choices:
        keys = rng.random((n_rows, n_choices))
        return np.sort(np.argsort(keys, axis=1)[:, :k], axis=1)
    out = np.sort(rng.integers(0, n_choices, size=(n_rows, k)), axis=1)
    while True:
        bad = np.nonzero((np.diff(out, axis=1) == 0).any(axis=1))[0]
        if bad.size == 0:
            return out
        out[bad] = np.sort(rng.integers(0, n_choices, size=(bad.size, k)), axis=1)


def layered_node_id(d: int, i: int, D: int, width: int) -> str:
    return f"d{d:0{len(str(D))}d}n{i:0{width}d}"


def gen_layered_dag(layers: Sequence[int], parents_per_node, rng: np.random.Generator) -> DagGraph:
    """Random layered DAG: each node below the top layer draws ``k`` distinct
    parents uniformly from the layer directly above it."""
    layers = [int(n) for n in layers]
    if not layers or any(n < 1 for n in layers):
        raise ConfigError("layers must be a nonempty list of positive sizes")
    ks = _parents_list(layers, parents_per_node)
    D = len(layers)
    width = len(str(max(layers) - 1))
    names = [[layered_node_id(d + 1, i, D, width) for i in range(n)] for d, n in enumerate(layers)]
    edges = []
    for d in range(1, D):
        k = ks[d]
        if k is None or k < 1 or k > layers[d - 1]:
            raise InsufficientParents(
                f"layer {d + 1} wants {k} distinct parents but layer {d} has {layers[d - 1]} nodes"
            )
        draws = _distinct_draws(rng, layers[d], layers[d - 1], k)
        above, here = names[d - 1], names[d]
        for i, row in enumerate(draws.tolist()):
            child = here[i]
            edges.extend((above[j], child) for j in row)
    return build_graph(edges, nodes=names[0])


def assign_truth(graph: DagGraph, pi0_leaf: float, rng: np.random.Generator) -> frozenset[str]:
    """Leaves are null independently with probability ``pi0_leaf``; an
    internal node is null iff all its children are."""
    if not (0.0 <= pi0_leaf <= 1.0):
        raise ConfigError("pi0_leaf must lie in [0, 1]")
    null = [False] * graph.N
    draws = rng.random(len(graph.leaf_handles))
    for i, u in zip(graph.leaf_handles, draws):
        null[i] = bool(u < pi0_leaf)
    ch = graph.ch
    for i in reversed(graph.topo):
        if ch[i]:
            null[i] = all(null[j] for j in ch[i])
    return frozenset(a for a, z in zip(graph.ids, null) if z)


def _mu_lookup(mu_by_depth, D: int) -> list[float]:
    if isinstance(mu_by_depth, Mapping):
        try:
            return [float(mu_by_depth[d]) for d in range(1, D + 1)]
        except KeyError as exc:
            raise ConfigError(f"mu_by_depth has no entry for depth {exc.args[0]}") from None
    mus = [float(x) for x in mu_by_depth]
    if len(mus) < D:
        raise ConfigError(f"mu_by_depth covers {len(mus)} depths, graph has {D}")
    return mus


def linear_mu_schedule(D: int, deepest: float = 1.0, step: float = 0.3) -> dict[int, float]:
    """Signal ``deepest`` at depth D, growing by ``step`` per level upward."""
    return {d: deepest + step * (D - d) for d in range(1, D + 1)}


def _gaussian_p(mu: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    # X = mu + Z with Z drawn by inversion; p = 1 - Phi(X)
    u = rng.random(mu.shape[0])
    return ndtr(-(mu + ndtri(u)))


def gen_pvalues_gaussian(graph: DagGraph, nulls: Iterable[str], mu_by_depth, rng: np.random.Generator) -> dict[str, float]:
    mus = _mu_lookup(mu_by_depth, graph.D)
    nulls = set(nulls)
    mu = np.array([0.0 if a in nulls else mus[d - 1] for a, d in zip(graph.ids, graph.depth_of)])
    return dict(zip(graph.ids, _gaussian_p(mu, rng).tolist()))


def gen_pvalues_simes(graph: DagGraph, nulls: Iterable[str], mu_leaf: float, rng: np.random.Generator) -> dict[str, float]:
    """Gaussian leaves; every other node gets the Simes p-value of its children."""
    nulls = set(nulls)
    leaves = [graph.ids[i] for i in graph.leaf_handles]
    mu = np.array([0.0 if a in nulls else float(mu_leaf) for a in leaves])
    leaf_p = dict(zip(leaves, _gaussian_p(mu, rng).tolist()))
    return propagate_intersection(graph, leaf_p, CombineMethod())


@dataclass(frozen=True)
class SimConfig:
    layers: tuple = (125, 250, 125)
    parents_per_node: object = (None, 1, 2)
    pi0_leaf: float = 0.5
    pvalue_model: str = GAUSSIAN
    mu_by_depth: object = None
    mu_leaf: float = 2.0
    alpha: float = 0.2
    reps: int = 100
    seed: int = 0
    method: str = "dagger-plain"
    redraw_graph: bool = False
    depth_limit: int | None = None
    keep_per_rep: bool = False

    def __post_init__(self):
        if not self.layers:
            raise ConfigError("layers must be nonempty")
        if self.reps < 1:
            raise ConfigError("reps must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.pvalue_model not in (GAUSSIAN, SIMES_PROPAGATED):
            raise ConfigError(f"unknown p-value model {self.pvalue_model!r}")
        if not (0.0 <= self.pi0_leaf <= 1.0):
            raise ConfigError("pi0_leaf must lie in [0, 1]")
        if not (0.0 < self.alpha < 1.0):
            raise ConfigError("alpha must lie in (0, 1)")
        ks = _parents_list(self.layers, self.parents_per_node)
        for d in range(1, len(self.layers)):
            if ks[d] is None or not (1 <= ks[d] <= self.layers[d - 1]):
                raise ConfigError(f"parents_per_node for layer {d + 1} must be in 1..{self.layers[d - 1]}")

    def mu_schedule(self) -> dict[int, float]:
        D = len(self.layers)
        if self.mu_by_depth is None:
            return linear_mu_schedule(D)
        return dict(enumerate(_mu_lookup(self.mu_by_depth, D), start=1))


@dataclass(frozen=True)
class SimResult:
    mean_fdp: float
    se_fdp: float
    mean_power: float
    se_power: float
    reps: int
    per_rep: list | None = field(default=None, repr=False)


def _graph_for(cfg: SimConfig, rep: int) -> DagGraph:
    return gen_layered_dag(cfg.layers, cfg.parents_per_node, stream(cfg.seed, _GRAPH, rep if cfg.redraw_graph else 0))


def _reject(method: str, graph: DagGraph, counts, p: dict, cfg: SimConfig) -> frozenset:
    if method.startswith("dagger"):
        variant = PLAIN if method == "dagger-plain" else RESHAPED
        dcfg = DaggerConfig(
            alpha=cfg.alpha,
            variant=variant,
            reshape_spec=BY_SUGGESTED if variant == RESHAPED else None,
            depth_limit=cfg.depth_limit,
        )
        return run_batch(graph, counts, p, dcfg).rejected
    ids = graph.ids
    if cfg.depth_limit is not None:
        ids = tuple(a for a, d in zip(ids, graph.depth_of) if d <= cfg.depth_limit)
    vals = [p[a] for a in ids]
    picked = baselines.bh(vals, cfg.alpha) if method == "bh" else baselines.by(vals, cfg.alpha)
    return frozenset(ids[i] for i in picked)


def simulate_rep(cfg: SimConfig, rep: int, graph: DagGraph | None = None, counts=None) -> tuple[float, float]:
    """One replication: truth, p-values, rejections, (fdp, power)."""
    if graph is None:
        graph = _graph_for(cfg, rep)
        counts = None
    if counts is None:
        counts = compute_effective_counts(graph)
    nulls = assign_truth(graph, cfg.pi0_leaf, stream(cfg.seed, _TRUTH, rep))
    rng = stream(cfg.seed, _PVALUES, rep)
    if cfg.pvalue_model == GAUSSIAN:
        p = gen_pvalues_gaussian(graph, nulls, cfg.mu_schedule(), rng)
    else:
        p = gen_pvalues_simes(graph, nulls, cfg.mu_leaf, rng)
    rejected = _reject(cfg.method, graph, counts, p, cfg)
    nodes = graph.ids
    if cfg.depth_limit is not None:
        nodes = [a for a, d in zip(graph.ids, graph.depth_of) if d <= cfg.depth_limit]
        nulls = nulls & set(nodes)
    return fdp_power(rejected, nulls, nodes)


def _run_reps(cfg: SimConfig, reps: Sequence[int]) -> list[tuple[float, float]]:
    graph = counts = None
    if not cfg.redraw_graph:
        graph = _graph_for(cfg, 0)
        counts = compute_effective_counts(graph)
    return [simulate_rep(cfg, r, graph, counts) for r in reps]


def _mean_se(xs: list[float]) -> tuple[float, float]:
    n = len(xs)
    mean = math.fsum(xs) / n
    if n == 1:
        return mean, 0.0
    var = math.fsum((x - mean) ** 2 for x in xs) / (n - 1)
    return mean, math.sqrt(var / n)


def run_experiment(cfg: SimConfig, workers: int = 1) -> SimResult:
    """Average fdp and power over ``cfg.reps`` replications.

    With ``workers > 1`` replications are dealt round-robin to worker
    processes; results are reassembled in replication order.
    """
    reps = list(range(cfg.reps))
    if workers > 1 and cfg.reps > 1:
        chunks = [reps[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_reps, [cfg] * len(chunks), chunks))
        by_rep = {}
        for chunk, part in zip(chunks, parts):
            by_rep.update(zip(chunk, part))
        outcomes = [by_rep[r] for r in reps]
    else:
        outcomes = _run_reps(cfg, reps)
    fdps = [o[0] for o in outcomes]
    powers = [o[1] for o in outcomes]
    mf, sf = _mean_se(fdps)
    mp, sp = _mean_se(powers)
    return SimResult(mf, sf, mp, sp, cfg.reps, outcomes if cfg.keep_per_rep else None)


CSV_COLUMNS = ("pi0_leaf", "method", "alpha", "mean_fdp", "se_fdp", "mean_power", "se_power", "reps", "seed")


def run_grid(cfg: SimConfig, pi0_grid: Iterable[float], methods: Iterable[str], workers: int = 1):
    """Yield ``(pi0, method, SimResult)`` over the grid, methods inner."""
    methods = list(methods)
    for pi0 in pi0_grid:
        for method in methods:
            yield pi0, method, run_experiment(replace(cfg, pi0_leaf=pi0, method=method), workers)


def grid_csv(cfg: SimConfig, pi0_grid, methods, workers: int = 1) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for pi0, method, res in run_grid(cfg, pi0_grid, methods, workers):
        w.writerow([
            fmt(pi0), method, fmt(cfg.alpha), fmt(res.mean_fdp), fmt(res.se_fdp),
            fmt(res.mean_power), fmt(res.se_power), res.reps, cfg.seed,
        ])
    return buf.getvalue()
