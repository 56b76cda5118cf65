"""Top-down DAG testing with per-depth generalized step-up.

Depth ``d`` is tested only after depths ``1..d-1`` are decided; a node is
testable iff all of its parents were rejected. Thresholds at depth ``d``
grow with the number of rejections made so far, ``R_prev``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Mapping

import numpy as np

from .counts import EffectiveCounts
from .errors import InvalidAlpha, InvalidP, MissingPValue, OracleExtraneous, OracleIncomplete
from .graph import DagGraph
from .reshape import ReshapeFn, make_by_global, make_dagger_by
from .stepup import DepthOutcome, _level, count_rejections, min_rank, min_ranks_identity

PLAIN = "plain"
RESHAPED = "reshaped"
BY_SUGGESTED = "by-suggested"
BY_GLOBAL = "by-global"

# oracle(depth, testable node ids) -> {node id: p-value}
Oracle = Callable[[int, list], Mapping[str, float]]


@dataclass(frozen=True)
class DaggerConfig:
    """Settings for one run.

    ``reshape_spec`` is only read for the reshaped variant. It may be
    ``"by-suggested"`` (per-node BY-style measure), ``"by-global"`` (the
    global BY scaling over all N nodes), a single :class:`ReshapeFn` used at
    every depth, or a mapping ``depth -> ReshapeFn``.
    """

    alpha: float = 0.05
    variant: str = PLAIN
    reshape_spec: object = None
    depth_limit: int | None = None

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise InvalidAlpha(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if self.variant not in (PLAIN, RESHAPED):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.variant == RESHAPED and self.reshape_spec is None:
            raise ValueError("the reshaped variant needs a reshape_spec")
        if self.depth_limit is not None and self.depth_limit < 1:
            raise ValueError("depth_limit must be >= 1")


@dataclass(frozen=True)
class AuditRecord:
    node: str
    depth: int
    ell: float
    m: float
    tested: bool
    level: float
    p: float | None
    rejected: bool


@dataclass(frozen=True, eq=False)
class DaggerResult:
    rejected: frozenset
    per_depth: list
    tested_nodes: frozenset
    graph: DagGraph = field(repr=False)
    _ell: tuple = field(repr=False, default=())
    _m: tuple = field(repr=False, default=())
    _p: dict = field(repr=False, default_factory=dict)
    _level: dict = field(repr=False, default_factory=dict)

    @property
    def R_total(self) -> int:
        return sum(o.R_d for o in self.per_depth)

    @property
    def R_per_depth(self) -> tuple:
        return tuple(o.R_d for o in self.per_depth)

    @cached_property
    def audit(self) -> dict[str, AuditRecord]:
        g = self.graph
        out = {}
        for i, a in enumerate(g.ids):
            out[a] = AuditRecord(
                node=a,
                depth=g.depth_of[i],
                ell=self._ell[i],
                m=self._m[i],
                tested=a in self.tested_nodes,
                level=self._level.get(a, 0.0),
                p=self._p.get(a),
                rejected=a in self.rejected,
            )
        return out

    def same_decisions(self, other: DaggerResult) -> bool:
        return (
            self.rejected == other.rejected
            and self.tested_nodes == other.tested_nodes
            and self.R_per_depth == other.R_per_depth
        )


def _reshapes(cfg: DaggerConfig, graph: DagGraph, d: int, m_vals) -> list[ReshapeFn] | None:
    if cfg.variant == PLAIN:
        return None
    spec = cfg.reshape_spec
    if spec == BY_SUGGESTED:
        n_upto = graph.n_upto[d - 1]
        return [make_dagger_by(float(mi), d, n_upto) for mi in m_vals]
    if spec == BY_GLOBAL:
        fn = make_by_global(graph.N)
    elif isinstance(spec, ReshapeFn):
        fn = spec
    elif isinstance(spec, Mapping):
        fn = spec[d]
    else:
        raise ValueError(f"unsupported reshape_spec {spec!r}")
    return [fn] * len(m_vals)


def _run(graph: DagGraph, counts: EffectiveCounts, cfg: DaggerConfig, fetch) -> DaggerResult:
    ids, ch = graph.ids, graph.ch
    L = counts.total_leaves
    ell = np.array([float(x) for x in counts.ell_arr])
    m = np.array([float(x) for x in counts.m_arr])
    c_all = cfg.alpha * ell / L
    remaining = [len(p) for p in graph.par]
    D = graph.D if cfg.depth_limit is None else min(cfg.depth_limit, graph.D)

    rejected: list[int] = []
    tested: list[int] = []
    per_depth: list[DepthOutcome] = []
    p_seen: dict[str, float] = {}
    level_seen: dict[str, float] = {}
    R_prev = 0
    for d in range(1, D + 1):
        layer = graph.layers[d - 1]
        K = len(layer)
        front = [i for i in layer if remaining[i] == 0]
        p = fetch(d, front)
        idx = np.array(front, dtype=np.int64)
        c, mm = c_all[idx], m[idx]
        reshapes = _reshapes(cfg, graph, d, mm)
        r_eval = 1
        if reshapes is None:
            ranks = min_ranks_identity(p, c, mm, R_prev, K)
            R_d = count_rejections(ranks, K)
            r_eval = max(R_d, 1)
            lv = c * (mm + (r_eval + R_prev - 1)) / mm
        else:
            ranks = np.array(
                [min_rank(pi, ci, mi, R_prev, K, fn) for pi, ci, mi, fn in zip(p, c, mm, reshapes)],
                dtype=np.int64,
            )
            R_d = count_rejections(ranks, K)
            r_eval = max(R_d, 1)
            lv = [_level(ci, mi, r_eval, R_prev, fn) for ci, mi, fn in zip(c, mm, reshapes)]

        levels = dict.fromkeys((ids[i] for i in layer), 0.0)
        depth_rej = []
        for k, i in enumerate(front):
            a = ids[i]
            levels[a] = float(lv[k])
            p_seen[a] = float(p[k])
            if ranks[k] <= R_d:
                depth_rej.append(i)
        level_seen.update(levels)
        for i in depth_rej:
            for j in ch[i]:
                remaining[j] -= 1
        tested.extend(front)
        rejected.extend(depth_rej)
        per_depth.append(
            DepthOutcome(R_d=R_d, rejected=frozenset(ids[i] for i in depth_rej), levels=levels)
        )
        R_prev += R_d

    return DaggerResult(
        rejected=frozenset(ids[i] for i in rejected),
        per_depth=per_depth,
        tested_nodes=frozenset(ids[i] for i in tested),
        graph=graph,
        _ell=tuple(float(x) for x in ell),
        _m=tuple(float(x) for x in m),
        _p=p_seen,
        _level=level_seen,
    )


def _checked(a, x) -> float:
    x = float(x)
    if not (0.0 <= x <= 1.0) or math.isnan(x):
        raise InvalidP(f"p-value {x!r} for node {a!r} outside [0, 1]")
    return x


def run_batch(graph: DagGraph, counts: EffectiveCounts, pvalues: Mapping[str, float], cfg: DaggerConfig) -> DaggerResult:
    """Run with every p-value known up front.

    Values of nodes that never become testable are not read.
    """
    ids = graph.ids

    def fetch(d, front):
        out = np.empty(len(front))
        for k, i in enumerate(front):
            a = ids[i]
            try:
                out[k] = _checked(a, pvalues[a])
            except KeyError:
                raise MissingPValue(a) from None
        return out

    return _run(graph, counts, cfg, fetch)


def run_sequential(graph: DagGraph, counts: EffectiveCounts, oracle: Oracle, cfg: DaggerConfig) -> DaggerResult:
    """Run while requesting p-values one depth at a time.

    ``oracle(d, nodes)`` is called exactly once per depth, with the sorted
    ids of the testable nodes at that depth (possibly empty), and must
    return a p-value for each of them and nothing else.
    """
    ids = graph.ids

    def fetch(d, front):
        asked = [ids[i] for i in front]
        got = oracle(d, list(asked))
        missing = set(asked) - got.keys()
        if missing:
            raise OracleIncomplete(f"oracle gave no p-value for {sorted(missing)!r} at depth {d}")
        extra = got.keys() - set(asked)
        if extra:
            raise OracleExtraneous(f"oracle returned unrequested nodes {sorted(extra)!r} at depth {d}")
        return np.array([_checked(a, got[a]) for a in asked])

    return _run(graph, counts, cfg, fetch)


def fdp_power(rejected: Iterable[str], nulls: Iterable[str], nodes: Iterable[str]) -> tuple[float, float]:
    """False discovery proportion (0/0 taken as 0) and true-positive rate."""
    rejected = set(rejected)
    nulls = set(nulls)
    non_nulls = set(nodes) - nulls
    fdp = len(rejected & nulls) / max(len(rejected), 1)
    power = len(rejected & non_nulls) / len(non_nulls) if non_nulls else 0.0
    return fdp, power


def fdp_against_truth(result: DaggerResult, nulls: Iterable[str]) -> dict[str, float]:
    fdp, power = fdp_power(result.rejected, nulls, result.graph.ids)
    return {"fdp": fdp, "power": power}
