"""Effective node/leaf counts by bottom-up water-filling.

Every leaf starts with one unit of mass. Walking the DAG from the leaves
upward, each node splits what it holds evenly among its parents; ``ell``
accumulates leaf mass only, ``m`` additionally adds one unit per node.
At the roots the mass is conserved: the root ``ell`` values sum to the
number of leaves and the root ``m`` values sum to the number of nodes.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .errors import RationalOverflow
from .graph import DagGraph

FLOAT = "float"
EXACT = "exact-rational"

CONSERVATION_TOL = 1e-9

# denominators are products of parent-set sizes; beyond this the exact
# mode stops being a cheap test aid
MAX_DENOMINATOR_BITS = 4096


@dataclass(frozen=True)
class EffectiveCounts:
    """Per-handle arrays plus id-keyed views.

    ``m_arr[i]`` / ``ell_arr[i]`` are indexed by the graph's integer handles.
    In exact mode they hold :class:`fractions.Fraction`.
    """

    m_arr: tuple
    ell_arr: tuple
    total_leaves: int
    total_nodes: int
    mode: str
    ids: tuple

    @property
    def L(self) -> int:
        return self.total_leaves

    @property
    def N(self) -> int:
        return self.total_nodes

    @property
    def m(self) -> dict:
        return dict(zip(self.ids, self.m_arr))

    @property
    def ell(self) -> dict:
        return dict(zip(self.ids, self.ell_arr))


@dataclass(frozen=True)
class ConservationCheck:
    ok: bool
    max_abs_error: float


@dataclass(frozen=True)
class EffectiveDiscoveries:
    v_sub: dict
    r_sub: dict


def _water_fill(graph: DagGraph, base_m, base_ell, one, exact: bool):
    """Shared bottom-up pass; ``base_*`` give each node's own contribution."""
    n = graph.N
    par, ch = graph.par, graph.ch
    npar = [len(p) for p in par]
    m = [None] * n
    ell = [None] * n
    for i in reversed(graph.topo):
        cs = ch[i]
        if not cs:
            m[i] = base_m(i)
            ell[i] = base_ell(i)
            continue
        acc_m = base_m(i) if base_m is not None else one
        acc_l = 0 * one
        # children are sorted by id, which fixes the summation order
        for j in cs:
            k = npar[j]
            acc_m += m[j] / k
            acc_l += ell[j] / k
        if exact and (
            acc_m.denominator.bit_length() > MAX_DENOMINATOR_BITS
            or acc_l.denominator.bit_length() > MAX_DENOMINATOR_BITS
        ):
            raise RationalOverflow(
                f"denominator exceeds {MAX_DENOMINATOR_BITS} bits at node {graph.ids[i]!r}; "
                "use float mode"
            )
        m[i] = acc_m
        ell[i] = acc_l
    return m, ell


def compute_effective_counts(graph: DagGraph, mode: str = FLOAT) -> EffectiveCounts:
    if mode not in (FLOAT, EXACT):
        raise ValueError(f"unknown mode {mode!r}")
    exact = mode == EXACT
    one = Fraction(1) if exact else 1.0
    m, ell = _water_fill(graph, lambda i: one, lambda i: one, one, exact)
    return EffectiveCounts(
        m_arr=tuple(m),
        ell_arr=tuple(ell),
        total_leaves=len(graph.leaf_handles),
        total_nodes=graph.N,
        mode=mode,
        ids=graph.ids,
    )


def verify_conservation(counts: EffectiveCounts, graph: DagGraph, tol: float | None = None) -> ConservationCheck:
    """Check that root masses add up to the leaf and node totals."""
    if tol is None:
        tol = 0 if counts.mode == EXACT else CONSERVATION_TOL
    roots = [i for i, p in enumerate(graph.par) if not p]
    zero = Fraction(0) if counts.mode == EXACT else 0.0
    sum_l = sum((counts.ell_arr[i] for i in roots), zero)
    sum_m = sum((counts.m_arr[i] for i in roots), zero)
    err = max(abs(sum_l - counts.total_leaves), abs(sum_m - counts.total_nodes))
    return ConservationCheck(ok=err <= tol, max_abs_error=float(err))


def effective_discoveries(
    graph: DagGraph,
    counts: EffectiveCounts | None,
    rejected: Iterable[str],
    nulls: Iterable[str],
) -> EffectiveDiscoveries:
    """Effective (false) discovery mass in each sub-DAG.

    Same recursion as the node counts, except a node contributes one unit
    only when it is rejected (for ``r_sub``) or rejected and null (``v_sub``).
    Arithmetic follows ``counts.mode`` when counts are given.
    """
    exact = counts is not None and counts.mode == EXACT
    one = Fraction(1) if exact else 1.0
    zero = 0 * one
    rej = set(graph.handles(rejected))
    false = rej & set(graph.handles(nulls))
    r, _ = _water_fill(graph, lambda i: one if i in rej else zero, lambda i: zero, zero, exact)
    v, _ = _water_fill(graph, lambda i: one if i in false else zero, lambda i: zero, zero, exact)
    ids = graph.ids
    return EffectiveDiscoveries(v_sub=dict(zip(ids, v)), r_sub=dict(zip(ids, r)))


def discovery_identity_error(graph: DagGraph, disc: EffectiveDiscoveries, rejected, nulls) -> float:
    """Largest gap between root sums of ``v_sub``/``r_sub`` and the raw V, R."""
    rejected = set(rejected)
    V = len(rejected & set(nulls))
    R = len(rejected)
    roots = graph.roots
    sv = sum(disc.v_sub[a] for a in roots)
    sr = sum(disc.r_sub[a] for a in roots)
    return float(max(abs(sv - V), abs(sr - R)))
