"""Hypothesis DAGs: construction, validation and depth/frontier queries.

Nodes are opaque string ids. Internally every node gets a dense integer
handle equal to its rank in sorted-id order, so iterating handles in
increasing order is the same as iterating ids lexicographically.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from .errors import (
    CycleError,
    DepthOutOfRange,
    DuplicateEdgeError,
    InvalidNodeId,
    RedundantEdgeError,
)

STRICT = "strict"
STRIP_REDUNDANT = "strip-redundant"
POLICIES = (STRICT, STRIP_REDUNDANT)

Edge = tuple[str, str]


class DagGraph:
    """Immutable, validated and transitively reduced DAG.

    Do not construct directly; use :func:`build_graph`.

    Attributes
    ----------
    ids : tuple of str
        Node ids in sorted order; position is the integer handle.
    index : dict
        id -> handle.
    par, ch : tuple of tuple of int
        Parent / child handles of each node, sorted.
    depth_of : tuple of int
        Depth of each handle (roots have depth 1).
    layers : tuple of tuple of int
        ``layers[d - 1]`` holds the handles at depth ``d``.
    topo : tuple of int
        Topological order, ties broken by id.
    removed_edges : tuple of Edge
        Edges dropped by the ``strip-redundant`` policy.
    """

    def __init__(self, ids, par, ch, depth_of, layers, topo, removed_edges=()):
        self.ids = ids
        self.index = {a: i for i, a in enumerate(ids)}
        self.par = par
        self.ch = ch
        self.depth_of = depth_of
        self.layers = layers
        self.topo = topo
        self.removed_edges = tuple(removed_edges)

    def __repr__(self):
        return f"DagGraph(N={self.N}, D={self.D}, edges={self.n_edges})"

    def __eq__(self, other):
        if not isinstance(other, DagGraph):
            return NotImplemented
        return self.ids == other.ids and self.ch == other.ch

    def __hash__(self):
        return hash((self.ids, self.ch))

    @property
    def N(self) -> int:
        return len(self.ids)

    @property
    def D(self) -> int:
        return len(self.layers)

    @property
    def node_ids(self) -> list[str]:
        return list(self.ids)

    @cached_property
    def n_edges(self) -> int:
        return sum(len(c) for c in self.ch)

    @cached_property
    def parents(self) -> dict[str, frozenset[str]]:
        ids = self.ids
        return {ids[i]: frozenset(ids[j] for j in ps) for i, ps in enumerate(self.par)}

    @cached_property
    def children(self) -> dict[str, frozenset[str]]:
        ids = self.ids
        return {ids[i]: frozenset(ids[j] for j in cs) for i, cs in enumerate(self.ch)}

    @cached_property
    def depth(self) -> dict[str, int]:
        return dict(zip(self.ids, self.depth_of))

    @cached_property
    def depth_partition(self) -> list[frozenset[str]]:
        ids = self.ids
        return [frozenset(ids[i] for i in layer) for layer in self.layers]

    @cached_property
    def roots(self) -> frozenset[str]:
        return frozenset(self.ids[i] for i, ps in enumerate(self.par) if not ps)

    @cached_property
    def leaves(self) -> frozenset[str]:
        return frozenset(self.ids[i] for i, cs in enumerate(self.ch) if not cs)

    @cached_property
    def leaf_handles(self) -> tuple[int, ...]:
        return tuple(i for i, cs in enumerate(self.ch) if not cs)

    @cached_property
    def n_upto(self) -> tuple[int, ...]:
        """``n_upto[d - 1]`` is the number of nodes with depth <= d."""
        out, total = [], 0
        for layer in self.layers:
            total += len(layer)
            out.append(total)
        return tuple(out)

    def edges(self) -> list[Edge]:
        ids = self.ids
        return [(ids[i], ids[j]) for i, cs in enumerate(self.ch) for j in cs]

    def handles(self, nodes: Iterable[str]) -> list[int]:
        index = self.index
        try:
            return [index[a] for a in nodes]
        except KeyError as exc:
            raise InvalidNodeId(f"unknown node {exc.args[0]!r}") from None


@dataclass
class ValidationReport:
    cycles_found: list[list[str]] = field(default_factory=list)
    redundant_edges: list[Edge] = field(default_factory=list)
    duplicate_edges: list[Edge] = field(default_factory=list)
    isolated_node_count: int = 0

    @property
    def is_valid(self) -> bool:
        return not (self.cycles_found or self.redundant_edges or self.duplicate_edges)

    def lines(self) -> list[str]:
        out = [f"valid\t{int(self.is_valid)}"]
        for cyc in self.cycles_found:
            out.append("cycle\t" + " -> ".join(cyc + cyc[:1]))
        for u, v in self.redundant_edges:
            out.append(f"redundant\t{u}\t{v}")
        for u, v in self.duplicate_edges:
            out.append(f"duplicate\t{u}\t{v}")
        out.append(f"isolated\t{self.isolated_node_count}")
        return out


def _check_id(a) -> None:
    if not isinstance(a, str) or not a:
        raise InvalidNodeId(f"node ids must be nonempty strings, got {a!r}")
    if "\t" in a or "\n" in a or "\r" in a:
        raise InvalidNodeId(f"node id {a!r} contains a tab or newline")


def _index_edges(edges: Sequence[Edge], nodes: Iterable[str] | None):
    """Sorted ids, id->handle map, deduplicated adjacency and duplicates found."""
    names = set()
    for u, v in edges:
        _check_id(u)
        _check_id(v)
        names.add(u)
        names.add(v)
    declared = set()
    if nodes is not None:
        for a in nodes:
            _check_id(a)
            declared.add(a)
    names |= declared
    ids = tuple(sorted(names))
    index = {a: i for i, a in enumerate(ids)}
    ch_sets: list[set[int]] = [set() for _ in ids]
    duplicates: list[Edge] = []
    for u, v in edges:
        s = ch_sets[index[u]]
        j = index[v]
        if j in s:
            duplicates.append((u, v))
        else:
            s.add(j)
    touched = {a for e in edges for a in e}
    isolated = len(declared - touched)
    return ids, index, ch_sets, duplicates, isolated


def _kahn(n: int, ch: Sequence[Sequence[int]], indeg: list[int]) -> list[int]:
    """Topological order with smallest-handle tie-break; short if cyclic."""
    indeg = list(indeg)
    heap = [i for i in range(n) if indeg[i] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        i = heapq.heappop(heap)
        order.append(i)
        for j in ch[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                heapq.heappush(heap, j)
    return order


def _cycle_from_leftover(ids, par, leftover: set[int]) -> list[str]:
    # every leftover node keeps a leftover parent, so walking parents must loop
    start = min(leftover)
    seen: dict[int, int] = {}
    walk = []
    i = start
    while i not in seen:
        seen[i] = len(walk)
        walk.append(i)
        i = min(j for j in par[i] if j in leftover)
    cyc = walk[seen[i]:]
    cyc.reverse()
    # rotate so the smallest id leads
    k = cyc.index(min(cyc))
    cyc = cyc[k:] + cyc[:k]
    return [ids[j] for j in cyc]


def _depths(order, par, n) -> list[int]:
    depth = [1] * n
    for i in order:
        ps = par[i]
        if ps:
            depth[i] = 1 + max(depth[j] for j in ps)
    return depth


def _redundant_edges(ch, depth) -> list[tuple[int, int, list[int]]]:
    """Edges (u, v) implied by a longer path, each with a witness path.

    A path of length >= 2 from u to v forces depth(v) >= depth(u) + 2, so
    edges between adjacent depths never need a search.
    """
    found = []
    for u, cs in enumerate(ch):
        du = depth[u]
        for v in cs:
            dv = depth[v]
            if dv <= du + 1:
                continue
            pred = {}
            stack = [w for w in reversed(cs) if w != v and depth[w] < dv]
            for w in stack:
                pred[w] = u
            hit = None
            while stack:
                w = stack.pop()
                if v in ch[w]:
                    hit = w
                    break
                for x in reversed(ch[w]):
                    if x not in pred and depth[x] < dv:
                        pred[x] = w
                        stack.append(x)
            if hit is not None:
                path = [v, hit]
                while path[-1] != u:
                    path.append(pred[path[-1]])
                path.reverse()
                found.append((u, v, path))
    return found


def build_graph(
    edges: Iterable[Edge],
    policy: str = STRICT,
    nodes: Iterable[str] | None = None,
) -> DagGraph:
    """Build a validated DAG from ``(parent, child)`` pairs.

    ``nodes`` may declare extra (isolated) nodes; an isolated node is a root
    and a leaf at depth 1. Under ``strict`` any transitively implied edge is
    an error; under ``strip-redundant`` such edges are dropped and listed in
    ``graph.removed_edges``.
    """
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}")
    edges = [tuple(e) for e in edges]
    if nodes is not None:
        nodes = list(nodes)
    if not edges and not nodes:
        raise InvalidNodeId("graph needs at least one edge or declared node")
    for u, v in edges:
        if u == v:
            _check_id(u)
            raise CycleError([u])
    ids, _, ch_sets, duplicates, _ = _index_edges(edges, nodes)
    if duplicates:
        raise DuplicateEdgeError(duplicates[0])
    n = len(ids)
    ch = [sorted(s) for s in ch_sets]
    par: list[list[int]] = [[] for _ in range(n)]
    for i, cs in enumerate(ch):
        for j in cs:
            par[j].append(i)
    order = _kahn(n, ch, [len(p) for p in par])
    if len(order) < n:
        leftover = set(range(n)) - set(order)
        raise CycleError(_cycle_from_leftover(ids, par, leftover))
    depth = _depths(order, par, n)

    removed: list[Edge] = []
    redundant = _redundant_edges(ch, depth)
    if redundant:
        if policy == STRICT:
            u, v, path = redundant[0]
            raise RedundantEdgeError((ids[u], ids[v]), [ids[k] for k in path])
        drop = {(u, v) for u, v, _ in redundant}
        ch = [[j for j in cs if (i, j) not in drop] for i, cs in enumerate(ch)]
        par = [[i for i in ps if (i, j) not in drop] for j, ps in enumerate(par)]
        removed = sorted((ids[u], ids[v]) for u, v in drop)
        # depths are unchanged: every dropped edge had a longer parallel path
        order = _kahn(n, ch, [len(p) for p in par])

    D = max(depth)
    layers: list[list[int]] = [[] for _ in range(D)]
    for i in range(n):
        layers[depth[i] - 1].append(i)
    return DagGraph(
        ids=ids,
        par=tuple(tuple(p) for p in par),
        ch=tuple(tuple(c) for c in ch),
        depth_of=tuple(depth),
        layers=tuple(tuple(layer) for layer in layers),
        topo=tuple(order),
        removed_edges=removed,
    )


def _sccs(n: int, ch: Sequence[Sequence[int]]) -> list[list[int]]:
    """Tarjan's algorithm, iterative."""
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    out = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, k = work[-1]
            if k == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            if k < len(ch[v]):
                work[-1] = (v, k + 1)
                w = ch[v][k]
                if index[w] == -1:
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                out.append(sorted(comp))
    return out


def _cycle_in_component(comp: list[int], ch) -> list[int]:
    members = set(comp)
    s = comp[0]
    pred = {s: None}
    queue = deque([s])
    while queue:
        w = queue.popleft()
        for x in ch[w]:
            if x == s:
                path = [w]
                while pred[path[-1]] is not None:
                    path.append(pred[path[-1]])
                path.reverse()
                return path
            if x in members and x not in pred:
                pred[x] = w
                queue.append(x)
    raise AssertionError("strongly connected component without a cycle")


def validate(edges: Iterable[Edge], nodes: Iterable[str] | None = None) -> ValidationReport:
    """Collect every structural problem of an edge list without raising."""
    edges = [tuple(e) for e in edges]
    ids, _, ch_sets, duplicates, isolated = _index_edges(edges, nodes)
    n = len(ids)
    ch = [sorted(s) for s in ch_sets]
    report = ValidationReport(duplicate_edges=duplicates, isolated_node_count=isolated)
    for i, cs in enumerate(ch):
        if i in cs:
            report.cycles_found.append([ids[i]])
    for comp in _sccs(n, ch):
        if len(comp) > 1:
            report.cycles_found.append([ids[k] for k in _cycle_in_component(comp, ch)])
    if report.cycles_found:
        return report
    par: list[list[int]] = [[] for _ in range(n)]
    for i, cs in enumerate(ch):
        for j in cs:
            par[j].append(i)
    order = _kahn(n, ch, [len(p) for p in par])
    depth = _depths(order, par, n)
    report.redundant_edges = [(ids[u], ids[v]) for u, v, _ in _redundant_edges(ch, depth)]
    return report


def topo_order(graph: DagGraph) -> list[str]:
    ids = graph.ids
    return [ids[i] for i in graph.topo]


def testable_frontier(graph: DagGraph, rejected_so_far: Iterable[str], d: int) -> frozenset[str]:
    """Nodes at depth ``d`` all of whose parents are in ``rejected_so_far``."""
    if d < 1 or d > graph.D:
        raise DepthOutOfRange(f"depth {d} outside 1..{graph.D}")
    rej = set(graph.handles(rejected_so_far))
    ids = graph.ids
    return frozenset(
        ids[i] for i in graph.layers[d - 1] if all(j in rej for j in graph.par[i])
    )
