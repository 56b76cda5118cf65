"""Text formats: tab-separated edge lists, p-value files, result tables, DOT."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping

from .counts import EffectiveCounts
from .errors import FormatError
from .graph import DagGraph, Edge
from .procedure import DaggerResult

NODE_PREFIX = "node"


def fmt(x: float) -> str:
    """Locale-independent, 12 significant digits."""
    return format(float(x), ".12g")


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r")
        if not line.strip() or line.startswith("#"):
            continue
        yield lineno, line


def parse_edge_list(text: str) -> tuple[list[Edge], list[str]]:
    """Parse ``parent<TAB>child`` lines; ``node<TAB>id`` declares a node."""
    edges: list[Edge] = []
    nodes: list[str] = []
    for lineno, line in _lines(text):
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise FormatError(f"line {lineno}: expected two tab-separated fields, got {line!r}")
        if parts[0] == NODE_PREFIX:
            nodes.append(parts[1])
        else:
            edges.append((parts[0], parts[1]))
    if not edges and not nodes:
        raise FormatError("edge list is empty")
    return edges, nodes


def read_edge_list(path) -> tuple[list[Edge], list[str]]:
    return parse_edge_list(Path(path).read_text(encoding="utf-8"))


def emit_edge_list(graph: DagGraph) -> str:
    """Inverse of :func:`parse_edge_list` for a built graph."""
    out = []
    for i, a in enumerate(graph.ids):
        if not graph.par[i] and not graph.ch[i]:
            out.append(f"{NODE_PREFIX}\t{a}")
    out.extend(f"{u}\t{v}" for u, v in graph.edges())
    return "\n".join(out) + "\n"


def parse_pvalues(text: str) -> dict[str, float]:
    out: dict[str, float] = {}
    for lineno, line in _lines(text):
        parts = line.split("\t")
        if len(parts) != 2:
            raise FormatError(f"line {lineno}: expected node<TAB>pvalue, got {line!r}")
        a, raw = parts
        if a in out:
            raise FormatError(f"line {lineno}: node {a!r} listed twice")
        try:
            x = float(raw)
        except ValueError:
            raise FormatError(f"line {lineno}: cannot parse p-value {raw!r}") from None
        if not (0.0 <= x <= 1.0):
            raise FormatError(f"line {lineno}: p-value {raw} outside [0, 1]")
        out[a] = x
    return out


def read_pvalues(path) -> dict[str, float]:
    return parse_pvalues(Path(path).read_text(encoding="utf-8"))


def _by_depth(graph: DagGraph):
    return sorted(range(graph.N), key=lambda i: (graph.depth_of[i], graph.ids[i]))


def counts_tsv(graph: DagGraph, counts: EffectiveCounts) -> str:
    rows = ["node\tdepth\tm\tell"]
    for i in _by_depth(graph):
        rows.append(f"{graph.ids[i]}\t{graph.depth_of[i]}\t{fmt(counts.m_arr[i])}\t{fmt(counts.ell_arr[i])}")
    return "\n".join(rows) + "\n"


RESULT_HEADER = "node\tdepth\ttested\tlevel\tp\trejected"


def result_tsv(graph: DagGraph, result: DaggerResult, pvalues: Mapping[str, float] | None = None) -> str:
    rows = [RESULT_HEADER]
    audit = result.audit
    for i in _by_depth(graph):
        rec = audit[graph.ids[i]]
        p = rec.p if rec.p is not None else (pvalues or {}).get(rec.node)
        rows.append(
            f"{rec.node}\t{rec.depth}\t{int(rec.tested)}\t{fmt(rec.level)}\t"
            f"{'NA' if p is None else fmt(p)}\t{int(rec.rejected)}"
        )
    return "\n".join(rows) + "\n"


def baseline_tsv(graph: DagGraph, pvalues: Mapping[str, float], rejected, level: float) -> str:
    rows = [RESULT_HEADER]
    for i in _by_depth(graph):
        a = graph.ids[i]
        rows.append(f"{a}\t{graph.depth_of[i]}\t1\t{fmt(level)}\t{fmt(pvalues[a])}\t{int(a in rejected)}")
    return "\n".join(rows) + "\n"


def _q(a: str) -> str:
    return '"' + a.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(graph: DagGraph, result: DaggerResult) -> str:
    """Rejected nodes filled green, tested-but-accepted outlined red,
    untested filled gray."""
    lines = ["digraph dagger {", "  rankdir=TB;", "  node [shape=ellipse];"]
    for a in graph.ids:
        if a in result.rejected:
            attr = 'style=filled, fillcolor="green"'
        elif a in result.tested_nodes:
            attr = 'color="red", penwidth=2'
        else:
            attr = 'style=filled, fillcolor="gray"'
        lines.append(f"  {_q(a)} [{attr}];")
    for u, v in graph.edges():
        lines.append(f"  {_q(u)} -> {_q(v)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
