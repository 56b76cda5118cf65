"""Command-line interface.

Exit codes: 0 success, 1 domain failure (invalid DAG, missing p-value),
2 usage or I/O failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import baselines, sim
from .counts import compute_effective_counts
from .errors import ConfigError, DagFdrError, FormatError, GraphError, InvalidAlpha, MissingPValue
from .graph import STRICT, STRIP_REDUNDANT, build_graph, validate
from .io import baseline_tsv, counts_tsv, read_edge_list, read_pvalues, result_tsv, to_dot
from .procedure import BY_GLOBAL, BY_SUGGESTED, PLAIN, RESHAPED, DaggerConfig, run_batch

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2

RESHAPE_CHOICES = {"identity": None, "by": BY_GLOBAL, "dagger-by": BY_SUGGESTED}


class UsageError(Exception):
    pass


def _err(msg: str) -> None:
    print(f"dagfdr: {msg}", file=sys.stderr)


def _load_graph(path, strip: bool):
    edges, nodes = read_edge_list(path)
    return build_graph(edges, STRIP_REDUNDANT if strip else STRICT, nodes=nodes)


def cmd_validate(args) -> int:
    edges, nodes = read_edge_list(args.dag)
    report = validate(edges, nodes)
    for line in report.lines():
        print(line)
    if args.strip_redundant:
        ok = not report.cycles_found and not report.duplicate_edges
    else:
        ok = report.is_valid
    return EXIT_OK if ok else EXIT_DOMAIN


def cmd_counts(args) -> int:
    graph = _load_graph(args.dag, args.strip_redundant)
    sys.stdout.write(counts_tsv(graph, compute_effective_counts(graph)))
    return EXIT_OK


def _dagger_config(args) -> DaggerConfig:
    reshape = args.reshape
    variant = args.variant
    if variant is None:
        variant = RESHAPED if reshape not in (None, "identity") else PLAIN
    if variant == PLAIN and reshape not in (None, "identity"):
        raise UsageError("--reshape other than identity needs --variant reshaped")
    if variant == RESHAPED:
        spec = RESHAPE_CHOICES[reshape or "dagger-by"]
        if spec is None:
            variant = PLAIN
        return DaggerConfig(alpha=args.alpha, variant=variant, reshape_spec=spec)
    return DaggerConfig(alpha=args.alpha)


def cmd_test(args) -> int:
    if not (0.0 < args.alpha < 1.0):
        raise UsageError(f"--alpha must lie in (0, 1), got {args.alpha}")
    graph = _load_graph(args.dag, args.strip_redundant)
    pvalues = read_pvalues(args.pvalues)
    unknown = set(pvalues) - set(graph.ids)
    if unknown:
        raise FormatError(f"p-value file names unknown node {min(unknown)!r}")

    if args.method in ("bh", "by"):
        missing = set(graph.ids) - set(pvalues)
        if missing:
            raise MissingPValue(min(missing))
        ids = list(graph.ids)
        vals = [pvalues[a] for a in ids]
        picked = baselines.bh(vals, args.alpha) if args.method == "bh" else baselines.by(vals, args.alpha)
        K = len(ids)
        alpha = args.alpha
        if args.method == "by":
            alpha = alpha / sum(1.0 / k for k in range(1, K + 1))
        level = alpha * max(len(picked), 1) / K
        sys.stdout.write(baseline_tsv(graph, pvalues, {ids[i] for i in picked}, level))
        return EXIT_OK

    cfg = _dagger_config(args)
    result = run_batch(graph, compute_effective_counts(graph), pvalues, cfg)
    sys.stdout.write(result_tsv(graph, result, pvalues))
    if args.dot:
        Path(args.dot).write_text(to_dot(graph, result), encoding="utf-8")
    return EXIT_OK


# simulate ------------------------------------------------------------------

_LIST_KEYS = {"layers", "k", "pi0", "mu", "methods"}


def parse_sim_config(text: str) -> dict:
    """Parse ``key = value`` lines; lists are comma separated, ``[]`` optional."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        value = value.strip("[]").strip()
        items = [v.strip().strip("\"'") for v in value.split(",") if v.strip()]
        out[key] = items if key in _LIST_KEYS else (items[0] if items else "")
    return out


def _ints(xs):
    return [None if x in ("-", "none", "None", "") else int(x) for x in xs]


def _floats(xs):
    return [float(x) for x in xs]


def _split(s):
    return [v.strip() for v in s.split(",") if v.strip()]


def build_sim_settings(args) -> tuple[sim.SimConfig, list[float], list[str]]:
    raw = parse_sim_config(Path(args.config).read_text(encoding="utf-8")) if args.config else {}
    for key in ("shape", "model", "mu_leaf", "alpha", "reps", "seed", "depth_limit"):
        v = getattr(args, key)
        if v is not None:
            raw[key] = str(v)
    for key in ("layers", "k", "pi0", "mu", "methods"):
        v = getattr(args, key)
        if v is not None:
            raw[key] = _split(v)
    if args.redraw_graph:
        raw["redraw_graph"] = "true"
    known = {"shape", "layers", "k", "pi0", "model", "mu", "mu_leaf", "alpha", "reps", "seed",
             "methods", "redraw_graph", "depth_limit"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    try:
        layers, k = sim.SHAPES["diamond"]
        if "shape" in raw:
            if raw["shape"] not in sim.SHAPES:
                raise ConfigError(f"unknown shape {raw['shape']!r}; choose from {sorted(sim.SHAPES)}")
            layers, k = sim.SHAPES[raw["shape"]]
        if "layers" in raw:
            layers = tuple(int(x) for x in raw["layers"])
            if "k" not in raw and len(layers) > 1:
                raise ConfigError("custom layers need k (parents per node)")
        if "k" in raw:
            k = _ints(raw["k"])
            if len(k) == 1 and len(layers) > 1:
                k = k[0]
        model = raw.get("model", sim.GAUSSIAN)
        if model == "simes":
            model = sim.SIMES_PROPAGATED
        mu = _floats(raw["mu"]) if "mu" in raw else None
        cfg = sim.SimConfig(
            layers=tuple(layers),
            parents_per_node=k,
            pvalue_model=model,
            mu_by_depth=mu,
            mu_leaf=float(raw.get("mu_leaf", 2.0)),
            alpha=float(raw.get("alpha", 0.2)),
            reps=int(raw.get("reps", 100)),
            seed=int(raw.get("seed", 0)),
            redraw_graph=str(raw.get("redraw_graph", "false")).lower() in ("1", "true", "yes"),
            depth_limit=int(raw["depth_limit"]) if raw.get("depth_limit") else None,
        )
        pi0 = _floats(raw.get("pi0", ["0.5"]))
        methods = raw.get("methods", ["dagger-plain"])
        for m in methods:
            if m not in sim.METHODS:
                raise ConfigError(f"unknown method {m!r}; choose from {sim.METHODS}")
        for x in pi0:
            if not 0.0 <= x <= 1.0:
                raise ConfigError(f"pi0 value {x} outside [0, 1]")
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None
    return cfg, pi0, methods


def _workers() -> int:
    raw = os.environ.get("DAGGER_THREADS", "1").strip() or "1"
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"DAGGER_THREADS must be an integer, got {raw!r}") from None
    if n <= 0:
        n = os.cpu_count() or 1
    return n


def cmd_simulate(args) -> int:
    cfg, pi0, methods = build_sim_settings(args)
    sys.stdout.write(sim.grid_csv(cfg, pi0, methods, workers=_workers()))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dagfdr", description="FDR control for hypotheses on a DAG.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check an edge list for cycles, redundant and duplicate edges")
    p.add_argument("dag")
    p.add_argument("--strip-redundant", action="store_true", help="treat redundant edges as removable")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("counts", help="print effective node and leaf counts")
    p.add_argument("dag")
    p.add_argument("--strip-redundant", action="store_true")
    p.set_defaults(func=cmd_counts)

    p = sub.add_parser("test", help="run the top-down procedure on a DAG and p-values")
    p.add_argument("dag")
    p.add_argument("pvalues")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--method", choices=("dagger", "bh", "by"), default="dagger")
    p.add_argument("--variant", choices=(PLAIN, RESHAPED))
    p.add_argument("--reshape", choices=tuple(RESHAPE_CHOICES))
    p.add_argument("--dot", help="write a Graphviz rendering of the decisions here")
    p.add_argument("--strip-redundant", action="store_true")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("simulate", help="Monte-Carlo FDR/power over a pi0 grid (CSV)")
    p.add_argument("--config", help="key = value file; flags below override it")
    p.add_argument("--shape", help=f"preset layer shape: {', '.join(sorted(sim.SHAPES))}")
    p.add_argument("--layers", help="comma-separated layer sizes, top first")
    p.add_argument("--k", help="parents per node for layers 2.., comma separated (or one value)")
    p.add_argument("--pi0", help="comma-separated leaf null proportions")
    p.add_argument("--model", choices=(sim.GAUSSIAN, sim.SIMES_PROPAGATED, "simes"))
    p.add_argument("--mu", help="comma-separated non-null signal per depth, depth 1 first")
    p.add_argument("--mu-leaf", dest="mu_leaf", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--reps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--methods", help=f"comma-separated subset of {', '.join(sim.METHODS)}")
    p.add_argument("--depth-limit", dest="depth_limit", type=int)
    p.add_argument("--redraw-graph", action="store_true")
    p.set_defaults(func=cmd_simulate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError, FormatError, InvalidAlpha, OSError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    except (GraphError, MissingPValue, DagFdrError) as exc:
        _err(str(exc))
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
