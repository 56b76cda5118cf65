"""Global-null p-value combiners and bottom-up propagation on intersection DAGs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import Mapping, Sequence

from .errors import BoundaryP, EmptyInput, ExtraP, InvalidP, MissingLeafP, ZeroPValue
from .graph import DagGraph
from .reshape import ReshapeFn, make_by_global

SIMES = "simes"
SIMES_RESHAPED = "simes-reshaped"
FISHER = "fisher"
STOUFFER = "stouffer"

CHILDREN = "children"
SUB_LEAVES = "sub-leaves"

_STD_NORMAL = NormalDist()


def norm_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def norm_sf(x: float) -> float:
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def norm_isf(p: float) -> float:
    """Upper-tail quantile: ``z`` with ``P(Z > z) = p``."""
    return -_STD_NORMAL.inv_cdf(p)


def chi2_sf_even(x: float, dof: int) -> float:
    """Chi-square survival function for an even number of degrees of freedom.

    For ``dof = 2S`` the upper tail is the Poisson sum
    ``exp(-x/2) * sum_{k<S} (x/2)^k / k!``, evaluated in log space.
    """
    if dof <= 0 or dof % 2:
        raise ValueError("dof must be a positive even integer")
    if x <= 0:
        return 1.0
    y = 0.5 * x
    S = dof // 2
    log_y = math.log(y)
    logs = [k * log_y - y - math.lgamma(k + 1) for k in range(S)]
    top = max(logs)
    total = math.exp(top) * math.fsum(math.exp(t - top) for t in logs)
    return min(total, 1.0)


def _check_list(p: Sequence[float]) -> list[float]:
    vals = [float(x) for x in p]
    if not vals:
        raise EmptyInput("need at least one p-value")
    for x in vals:
        if not (0.0 <= x <= 1.0):
            raise InvalidP(f"p-value {x!r} outside [0, 1]")
    return vals


def simes(p: Sequence[float], reshape: ReshapeFn | None = None) -> float:
    """Simes combination ``min_k P_(k) * S / beta(k)``, clamped to 1.

    Ranks where the reshaping function is zero cannot produce a finite
    threshold and are skipped.
    """
    vals = sorted(_check_list(p))
    S = len(vals)
    best = math.inf
    for k, x in enumerate(vals, start=1):
        denom = k if reshape is None else reshape(k)
        if denom <= 0:
            continue
        best = min(best, x * S / denom)
    return min(best, 1.0)


def fisher(p: Sequence[float]) -> float:
    vals = _check_list(p)
    if any(x == 0.0 for x in vals):
        raise ZeroPValue("Fisher's method needs strictly positive p-values")
    stat = -2.0 * math.fsum(math.log(x) for x in vals)
    return chi2_sf_even(stat, 2 * len(vals))


def fisher_statistic(p: Sequence[float]) -> float:
    return -2.0 * math.fsum(math.log(x) for x in _check_list(p))


def stouffer(p: Sequence[float]) -> float:
    vals = _check_list(p)
    if any(x <= 0.0 or x >= 1.0 for x in vals):
        raise BoundaryP("Stouffer's method needs p-values strictly inside (0, 1)")
    z = math.fsum(norm_isf(x) for x in vals) / math.sqrt(len(vals))
    return norm_sf(z)


@dataclass(frozen=True)
class CombineMethod:
    kind: str = SIMES
    basis: str = CHILDREN
    reshape: ReshapeFn | None = None

    def __post_init__(self):
        if self.kind not in (SIMES, SIMES_RESHAPED, FISHER, STOUFFER):
            raise ValueError(f"unknown combiner {self.kind!r}")
        if self.basis not in (CHILDREN, SUB_LEAVES):
            raise ValueError(f"unknown basis {self.basis!r}")
        if self.kind == SIMES_RESHAPED and self.reshape is None:
            raise ValueError("simes-reshaped needs a reshaping function")

    def __call__(self, p: Sequence[float]) -> float:
        if self.kind == SIMES:
            return simes(p)
        if self.kind == SIMES_RESHAPED:
            return simes(p, self.reshape)
        if self.kind == FISHER:
            return fisher(p)
        return stouffer(p)


def parse_method(spec: str, basis: str = CHILDREN, n_leaves: int | None = None) -> CombineMethod:
    """Parse CLI strings ``simes``, ``simes:by``, ``fisher``, ``stouffer``.

    ``simes:by`` reshapes with the global BY function over ``n_leaves``.
    """
    if spec == "simes:by":
        if n_leaves is None:
            raise ValueError("simes:by needs the number of leaves")
        return CombineMethod(SIMES_RESHAPED, basis, make_by_global(n_leaves))
    if spec in (SIMES, FISHER, STOUFFER):
        return CombineMethod(spec, basis)
    raise ValueError(f"unknown combiner spec {spec!r}")


def propagate_intersection(
    graph: DagGraph,
    leaf_p: Mapping[str, float],
    method: CombineMethod = CombineMethod(),
) -> dict[str, float]:
    """Fill in internal-node p-values from the leaves, bottom-up.

    With basis ``children`` a node combines its children's (already computed)
    p-values; with ``sub-leaves`` it combines every leaf it can reach.
    """
    leaves = graph.leaves
    missing = leaves - leaf_p.keys()
    if missing:
        raise MissingLeafP(f"no p-value for leaf {min(missing)!r}")
    extra = set(leaf_p) - leaves
    if extra:
        raise ExtraP(f"p-value given for non-leaf {min(extra)!r}")

    ids, ch = graph.ids, graph.ch
    p = [0.0] * graph.N
    for i in graph.leaf_handles:
        p[i] = float(leaf_p[ids[i]])

    if method.basis == CHILDREN:
        for i in reversed(graph.topo):
            if ch[i]:
                p[i] = method([p[j] for j in ch[i]])
    else:
        bits = [0] * graph.N
        leaf_pos = {i: k for k, i in enumerate(graph.leaf_handles)}
        for i in reversed(graph.topo):
            if not ch[i]:
                bits[i] = 1 << leaf_pos[i]
                continue
            acc = 0
            for j in ch[i]:
                acc |= bits[j]
            bits[i] = acc
            vals = [p[h] for k, h in enumerate(graph.leaf_handles) if acc >> k & 1]
            p[i] = method(vals)
    return dict(zip(ids, p))
