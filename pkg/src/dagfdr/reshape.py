"""Reshaping functions for step-up thresholds under arbitrary dependence.

A reshaping function is ``beta(r) = integral_0^r x dtau(x)`` for a
probability measure ``tau`` on the positive reals. It is nondecreasing,
vanishes at 0 and never exceeds ``r``. Three families are provided:
the identity (no reshaping), the global Benjamini-Yekutieli scaling
``r / H_K`` and discrete measures given by support points and weights.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import accumulate
from typing import Sequence

from .errors import EmptySupport, NonPositiveK

IDENTITY = "identity"
BY_GLOBAL = "by-global"
DISCRETE = "discrete-measure"


def harmonic(K: int) -> float:
    return math.fsum(1.0 / k for k in range(1, K + 1))


@dataclass(frozen=True)
class ReshapeFn:
    kind: str
    K: int | None = None
    support: tuple[float, ...] = ()
    weights: tuple[float, ...] = ()
    _scale: float = field(default=1.0, repr=False)
    _prefix: tuple[float, ...] = field(default=(), repr=False)

    def __call__(self, r: float) -> float:
        if self.kind == IDENTITY:
            return r
        if self.kind == BY_GLOBAL:
            return r / self._scale
        k = bisect_right(self.support, r)
        return self._prefix[k - 1] if k else 0.0

    @property
    def is_identity(self) -> bool:
        return self.kind == IDENTITY


def evaluate(fn: ReshapeFn, r: float) -> float:
    if r < 0:
        raise ValueError("reshaping functions are defined on r >= 0")
    return fn(r)


_IDENTITY = ReshapeFn(IDENTITY)


def make_identity() -> ReshapeFn:
    return _IDENTITY


def make_by_global(K: int) -> ReshapeFn:
    if K < 1:
        raise NonPositiveK(f"K must be >= 1, got {K}")
    return ReshapeFn(BY_GLOBAL, K=K, _scale=harmonic(K))


def make_discrete(support: Sequence[float], weights: Sequence[float]) -> ReshapeFn:
    """Reshaping function of the discrete measure ``sum_x weight(x) delta_x``.

    Weights are normalized to sum to one; support points must be positive.
    """
    if len(support) == 0:
        raise EmptySupport("discrete measure needs at least one support point")
    if len(support) != len(weights):
        raise ValueError("support and weights differ in length")
    pairs = sorted(zip(support, weights))
    xs = tuple(float(x) for x, _ in pairs)
    if xs[0] <= 0 or any(w <= 0 for _, w in pairs):
        raise ValueError("support points and weights must be positive")
    if any(a == b for a, b in zip(xs, xs[1:])):
        raise ValueError("support points must be distinct")
    total = math.fsum(w for _, w in pairs)
    ws = tuple(w / total for _, w in pairs)
    prefix = tuple(accumulate(x * w for x, w in zip(xs, ws)))
    return ReshapeFn(DISCRETE, support=xs, weights=ws, _prefix=prefix)


@lru_cache(maxsize=4096)
def make_dagger_by(m_i: float, d: int, n_upto_d: int) -> ReshapeFn:
    """Per-node BY-style measure for a node at depth ``d``.

    Mass proportional to ``1/k`` on ``k = m_i + j`` for
    ``j = d-1, ..., n_upto_d - 1``: the values the step-up argument
    ``m_i + r + R_prev - 1`` can take once depth ``d`` is reached.
    Support points are formed as ``m_i + j`` with integer ``j`` so that the
    step-up argument, built the same way, lands exactly on them.
    """
    if d < 1:
        raise ValueError(f"depth must be >= 1, got {d}")
    if n_upto_d < d:
        raise EmptySupport(f"n_upto_d={n_upto_d} < d={d}")
    support = [m_i + j for j in range(d - 1, n_upto_d)]
    return make_discrete(support, [1.0 / x for x in support])
