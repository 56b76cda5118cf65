"""Generalized step-up over one depth of the DAG.

Each candidate ``i`` has a threshold function

    alpha_i(r) = c_i * beta_i(m_i + r + R_prev - 1) / m_i

(zero when the node is not testable), with ``c_i = alpha * ell_i / L``.
The step-up picks the largest ``r`` such that at least ``r`` candidates
satisfy ``p_i <= alpha_i(r)`` and rejects exactly those at that ``r``.

Because every threshold is nondecreasing in ``r``, each candidate has a
smallest qualifying rank ``r_i*``; the step-up count at ``r`` is then the
number of ``r_i* <= r``, so one counting pass replaces the quadratic scan.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import MissingPValue
from .reshape import ReshapeFn, make_identity


@dataclass(frozen=True)
class DepthCandidate:
    node: str
    p: float | None
    testable: bool
    c: float
    m: float
    reshape: ReshapeFn = field(default_factory=make_identity)


@dataclass(frozen=True)
class DepthOutcome:
    R_d: int
    rejected: frozenset
    levels: dict

    def __eq__(self, other):
        if not isinstance(other, DepthOutcome):
            return NotImplemented
        return (self.R_d, self.rejected, self.levels) == (other.R_d, other.rejected, other.levels)


def _level(c: float, m: float, r: int, R_prev: int, reshape: ReshapeFn | None) -> float:
    # integer part first: support points of per-node measures are built as m + j
    x = m + (r + R_prev - 1)
    if reshape is not None and not reshape.is_identity:
        x = reshape(x)
    return c * x / m


def threshold(cand: DepthCandidate, r: int, R_prev: int) -> float:
    if not cand.testable:
        return 0.0
    return _level(cand.c, cand.m, r, R_prev, cand.reshape)


def min_rank(p: float, c: float, m: float, R_prev: int, K: int, reshape: ReshapeFn | None = None) -> int:
    """Smallest ``r`` in ``1..K`` with ``p <= alpha(r)``; ``K + 1`` if none."""
    if reshape is None or reshape.is_identity:
        guess = math.ceil(p * m / c - m - R_prev + 1)
        r = min(max(guess, 1), K + 1)
        # the closed form can land one off on a rounding boundary
        while r <= K and p > _level(c, m, r, R_prev, None):
            r += 1
        while r > 1 and p <= _level(c, m, r - 1, R_prev, None):
            r -= 1
        return r
    if p > _level(c, m, K, R_prev, reshape):
        return K + 1
    lo, hi = 1, K
    while lo < hi:
        mid = (lo + hi) // 2
        if p <= _level(c, m, mid, R_prev, reshape):
            hi = mid
        else:
            lo = mid + 1
    return lo


def min_ranks_identity(p: np.ndarray, c: np.ndarray, m: np.ndarray, R_prev: int, K: int) -> np.ndarray:
    """Vectorized :func:`min_rank` for unreshaped thresholds.

    Uses the same floating-point expression as the scalar path, so the
    ranks agree bit for bit.
    """
    with np.errstate(invalid="ignore", over="ignore"):
        guess = np.ceil(p * m / c - m - R_prev + 1)
    guess = np.nan_to_num(guess, nan=K + 1, posinf=K + 1, neginf=1)
    r = np.clip(guess, 1, K + 1).astype(np.int64)

    def level(rr):
        return c * (m + (rr + R_prev - 1)) / m

    while True:
        up = (r <= K) & (p > level(r))
        if not up.any():
            break
        r[up] += 1
    while True:
        down = (r > 1) & (p <= level(r - 1))
        if not down.any():
            break
        r[down] -= 1
    return r


def count_rejections(ranks: Sequence[int] | np.ndarray, K: int) -> int:
    """Largest ``r`` in ``1..K`` with ``#{rank <= r} >= r``, or 0."""
    if K == 0 or len(ranks) == 0:
        return 0
    hist = np.bincount(np.minimum(np.asarray(ranks, dtype=np.int64), K + 1), minlength=K + 2)
    cum = np.cumsum(hist[1 : K + 1])
    ok = np.nonzero(cum >= np.arange(1, K + 1))[0]
    return int(ok[-1]) + 1 if ok.size else 0


def _check(cands: Sequence[DepthCandidate]) -> None:
    for cand in cands:
        if cand.testable and cand.p is None:
            raise MissingPValue(cand.node)


def _outcome(cands, R_d: int, rejected, R_prev: int) -> DepthOutcome:
    r = max(R_d, 1)
    levels = {cand.node: threshold(cand, r, R_prev) for cand in cands}
    return DepthOutcome(R_d=R_d, rejected=frozenset(rejected), levels=levels)


def run_depth(cands: Sequence[DepthCandidate], R_prev: int) -> DepthOutcome:
    """Step-up at one depth via per-candidate minimal ranks.

    ``levels`` holds each candidate's threshold at ``R_d`` (at ``r = 1``
    when nothing is rejected); untestable candidates get 0.
    """
    _check(cands)
    K = len(cands)
    ranks = {}
    for cand in cands:
        if cand.testable:
            ranks[cand.node] = min_rank(cand.p, cand.c, cand.m, R_prev, K, cand.reshape)
    R_d = count_rejections(list(ranks.values()), K)
    rejected = [a for a, r in ranks.items() if r <= R_d]
    return _outcome(cands, R_d, rejected, R_prev)


def run_depth_bruteforce(cands: Sequence[DepthCandidate], R_prev: int) -> DepthOutcome:
    """Literal scan over ``r = K, ..., 1``; quadratic, used as an oracle."""
    _check(cands)
    K = len(cands)
    live = [cand for cand in cands if cand.testable]
    R_d = 0
    for r in range(K, 0, -1):
        hits = sum(1 for cand in live if cand.p <= threshold(cand, r, R_prev))
        if hits >= r:
            R_d = r
            break
    rejected = [cand.node for cand in live if R_d and cand.p <= threshold(cand, R_d, R_prev)]
    return _outcome(cands, R_d, rejected, R_prev)
