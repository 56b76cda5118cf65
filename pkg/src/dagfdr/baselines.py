"""Benjamini-Hochberg and Benjamini-Yekutieli, written out naively.

These share no code with the step-up engine on purpose: they serve as
reference answers for the edgeless-DAG reductions.
"""

from __future__ import annotations

import math
from typing import Sequence

from .errors import EmptyInput, InvalidAlpha, InvalidP


def _validate(p: Sequence[float], alpha: float) -> list[float]:
    p = [float(x) for x in p]
    if not p:
        raise EmptyInput("need at least one p-value")
    if not (0.0 < alpha < 1.0):
        raise InvalidAlpha(f"alpha must lie in (0, 1), got {alpha!r}")
    for x in p:
        if not (0.0 <= x <= 1.0):
            raise InvalidP(f"p-value {x!r} outside [0, 1]")
    return p


def bh_cutoff(p: Sequence[float], alpha: float) -> int:
    """Number of BH rejections: largest r with P_(r) <= alpha * r / K."""
    p = _validate(p, alpha)
    K = len(p)
    srt = sorted(p)
    R = 0
    for r in range(1, K + 1):
        if srt[r - 1] <= alpha * r / K:
            R = r
    return R


def bh(p: Sequence[float], alpha: float) -> set[int]:
    """Indices rejected by Benjamini-Hochberg at level ``alpha``.

    Ties at the cutoff value are all rejected.
    """
    p = _validate(p, alpha)
    R = bh_cutoff(p, alpha)
    if R == 0:
        return set()
    cut = sorted(p)[R - 1]
    return {i for i, x in enumerate(p) if x <= cut}


def by(p: Sequence[float], alpha: float) -> set[int]:
    """Benjamini-Yekutieli: BH at ``alpha / H_K``."""
    p = _validate(p, alpha)
    K = len(p)
    h = math.fsum(1.0 / k for k in range(1, K + 1))
    return bh(p, alpha / h)
