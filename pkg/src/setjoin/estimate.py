"""Choosing the prefix-tree limit from cheap collection statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from setjoin.core import DatasetStats
from setjoin.costmodel import (
    DEFAULT_CONSTANTS,
    CostConstants,
    cost_intersection,
    cost_verification,
    estimate_intersection_size,
)

AVG = "avg"
WAVG = "wavg"
MDN = "mdn"
FRQ = "frq"
STRATEGIES = (AVG, WAVG, MDN, FRQ)


class EstimationError(ValueError):
    pass


@dataclass(frozen=True)
class FrqStep:
    length: int
    probability: float
    est_candidates: float
    intersection_cost: float
    verification_cost: float


@dataclass(frozen=True)
class LimitEstimate:
    strategy: str
    value: int
    diagnostics: tuple[FrqStep, ...] = field(default=())


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _clamp(value: int, max_len: int) -> int:
    return max(1, min(value, max(1, max_len)))


def frq_trace(
    freq_left: Sequence[int],
    freq_right: Sequence[int],
    n_left: int,
    n_right: int,
    left_avg_len: float,
    right_avg_len: float,
    max_len: int,
    constants: CostConstants = DEFAULT_CONSTANTS,
    threshold_scale: float = 1.0,
) -> tuple[int, tuple[FrqStep, ...]]:
    """Grow a path of the most frequent left items until intersecting costs
    more than verifying what is left.

    Step ``k`` prices the intersection taking the path from ``k-1`` to ``k``
    items against the verification it would save: the expected left objects
    holding the ``k-1`` path times the expected candidates, both over suffixes
    beyond ``k-1``. The limit is the last length whose intersection paid off.
    """
    items = sorted((i for i, f in enumerate(freq_left) if f > 0), key=lambda i: (-freq_left[i], i))
    if not items or n_left <= 0:
        raise EstimationError("no statistics")
    n_s = max(n_right, 1)
    steps = []
    prob = freq_left[items[0]] / n_left
    cands = estimate_intersection_size(n_s, freq_right[items[0]] if items[0] < len(freq_right) else 0, n_s)
    steps.append(FrqStep(1, prob, cands, 0.0, 0.0))
    limit = 1
    for k in range(2, min(len(items), max_len) + 1):
        item = items[k - 1]
        g = freq_right[item] if item < len(freq_right) else 0
        held = n_left * prob
        verify_cost = threshold_scale * cost_verification(
            held,
            held * max(0.0, left_avg_len - (k - 1)),
            cands,
            cands * max(0.0, right_avg_len - (k - 1)),
            constants,
        )
        inter_cost = cost_intersection(cands, g, "merge", constants)
        prob *= freq_left[item] / n_left
        next_cands = estimate_intersection_size(cands, g, n_s)
        steps.append(FrqStep(k, prob, next_cands, inter_cost, verify_cost))
        if inter_cost > verify_cost:
            break
        limit = k
        cands = next_cands
    return limit, tuple(steps)


def estimate_limit(
    stats: DatasetStats,
    strategy: str,
    *,
    freq_left: Optional[Sequence[int]] = None,
    freq_right: Optional[Sequence[int]] = None,
    right_stats: Optional[DatasetStats] = None,
    constants: CostConstants = DEFAULT_CONSTANTS,
    threshold_scale: float = 1.0,
) -> LimitEstimate:
    """Return the limit chosen by ``strategy``, clamped to ``[1, max_len]``.

    ``avg``/``wavg``/``mdn`` round the plain, length-weighted and median
    object length half-up. ``frq`` needs the per-item object frequencies of
    both collections.
    """
    if stats.cardinality == 0:
        raise EstimationError("no statistics")
    if strategy == AVG:
        return LimitEstimate(AVG, _clamp(round_half_up(stats.avg_len), stats.max_len))
    if strategy == WAVG:
        return LimitEstimate(WAVG, _clamp(round_half_up(stats.weighted_avg_len), stats.max_len))
    if strategy == MDN:
        return LimitEstimate(MDN, _clamp(round_half_up(stats.median_len), stats.max_len))
    if strategy != FRQ:
        raise EstimationError(f"unknown limit strategy {strategy!r}")
    if freq_left is None or freq_right is None:
        raise EstimationError("frq needs item frequencies of both collections")
    right = right_stats or stats
    value, trace = frq_trace(
        freq_left,
        freq_right,
        stats.cardinality,
        right.cardinality,
        stats.avg_len,
        right.avg_len,
        stats.max_len,
        constants,
        threshold_scale,
    )
    return LimitEstimate(FRQ, _clamp(value, stats.max_len), trace)


def estimate_all(dictionary, left, right, constants: CostConstants = DEFAULT_CONSTANTS, threshold_scale: float = 1.0) -> dict[str, LimitEstimate]:
    """All four strategies for a prepared pair of collections."""
    return {
        s: estimate_limit(
            left.stats,
            s,
            freq_left=dictionary.freq_left,
            freq_right=dictionary.freq_right,
            right_stats=right.stats,
            constants=constants,
            threshold_scale=threshold_scale,
        )
        for s in STRATEGIES
    }
