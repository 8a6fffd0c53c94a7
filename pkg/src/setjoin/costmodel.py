"""Cost functions behind the adaptive join, and their calibration.

Three primitive tasks are modelled:

* list intersection, merge ``a1*|CL| + b1*|IL| + g1`` or binary search
  ``a2*|CL|*log2(|IL|+1) + b2``;
* direct output of ``n_clp * n_eq`` guaranteed pairs, ``a3*n_clp*n_eq + b3``;
* suffix verification of every pair in a left x right block,
  ``a4*n_right*left_suffix_sum + b4*n_left*right_suffix_sum + g4``.

The default constants are a unit-cost model; :func:`calibrate` replaces them
with least-squares fits over timed micro-benchmarks.
"""

from __future__ import annotations

import logging
import math
import random
import statistics
import time
import warnings
from dataclasses import asdict, dataclass, fields
from typing import Callable

import numpy as np

logger = logging.getLogger(__name__)

CONSTANT_NAMES = ("a1", "b1", "g1", "a2", "b2", "a3", "b3", "a4", "b4", "g4")


@dataclass(frozen=True)
class CostConstants:
    a1: float = 1.0
    b1: float = 1.0
    g1: float = 0.0
    a2: float = 1.0
    b2: float = 0.0
    a3: float = 1.0
    b3: float = 0.0
    a4: float = 1.0
    b4: float = 1.0
    g4: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"cost constant {f.name} must be finite and >= 0, got {v}")

    def scaled(self, factor: float) -> "CostConstants":
        return CostConstants(**{k: v * factor for k, v in asdict(self).items()})

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


DEFAULT_CONSTANTS = CostConstants()


def dumps_constants(k: CostConstants) -> str:
    return "".join(f"{name}={getattr(k, name)!r}\n" for name in CONSTANT_NAMES)


def loads_constants(text: str) -> CostConstants:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        name, sep, value = line.partition("=")
        name = name.strip()
        if not sep or name not in CONSTANT_NAMES:
            raise ValueError(f"line {lineno}: expected '<constant>=<value>', got {line!r}")
        values[name] = float(value)
    return CostConstants(**values)


def cost_intersection(n_cl: float, n_postings: float, method: str, k: CostConstants = DEFAULT_CONSTANTS) -> float:
    merge = k.a1 * n_cl + k.b1 * n_postings + k.g1
    if method == "merge":
        return merge
    binary = k.a2 * n_cl * math.log2(n_postings + 1) + k.b2
    if method == "binary":
        return binary
    if method == "hybrid":
        return min(merge, binary)
    raise ValueError(f"unknown intersection method {method!r}")


def cost_direct(n_clp: float, n_rl_eq: float, k: CostConstants = DEFAULT_CONSTANTS) -> float:
    return k.a3 * n_clp * n_rl_eq + k.b3


def cost_verification(
    n_left: float,
    left_suffix_sum: float,
    n_right: float,
    right_suffix_sum: float,
    k: CostConstants = DEFAULT_CONSTANTS,
) -> float:
    return k.a4 * n_right * left_suffix_sum + k.b4 * n_left * right_suffix_sum + k.g4


def estimate_intersection_size(n_cl: float, n_postings: float, n_s: float) -> float:
    """Expected ``|CL ∩ IL|`` assuming item independence."""
    if n_s <= 0:
        raise ValueError("collection size must be positive")
    return n_cl * n_postings / n_s


def estimate_suffix_sum(cl_suffix_sum: float, n_postings: float, n_s: float) -> float:
    if n_s <= 0:
        raise ValueError("collection size must be positive")
    return cl_suffix_sum * n_postings / n_s


def decision_costs(
    *,
    depth: int,
    agg_count: int,
    agg_len_sum: int,
    n_eq: int,
    n_cl: int,
    cl_suffix_sum: int,
    n_postings: int,
    n_s: int,
    method: str = "hybrid",
    k: CostConstants = DEFAULT_CONSTANTS,
) -> tuple[float, float]:
    """Modelled costs ``(C_A, C_B)`` for a node at ``depth``.

    ``agg_count``/``agg_len_sum`` describe every left object under the node
    (each has length >= depth), ``n_eq`` those equal to the node path.
    ``cl_suffix_sum`` is the incoming candidate list's suffix sum at
    ``depth - 1``, the depth its members are known to match.
    """
    est_cl = estimate_intersection_size(n_cl, n_postings, n_s)
    right_sum_here = max(0, cl_suffix_sum - n_cl)
    est_right_sum = estimate_suffix_sum(right_sum_here, n_postings, n_s)
    left_sum_a = max(0, agg_len_sum - agg_count * depth)
    cost_a = (
        cost_intersection(n_cl, n_postings, method, k)
        + cost_direct(est_cl, n_eq, k)
        + cost_verification(agg_count - n_eq, left_sum_a, est_cl, est_right_sum, k)
    )
    left_sum_b = max(0, agg_len_sum - agg_count * (depth - 1))
    cost_b = cost_verification(agg_count, left_sum_b, n_cl, cl_suffix_sum, k)
    return cost_a, cost_b


def continue_as_limit(**kwargs) -> bool:
    """True for strategy A (intersect and descend); ties go to A."""
    cost_a, cost_b = decision_costs(**kwargs)
    return cost_a <= cost_b


# --------------------------------------------------------------------------
# calibration


@dataclass(frozen=True)
class Fit:
    coefficients: tuple[float, ...]
    r2: float
    degenerate: bool = False


@dataclass(frozen=True)
class CalibrationResult:
    constants: CostConstants
    fits: dict[str, Fit]

    def report(self) -> str:
        lines = [dumps_constants(self.constants).rstrip()]
        for name, fit in self.fits.items():
            flag = " (degenerate, unit fallback)" if fit.degenerate else ""
            lines.append(f"# {name}: R^2={fit.r2:.4f}{flag}")
        return "\n".join(lines) + "\n"


def fit_least_squares(features, timings) -> Fit:
    """Fit ``timings ≈ features @ coef`` and clamp negative coefficients to 0.

    Returns a degenerate fit (all-ones coefficients) when the design matrix is
    rank deficient.
    """
    x = np.asarray(features, dtype=float)
    y = np.asarray(timings, dtype=float)
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ValueError("features must be a 2-d array with one row per timing")
    if np.linalg.matrix_rank(x) < x.shape[1]:
        warnings.warn("singular calibration system; falling back to unit constants", RuntimeWarning, stacklevel=2)
        return Fit(tuple([1.0] * x.shape[1]), 0.0, degenerate=True)
    coef, *_ = np.linalg.lstsq(x, y, rcond=None)
    coef = np.clip(coef, 0.0, None)
    resid = y - x @ coef
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return Fit(tuple(float(c) for c in coef), r2)


def fit_merge(n_cl, n_postings, timings) -> Fit:
    n_cl = np.asarray(n_cl, float)
    return fit_least_squares(np.column_stack([n_cl, np.asarray(n_postings, float), np.ones_like(n_cl)]), timings)


def fit_binary(n_cl, n_postings, timings) -> Fit:
    n_cl = np.asarray(n_cl, float)
    probe = n_cl * np.log2(np.asarray(n_postings, float) + 1)
    return fit_least_squares(np.column_stack([probe, np.ones_like(probe)]), timings)


def fit_direct(n_clp, n_eq, timings) -> Fit:
    pairs = np.asarray(n_clp, float) * np.asarray(n_eq, float)
    return fit_least_squares(np.column_stack([pairs, np.ones_like(pairs)]), timings)


def fit_verification(n_left, left_sum, n_right, right_sum, timings) -> Fit:
    a = np.asarray(n_right, float) * np.asarray(left_sum, float)
    b = np.asarray(n_left, float) * np.asarray(right_sum, float)
    return fit_least_squares(np.column_stack([a, b, np.ones_like(a)]), timings)


def _median_time(fn: Callable[[], object], repetitions: int, timer: Callable[[], float]) -> float:
    runs = []
    for _ in range(repetitions):
        t0 = timer()
        fn()
        runs.append(timer() - t0)
    return statistics.median(runs) * 1e6


def _random_sorted(rng: random.Random, n: int, universe: int) -> list[int]:
    return sorted(rng.sample(range(universe), n))


def calibrate(
    sizes: tuple[int, ...] = (64, 256, 1024, 2048, 4096),
    repetitions: int = 9,
    seed: int = 0,
    timer: Callable[[], float] = time.perf_counter,
) -> CalibrationResult:
    """Time each primitive over a ``sizes x sizes`` grid and fit its formula.

    Timings are medians over ``repetitions`` runs, in microseconds.
    """
    from setjoin.intersect import CandidateList, intersect_binary, intersect_merge
    from setjoin.join import verify

    if len(sizes) < 5 or repetitions < 1:
        raise ValueError("calibration needs at least 5 sizes per axis")
    rng = random.Random(seed)
    universe = 4 * max(sizes)
    lengths = [8] * universe

    rows_i: list[tuple[int, int, float, float]] = []
    for n_cl in sizes:
        for n_p in sizes:
            cl = CandidateList(_random_sorted(rng, n_cl, universe))
            postings = _random_sorted(rng, n_p, universe)
            t_merge = _median_time(lambda: intersect_merge(cl, postings, 1, lengths), repetitions, timer)
            t_bin = _median_time(lambda: intersect_binary(cl, postings, 1, lengths), repetitions, timer)
            rows_i.append((n_cl, n_p, t_merge, t_bin))
    n_cl_v, n_p_v, t_m, t_b = (list(c) for c in zip(*rows_i))
    merge = fit_merge(n_cl_v, n_p_v, t_m)
    binary = fit_binary(n_cl_v, n_p_v, t_b)

    pair_sizes = [max(1, s // 64) for s in sizes]
    rows_d = []
    for n in pair_sizes:
        for m in pair_sizes:
            cl_oids = list(range(n))
            eq = list(range(m))

            def emit():
                out = []
                for r in eq:
                    for s in cl_oids:
                        out.append((r, s))
                return out

            rows_d.append((n, m, _median_time(emit, repetitions, timer)))
    direct = fit_direct(*zip(*rows_d))

    suffix_lengths = (1, 2, 4, 8, 16)
    rows_v = []
    for n_left, r_suf in zip(pair_sizes, suffix_lengths):
        for n_right, s_suf in zip(pair_sizes, suffix_lengths):
            # containment fails at a random point of the scan
            lefts = [_synthetic_object(rng, r_suf, 40) for _ in range(n_left)]
            rights = [_synthetic_object(rng, s_suf, 40) for _ in range(n_right)]
            left_sum = n_left * r_suf
            right_sum = n_right * s_suf

            def run():
                for r in lefts:
                    for s in rights:
                        verify(r, s, 0)

            rows_v.append((n_left, left_sum, n_right, right_sum, _median_time(run, repetitions, timer)))
    verification = fit_verification(*zip(*rows_v))

    fits = {"merge": merge, "binary": binary, "direct": direct, "verification": verification}
    vals = dict(
        a1=merge.coefficients[0], b1=merge.coefficients[1], g1=merge.coefficients[2],
        a2=binary.coefficients[0], b2=binary.coefficients[1],
        a3=direct.coefficients[0], b3=direct.coefficients[1],
        a4=verification.coefficients[0], b4=verification.coefficients[1], g4=verification.coefficients[2],
    )
    for fit_name, names in (("merge", ("a1", "b1", "g1")), ("binary", ("a2", "b2")),
                            ("direct", ("a3", "b3")), ("verification", ("a4", "b4", "g4"))):
        if fits[fit_name].degenerate:
            for n in names:
                vals[n] = getattr(DEFAULT_CONSTANTS, n)
    for name, fit in fits.items():
        logger.info("calibrated %s: coef=%s R^2=%.4f", name, fit.coefficients, fit.r2)
    return CalibrationResult(CostConstants(**vals), fits)


def _synthetic_object(rng: random.Random, length: int, universe: int):
    from setjoin.core import SetObject

    keys = tuple(sorted(rng.sample(range(universe), length)))
    return SetObject(0, keys, keys)
