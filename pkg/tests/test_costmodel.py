import itertools
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from setjoin.costmodel import (
    CostConstants,
    calibrate,
    cost_intersection,
    cost_verification,
    decision_costs,
    dumps_constants,
    fit_least_squares,
    fit_merge,
    loads_constants,
)

sizes = st.integers(0, 10_000)


@given(sizes, sizes, st.integers(1, 100), st.sampled_from(["merge", "binary", "hybrid"]))
def test_intersection_cost_monotone(n_cl, n_p, step, method):
    base = cost_intersection(n_cl, n_p, method)
    assert cost_intersection(n_cl + step, n_p, method) >= base
    assert cost_intersection(n_cl, n_p + step, method) >= base
    assert cost_intersection(n_cl, n_p, "hybrid") <= min(
        cost_intersection(n_cl, n_p, "merge"), cost_intersection(n_cl, n_p, "binary"))


@given(sizes, sizes, sizes, sizes, st.integers(1, 100))
def test_verification_cost_monotone(nl, ls, nr, rs, step):
    base = cost_verification(nl, ls, nr, rs)
    assert cost_verification(nl + step, ls, nr, rs) >= base
    assert cost_verification(nl, ls + step, nr, rs) >= base
    assert cost_verification(nl, ls, nr + step, rs) >= base
    assert cost_verification(nl, ls, nr, rs + step) >= base


def test_decision_costs_example_nodes():
    # node G of the toy collections under limit 3, merge constants 8
    k = CostConstants(a1=8, b1=8)
    a, b = decision_costs(depth=1, agg_count=5, agg_len_sum=18, n_eq=0, n_cl=12, cl_suffix_sum=47,
                          n_postings=9, n_s=12, method="merge", k=k)
    assert (a, b) == (pytest.approx(21 * 8 + 248.25), pytest.approx(451))
    assert a <= b


def test_constants_validation_and_roundtrip():
    with pytest.raises(ValueError):
        CostConstants(a1=-1)
    with pytest.raises(ValueError):
        CostConstants(b1=math.inf)
    k = CostConstants(a1=2.5, g4=0.125)
    assert loads_constants("# host x\n" + dumps_constants(k)) == k
    with pytest.raises(ValueError):
        loads_constants("zz=1\n")


def test_fit_recovers_synthetic_merge_constants():
    grid = [64, 256, 1024, 2048, 4096]
    pairs = list(itertools.product(grid, grid))
    cl, il = zip(*pairs)
    t = [2 * a + 3 * b for a, b in pairs]
    fit = fit_merge(cl, il, t)
    a, b, g = fit.coefficients
    assert a == pytest.approx(2, rel=0.05)
    assert b == pytest.approx(3, rel=0.05)
    assert abs(g) < 0.05 * 3 * 64
    assert fit.r2 == pytest.approx(1.0)


def test_fit_constant_timings():
    grid = [64, 256, 1024, 2048, 4096]
    pairs = list(itertools.product(grid, grid))
    cl, il = zip(*pairs)
    fit = fit_merge(cl, il, [7.0] * len(pairs))
    a, b, g = fit.coefficients
    assert a == pytest.approx(0, abs=1e-6) and b == pytest.approx(0, abs=1e-6)
    assert g == pytest.approx(7.0)


def test_fit_clamps_negative_and_flags_singular():
    x = np.column_stack([np.arange(1, 11), np.ones(10)])
    fit = fit_least_squares(x, 100 - 3 * np.arange(1, 11))
    assert all(c >= 0 for c in fit.coefficients)
    with pytest.warns(RuntimeWarning):
        fit = fit_least_squares(np.ones((5, 2)), np.ones(5))
    assert fit.degenerate and fit.coefficients == (1.0, 1.0)


def test_calibrate_on_host():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        result = calibrate(repetitions=3)
    for value in result.constants.as_dict().values():
        assert math.isfinite(value) and value >= 0
    assert "R^2" in result.report()
