"""Acceptance gate: the twelve criteria at their stated tolerances.

Each test records a PASS/FAIL/SKIP/LOGGED line, printed at the end of the
run under "acceptance criteria".
"""

import contextlib
import itertools
import os
import time
from pathlib import Path

import pytest

from setjoin import core
from setjoin.datasets import GenSpec, generate_synthetic, read_transactions
from setjoin.estimate import estimate_all
from setjoin.intersect import candidates, intersect_binary, intersect_hybrid, intersect_merge
from setjoin.join import JoinConfig, join_collections
from setjoin.oracle import brute_force_join

from conftest import CRITERIA, random_instance

INF = 1_000_000  # stands in for an unlimited tree
LIMITS = (1, 2, 3, INF)


@contextlib.contextmanager
def criterion(n, title):
    t0 = time.perf_counter()
    detail = {}
    try:
        yield detail
    except pytest.skip.Exception as exc:
        CRITERIA[n] = f"[{n:>2}] SKIP    {title}: {exc}"
        raise
    except BaseException as exc:
        CRITERIA[n] = f"[{n:>2}] FAIL    {title}: {type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
        print(CRITERIA[n])
        raise
    status = detail.pop("_status", "PASS")
    extra = ", ".join(f"{k}={v}" for k, v in detail.items())
    CRITERIA[n] = f"[{n:>2}] {status:<7} {title} ({time.perf_counter() - t0:.2f} s{', ' + extra if extra else ''})"
    print(CRITERIA[n])


def fixture_join(toy, **kw):
    d, left, right = core.prepare(*toy, core.DECREASING, core.UNION)
    cfg = JoinConfig(**{"ordering": core.DECREASING, **kw})
    return join_collections(left, right, cfg, d), (d, left, right)


def all_configs():
    algos = [dict(algorithm="pretti")]
    algos += [dict(algorithm="limit", limit=x) for x in LIMITS]
    algos += [dict(algorithm="limit_plus", limit=x) for x in LIMITS]
    algos += [dict(algorithm="limit_plus", limit_strategy="frq")]
    for a, paradigm, ordering, method in itertools.product(
            algos, ("bulk", "opj"), (core.INCREASING, core.DECREASING), ("merge", "binary", "hybrid")):
        yield JoinConfig(paradigm=paradigm, ordering=ordering, intersect=method, keep_empty=True, **a)


INSTANCES = [random_instance(seed) for seed in range(200)]


def run_raw(left, right, cfg):
    try:
        d, lc, rc = core.prepare(left, right, cfg.ordering, cfg.freq_source)
    except core.DomainError:
        from setjoin.join import set_containment_join

        return set_containment_join(left, right, cfg)
    return join_collections(lc, rc, cfg, d)


def test_c01_pretti_toy(toy):
    with criterion(1, "PRETTI faithful on the fixture: 16 results, 15 intersections"):
        t0 = time.perf_counter()
        out, _ = fixture_join(toy, algorithm="pretti", paradigm="bulk", faithful=True)
        assert (out.n_results, out.n_intersections) == (16, 15)
        assert out.pairs == brute_force_join(*toy)
        assert time.perf_counter() - t0 < 1


@pytest.mark.parametrize("limit,inter,verified", [(2, 4, 37), (3, 8, 10)])
def test_c02_c03_limit_toy(toy, limit, inter, verified):
    n = 2 if limit == 2 else 3
    with criterion(n, f"LIMIT l={limit} on the fixture: {inter} intersections, {verified} verified, 16 results"):
        t0 = time.perf_counter()
        out, _ = fixture_join(toy, algorithm="limit", paradigm="bulk", limit=limit)
        assert (out.n_intersections, out.n_candidates_verified, out.n_results) == (inter, verified, 16)
        assert time.perf_counter() - t0 < 1


def test_c04_opj_equality(toy):
    with criterion(4, "OPJ equals bulk on the fixture and never indexes S_D"):
        expected = brute_force_join(*toy)
        cases = [(dict(algorithm="pretti", faithful=True), 15),
                 (dict(algorithm="limit", limit=2), 4),
                 (dict(algorithm="limit", limit=3), 8)]
        for kw, inter in cases:
            bulk, _ = fixture_join(toy, paradigm="bulk", **kw)
            opj, (d, _, _) = fixture_join(toy, paradigm="opj", **kw)
            assert opj.pairs == bulk.pairs == expected
            assert opj.n_intersections == bulk.n_intersections == inter
            assert d.token_to_id["D"] not in opj.indexed_partitions


def test_c05_oracle_sweep():
    with criterion(5, "oracle equivalence, 200 instances x all configurations") as info:
        t0 = time.perf_counter()
        configs = list(all_configs())
        runs = 0
        for seed, (left, right) in enumerate(INSTANCES):
            expected = brute_force_join(left, right)
            for cfg in configs:
                out = run_raw(left, right, cfg)
                assert out.pairs == expected, f"seed {seed}, {cfg}"
                runs += 1
        elapsed = time.perf_counter() - t0
        info["joins"] = runs
        assert elapsed < 60, f"took {elapsed:.1f} s"


def test_c06_kernel_equivalence():
    import random

    with criterion(6, "merge, binary and hybrid agree on 1,000 random list pairs"):
        rng = random.Random(6)
        lengths = [rng.randint(1, 20) for _ in range(5000)]
        for _ in range(1000):
            a = sorted(rng.sample(range(5000), rng.randint(0, 300)))
            b = sorted(rng.sample(range(5000), rng.choice((0, 3, 40, 300, 2000))))
            depth = rng.randint(1, 4)
            cl = candidates(a, depth - 1, lengths)
            outs = [k(cl, b, depth, lengths) for k in (intersect_merge, intersect_binary, intersect_hybrid)]
            assert len({tuple(o.oids) for o in outs}) == 1
            assert len({o.suffix_sum for o in outs}) == 1


def test_c07_degeneration(toy):
    with criterion(7, "LIMIT with l >= max|r| matches PRETTI (fixture + 20 instances)"):
        for faithful in (False, True):
            p, (_, left, _) = fixture_join(toy, algorithm="pretti", paradigm="bulk", faithful=faithful)
            lim, _ = fixture_join(toy, algorithm="limit", paradigm="bulk", limit=left.stats.max_len,
                                  faithful=faithful)
            assert lim.n_candidates_verified == 0
            assert lim.n_intersections == p.n_intersections
        for left, right in INSTANCES[:20]:
            max_len = max((len(set(o)) for o in left), default=1) or 1
            for paradigm in ("bulk", "opj"):
                p = run_raw(left, right, JoinConfig(algorithm="pretti", paradigm=paradigm))
                lim = run_raw(left, right, JoinConfig(algorithm="limit", paradigm=paradigm, limit=max_len))
                assert lim.n_candidates_verified == 0
                assert lim.n_intersections == p.n_intersections


def test_c08_counter_monotonicity():
    with criterion(8, "n_int(LIMIT+) <= n_int(LIMIT) <= n_int(PRETTI) at equal l"):
        for left, right in INSTANCES:
            for paradigm, ordering, method in itertools.product(
                    ("bulk", "opj"), (core.INCREASING, core.DECREASING), ("merge", "binary", "hybrid")):
                common = dict(paradigm=paradigm, ordering=ordering, intersect=method, keep_empty=True)
                p = run_raw(left, right, JoinConfig(algorithm="pretti", **common)).n_intersections
                for limit in LIMITS:
                    lim = run_raw(left, right, JoinConfig(algorithm="limit", limit=limit, **common))
                    plus = run_raw(left, right, JoinConfig(algorithm="limit_plus", limit=limit, **common))
                    assert plus.n_intersections <= lim.n_intersections <= p


def test_c09_estimators(toy):
    with criterion(9, "fixture estimators AVG=3, MDN=3, W-AVG=4"):
        d, left, right = core.prepare(*toy)
        est = estimate_all(d, left, right)
        assert (est["avg"].value, est["mdn"].value, est["wavg"].value) == (3, 3, 4)


@pytest.fixture(scope="module")
def generated():
    raw = generate_synthetic(GenSpec(100_000, 10_000, 10, 0.5, seed=2024))
    return {key: core.prepare(raw, raw, *key) for key in [(core.INCREASING, core.UNION)]}


@pytest.mark.slow
def test_c10_memory(generated):
    with criterion(10, "OPJ+LIMIT+(FRQ) peak <= 0.8 x bulk PRETTI peak on 100K objects") as info:
        t0 = time.perf_counter()
        d, left, right = generated[(core.INCREASING, core.UNION)]
        bulk = join_collections(left, right, JoinConfig(algorithm="pretti", paradigm="bulk", count_only=True), d)
        best = join_collections(left, right, JoinConfig.best(count_only=True), d)
        assert best.n_results == bulk.n_results
        ratio = best.peak_logical_bytes / bulk.peak_logical_bytes
        info["ratio"] = f"{ratio:.3f}"
        info["limit"] = best.limit
        assert ratio <= 0.8
        assert time.perf_counter() - t0 < 120


@pytest.mark.slow
def test_c11_performance_direction(generated):
    with criterion(11, "timing direction on 100K objects (logged, not gated)") as info:
        d, left, right = generated[(core.INCREASING, core.UNION)]
        run = lambda **kw: join_collections(left, right, JoinConfig(count_only=True, **kw), d)  # noqa: E731
        bulk = run(algorithm="pretti", paradigm="bulk")
        opj = run(algorithm="pretti", paradigm="opj")
        plus = run(algorithm="limit_plus", paradigm="opj", limit_strategy="frq")
        info["bulk_pretti_ms"] = f"{bulk.join_time * 1e3:.0f}"
        info["opj_pretti_ms"] = f"{opj.join_time * 1e3:.0f}"
        info["opj_limit_plus_ms"] = f"{plus.join_time * 1e3:.0f}"
        info["opj<=bulk"] = opj.join_time <= bulk.join_time
        info["limit_plus<=pretti"] = plus.join_time <= opj.join_time
        info["_status"] = "LOGGED"


DATASETS = Path(os.environ.get("SETJOIN_DATASETS", Path(__file__).resolve().parent.parent / "datasets"))
# cardinality, domain size, avg length, weighted avg length, max length, AVG limit
TABLE = {
    "BMS-POS.dat": (515_597, 1_657, 63, 7, 164, 63),
    "kosarak.dat": (990_002, 41_270, 398, 9, 2_497, 398),
}


@pytest.mark.slow
def test_c12_real_datasets():
    with criterion(12, "real dataset statistics and AVG limits") as info:
        present = [n for n in sorted(TABLE) if (DATASETS / n).exists()]
        if not present:
            pytest.skip(f"none of {sorted(TABLE)} found in {DATASETS}")
        for name in present:
            raw = read_transactions(DATASETS / name)
            d, left, right = core.prepare(raw, raw)
            card, domain, avg, wavg, max_len, avg_limit = TABLE[name]
            st = left.stats
            assert (st.cardinality, st.domain_size, st.max_len) == (card, domain, max_len), name
            assert abs(round(st.avg_len) - avg) <= 1, f"{name}: avg_len {st.avg_len:.2f}"
            assert abs(round(st.weighted_avg_len) - wavg) <= 1, f"{name}: weighted_avg_len {st.weighted_avg_len:.2f}"
            assert estimate_all(d, left, right)["avg"].value == avg_limit, name
            info[name] = "ok"
