import logging

import pytest

from setjoin import core
from setjoin.costmodel import CostConstants
from setjoin.join import ConfigError, JoinConfig, _Joiner, join_collections, set_containment_join, verify
from setjoin.oracle import brute_force_join

from conftest import r, s

DEC = dict(ordering=core.DECREASING)


def run(toy_decreasing, **kw):
    d, left, right = toy_decreasing
    return join_collections(left, right, JoinConfig(**{"paradigm": "bulk", **kw}), d)


def test_verify_examples(toy_decreasing):
    _, left, right = toy_decreasing
    assert not verify(left[r(1)], right[s(2)], 3)
    assert verify(left[r(5)], right[s(12)], 2)
    assert verify(left[r(4)], right[s(6)], 1)


def test_pretti_emits_gfe_pairs(toy_decreasing):
    out = run(toy_decreasing, algorithm="pretti")
    gfe = {(r(5), x) for x in map(s, (2, 5, 9, 10, 12))} | {(r(7), x) for x in map(s, (2, 5, 9, 10, 12))}
    assert gfe <= set(out.pairs)
    assert (r(4), s(6)) in out.pairs and (r(6), s(2)) in out.pairs
    assert out.n_candidates_direct == out.n_results == 16
    assert out.n_candidates_verified == 0


def test_limit_counts(toy_decreasing):
    for limit, inter, verified in ((2, 4, 37), (3, 8, 10)):
        out = run(toy_decreasing, algorithm="limit", limit=limit)
        assert (out.n_results, out.n_intersections, out.n_candidates_verified) == (16, inter, verified)
        assert out.n_results <= out.n_candidates_direct + out.n_candidates_verified


def test_limit_at_max_len_degenerates(toy_decreasing):
    for faithful in (False, True):
        p = run(toy_decreasing, algorithm="pretti", faithful=faithful)
        lim = run(toy_decreasing, algorithm="limit", limit=5, faithful=faithful)
        assert lim.n_candidates_verified == 0
        assert lim.n_intersections == p.n_intersections


def test_limit_plus_example_trace(toy_decreasing, monkeypatch):
    d, _, _ = toy_decreasing
    seen = {}
    original = _Joiner._continue_as_limit

    def record(self, node, cl, n_s):
        choice = original(self, node, cl, n_s)
        seen[(node.depth, d.id_to_token[node.item], len(cl.oids))] = "A" if choice else "B"
        return choice

    monkeypatch.setattr(_Joiner, "_continue_as_limit", record)
    out = run(toy_decreasing, algorithm="limit_plus", limit=3, intersect="merge",
              constants=CostConstants(a1=8, b1=8))
    assert seen[(1, "G", 12)] == "A"
    assert seen[(2, "F", 9)] == "B"
    assert out.n_results == 16
    # GF verifies {r1, r2, r5, r7} x the 9 objects holding G, the rest
    # of the B nodes add GD (1 x 9), F (1 x 12) and E (1 x 12)
    assert out.n_candidates_verified == 36 + 9 + 12 + 12


def test_limit_plus_forced_a_matches_limit(toy_decreasing):
    zero = CostConstants(**{n: 0.0 for n in CostConstants().as_dict()})
    for limit in (2, 3):
        a = run(toy_decreasing, algorithm="limit_plus", limit=limit, constants=zero)
        b = run(toy_decreasing, algorithm="limit", limit=limit)
        assert a.counters() == b.counters()
        assert a.n_strategy_b == 0


def test_limit_plus_forced_b(toy_decreasing):
    free_verify = CostConstants(a4=0, b4=0, g4=0)
    out = run(toy_decreasing, algorithm="limit_plus", limit=3, constants=free_verify)
    assert out.n_intersections <= 3
    assert out.n_strategy_a == 0 and out.n_results == 16
    degenerate = CostConstants(a1=2, b1=2, a2=2, a4=0, b4=0, g4=1)
    out = run(toy_decreasing, algorithm="limit_plus", limit=3, constants=degenerate)
    assert out.n_strategy_a == 0


def test_opj_matches_bulk_and_stops_early(toy_decreasing):
    d, left, right = toy_decreasing
    for cfg, inter in ((JoinConfig(algorithm="pretti", paradigm="opj", faithful=True, **DEC), 15),
                       (JoinConfig(algorithm="limit", paradigm="opj", limit=2, **DEC), 4),
                       (JoinConfig(algorithm="limit", paradigm="opj", limit=3, **DEC), 8)):
        out = join_collections(left, right, cfg, d)
        assert out.n_intersections == inter
        assert out.pairs == brute_force_join(left, right)
        indexed = [d.id_to_token[i] for i in out.indexed_partitions]
        assert indexed == ["G", "F"]


def test_opj_uses_less_memory(toy_decreasing):
    bulk = run(toy_decreasing, algorithm="pretti")
    d, left, right = toy_decreasing
    opj = join_collections(left, right, JoinConfig(algorithm="pretti", paradigm="opj"), d)
    assert opj.peak_logical_bytes < bulk.peak_logical_bytes


def test_config_conflicts():
    with pytest.raises(ConfigError):
        JoinConfig(algorithm="pretti", limit=3)
    with pytest.raises(ConfigError):
        JoinConfig(algorithm="limit", limit=2, limit_strategy="avg")
    with pytest.raises(ConfigError):
        JoinConfig(algorithm="limit", limit=0)
    with pytest.raises(ConfigError):
        JoinConfig(intersect="galloping")


def test_empty_left_objects(caplog):
    left = [[], ["a"]]
    right = [["a", "b"], []]
    with caplog.at_level(logging.WARNING):
        out = set_containment_join(left, right)
    assert out.pairs == [(1, 0)]
    assert "empty" in caplog.text
    out = set_containment_join(left, right, JoinConfig(keep_empty=True))
    assert out.pairs == [(0, 0), (0, 1), (1, 0)]
    assert out.n_candidates_direct >= 2


def test_degenerate_inputs():
    assert set_containment_join([], [["a"]]).n_results == 0
    assert set_containment_join([["a"]], []).n_results == 0
    out = set_containment_join([[]], [[]], JoinConfig(keep_empty=True))
    assert out.pairs == [(0, 0)]


def test_count_only_has_no_pairs(toy):
    out = set_containment_join(*toy, JoinConfig(count_only=True))
    assert out.pairs is None and out.n_results == 16


def test_deep_objects_do_not_hit_recursion_limit():
    long = [list(range(3000))]
    out = set_containment_join(long, long, JoinConfig(algorithm="pretti", paradigm="bulk"))
    assert out.pairs == [(0, 0)]
