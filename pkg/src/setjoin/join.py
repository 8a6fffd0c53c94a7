"""Set containment join: PRETTI, LIMIT and LIMIT+ under the bulk and the
order-and-partition (OPJ) paradigms.

Counting conventions
--------------------
``n_intersections`` grows by one per executed ``CL ∩ I_S[item]``. At a child
of the root the candidate list is every indexed object, so the intersection
is the postings list itself and is skipped and not counted, unless
``faithful`` is set. ``faithful`` also keeps descending below nodes whose
candidate list came out empty.
"""

from __future__ import annotations

import logging
import sys
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

from setjoin import core
from setjoin.core import Collection, ItemDictionary, SetObject
from setjoin.costmodel import DEFAULT_CONSTANTS, CostConstants, decision_costs
from setjoin.estimate import STRATEGIES, estimate_limit
from setjoin.index import (
    InvertedIndex,
    PrefixTreeNode,
    build_inverted_index,
    build_prefix_tree,
    delete_subtree,
    extend_inverted_index,
)
from setjoin.intersect import METHODS, CandidateList, get_kernel, intersect_hybrid
from setjoin.metrics import NODE_BYTES, MemoryGauge, list_bytes

logger = logging.getLogger(__name__)

PRETTI = "pretti"
LIMIT = "limit"
LIMIT_PLUS = "limit_plus"
ALGORITHMS = (PRETTI, LIMIT, LIMIT_PLUS)
BULK = "bulk"
OPJ = "opj"
PARADIGMS = (BULK, OPJ)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class JoinConfig:
    algorithm: str = LIMIT_PLUS
    paradigm: str = OPJ
    ordering: str = core.INCREASING
    freq_source: str = core.UNION
    intersect: str = "hybrid"
    limit: Optional[int] = None
    limit_strategy: Optional[str] = None
    count_only: bool = False
    faithful: bool = False
    keep_empty: bool = False
    constants: CostConstants = DEFAULT_CONSTANTS
    frq_threshold_scale: float = 1.0

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}")
        if self.paradigm not in PARADIGMS:
            raise ConfigError(f"unknown paradigm {self.paradigm!r}")
        if self.ordering not in (core.INCREASING, core.DECREASING):
            raise ConfigError(f"unknown ordering {self.ordering!r}")
        if self.freq_source not in (core.LEFT_ONLY, core.UNION):
            raise ConfigError(f"unknown frequency source {self.freq_source!r}")
        if self.intersect not in METHODS:
            raise ConfigError(f"unknown intersection method {self.intersect!r}")
        if self.limit is not None and self.limit_strategy is not None:
            raise ConfigError("give either an explicit limit or a limit strategy, not both")
        if self.limit is not None and self.limit < 1:
            raise ConfigError("limit must be ≥ 1")
        if self.limit_strategy is not None and self.limit_strategy not in STRATEGIES:
            raise ConfigError(f"unknown limit strategy {self.limit_strategy!r}")
        if self.algorithm == PRETTI and (self.limit is not None or self.limit_strategy is not None):
            raise ConfigError("pretti runs on the unlimited prefix tree; drop the limit")

    @classmethod
    def best(cls, **overrides) -> "JoinConfig":
        """Fastest configuration reported for the method family."""
        base = dict(algorithm=LIMIT_PLUS, paradigm=OPJ, ordering=core.INCREASING,
                    freq_source=core.UNION, intersect="hybrid", limit_strategy="frq")
        base.update(overrides)
        return cls(**base)

    @classmethod
    def org_pretti(cls, **overrides) -> "JoinConfig":
        base = dict(algorithm=PRETTI, paradigm=BULK, ordering=core.DECREASING,
                    freq_source=core.LEFT_ONLY, intersect="hybrid")
        base.update(overrides)
        return cls(**base)

    @property
    def limit_label(self) -> str:
        if self.limit is not None:
            return "explicit"
        return self.limit_strategy or "unlimited"


@dataclass
class JoinOutput:
    pairs: Optional[list[tuple[int, int]]]
    n_results: int = 0
    n_intersections: int = 0
    n_candidates_direct: int = 0
    n_candidates_verified: int = 0
    build_time: float = 0.0
    join_time: float = 0.0
    peak_logical_bytes: int = 0
    limit: Optional[int] = None
    n_strategy_a: int = 0
    n_strategy_b: int = 0
    indexed_partitions: list[int] = field(default_factory=list)

    def counters(self) -> dict:
        return {
            "n_results": self.n_results,
            "n_intersections": self.n_intersections,
            "n_candidates_direct": self.n_candidates_direct,
            "n_candidates_verified": self.n_candidates_verified,
            "peak_logical_bytes": self.peak_logical_bytes,
        }


def verify(r: SetObject, s: SetObject, start_depth: int) -> bool:
    """Merge-scan check that ``r``'s items from ``start_depth`` on all occur in
    ``s`` from ``start_depth`` on. The first ``start_depth`` items of ``r``
    must already be known to lie in ``s``."""
    rk = r.keys
    sk = s.keys
    i = j = start_depth
    nr = len(rk)
    ns = len(sk)
    while i < nr:
        if nr - i > ns - j:
            return False
        x = rk[i]
        y = sk[j]
        if x == y:
            i += 1
            j += 1
        elif x > y:
            j += 1
        else:
            return False
    return True


class _Joiner:
    """State of one join run over a tree (or subtree) and an index."""

    def __init__(self, cfg: JoinConfig, index: InvertedIndex, limit: Optional[int], gauge: MemoryGauge, out: JoinOutput):
        self.cfg = cfg
        self.index = index
        self.limit = limit
        self.gauge = gauge
        self.out = out
        self.pairs = None if cfg.count_only else (out.pairs if out.pairs is not None else [])
        if cfg.intersect == "hybrid" and cfg.constants is not DEFAULT_CONSTANTS:
            k = cfg.constants
            self.kernel = lambda cl, p, d, lengths: intersect_hybrid(cl, p, d, lengths, k)
        else:
            self.kernel = get_kernel(cfg.intersect)
        self.faithful = cfg.faithful

    # -- helpers ---------------------------------------------------------

    def root_candidates(self) -> CandidateList:
        index = self.index
        return CandidateList(range(len(index.lengths)), index.total_len)

    def _intersect(self, node: PrefixTreeNode, cl: CandidateList) -> tuple[CandidateList, int]:
        """Return ``(CL', bytes charged to the gauge)``."""
        postings = self.index.get(node.item)
        if node.depth == 1 and not self.faithful:
            lengths = self.index.lengths
            return CandidateList(postings, sum(lengths[o] for o in postings) - len(postings)), 0
        self.out.n_intersections += 1
        clp = self.kernel(cl, postings, node.depth, self.index.lengths)
        nbytes = list_bytes(len(clp.oids))
        self.gauge.add(nbytes)
        return clp, nbytes

    def _emit_node(self, node: PrefixTreeNode, clp: CandidateList) -> None:
        oids = clp.oids
        if not oids:
            return
        out = self.out
        objects = self.index.objects
        if node.rl_eq:
            out.n_candidates_direct += len(node.rl_eq) * len(oids)
            out.n_results += len(node.rl_eq) * len(oids)
            if self.pairs is not None:
                right = [objects[s].oid for s in oids]
                for r in node.rl_eq:
                    self.pairs.extend((r.oid, s) for s in right)
        if node.rl_super:
            depth = node.depth
            out.n_candidates_verified += len(node.rl_super) * len(oids)
            for r in node.rl_super:
                self._verify_block(r, oids, depth)

    def _verify_block(self, r: SetObject, seqs: Sequence[int], start: int) -> None:
        objects = self.index.objects
        lengths = self.index.lengths
        need = len(r.keys)
        pairs = self.pairs
        hits = 0
        for seq in seqs:
            if lengths[seq] >= need and verify(r, objects[seq], start):
                hits += 1
                if pairs is not None:
                    pairs.append((r.oid, objects[seq].oid))
        self.out.n_results += hits

    # -- per-node processing ---------------------------------------------

    def process_node_limit(self, node: PrefixTreeNode, cl: CandidateList) -> None:
        clp, nbytes = self._intersect(node, cl)
        self._emit_node(node, clp)
        if clp.oids or self.faithful:
            for c in node.children:
                self.process_node_limit(c, clp)
        self.gauge.sub(nbytes)

    # an unlimited tree has no rl_super lists, so LIMIT's loop is PRETTI's
    process_node_pretti = process_node_limit

    def process_node_limit_plus(self, node: PrefixTreeNode, cl: CandidateList) -> None:
        index = self.index
        n_s = index.indexed_count
        strategy_a = n_s == 0 or self._continue_as_limit(node, cl, n_s)
        if strategy_a:
            self.out.n_strategy_a += 1
            clp, nbytes = self._intersect(node, cl)
            self._emit_node(node, clp)
            if clp.oids or self.faithful:
                for c in node.children:
                    self.process_node_limit_plus(c, clp)
            self.gauge.sub(nbytes)
            return
        self.out.n_strategy_b += 1
        objs = node.subtree_objects()
        self.out.n_candidates_verified += len(objs) * len(cl.oids)
        # only the parent's path is known to be contained in the candidates
        start = node.depth - 1
        for r in objs:
            self._verify_block(r, cl.oids, start)

    def _continue_as_limit(self, node: PrefixTreeNode, cl: CandidateList, n_s: int) -> bool:
        cost_a, cost_b = decision_costs(
            depth=node.depth,
            agg_count=node.agg_count,
            agg_len_sum=node.agg_len_sum,
            n_eq=len(node.rl_eq),
            n_cl=len(cl.oids),
            cl_suffix_sum=cl.suffix_sum,
            n_postings=len(self.index.get(node.item)),
            n_s=n_s,
            method=self.cfg.intersect,
            k=self.cfg.constants,
        )
        return cost_a <= cost_b

    def process(self, node: PrefixTreeNode, cl: CandidateList) -> None:
        if self.cfg.algorithm == LIMIT_PLUS:
            self.process_node_limit_plus(node, cl)
        else:
            self.process_node_limit(node, cl)


def resolve_limit(cfg: JoinConfig, dictionary: Optional[ItemDictionary], left: Collection, right: Collection) -> Optional[int]:
    if cfg.algorithm == PRETTI:
        return None
    if cfg.limit is not None:
        return cfg.limit
    if cfg.limit_strategy is None:
        return None
    nonempty = [o for o in left if o.keys]
    if not nonempty:
        return 1
    stats = core.collection_stats(nonempty)
    if dictionary is None:
        freq_left, freq_right = _item_frequencies(left, right)
    else:
        freq_left, freq_right = dictionary.freq_left, dictionary.freq_right
    est = estimate_limit(
        stats,
        cfg.limit_strategy,
        freq_left=freq_left,
        freq_right=freq_right,
        right_stats=right.stats if right.stats.cardinality else core.collection_stats(right.objects),
        constants=cfg.constants,
        threshold_scale=cfg.frq_threshold_scale,
    )
    return est.value


def _item_frequencies(left: Collection, right: Collection) -> tuple[list[int], list[int]]:
    n = 1 + max((max(o.items) for c in (left, right) for o in c if o.items), default=-1)
    fl = [0] * n
    fr = [0] * n
    for o in left:
        for i in o.items:
            fl[i] += 1
    for o in right:
        for i in o.items:
            fr[i] += 1
    return fl, fr


def _prepare_left(left: Collection, right: Collection, cfg: JoinConfig, out: JoinOutput) -> list[SetObject]:
    """Split off empty left objects; with keep_empty they match every right object."""
    nonempty = []
    empty = []
    for r in left:
        (nonempty if r.keys else empty).append(r)
    if empty and not cfg.keep_empty:
        logger.warning("dropping %d empty left object(s); pass keep_empty to join them", len(empty))
    elif empty:
        n = len(right)
        out.n_candidates_direct += n * len(empty)
        out.n_results += n * len(empty)
        if out.pairs is not None:
            for r in empty:
                out.pairs.extend((r.oid, s.oid) for s in right)
    return nonempty


def _finish(out: JoinOutput, gauge: MemoryGauge) -> JoinOutput:
    out.peak_logical_bytes = gauge.peak
    if out.pairs is not None:
        out.pairs.sort()
    return out


class _deep_recursion:
    def __init__(self, depth: int):
        self.depth = depth

    def __enter__(self):
        self.saved = sys.getrecursionlimit()
        sys.setrecursionlimit(max(self.saved, 2 * self.depth + 200))

    def __exit__(self, *exc):
        sys.setrecursionlimit(self.saved)


def join_bulk(left: Collection, right: Collection, cfg: JoinConfig, dictionary: Optional[ItemDictionary] = None) -> JoinOutput:
    """Build the whole (limited) tree and the whole index, then traverse."""
    out = JoinOutput(pairs=None if cfg.count_only else [])
    limit = resolve_limit(cfg, dictionary, left, right)
    out.limit = limit
    gauge = MemoryGauge()
    t0 = time.perf_counter()
    lefts = _prepare_left(left, right, cfg, out)
    tree = build_prefix_tree(lefts, limit, gauge)
    index = build_inverted_index(right.objects, gauge)
    t1 = time.perf_counter()
    out.build_time = t1 - t0
    if len(right) and tree.root.children:
        joiner = _Joiner(cfg, index, limit, gauge, out)
        root_cl = joiner.root_candidates()
        with _deep_recursion(max((len(r.keys) for r in lefts), default=0)):
            for c in tree.root.children:
                joiner.process(c, root_cl)
    out.join_time = time.perf_counter() - t1
    return _finish(out, gauge)


def opj_sequence(right_partitions: core.PartitionMap) -> dict[int, list[int]]:
    """Sequence numbers for right objects, assigned in partition order."""
    seqs: dict[int, list[int]] = {}
    nxt = 0
    for key in right_partitions.keys():
        part = right_partitions.get(key)
        seqs[key] = list(range(nxt, nxt + len(part)))
        nxt += len(part)
    return seqs


def join_opj(left: Collection, right: Collection, cfg: JoinConfig, dictionary: Optional[ItemDictionary] = None) -> JoinOutput:
    """Process items in rank order: per item, build the subtree of left objects
    starting with it, append right objects starting with it to the index,
    join, and drop the subtree. Stops once the left partitions run out."""
    out = JoinOutput(pairs=None if cfg.count_only else [])
    limit = resolve_limit(cfg, dictionary, left, right)
    out.limit = limit
    gauge = MemoryGauge()
    build = 0.0
    joining = 0.0

    t0 = time.perf_counter()
    lefts = _prepare_left(left, right, cfg, out)
    left_parts = core.partition_by_first_item(lefts)
    right_parts = core.partition_by_first_item(right.objects)
    seqs = opj_sequence(right_parts)
    index = InvertedIndex(gauge)
    build += time.perf_counter() - t0
    if not left_parts.partitions or not len(right):
        out.build_time = build
        return _finish(out, gauge)

    joiner = _Joiner(cfg, index, limit, gauge, out)
    last = max(left_parts.partitions)
    keys = sorted(k for k in set(left_parts.partitions) | set(right_parts.partitions) if k <= last)
    with _deep_recursion(max((len(r.keys) for r in lefts), default=0)):
        for key in keys:
            t0 = time.perf_counter()
            r_part = left_parts.get(key)
            tree = build_prefix_tree(r_part, limit, gauge) if r_part else None
            s_part = right_parts.get(key)
            if s_part:
                extend_inverted_index(index, s_part, seqs[key])
                out.indexed_partitions.append(s_part[0].items[0])
            t1 = time.perf_counter()
            build += t1 - t0
            if tree is None:
                continue
            child = tree.root.children[0]
            if index.indexed_count:
                joiner.process(child, joiner.root_candidates())
            delete_subtree(tree, child)
            gauge.sub(NODE_BYTES)  # the subtree's virtual root
            joining += time.perf_counter() - t1
    out.build_time = build
    out.join_time = joining
    return _finish(out, gauge)


def join_collections(left: Collection, right: Collection, cfg: JoinConfig, dictionary: Optional[ItemDictionary] = None) -> JoinOutput:
    if cfg.paradigm == OPJ:
        return join_opj(left, right, cfg, dictionary)
    return join_bulk(left, right, cfg, dictionary)


def set_containment_join(left_raw, right_raw, cfg: Optional[JoinConfig] = None) -> JoinOutput:
    """Encode two raw token collections under ``cfg``'s ordering and join them.

    Pair ids are positions in the raw inputs.
    """
    cfg = cfg or JoinConfig()
    try:
        dictionary, left, right = core.prepare(left_raw, right_raw, cfg.ordering, cfg.freq_source)
    except core.DomainError as exc:
        if str(exc) != "empty domain":
            raise
        # nothing but empty objects on either side
        left = core.Collection("left", tuple(core.SetObject(i, (), ()) for i in range(len(left_raw))))
        right = core.Collection("right", tuple(core.SetObject(i, (), ()) for i in range(len(right_raw))))
        out = JoinOutput(pairs=None if cfg.count_only else [])
        _prepare_left(left, right, cfg, out)
        return _finish(out, MemoryGauge())
    return join_collections(left, right, cfg, dictionary)
