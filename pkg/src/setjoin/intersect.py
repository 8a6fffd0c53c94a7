"""Candidate-list intersection kernels.

All kernels take a candidate list, an ascending postings list, the depth the
result will sit at and a per-oid length table, and return a new
:class:`CandidateList` whose ``suffix_sum`` is ``sum(max(0, len(s) - depth))``
over the surviving oids. The three kernels produce identical output.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from typing import Sequence

from setjoin.costmodel import DEFAULT_CONSTANTS, CostConstants, cost_intersection

MERGE = "merge"
BINARY = "binary"
HYBRID = "hybrid"
METHODS = (MERGE, BINARY, HYBRID)


@dataclass(frozen=True)
class CandidateList:
    oids: Sequence[int]
    suffix_sum: int = 0

    def __len__(self) -> int:
        return len(self.oids)


def suffix_sum(oids: Sequence[int], depth: int, lengths: Sequence[int]) -> int:
    total = 0
    for o in oids:
        n = lengths[o] - depth
        if n > 0:
            total += n
    return total


def candidates(oids: Sequence[int], depth: int, lengths: Sequence[int]) -> CandidateList:
    return CandidateList(oids, suffix_sum(oids, depth, lengths))


def intersect_merge(cl: CandidateList, postings: Sequence[int], depth: int, lengths: Sequence[int]) -> CandidateList:
    a = cl.oids
    b = postings
    out = []
    i = j = 0
    na, nb = len(a), len(b)
    total = 0
    while i < na and j < nb:
        x = a[i]
        y = b[j]
        if x == y:
            out.append(x)
            n = lengths[x] - depth
            if n > 0:
                total += n
            i += 1
            j += 1
        elif x < y:
            i += 1
        else:
            j += 1
    return CandidateList(out, total)


def intersect_binary(cl: CandidateList, postings: Sequence[int], depth: int, lengths: Sequence[int]) -> CandidateList:
    out = []
    total = 0
    lo = 0
    hi = len(postings)
    for x in cl.oids:
        # cl is ascending, so the search window only ever moves right
        lo = bisect_left(postings, x, lo, hi)
        if lo == hi:
            break
        if postings[lo] == x:
            out.append(x)
            n = lengths[x] - depth
            if n > 0:
                total += n
            lo += 1
    return CandidateList(out, total)


def choose_kernel(n_cl: int, n_postings: int, constants: CostConstants = DEFAULT_CONSTANTS) -> str:
    """Pick binary probing when its modelled cost is strictly lower.

    With the default unit constants this is the rule
    ``n_cl * log2(n_postings + 1) < n_cl + n_postings``.
    """
    if constants is DEFAULT_CONSTANTS:
        return BINARY if n_cl * math.log2(n_postings + 1) < n_cl + n_postings else MERGE
    binary = cost_intersection(n_cl, n_postings, BINARY, constants)
    merge = cost_intersection(n_cl, n_postings, MERGE, constants)
    return BINARY if binary < merge else MERGE


def intersect_hybrid(
    cl: CandidateList,
    postings: Sequence[int],
    depth: int,
    lengths: Sequence[int],
    constants: CostConstants = DEFAULT_CONSTANTS,
) -> CandidateList:
    if choose_kernel(len(cl.oids), len(postings), constants) == BINARY:
        return intersect_binary(cl, postings, depth, lengths)
    return intersect_merge(cl, postings, depth, lengths)


KERNELS = {
    MERGE: intersect_merge,
    BINARY: intersect_binary,
    HYBRID: intersect_hybrid,
}


def get_kernel(method: str):
    try:
        return KERNELS[method]
    except KeyError:
        raise ValueError(f"unknown intersection method {method!r}") from None
