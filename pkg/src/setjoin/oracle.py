"""Brute-force reference join.

Kept independent of the index and intersection code on purpose: objects are
compared as numerically sorted id tuples, so the result does not depend on
any item ordering.
"""

from __future__ import annotations

from typing import Iterable


def _subset(a: tuple, b: tuple) -> bool:
    if len(a) > len(b):
        return False
    j = 0
    nb = len(b)
    for x in a:
        while j < nb and b[j] < x:
            j += 1
        if j == nb or b[j] != x:
            return False
        j += 1
    return True


def _canon(objects: Iterable) -> list[tuple[int, tuple]]:
    out = []
    for pos, o in enumerate(objects):
        oid = getattr(o, "oid", pos)
        items = getattr(o, "items", o)
        out.append((oid, tuple(sorted(set(items)))))
    return out


def brute_force_join(left: Iterable, right: Iterable) -> list[tuple[int, int]]:
    """All ``(r.oid, s.oid)`` with ``r ⊆ s``, sorted.

    Accepts :class:`~setjoin.core.SetObject` sequences or plain sequences of
    comparable items (oids are then positions).
    """
    rights = _canon(right)
    pairs = []
    for r_oid, r in _canon(left):
        for s_oid, s in rights:
            if _subset(r, s):
                pairs.append((r_oid, s_oid))
    pairs.sort()
    return pairs
