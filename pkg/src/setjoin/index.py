"""The (limited) prefix tree over the left collection and the inverted index
over the right collection.

Tree nodes keep objects rather than bare ids in their result lists, since
verification needs the items anyway; memory accounting still charges one id
per entry.
"""

from __future__ import annotations

from bisect import bisect_left
from typing import Iterable, Iterator, Optional, Sequence

from setjoin.core import SetObject
from setjoin.metrics import LIST_HEADER_BYTES, NODE_BYTES, OID_BYTES, POINTER_BYTES, MemoryGauge


class IndexBuildError(ValueError):
    pass


class PrefixTreeNode:
    __slots__ = (
        "item",
        "key",
        "depth",
        "children",
        "child_keys",
        "rl_eq",
        "rl_super",
        "agg_count",
        "agg_len_sum",
    )

    def __init__(self, item: Optional[int], key: int, depth: int) -> None:
        self.item = item
        self.key = key
        self.depth = depth
        self.children: list[PrefixTreeNode] = []
        self.child_keys: list[int] = []
        self.rl_eq: list[SetObject] = []
        self.rl_super: list[SetObject] = []
        self.agg_count = 0
        self.agg_len_sum = 0

    def child(self, key: int) -> Optional["PrefixTreeNode"]:
        i = bisect_left(self.child_keys, key)
        if i < len(self.child_keys) and self.child_keys[i] == key:
            return self.children[i]
        return None

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def suffix_sum(self, depth: Optional[int] = None) -> int:
        """Sum of ``|r| - depth`` over subtree objects (default: own depth)."""
        d = self.depth if depth is None else depth
        return max(0, self.agg_len_sum - self.agg_count * d)

    def subtree_objects(self) -> list[SetObject]:
        out = []
        stack = [self]
        while stack:
            n = stack.pop()
            out.extend(n.rl_eq)
            out.extend(n.rl_super)
            stack.extend(reversed(n.children))
        return out

    def iter_nodes(self) -> Iterator["PrefixTreeNode"]:
        stack = [self]
        while stack:
            n = stack.pop()
            yield n
            stack.extend(reversed(n.children))

    def nbytes(self) -> int:
        return NODE_BYTES + POINTER_BYTES * len(self.children) + OID_BYTES * (len(self.rl_eq) + len(self.rl_super))

    def __repr__(self) -> str:
        return f"<PrefixTreeNode item={self.item} depth={self.depth} eq={len(self.rl_eq)} super={len(self.rl_super)}>"


class PrefixTree:
    def __init__(self, limit: Optional[int] = None, gauge: Optional[MemoryGauge] = None) -> None:
        if limit is not None and limit < 1:
            raise IndexBuildError("limit must be ≥ 1")
        self.root = PrefixTreeNode(None, -1, 0)
        self.limit = limit
        self.object_count = 0
        self.node_count = 0
        self.gauge = gauge if gauge is not None else MemoryGauge()
        self.gauge.add(NODE_BYTES)

    def insert(self, obj: SetObject) -> None:
        keys = obj.keys
        n = len(keys)
        if n == 0:
            raise IndexBuildError(f"cannot index empty object {obj.oid}")
        stop = n if self.limit is None else min(n, self.limit)
        node = self.root
        items = obj.items
        gauge = self.gauge
        for d in range(stop):
            k = keys[d]
            ck = node.child_keys
            i = bisect_left(ck, k)
            if i < len(ck) and ck[i] == k:
                node = node.children[i]
            else:
                child = PrefixTreeNode(items[d], k, d + 1)
                ck.insert(i, k)
                node.children.insert(i, child)
                self.node_count += 1
                gauge.add(NODE_BYTES + POINTER_BYTES)
                node = child
        if stop == n:
            node.rl_eq.append(obj)
        else:
            node.rl_super.append(obj)
        gauge.add(OID_BYTES)
        self.object_count += 1

    def finalize(self) -> "PrefixTree":
        """Fill the per-subtree aggregates bottom-up."""
        order = list(self.root.iter_nodes())
        for n in reversed(order):
            count = len(n.rl_eq) + len(n.rl_super)
            total = sum(len(o.keys) for o in n.rl_eq) + sum(len(o.keys) for o in n.rl_super)
            for c in n.children:
                count += c.agg_count
                total += c.agg_len_sum
            n.agg_count = count
            n.agg_len_sum = total
        return self

    def nodes(self) -> Iterator[PrefixTreeNode]:
        it = self.root.iter_nodes()
        next(it)
        return it

    def find(self, items: Sequence[int]) -> Optional[PrefixTreeNode]:
        """Node whose path is ``items`` (item ids, in path order)."""
        node = self.root
        for i in items:
            nxt = None
            for c in node.children:
                if c.item == i:
                    nxt = c
                    break
            if nxt is None:
                return None
            node = nxt
        return node

    def __len__(self) -> int:
        return self.node_count


def build_prefix_tree(
    objects: Iterable[SetObject],
    limit: Optional[int] = None,
    gauge: Optional[MemoryGauge] = None,
) -> PrefixTree:
    """Insert every object along its sorted prefix, down to ``min(|r|, limit)``."""
    tree = PrefixTree(limit, gauge)
    for o in objects:
        tree.insert(o)
    return tree.finalize()


def delete_subtree(tree: PrefixTree, child: PrefixTreeNode) -> None:
    """Detach a root child and release its logical bytes; repeat calls are no-ops."""
    root = tree.root
    i = bisect_left(root.child_keys, child.key)
    if i >= len(root.child_keys) or root.children[i] is not child:
        return
    del root.children[i]
    del root.child_keys[i]
    freed = 0
    removed = 0
    for n in child.iter_nodes():
        # each node was charged with the parent's pointer to it
        freed += NODE_BYTES + POINTER_BYTES + OID_BYTES * (len(n.rl_eq) + len(n.rl_super))
        removed += 1
    tree.gauge.sub(freed)
    tree.node_count -= removed
    tree.object_count -= child.agg_count


class InvertedIndex:
    """Postings per item id over sequence numbers of the right collection.

    A sequence number is the object's oid for a bulk build; the OPJ driver
    assigns them in partition order so that appends keep postings sorted.
    ``objects[seq]`` maps back to the indexed object.
    """

    def __init__(self, gauge: Optional[MemoryGauge] = None) -> None:
        self.postings: dict[int, list[int]] = {}
        self.lengths: list[int] = []
        self.objects: list[Optional[SetObject]] = []
        self.indexed_count = 0
        self.total_len = 0
        self.last_seq = -1
        self.gauge = gauge if gauge is not None else MemoryGauge()

    _EMPTY: tuple = ()

    def get(self, item: int) -> Sequence[int]:
        return self.postings.get(item, self._EMPTY)

    def __getitem__(self, item: int) -> Sequence[int]:
        return self.get(item)

    def append(self, obj: SetObject, seq: Optional[int] = None) -> None:
        if seq is None:
            seq = obj.oid
        if seq <= self.last_seq:
            raise IndexBuildError(f"out-of-order append: {seq} after {self.last_seq}")
        gap = seq - len(self.lengths)
        if gap:
            self.lengths.extend([0] * gap)
            self.objects.extend([None] * gap)
        self.lengths.append(len(obj.keys))
        self.objects.append(obj)
        added = OID_BYTES * (gap + 1 + len(obj.items))
        postings = self.postings
        for i in obj.items:
            lst = postings.get(i)
            if lst is None:
                lst = postings[i] = []
                added += LIST_HEADER_BYTES
            lst.append(seq)
        self.gauge.add(added)
        self.last_seq = seq
        self.indexed_count += 1
        self.total_len += len(obj.keys)

    def all_seqs(self) -> list[int]:
        return [i for i, o in enumerate(self.objects) if o is not None]


def extend_inverted_index(
    index: InvertedIndex,
    partition: Iterable[SetObject],
    seqs: Optional[Iterable[int]] = None,
) -> InvertedIndex:
    if seqs is None:
        for o in partition:
            index.append(o)
    else:
        for o, seq in zip(partition, seqs, strict=True):
            index.append(o, seq)
    return index


def build_inverted_index(objects: Iterable[SetObject], gauge: Optional[MemoryGauge] = None) -> InvertedIndex:
    return extend_inverted_index(InvertedIndex(gauge), objects)
