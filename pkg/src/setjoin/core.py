"""Domain model: dictionary encoding, global item ordering, object sorting,
first-item partitioning and collection statistics.

Raw collections are plain sequences of token sequences (``list[list[str]]``
or anything iterable). Encoding goes through :class:`ItemDictionary`, which
assigns dense ids in order of first appearance (left collection first, then
right) and ranks them by object-level frequency.
"""

from __future__ import annotations

import logging
import statistics
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

logger = logging.getLogger(__name__)

INCREASING = "increasing"
DECREASING = "decreasing"
LEFT_ONLY = "left-only"
UNION = "union"

RawCollection = Sequence[Sequence[Hashable]]


class DomainError(ValueError):
    """Raised for malformed collections or items outside the dictionary."""


@dataclass(frozen=True)
class ItemDictionary:
    token_to_id: dict
    id_to_token: list
    freq_left: list[int]
    freq_right: list[int]
    freq_union: list[int]
    direction: str
    freq_source: str
    # order[k] is the id holding rank k; rank[i] is the rank of id i
    order: list[int]
    rank: list[int]

    @property
    def domain_size(self) -> int:
        return len(self.id_to_token)

    def encode(self, token) -> int:
        try:
            return self.token_to_id[token]
        except KeyError:
            raise DomainError(f"unknown item {token!r}") from None

    def tokens_in_rank_order(self) -> list:
        return [self.id_to_token[i] for i in self.order]


@dataclass(frozen=True, eq=False)
class SetObject:
    """One set object. ``items`` holds item ids in rank order and ``keys``
    the matching (strictly ascending) ranks, which every comparison uses."""

    oid: int
    items: tuple[int, ...]
    keys: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.keys)

    def __repr__(self) -> str:
        return f"SetObject({self.oid}, {list(self.items)})"


@dataclass(frozen=True)
class DatasetStats:
    cardinality: int = 0
    domain_size: int = 0
    avg_len: float = 0.0
    weighted_avg_len: float = 0.0
    median_len: float = 0.0
    max_len: int = 0
    total_len: int = 0

    def as_dict(self) -> dict:
        return {
            "cardinality": self.cardinality,
            "domain_size": self.domain_size,
            "avg_len": self.avg_len,
            "weighted_avg_len": self.weighted_avg_len,
            "median_len": self.median_len,
            "max_len": self.max_len,
        }


@dataclass(frozen=True)
class Collection:
    side: str
    objects: tuple[SetObject, ...]
    stats: DatasetStats = field(default_factory=DatasetStats)

    def __len__(self) -> int:
        return len(self.objects)

    def __iter__(self):
        return iter(self.objects)

    def __getitem__(self, oid: int) -> SetObject:
        return self.objects[oid]


@dataclass(frozen=True)
class PartitionMap:
    """Objects grouped by their rank-first item, keyed by that item's rank."""

    partitions: dict[int, tuple[SetObject, ...]]
    empty: tuple[SetObject, ...] = ()

    def __len__(self) -> int:
        return len(self.partitions)

    def get(self, key: int) -> tuple[SetObject, ...]:
        return self.partitions.get(key, ())

    def keys(self) -> list[int]:
        return sorted(self.partitions)


def _count(raw: RawCollection, token_to_id: dict, id_to_token: list, counts: list[int], other: list[int]) -> None:
    for obj in raw:
        for tok in dict.fromkeys(obj):
            i = token_to_id.get(tok)
            if i is None:
                i = token_to_id[tok] = len(id_to_token)
                id_to_token.append(tok)
                counts.append(0)
                other.append(0)
            counts[i] += 1


def build_dictionary(
    left: RawCollection,
    right: RawCollection,
    direction: str = INCREASING,
    freq_source: str = UNION,
) -> ItemDictionary:
    """Encode the tokens of both collections and rank them by frequency.

    Frequencies count objects containing an item. Ties are broken by the
    ascending item id regardless of ``direction``.
    """
    if direction not in (INCREASING, DECREASING):
        raise DomainError(f"unknown ordering direction {direction!r}")
    if freq_source not in (LEFT_ONLY, UNION):
        raise DomainError(f"unknown frequency source {freq_source!r}")

    token_to_id: dict = {}
    id_to_token: list = []
    freq_left: list[int] = []
    freq_right: list[int] = []
    _count(left, token_to_id, id_to_token, freq_left, freq_right)
    _count(right, token_to_id, id_to_token, freq_right, freq_left)
    if not id_to_token:
        raise DomainError("empty domain")

    freq_union = [a + b for a, b in zip(freq_left, freq_right)]
    freq = freq_union if freq_source == UNION else freq_left
    sign = 1 if direction == INCREASING else -1
    order = sorted(range(len(id_to_token)), key=lambda i: (sign * freq[i], i))
    rank = [0] * len(order)
    for k, i in enumerate(order):
        rank[i] = k
    return ItemDictionary(
        token_to_id=token_to_id,
        id_to_token=id_to_token,
        freq_left=freq_left,
        freq_right=freq_right,
        freq_union=freq_union,
        direction=direction,
        freq_source=freq_source,
        order=order,
        rank=rank,
    )


def make_object(oid: int, items: Iterable[int], dictionary: ItemDictionary) -> SetObject:
    """Build a sorted object from item ids (duplicates removed)."""
    rank = dictionary.rank
    n = len(rank)
    keys = set()
    for i in items:
        if not 0 <= i < n:
            raise DomainError(f"unknown item id {i}")
        keys.add(rank[i])
    keys = tuple(sorted(keys))
    order = dictionary.order
    return SetObject(oid, tuple(order[k] for k in keys), keys)


def sort_objects(raw: RawCollection, dictionary: ItemDictionary, side: str = "left") -> Collection:
    """Encode, deduplicate and rank-sort every object; object order is kept."""
    encode = dictionary.encode
    objects = tuple(
        make_object(oid, (encode(tok) for tok in obj), dictionary) for oid, obj in enumerate(raw)
    )
    return Collection(side, objects, collection_stats(objects))


def resort(collection: Collection, dictionary: ItemDictionary) -> Collection:
    """Re-sort an already encoded collection under another dictionary ranking."""
    objects = tuple(make_object(o.oid, o.items, dictionary) for o in collection)
    return Collection(collection.side, objects, collection.stats)


def partition_by_first_item(objects: Iterable[SetObject]) -> PartitionMap:
    groups: dict[int, list[SetObject]] = {}
    empty = []
    for o in objects:
        if not o.keys:
            empty.append(o)
            continue
        groups.setdefault(o.keys[0], []).append(o)
    return PartitionMap({k: tuple(v) for k, v in groups.items()}, tuple(empty))


def collection_stats(objects: Iterable[SetObject]) -> DatasetStats:
    lengths = []
    domain = set()
    for o in objects:
        lengths.append(len(o.keys))
        domain.update(o.keys)
    if not lengths:
        return DatasetStats()
    total = sum(lengths)
    squares = sum(n * n for n in lengths)
    return DatasetStats(
        cardinality=len(lengths),
        domain_size=len(domain),
        avg_len=total / len(lengths),
        weighted_avg_len=squares / total if total else 0.0,
        median_len=float(statistics.median(lengths)),
        max_len=max(lengths),
        total_len=total,
    )


def prepare(
    left: RawCollection,
    right: RawCollection,
    direction: str = INCREASING,
    freq_source: str = UNION,
) -> tuple[ItemDictionary, Collection, Collection]:
    """Dictionary-encode and sort both collections in one go."""
    dictionary = build_dictionary(left, right, direction, freq_source)
    return dictionary, sort_objects(left, dictionary, "left"), sort_objects(right, dictionary, "right")
