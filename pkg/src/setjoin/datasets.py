"""Transaction files in FIMI layout and a seeded Zipfian generator.

A transaction file holds one object per line with whitespace-separated
tokens. Blank lines are empty objects and lines starting with ``#`` are
comments. Tokens stay strings; the dictionary encodes them later.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)

MAX_TOKENS = 1_000_000
BLOCK_SIZE = 4096
MAX_DEDUPE_ATTEMPTS = 50


class DatasetError(OSError):
    pass


def read_transactions(path: str | os.PathLike, max_tokens: int = MAX_TOKENS) -> list[list[str]]:
    """Parse a transaction file into a list of token lists, in file order."""
    objects: list[list[str]] = []
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if line.startswith("#"):
                    continue
                tokens = line.split()
                if len(tokens) > max_tokens:
                    raise DatasetError(f"{path}:{lineno}: line too long ({len(tokens)} tokens)")
                objects.append(tokens)
    except DatasetError:
        raise
    except (OSError, UnicodeDecodeError) as exc:
        raise DatasetError(f"{path}: {exc}") from exc
    return objects


def write_transactions(objects: Iterable[Sequence], path: str | os.PathLike) -> None:
    """Write one object per line, tokens separated by single spaces."""
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for obj in objects:
                fh.write(" ".join(str(t) for t in obj))
                fh.write("\n")
    except OSError as exc:
        raise DatasetError(f"{path}: {exc}") from exc


def bundled_path(name: str) -> Path:
    """Path of a dataset shipped inside the package (e.g. ``toy_R.dat``)."""
    return Path(__file__).with_name("data") / name


@dataclass(frozen=True)
class GenSpec:
    cardinality: int
    domain_size: int
    weighted_avg_len: float
    zipf: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.cardinality < 1:
            raise ValueError("cardinality must be ≥ 1")
        if self.domain_size < 1:
            raise ValueError("domain_size must be ≥ 1")
        if self.zipf < 0:
            raise ValueError("zipf must be ≥ 0")
        if self.weighted_avg_len < 1:
            raise ValueError("weighted_avg_len must be ≥ 1")


class ZipfSampler:
    """Bounded Zipf over ranks ``0..n-1``: P(k) ∝ (k+1)^-s, sampled by
    inverting the exact cumulative distribution."""

    def __init__(self, n: int, s: float):
        weights = np.arange(1, n + 1, dtype=np.float64) ** -float(s)
        cdf = np.cumsum(weights)
        self.cdf = cdf / cdf[-1]
        self.n = n

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        idx = np.searchsorted(self.cdf, rng.random(size), side="right")
        return np.minimum(idx, self.n - 1)


def length_parameter(weighted_avg_len: float) -> float:
    """Geometric success probability whose length-weighted mean is the target.

    For lengths L ~ Geometric(p) on 1, 2, ...: E[L²]/E[L] = (2 - p)/p.
    """
    return 2.0 / (weighted_avg_len + 1.0)


def _generate_block(spec: GenSpec, sampler: ZipfSampler, block: int, count: int) -> tuple[list[list[int]], int]:
    rng = np.random.default_rng([spec.seed, block])
    lengths = rng.geometric(length_parameter(spec.weighted_avg_len), size=count)
    truncated = int(np.count_nonzero(lengths > spec.domain_size))
    np.minimum(lengths, spec.domain_size, out=lengths)
    draws = sampler.sample(rng, int(lengths.sum())).tolist()
    out = []
    pos = 0
    for n in lengths.tolist():
        chosen = dict.fromkeys(draws[pos:pos + n])
        pos += n
        missing = n - len(chosen)
        if missing:
            for _ in range(missing):
                for _ in range(MAX_DEDUPE_ATTEMPTS):
                    item = int(sampler.sample(rng, 1)[0])
                    if item not in chosen:
                        chosen[item] = None
                        break
        out.append(list(chosen))
    return out, truncated


def generate_synthetic(spec: GenSpec, path: str | os.PathLike | None = None) -> list[list[int]]:
    """Objects of distinct integer items drawn from a Zipf(spec.zipf) law.

    Generation runs in fixed-size blocks, each seeded from ``(seed, block)``,
    so the output is a pure function of ``spec``.
    """
    sampler = ZipfSampler(spec.domain_size, spec.zipf)
    objects: list[list[int]] = []
    truncated = 0
    for block, start in enumerate(range(0, spec.cardinality, BLOCK_SIZE)):
        count = min(BLOCK_SIZE, spec.cardinality - start)
        part, cut = _generate_block(spec, sampler, block, count)
        objects.extend(part)
        truncated += cut
    if truncated:
        logger.warning("%d object length(s) exceeded the domain size %d and were truncated", truncated, spec.domain_size)
    if path is not None:
        write_transactions(objects, path)
    return objects
