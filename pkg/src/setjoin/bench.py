"""Parameter sweeps over generated self-joins."""

from __future__ import annotations

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from setjoin import core
from setjoin.datasets import GenSpec, generate_synthetic
from setjoin.join import LIMIT, LIMIT_PLUS, OPJ, PRETTI, JoinConfig, join_collections
from setjoin.report import CSV_FIELDS, RunReport

AXES = ("limit", "cardinality", "domain", "wavg_len", "zipf")
SWEEP_FIELDS = ("axis", "value", "label") + CSV_FIELDS

DEFAULT_GEN = GenSpec(cardinality=20_000, domain_size=10_000, weighted_avg_len=10, zipf=0.5, seed=0)


def default_configs() -> dict[str, JoinConfig]:
    return {
        "pretti": JoinConfig(algorithm=PRETTI, paradigm="bulk", count_only=True),
        "pretti-opj": JoinConfig(algorithm=PRETTI, paradigm=OPJ, count_only=True),
        "limit": JoinConfig(algorithm=LIMIT, paradigm=OPJ, limit_strategy="frq", count_only=True),
        "limit_plus": JoinConfig(algorithm=LIMIT_PLUS, paradigm=OPJ, limit_strategy="frq", count_only=True),
    }


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple
    gen: GenSpec = DEFAULT_GEN
    configs: dict = field(default_factory=default_configs)

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"unknown sweep axis {self.axis!r}")
        if not self.values:
            raise ValueError("sweep needs at least one value")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("sweep values must be strictly increasing")

    def point(self, value) -> tuple[GenSpec, dict[str, JoinConfig]]:
        gen = self.gen
        configs = dict(self.configs)
        if self.axis == "cardinality":
            gen = replace(gen, cardinality=int(value))
        elif self.axis == "domain":
            gen = replace(gen, domain_size=int(value))
        elif self.axis == "wavg_len":
            gen = replace(gen, weighted_avg_len=float(value))
        elif self.axis == "zipf":
            gen = replace(gen, zipf=float(value))
        else:
            configs = {
                label: cfg if cfg.algorithm == PRETTI else replace(cfg, limit=int(value), limit_strategy=None)
                for label, cfg in configs.items()
            }
        return gen, configs


def run_point(spec: SweepSpec, value) -> list[dict]:
    gen, configs = spec.point(value)
    raw = generate_synthetic(gen)
    rows = []
    prepared = {}
    for label, cfg in configs.items():
        key = (cfg.ordering, cfg.freq_source)
        if key not in prepared:
            prepared[key] = core.prepare(raw, raw, cfg.ordering, cfg.freq_source)
        dictionary, left, right = prepared[key]
        out = join_collections(left, right, cfg, dictionary)
        row = RunReport(cfg, out).csv_row()
        row.update(axis=spec.axis, value=value, label=label)
        rows.append(row)
    return rows


def run_sweep(spec: SweepSpec, csv_path: Optional[str | os.PathLike] = None, workers: int = 1) -> list[dict]:
    """Run every (value, config) point; optionally append rows to ``csv_path``."""
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            per_point = list(pool.map(run_point, [spec] * len(spec.values), spec.values))
    else:
        per_point = [run_point(spec, v) for v in spec.values]
    rows = [r for pr in per_point for r in pr]
    if csv_path is not None:
        write_sweep_csv(rows, csv_path)
    return rows


def write_sweep_csv(rows: Sequence[dict], path: str | os.PathLike) -> None:
    fresh = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=SWEEP_FIELDS)
        if fresh:
            writer.writeheader()
        writer.writerows(rows)
