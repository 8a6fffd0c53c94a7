"""Run reports as JSON documents or CSV rows."""

from __future__ import annotations

import csv
import json
import os
from dataclasses import asdict, dataclass, field
from typing import Optional

from setjoin.core import DatasetStats
from setjoin.join import JoinConfig, JoinOutput

CSV_FIELDS = (
    "algorithm",
    "paradigm",
    "ordering",
    "freq_source",
    "intersect",
    "limit_strategy",
    "limit_value",
    "n_results",
    "n_intersections",
    "n_candidates_direct",
    "n_candidates_verified",
    "build_ms",
    "join_ms",
    "peak_logical_bytes",
)


class ReportError(OSError):
    pass


@dataclass
class RunReport:
    config: JoinConfig
    output: JoinOutput
    left_stats: Optional[DatasetStats] = None
    right_stats: Optional[DatasetStats] = None
    extra: dict = field(default_factory=dict)

    def config_dict(self) -> dict:
        cfg = asdict(self.config)
        cfg["constants"] = self.config.constants.as_dict()
        return cfg

    def to_dict(self) -> dict:
        out = self.output
        doc = {
            "config": self.config_dict(),
            "limit_value": out.limit,
            "counters": out.counters(),
            "timings": {"build_ms": out.build_time * 1e3, "join_ms": out.join_time * 1e3},
            "strategy_counts": {"a": out.n_strategy_a, "b": out.n_strategy_b},
            "indexed_partitions": out.indexed_partitions,
            "left_stats": self.left_stats.as_dict() if self.left_stats else None,
            "right_stats": self.right_stats.as_dict() if self.right_stats else None,
        }
        if self.extra:
            doc["extra"] = self.extra
        if out.pairs is not None:
            doc["pairs"] = [list(p) for p in out.pairs]
        return doc

    def csv_row(self) -> dict:
        cfg = self.config
        out = self.output
        return {
            "algorithm": cfg.algorithm,
            "paradigm": cfg.paradigm,
            "ordering": cfg.ordering,
            "freq_source": cfg.freq_source,
            "intersect": cfg.intersect,
            "limit_strategy": cfg.limit_label,
            "limit_value": "" if out.limit is None else out.limit,
            "n_results": out.n_results,
            "n_intersections": out.n_intersections,
            "n_candidates_direct": out.n_candidates_direct,
            "n_candidates_verified": out.n_candidates_verified,
            "build_ms": f"{out.build_time * 1e3:.3f}",
            "join_ms": f"{out.join_time * 1e3:.3f}",
            "peak_logical_bytes": out.peak_logical_bytes,
        }


def emit_report(report: RunReport, fmt: str, path: str | os.PathLike) -> None:
    """Write ``report`` as one JSON document, or append one CSV row.

    The CSV header is written only when the file is new or empty, so
    repeated calls build up a sweep table.
    """
    try:
        if fmt == "json":
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(report.to_dict(), fh, indent=2)
                fh.write("\n")
        elif fmt == "csv":
            fresh = not os.path.exists(path) or os.path.getsize(path) == 0
            with open(path, "a", newline="", encoding="utf-8") as fh:
                writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
                if fresh:
                    writer.writeheader()
                writer.writerow(report.csv_row())
        else:
            raise ValueError(f"unknown report format {fmt!r}")
    except OSError as exc:
        raise ReportError(f"{path}: {exc}") from exc
