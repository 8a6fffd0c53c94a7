"""Command-line entry point: ``setjoin <command> ...``.

Exit codes: 0 success, 1 configuration conflict, 2 I/O error, 3 result did
not match the brute-force oracle (``--check-oracle``).
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from setjoin import core
from setjoin.bench import AXES, DEFAULT_GEN, SweepSpec, run_sweep
from setjoin.costmodel import DEFAULT_CONSTANTS, calibrate, loads_constants
from setjoin.datasets import DatasetError, GenSpec, generate_synthetic, read_transactions
from setjoin.estimate import STRATEGIES, EstimationError, estimate_all
from setjoin.intersect import METHODS
from setjoin.join import (
    ALGORITHMS,
    PARADIGMS,
    PRETTI,
    ConfigError,
    JoinConfig,
    join_collections,
    resolve_limit,
    set_containment_join,
)
from setjoin.oracle import brute_force_join
from setjoin.report import ReportError, RunReport, emit_report

logger = logging.getLogger("setjoin")

EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_MISMATCH = 3

# flags that map one-to-one onto JoinConfig fields
CONFIG_FLAGS = ("algorithm", "paradigm", "ordering", "freq_source", "intersect", "limit", "limit_strategy",
                "count_only", "faithful", "keep_empty", "frq_threshold_scale")


def _inputs(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("left", help="left collection (transaction file)")
    parser.add_argument("right", nargs="?", help="right collection; omit with --self-join")
    parser.add_argument("--self-join", action="store_true", help="join the left file with itself")


def _load_inputs(args) -> tuple[list, list]:
    left = read_transactions(args.left)
    if args.self_join:
        if args.right:
            raise ConfigError("--self-join takes a single input file")
        return left, left
    if not args.right:
        raise ConfigError("give a right collection or --self-join")
    return left, read_transactions(args.right)


def build_config(args) -> JoinConfig:
    overrides = {name: getattr(args, name) for name in CONFIG_FLAGS if getattr(args, name) is not None}
    if args.constants:
        try:
            overrides["constants"] = loads_constants(Path(args.constants).read_text())
        except OSError as exc:
            raise DatasetError(f"{args.constants}: {exc}") from exc
    algorithm = overrides.get("algorithm")
    if args.preset == "org-pretti":
        return JoinConfig.org_pretti(**overrides)
    if algorithm == PRETTI:
        return JoinConfig(**overrides)
    if "limit" not in overrides and "limit_strategy" not in overrides:
        overrides["limit_strategy"] = "frq"
    return JoinConfig.best(**overrides)


def cmd_join(args) -> int:
    cfg = build_config(args)
    left_raw, right_raw = _load_inputs(args)
    try:
        dictionary, left, right = core.prepare(left_raw, right_raw, cfg.ordering, cfg.freq_source)
    except core.DomainError:
        out = set_containment_join(left_raw, right_raw, cfg)
        left_stats = right_stats = None
    else:
        limit = resolve_limit(cfg, dictionary, left, right)
        if cfg.algorithm != PRETTI:
            print(f"limit: {limit if limit is not None else 'unlimited'} ({cfg.limit_label})")
        out = join_collections(left, right, cfg, dictionary)
        left_stats, right_stats = left.stats, right.stats

    print(f"{cfg.algorithm}/{cfg.paradigm}/{cfg.ordering}/{cfg.intersect}: "
          f"{out.n_results} results, {out.n_intersections} intersections, "
          f"{out.n_candidates_direct} direct + {out.n_candidates_verified} verified candidates, "
          f"build {out.build_time * 1e3:.1f} ms, join {out.join_time * 1e3:.1f} ms, "
          f"peak {out.peak_logical_bytes} bytes")

    report = RunReport(cfg, out, left_stats, right_stats)
    if args.out:
        emit_report(report, args.format, args.out)
    if args.emit_pairs and out.pairs is not None:
        try:
            with open(args.emit_pairs, "w", encoding="utf-8") as fh:
                fh.writelines(f"{r}\t{s}\n" for r, s in out.pairs)
        except OSError as exc:
            raise ReportError(f"{args.emit_pairs}: {exc}") from exc
    if args.check_oracle:
        if out.pairs is None:
            raise ConfigError("--check-oracle needs materialized pairs; drop --count-only")
        expected = brute_force_join(left_raw, right_raw)
        if not cfg.keep_empty:
            empty = {i for i, o in enumerate(left_raw) if not o}
            expected = [p for p in expected if p[0] not in empty]
        if expected != out.pairs:
            print(f"oracle mismatch: expected {len(expected)} pairs, got {len(out.pairs)}", file=sys.stderr)
            return EXIT_MISMATCH
        print(f"oracle: ok ({len(expected)} pairs)")
    return 0


def cmd_oracle(args) -> int:
    left_raw, right_raw = _load_inputs(args)
    pairs = brute_force_join(left_raw, right_raw)
    for r, s in pairs:
        print(f"{r}\t{s}")
    print(f"{len(pairs)} pairs", file=sys.stderr)
    return 0


def cmd_stats(args) -> int:
    raw = read_transactions(args.file)
    try:
        dictionary, coll, _ = core.prepare(raw, [], core.INCREASING, core.LEFT_ONLY)
    except core.DomainError:
        print(f"cardinality: {len(raw)}\ndomain_size: 0")
        return 0
    for key, value in coll.stats.as_dict().items():
        print(f"{key}: {round(value, 3) if isinstance(value, float) else value}")
    return 0


def cmd_estimate_limit(args) -> int:
    left_raw, right_raw = _load_inputs(args)
    dictionary, left, right = core.prepare(left_raw, right_raw, core.INCREASING, core.UNION)
    constants = _constants(args)
    estimates = estimate_all(dictionary, left, right, constants, args.frq_threshold_scale)
    wanted = STRATEGIES if args.strategy is None else (args.strategy,)
    for name in wanted:
        print(f"{name}: {estimates[name].value}")
    if args.verbose:
        for step in estimates["frq"].diagnostics:
            print(f"  frq k={step.length} p={step.probability:.4g} |CL|~{step.est_candidates:.4g} "
                  f"C_int={step.intersection_cost:.4g} C_ver={step.verification_cost:.4g}")
    return 0


def cmd_generate(args) -> int:
    spec = GenSpec(args.cardinality, args.domain, args.wavg_len, args.zipf, args.seed)
    objects = generate_synthetic(spec, args.out)
    print(f"wrote {len(objects)} objects to {args.out}")
    return 0


def cmd_calibrate(args) -> int:
    result = calibrate(repetitions=args.repetitions, seed=args.seed)
    text = result.report()
    if args.out:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            raise ReportError(f"{args.out}: {exc}") from exc
    print(text, end="")
    return 0


def cmd_bench(args) -> int:
    gen = replace(DEFAULT_GEN, cardinality=args.cardinality, domain_size=args.domain,
                  weighted_avg_len=args.wavg_len, zipf=args.zipf, seed=args.seed)
    cast = int if args.axis in ("limit", "cardinality", "domain") else float
    spec = SweepSpec(args.axis, tuple(cast(v) for v in args.values), gen)
    out_dir = Path(args.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ReportError(f"{out_dir}: {exc}") from exc
    csv_path = out_dir / f"sweep_{args.axis}.csv"
    rows = run_sweep(spec, csv_path, workers=args.workers)
    print(f"wrote {len(rows)} rows to {csv_path}")
    if not args.no_plot:
        from setjoin.plotting import plot_sweep

        png = plot_sweep(rows, out_dir / f"sweep_{args.axis}.png", title=f"self-join sweep over {args.axis}")
        print(f"wrote {png}")
    return 0


def _constants(args):
    if getattr(args, "constants", None):
        try:
            return loads_constants(Path(args.constants).read_text())
        except OSError as exc:
            raise DatasetError(f"{args.constants}: {exc}") from exc
    return DEFAULT_CONSTANTS


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="setjoin", description="In-memory set containment joins.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("join", help="join two collections")
    _inputs(p)
    p.add_argument("--algorithm", choices=ALGORITHMS)
    p.add_argument("--paradigm", choices=PARADIGMS)
    p.add_argument("--ordering", choices=(core.INCREASING, core.DECREASING))
    p.add_argument("--freq-source", choices=(core.LEFT_ONLY, core.UNION))
    p.add_argument("--intersect", choices=METHODS)
    p.add_argument("--limit", type=int)
    p.add_argument("--limit-strategy", choices=STRATEGIES)
    p.add_argument("--frq-threshold-scale", type=float)
    p.add_argument("--count-only", action="store_const", const=True)
    p.add_argument("--faithful", action="store_const", const=True,
                   help="count root-level intersections and keep descending below empty candidate lists")
    p.add_argument("--keep-empty", action="store_const", const=True,
                   help="join empty left objects with every right object")
    p.add_argument("--preset", choices=("org-pretti",))
    p.add_argument("--constants", help="cost constants file (name=value lines)")
    p.add_argument("--out", help="report path")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--emit-pairs", metavar="PATH", help="write result pairs as tab-separated lines")
    p.add_argument("--check-oracle", action="store_true", help="compare against the brute-force join")
    p.set_defaults(func=cmd_join)

    p = sub.add_parser("oracle", help="brute-force join, pairs to stdout")
    _inputs(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("stats", help="collection statistics")
    p.add_argument("file")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("estimate-limit", help="limit chosen by each estimation strategy")
    _inputs(p)
    p.add_argument("--strategy", choices=STRATEGIES)
    p.add_argument("--constants")
    p.add_argument("--frq-threshold-scale", type=float, default=1.0)
    p.set_defaults(func=cmd_estimate_limit)

    p = sub.add_parser("generate", help="write a synthetic Zipfian collection")
    p.add_argument("--cardinality", type=int, required=True)
    p.add_argument("--domain", type=int, required=True)
    p.add_argument("--wavg-len", type=float, required=True)
    p.add_argument("--zipf", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("calibrate", help="fit cost constants on this host")
    p.add_argument("--repetitions", type=int, default=9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write constants here")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("bench", help="sweep one generator or limit parameter")
    p.add_argument("--axis", choices=AXES, required=True)
    p.add_argument("--values", nargs="+", required=True)
    p.add_argument("--cardinality", type=int, default=DEFAULT_GEN.cardinality)
    p.add_argument("--domain", type=int, default=DEFAULT_GEN.domain_size)
    p.add_argument("--wavg-len", type=float, default=DEFAULT_GEN.weighted_avg_len)
    p.add_argument("--zipf", type=float, default=DEFAULT_GEN.zipf)
    p.add_argument("--seed", type=int, default=DEFAULT_GEN.seed)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-dir", default="bench-out")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, EstimationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DatasetError, ReportError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
