"""Command-line interface.

Subcommands: scan (FASTA -> count store), report (store -> analysis TSVs),
reference (model distribution for one word), locate (favored-distance
positions -> BED), dump (observed distribution of one word from a store).

Exit codes: 0 success, 2 input error, 3 configuration error, 4 store error.
"""

from __future__ import annotations

import argparse
import os
import sys
import threading
from concurrent.futures import FIRST_COMPLETED, ThreadPoolExecutor, wait
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

from .analysis import group_by_chromosome, locate_favored
from .config import RunConfig, __version__
from .errors import (ConfigError, EncodingError, FastaFormatError,
                     GenodistError, StoreError)
from .fasta import Segment, iter_fasta, segmentize
from .measures import DistanceDistribution
from .reference import BaseFrequencies, build_automaton, reference_distribution
from .report import dump_distribution, write_bed, write_reports
from .scan import (CountStore, decode_word, encode_word, load_store,
                   merge_stores, save_store, scan_segment)

_BATCH_SYMBOLS = 8 << 20  # target symbols per work unit


@dataclass
class ScanStats:
    chromosomes: int = 0
    segments: int = 0
    symbols: int = 0  # separators included


def _segment_batches(paths: Sequence[str], config: RunConfig,
                     stats: ScanStats) -> Iterator[list[Segment]]:
    batch: list[Segment] = []
    size = 0
    for path in paths:
        for record, chunks in iter_fasta(path):
            stats.chromosomes += 1
            for seg in segmentize(record, chunks,
                                  lowercase_as_mask=config.lowercase_as_mask):
                stats.segments += 1
                batch.append(seg)
                size += len(seg)
                if size >= _BATCH_SYMBOLS:
                    yield batch
                    batch, size = [], 0
            stats.symbols += record.length
    if batch:
        yield batch


def run_scan(paths: Sequence[str], config: RunConfig) -> tuple[CountStore, ScanStats]:
    """Scan FASTA inputs into a single count store.

    With more than one thread, workers keep private stores that are merged
    at the end; counts are integer sums, so the result is identical to a
    serial scan regardless of scheduling.
    """
    stats = ScanStats()
    threads = config.threads or os.cpu_count() or 1
    batches = _segment_batches(paths, config, stats)

    if threads == 1:
        store = CountStore(config.k, config.dmax)
        for batch in batches:
            for seg in batch:
                scan_segment(seg, config.k, config.dmax, store)
    else:
        local = threading.local()
        worker_stores: list[CountStore] = []
        registry_lock = threading.Lock()

        def work(batch: list[Segment]) -> None:
            st = getattr(local, "store", None)
            if st is None:
                st = CountStore(config.k, config.dmax)
                local.store = st
                with registry_lock:
                    worker_stores.append(st)
            for seg in batch:
                scan_segment(seg, config.k, config.dmax, st)

        pending = set()
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for batch in batches:
                pending.add(pool.submit(work, batch))
                if len(pending) >= threads * 3:
                    done, pending = wait(pending, return_when=FIRST_COMPLETED)
                    for fut in done:
                        fut.result()
            for fut in pending:
                fut.result()
        store = CountStore(config.k, config.dmax)
        for st in worker_stores:
            store = merge_stores(store, st)

    store.inputs = [Path(p).name for p in paths]
    store.metadata["lowercase_as_mask"] = "1" if config.lowercase_as_mask else "0"
    return store, stats


def _config_from_args(args: argparse.Namespace, k: int | None = None,
                      dmax: int | None = None) -> RunConfig:
    config = RunConfig()
    if k is not None:
        config.k = k
    if dmax is not None:
        config.dmax = dmax
    for name in ("h", "n_peaks", "eps", "min_freq", "lowercase_as_mask", "threads"):
        val = getattr(args, name, None)
        if val is None or val is False:
            continue
        setattr(config, name, val)
    base = getattr(args, "base_freq", None)
    if base:
        config.base_freq = BaseFrequencies.parse(base)
    config.validate()
    return config


def cmd_scan(args: argparse.Namespace) -> int:
    config = _config_from_args(args, k=args.k, dmax=args.dmax)
    store, stats = run_scan(args.inputs, config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    store_path = out / f"store_k{config.k}.tsv"
    save_store(store, store_path)
    counted = int(store.occurrences.sum())
    if stats.symbols == 0:
        print("warning: no sequence data in input, wrote an empty store",
              file=sys.stderr)
    print(f"chromosomes\t{stats.chromosomes}")
    print(f"segments\t{stats.segments}")
    print(f"symbols\t{stats.symbols}")
    print(f"acgt_symbols\t{int(store.base_counts.sum())}")
    print(f"words_counted\t{counted}")
    print(f"store\t{store_path}")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    store = load_store(args.store)
    if args.k is not None and args.k != store.k:
        raise StoreError(f"store holds k={store.k}, but --k {args.k} was requested")
    if args.dmax is not None and args.dmax != store.dmax:
        raise StoreError(f"store holds dmax={store.dmax}, but --dmax {args.dmax} was requested")
    config = _config_from_args(args, k=store.k, dmax=store.dmax)
    written = write_reports(store, config, args.out, dump_words=args.dump_dist or ())
    for path in written:
        print(path)
    return 0


def cmd_reference(args: argparse.Namespace) -> int:
    word = encode_word(args.word)
    config = _config_from_args(args, k=word.k, dmax=args.dmax)
    freqs = config.base_freq or BaseFrequencies.uniform()
    dist = reference_distribution(build_automaton(word), freqs, word.k, config.dmax)
    lines = _distribution_lines(dist)
    if args.out is None:
        sys.stdout.write(lines)
    else:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        target = out / f"reference_{decode_word(word)}.tsv"
        target.write_text(lines, encoding="utf-8")
        print(target)
    return 0


def _distribution_lines(dist: DistanceDistribution) -> str:
    rows = ["d\tprobability"]
    rows.extend(f"{d}\t{p!r}" for d, p in zip(dist.domain.tolist(), dist.freqs.tolist()))
    return "\n".join(rows) + "\n"


def cmd_locate(args: argparse.Namespace) -> int:
    word = encode_word(args.word)
    config = _config_from_args(args, k=word.k, dmax=args.dmax)
    if not word.k < args.distance <= config.dmax:
        raise ConfigError(
            f"favored distance must be in ({word.k}, {config.dmax}], got {args.distance}")
    hits = locate_favored(args.inputs, decode_word(word), args.distance,
                          lowercase_as_mask=config.lowercase_as_mask)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    bed = out / f"locate_{decode_word(word)}_{args.distance}.bed"
    write_bed(bed, hits, decode_word(word), args.distance, config,
              store_inputs=[Path(p).name for p in args.inputs])
    for chrom, count in group_by_chromosome(hits):
        print(f"{chrom}\t{count}")
    print(f"total\t{len(hits)}")
    print(f"bed\t{bed}")
    return 0


def cmd_dump(args: argparse.Namespace) -> int:
    store = load_store(args.store)
    config = _config_from_args(args, k=store.k, dmax=store.dmax)
    for path in dump_distribution(store, config, args.word, args.out):
        print(path)
    return 0


def _add_common(p: argparse.ArgumentParser, analysis: bool = False) -> None:
    p.add_argument("--out", default=".", help="output directory (default: .)")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: available parallelism)")
    if analysis:
        p.add_argument("--h", dest="h", type=int, default=None,
                       help="peak window width in domain points (default: 5)")
        p.add_argument("--n-peaks", dest="n_peaks", type=int, default=None,
                       help="number of strongest peaks compared (default: 3)")
        p.add_argument("--eps", type=float, default=None,
                       help="zero replacement for the Jeffreys divergence (default: 1e-10)")
        p.add_argument("--min-freq", dest="min_freq", type=int, default=None,
                       help="exclude pairs whose rarer word occurs fewer times (default: 100)")
        p.add_argument("--base-freq", dest="base_freq", default=None, metavar="A,C,G,T",
                       help="base frequencies for the reference model "
                            "(default: estimated from the scanned sequence)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="genodist",
        description="Inter-word distance distributions of genomic words and "
                    "reverse-complement symmetry analysis.")
    parser.add_argument("--version", action="version", version=f"genodist {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scan", help="count word occurrences and inter-word distances")
    p.add_argument("inputs", nargs="+", metavar="FASTA",
                   help="FASTA files (plain or gzip)")
    p.add_argument("--k", type=int, default=7, help="word length (default: 7)")
    p.add_argument("--dmax", type=int, default=1000,
                   help="largest recorded distance (default: 1000)")
    p.add_argument("--lowercase-as-mask", dest="lowercase_as_mask",
                   action="store_true",
                   help="treat soft-masked (lowercase) symbols as separators "
                        "instead of folding them to uppercase")
    _add_common(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("report", help="write the pair analysis reports from a store")
    p.add_argument("store", help="count-store file written by 'scan'")
    p.add_argument("--k", type=int, default=None,
                   help="assert the store's word length")
    p.add_argument("--dmax", type=int, default=None,
                   help="assert the store's distance cap")
    p.add_argument("--dump-dist", dest="dump_dist", action="append", metavar="WORD",
                   help="also dump the distance distribution of WORD and its "
                        "reverse complement (repeatable)")
    _add_common(p, analysis=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("reference",
                       help="model distance distribution of a word under i.i.d. bases")
    p.add_argument("word", help="ACGT word")
    p.add_argument("--dmax", type=int, default=1000,
                   help="largest modeled distance (default: 1000)")
    p.add_argument("--base-freq", dest="base_freq", default=None, metavar="A,C,G,T",
                   help="base frequencies (default: uniform)")
    p.add_argument("--out", default=None,
                   help="output directory (default: write to stdout)")
    p.set_defaults(func=cmd_reference)

    p = sub.add_parser("locate",
                       help="positions where a word repeats at a favored distance")
    p.add_argument("word", help="ACGT word")
    p.add_argument("distance", type=int, help="favored distance between occurrences")
    p.add_argument("inputs", nargs="+", metavar="FASTA",
                   help="FASTA files (plain or gzip)")
    p.add_argument("--dmax", type=int, default=1000,
                   help="distance cap used for validation (default: 1000)")
    p.add_argument("--lowercase-as-mask", dest="lowercase_as_mask",
                   action="store_true",
                   help="treat soft-masked (lowercase) symbols as separators")
    _add_common(p)
    p.set_defaults(func=cmd_locate)

    p = sub.add_parser("dump", help="observed distance distribution of a word")
    p.add_argument("store", help="count-store file written by 'scan'")
    p.add_argument("word", help="ACGT word")
    _add_common(p)
    p.set_defaults(func=cmd_dump)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FastaFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, EncodingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except StoreError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except GenodistError as exc:  # includes InsufficientDataError
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
