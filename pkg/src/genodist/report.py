"""TSV report generation.

Every report starts with '#' metadata lines embedding the tool version and
the analysis configuration, then a column-header line, then data rows.
Floats are written with shortest round-trip formatting, so identical
inputs and configuration yield byte-identical files.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .analysis import (MEASURES, PairRecord, classify_pairs, pair_records,
                       percentile_select, rank_similar_unexpected, rank_table,
                       spearman_matrix, top_overlap)
from .config import RunConfig, __version__
from .errors import InsufficientDataError
from .measures import to_distribution
from .scan import CountStore, encode_word, decode_word, reverse_complement

PAIR_COLUMNS = ("word", "revcomp", "n_w", "n_wbar", "apr", "d_e", "d_j",
                "d_p", "rs", "low_freq")


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x) if math.isfinite(x) else "nan"
    return str(x)


def _header(store: CountStore, config: RunConfig, extra: Sequence[tuple[str, str]] = ()) -> str:
    items = config.header_items() + list(extra)
    lines = [f"# genodist {__version__}"]
    lines.append("# " + " ".join(f"{k}={v}" for k, v in items))
    if store.inputs:
        lines.append("# inputs: " + ",".join(store.inputs))
    return "\n".join(lines) + "\n"


def _write(path: Path, head: str, columns: Sequence[str],
           rows: Iterable[Sequence]) -> Path:
    tmp = path.with_name(path.name + ".tmp")
    try:
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(head)
            fh.write("\t".join(columns) + "\n")
            for row in rows:
                fh.write("\t".join(_fmt(x) for x in row) + "\n")
        tmp.replace(path)
    finally:
        tmp.unlink(missing_ok=True)
    return path


def _pair_row(r: PairRecord) -> tuple:
    return (r.word, r.revcomp, r.n_w, r.n_wbar, r.apr, r.d_e, r.d_j, r.d_p,
            r.rs, int(r.low_freq))


def write_reports(store: CountStore, config: RunConfig, out_dir: str | Path,
                  dump_words: Sequence[str] = ()) -> list[Path]:
    """Run the full pair analysis and write all report TSVs.

    Emits pairs.tsv, palindromes.tsv, spearman.tsv, overlap.tsv,
    top_dp.tsv, similar_unexpected.tsv, classes.tsv, scatter_apr_dp.tsv
    and a dist_<WORD>.tsv for every requested dump word (plus its reverse
    complement). Returns the written paths.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = pair_records(store, config)
    universe = [r for r in records if r.ranked]
    head = _header(store, config)
    written: list[Path] = []

    written.append(_write(
        out / "pairs.tsv", head, PAIR_COLUMNS,
        (_pair_row(r) for r in records if not r.palindrome)))
    written.append(_write(
        out / "palindromes.tsv", head, PAIR_COLUMNS,
        (_pair_row(r) for r in records if r.palindrome)))

    if universe:
        try:
            matrix = spearman_matrix(universe)
        except InsufficientDataError:
            matrix = np.full((len(MEASURES), len(MEASURES)), float("nan"))
        rows = [(MEASURES[i],) + tuple(float(matrix[i, j]) for j in range(len(MEASURES)))
                for i in range(len(MEASURES))]
    else:
        rows = []
    written.append(_write(out / "spearman.tsv", head, ("measure",) + MEASURES, rows))

    dist_measures = ("d_e", "d_j", "d_p")
    overlap_rows = []
    if universe:
        vals = {m: [getattr(r, m) for r in universe] for m in dist_measures}
        for frac in config.overlap_fractions:
            row = [frac]
            for i in range(len(dist_measures)):
                for j in range(i + 1, len(dist_measures)):
                    row.append(top_overlap(vals[dist_measures[i]],
                                           vals[dist_measures[j]], frac))
            overlap_rows.append(tuple(row))
    overlap_cols = ("top_fraction",) + tuple(
        f"{a}__{b}" for idx, a in enumerate(dist_measures)
        for b in dist_measures[idx + 1:])
    written.append(_write(out / "overlap.tsv", head, overlap_cols, overlap_rows))

    if universe:
        dp_table = rank_table(universe, "d_p",
                              percentiles=(config.top_percentile, config.low_percentile))
        top = percentile_select(universe, "d_p", config.top_percentile, side="above")
        similar = rank_similar_unexpected(universe, config.low_percentile)
        labels = classify_pairs(universe, config.high_percentile)
        top_head = _header(store, config, [
            ("percentile", repr(config.top_percentile)),
            ("threshold", repr(dp_table.threshold(config.top_percentile)))])
        low_head = _header(store, config, [
            ("percentile", repr(config.low_percentile)),
            ("threshold", repr(dp_table.threshold(config.low_percentile)))])
    else:
        top, similar, labels = [], [], []
        top_head = low_head = head
    written.append(_write(
        out / "top_dp.tsv", top_head, ("word", "revcomp", "d_p", "apr"),
        ((r.word, r.revcomp, r.d_p, r.apr) for r in top)))
    written.append(_write(
        out / "similar_unexpected.tsv", low_head, ("word", "revcomp", "d_p", "rs"),
        ((r.word, r.revcomp, r.d_p, r.rs) for r in similar)))
    written.append(_write(
        out / "classes.tsv", head, ("word", "revcomp", "apr", "d_p", "class"),
        ((r.word, r.revcomp, r.apr, r.d_p, lab)
         for r, lab in zip(universe, labels))))
    written.append(_write(
        out / "scatter_apr_dp.tsv", head, ("word", "apr", "d_p"),
        ((r.word, r.apr, r.d_p) for r in universe)))

    for text in dump_words:
        written.extend(dump_distribution(store, config, text, out))
    return written


def dump_distribution(store: CountStore, config: RunConfig, word: str,
                      out_dir: str | Path) -> list[Path]:
    """Write dist_<WORD>.tsv (distance, frequency) for a word and its
    reverse complement."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    wid = encode_word(word, store.k)
    head = _header(store, config)
    paths = []
    seen = set()
    for w in (wid, reverse_complement(wid)):
        if w in seen:
            continue
        seen.add(w)
        text = decode_word(w)
        try:
            dist = to_distribution(store.histogram(w), store.k, store.dmax)
        except InsufficientDataError:
            rows: Iterable = ()
        else:
            rows = zip(dist.domain.tolist(), dist.freqs.tolist())
        paths.append(_write(out / f"dist_{text}.tsv", head, ("d", "frequency"), rows))
    return paths


def write_bed(path: str | Path, hits: Sequence[tuple[str, int]], word: str,
              d_star: int, config: RunConfig, store_inputs: Sequence[str] = ()) -> Path:
    """0-based half-open BED rows covering the first occurrence of each
    favored-distance word pair; the name field carries word|d_star."""
    path = Path(path)
    k = len(word)
    lines = [f"# genodist {__version__}"]
    lines.append("# " + " ".join(f"{key}={val}" for key, val in config.header_items()))
    if store_inputs:
        lines.append("# inputs: " + ",".join(store_inputs))
    tmp = path.with_name(path.name + ".tmp")
    try:
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
            for chrom, pos in hits:
                fh.write(f"{chrom}\t{pos}\t{pos + k}\t{word}|{d_star}\n")
        tmp.replace(path)
    finally:
        tmp.unlink(missing_ok=True)
    return path
