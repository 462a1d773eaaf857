"""Per-pair records and the ranking/selection analyses built on them.

Every unordered pair {w, reverse_complement(w)} gets one record keyed by
the lexicographically smaller word. Reverse-complement palindromes (even k
only) are flagged and kept out of rankings, percentiles and correlations:
their dissimilarities are identically zero and would distort thresholds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import groupby
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, InsufficientDataError
from .fasta import iter_fasta, segmentize
from .measures import (DistanceDistribution, PeakConfig, apr, euclidean,
                       find_peaks, jeffreys, mean_distribution,
                       peak_dissimilarity, peak_dissimilarity_from_peaks)
from .reference import BaseFrequencies, batch_first_return
from .scan import (CountStore, decode_table, decode_word, encode_word,
                   reverse_complement_codes)

MEASURES = ("apr", "d_e", "d_j", "d_p")


@dataclass
class PairRecord:
    """One symmetric word pair with its frequency and distribution measures.

    Measures that cannot be computed (no retained distance mass) are NaN.
    """

    word: str
    revcomp: str
    n_w: int
    n_wbar: int
    apr: float
    d_e: float
    d_j: float
    d_p: float
    rs: float
    palindrome: bool
    low_freq: bool

    @property
    def ranked(self) -> bool:
        """Eligible for rankings, percentiles and correlations."""
        return (not self.palindrome and not self.low_freq
                and math.isfinite(self.d_p) and math.isfinite(self.rs))


@dataclass(frozen=True)
class RankTable:
    """Values of one measure over the pair universe, with 1..N average
    ranks and the nearest-rank thresholds of any requested percentiles."""

    measure: str
    words: tuple[str, ...]
    values: np.ndarray
    ranks: np.ndarray
    percentiles: tuple[float, ...] = ()
    thresholds: tuple[float, ...] = ()

    def threshold(self, q: float) -> float:
        return self.thresholds[self.percentiles.index(q)]


def pair_records(store: CountStore, config, min_freq: int | None = None) -> list[PairRecord]:
    """Assemble one record per symmetric pair from a complete store.

    `config` provides the peak parameters (h, n_peaks), the Jeffreys eps,
    the low-frequency threshold and an optional base-frequency override for
    the reference model. Records come back sorted by canonical word.
    """
    k, dmax = store.k, store.dmax
    R = dmax - k
    if R < 1:
        raise ConfigError(f"store dmax={dmax} leaves no distances above k={k}")
    peak_cfg = PeakConfig(h=config.h, n_peaks=config.n_peaks)
    peak_cfg.validate_for_domain(R)
    eps = config.eps
    if min_freq is None:
        min_freq = config.min_freq

    base = config.base_freq
    if base is None:
        if store.base_counts.sum() > 0:
            base = BaseFrequencies.from_counts(store.base_counts)
        else:
            base = BaseFrequencies.uniform()

    rc = reverse_complement_codes(k)
    codes = np.arange(4**k, dtype=np.int64)
    canon = codes[codes <= rc]                     # palindromes included once
    words = decode_table(k)

    dom_counts = store.counts[:, k:]
    masses = dom_counts.sum(axis=1, dtype=np.int64)
    occ = store.occurrences

    records: list[PairRecord] = []
    chunk = 2048
    for lo in range(0, canon.size, chunk):
        part = canon[lo:lo + chunk]
        rc_part = rc[part]

        # reference distributions for every word that needs one
        need = np.unique(np.concatenate([part, rc_part]))
        defined_need = need[masses[need] > 0]
        ref_rows: dict[int, DistanceDistribution] = {}
        if defined_need.size:
            g = batch_first_return(defined_need, k, base, dmax)
            retained = g[:, k:]
            ref_mass = retained.sum(axis=1)
            for i, code in enumerate(defined_need):
                if ref_mass[i] > 0.0:
                    ref_rows[int(code)] = DistanceDistribution(
                        k=k, dmax=dmax, freqs=retained[i] / ref_mass[i],
                        support_total=float(ref_mass[i]))

        for w in part:
            wb = int(rc[w])
            w = int(w)
            n_w, n_wb = int(occ[w]), int(occ[wb])
            palindrome = w == wb
            defined = masses[w] > 0 and masses[wb] > 0
            low = min(n_w, n_wb) < min_freq or not defined

            f_w = f_wb = None
            if defined:
                f_w = DistanceDistribution(k=k, dmax=dmax,
                                           freqs=dom_counts[w] / masses[w],
                                           support_total=float(masses[w]))
                f_wb = f_w if palindrome else DistanceDistribution(
                    k=k, dmax=dmax, freqs=dom_counts[wb] / masses[wb],
                    support_total=float(masses[wb]))

            if palindrome:
                discrepancy = d_e = d_j = d_p = 0.0
            elif defined:
                discrepancy = apr(n_w, n_wb)
                d_e = euclidean(f_w, f_wb)
                d_j = jeffreys(f_w, f_wb, eps=eps)
                d_p = peak_dissimilarity(f_w, f_wb, peak_cfg)
            else:
                discrepancy = apr(n_w, n_wb)
                d_e = d_j = d_p = float("nan")

            rs = float("nan")
            if defined and w in ref_rows and wb in ref_rows:
                obs = f_w if palindrome else mean_distribution(f_w, f_wb)
                ref = ref_rows[w] if palindrome else mean_distribution(
                    ref_rows[w], ref_rows[wb])
                rs = peak_dissimilarity_from_peaks(
                    find_peaks(obs, peak_cfg), find_peaks(ref, peak_cfg), R)

            records.append(PairRecord(
                word=str(words[w]), revcomp=str(words[wb]), n_w=n_w, n_wbar=n_wb,
                apr=discrepancy, d_e=d_e, d_j=d_j, d_p=d_p, rs=rs,
                palindrome=palindrome, low_freq=bool(low)))
    return records


# -- rank statistics --------------------------------------------------------

def average_ranks(values: Sequence[float] | np.ndarray) -> np.ndarray:
    """1-based ranks with ties replaced by their group average."""
    a = np.asarray(values, dtype=np.float64).ravel()
    n = a.size
    order = np.argsort(a, kind="stable")
    edges = np.flatnonzero(np.diff(a[order])) + 1
    starts = np.r_[0, edges]
    ends = np.r_[edges, n]
    group_rank = (starts + ends - 1) / 2.0 + 1.0
    ranks = np.empty(n, dtype=np.float64)
    ranks[order] = np.repeat(group_rank, ends - starts)
    return ranks


def spearman(x: Sequence[float] | np.ndarray, y: Sequence[float] | np.ndarray) -> float:
    """Rank correlation: product-moment correlation of the average-rank
    vectors of x and y."""
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.size != y.size:
        raise ConfigError(f"length mismatch: {x.size} vs {y.size}")
    if x.size < 2:
        raise InsufficientDataError("need at least 2 observations for a correlation")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise InsufficientDataError("correlation undefined for constant input")
    rx = average_ranks(x) - (x.size + 1) / 2.0
    ry = average_ranks(y) - (y.size + 1) / 2.0
    return float(np.dot(rx, ry) / math.sqrt(np.dot(rx, rx) * np.dot(ry, ry)))


def spearman_matrix(records: Sequence[PairRecord],
                    measures: Sequence[str] = MEASURES) -> np.ndarray:
    vals = [np.array([getattr(r, m) for r in records]) for m in measures]
    n = len(measures)
    out = np.eye(n)
    for i in range(n):
        for j in range(i):
            out[i, j] = out[j, i] = spearman(vals[i], vals[j])
    return out


def _top_indices(values: np.ndarray, size: int) -> np.ndarray:
    """Indices of the `size` largest values; ties prefer the smaller index
    (records are kept in word order, so this is lexicographic)."""
    order = np.lexsort((np.arange(values.size), -values))
    return order[:size]


def top_overlap(m1: Sequence[float], m2: Sequence[float], q: float) -> float:
    """Fraction of shared elements between the top-q sets of two measures
    over the same pair universe; the denominator is the top-set size."""
    m1 = np.asarray(m1, dtype=np.float64)
    m2 = np.asarray(m2, dtype=np.float64)
    if m1.size != m2.size:
        raise ConfigError(f"length mismatch: {m1.size} vs {m2.size}")
    if not 0.0 < q < 1.0:
        raise ConfigError(f"top fraction must be in (0, 1), got {q}")
    size = math.ceil(q * m1.size)
    if size == 0 or m1.size == 0:
        raise InsufficientDataError("empty top set")
    top1 = set(_top_indices(m1, size).tolist())
    top2 = set(_top_indices(m2, size).tolist())
    return len(top1 & top2) / size


def rank_table(records: Sequence[PairRecord], measure: str,
               percentiles: Sequence[float] = ()) -> RankTable:
    """Rank one measure over the pair universe (1..N, average ties)."""
    values = np.array([getattr(r, measure) for r in records], dtype=np.float64)
    return RankTable(
        measure=measure,
        words=tuple(r.word for r in records),
        values=values,
        ranks=average_ranks(values),
        percentiles=tuple(percentiles),
        thresholds=tuple(nearest_rank_threshold(values, q) for q in percentiles),
    )


def nearest_rank_threshold(values: Sequence[float] | np.ndarray, q: float) -> float:
    """Nearest-rank percentile: the value at 1-based index ceil(q/100 * N)
    of the sorted sample. No interpolation, so selections are reproducible."""
    a = np.sort(np.asarray(values, dtype=np.float64).ravel())
    if a.size == 0:
        raise InsufficientDataError("cannot take a percentile of no values")
    if not 0.0 < q < 100.0:
        raise ConfigError(f"percentile must be in (0, 100), got {q}")
    idx = math.ceil(q / 100.0 * a.size)
    return float(a[idx - 1])


def percentile_select(records: Sequence[PairRecord], measure: str, q: float,
                      side: str = "above") -> list[PairRecord]:
    """Records strictly beyond the nearest-rank q-th percentile of a
    measure, sorted by that measure (descending for side='above',
    ascending for 'below'; ties by word)."""
    if side not in ("above", "below"):
        raise ConfigError(f"side must be 'above' or 'below', got {side!r}")
    if not records:
        raise InsufficientDataError("no records to select from")
    values = np.array([getattr(r, measure) for r in records], dtype=np.float64)
    thr = nearest_rank_threshold(values, q)
    if side == "above":
        hits = [r for r, v in zip(records, values) if v > thr]
        hits.sort(key=lambda r: (-getattr(r, measure), r.word))
    else:
        hits = [r for r, v in zip(records, values) if v < thr]
        hits.sort(key=lambda r: (getattr(r, measure), r.word))
    return hits


def classify_pairs(records: Sequence[PairRecord], q_high: float = 90.0) -> list[str]:
    """Label each pair by its frequency-discrepancy x distribution-
    dissimilarity combination, cutting both measures at their q_high
    nearest-rank percentile:

      c1 low apr, low d_p    (common)
      c2 high apr, low d_p   (frequencies differ, distributions agree)
      c3 low apr, high d_p   (frequencies agree, distributions differ)
      c4 high apr, high d_p
    """
    if not records:
        return []
    aprs = np.array([r.apr for r in records], dtype=np.float64)
    dps = np.array([r.d_p for r in records], dtype=np.float64)
    thr_a = nearest_rank_threshold(aprs, q_high)
    thr_d = nearest_rank_threshold(dps, q_high)
    labels = []
    for a, d in zip(aprs, dps):
        high_a = a > thr_a
        high_d = d > thr_d
        labels.append("c%d" % (1 + (2 if high_d else 0) + (1 if high_a else 0)))
    return labels


def rank_similar_unexpected(records: Sequence[PairRecord], q: float = 10.0) -> list[PairRecord]:
    """Pairs whose intra-pair peak dissimilarity is below the q-th
    percentile, ranked by decreasing dissimilarity to the i.i.d. model."""
    hits = percentile_select(records, "d_p", q, side="below")
    hits.sort(key=lambda r: (-r.rs, r.word))
    return hits


# -- favored-distance localization -------------------------------------------

def locate_favored(paths: Iterable[str | Path], word: str, d_star: int,
                   lowercase_as_mask: bool = False) -> list[tuple[str, int]]:
    """Positions where `word` occurs and its next occurrence starts exactly
    d_star later, as (chromosome, 0-based position of the first occurrence).

    Useful for mapping a favored distance (a strong peak) back to genomic
    coordinates.
    """
    wid = encode_word(word)
    k = wid.k
    if d_star <= k:
        raise ConfigError(f"favored distance must exceed the word length {k}, got {d_star}")
    needle = decode_word(wid).encode("ascii")
    out: list[tuple[str, int]] = []
    for path in paths:
        for record, chunks in iter_fasta(path):
            for seg in segmentize(record, chunks, lowercase_as_mask=lowercase_as_mask):
                prev = seg.symbols.find(needle)
                while prev != -1:
                    nxt = seg.symbols.find(needle, prev + 1)
                    if nxt == -1:
                        break
                    if nxt - prev == d_star:
                        out.append((record.id, seg.offset + prev))
                    prev = nxt
    return out


def group_by_chromosome(hits: Sequence[tuple[str, int]]) -> list[tuple[str, int]]:
    """(chromosome, hit count) in first-seen order."""
    return [(chrom, sum(1 for _ in grp))
            for chrom, grp in groupby(hits, key=lambda x: x[0])]
