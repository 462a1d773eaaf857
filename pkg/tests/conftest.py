"""Shared fixtures and independent oracles used across the test suite."""

from __future__ import annotations

import re
from collections import Counter, defaultdict
from pathlib import Path

import numpy as np
import pytest

from genodist import CountStore, DistanceDistribution

ACGT = np.frombuffer(b"ACGT", dtype=np.uint8)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


# -- independent scanning oracle -----------------------------------------

def naive_scan(text: str, k: int, dmax: int):
    """Position-list scanner used as the ground truth for scan results.

    Splits on non-ACGT, walks every window position per word, and tallies
    differences of consecutive positions. Returns (occurrences, counts,
    overflow) keyed by word text.
    """
    occ = Counter()
    counts = defaultdict(Counter)
    overflow = Counter()
    for m in re.finditer(r"[ACGT]+", text):
        seg = m.group()
        nwin = len(seg) - k + 1
        if nwin <= 0:
            continue
        words = [seg[i:i + k] for i in range(nwin)]
        occ.update(words)
        last = {}
        last_get = last.get
        for i, w in enumerate(words):
            j = last_get(w)
            if j is not None:
                d = i - j
                if d <= dmax:
                    counts[w][d] += 1
                else:
                    overflow[w] += 1
            last[w] = i
    return occ, counts, overflow


def sorted_position_oracle(text: str, k: int, dmax: int):
    """Vectorized position-list oracle, algorithmically independent of the
    single-pass scanner: per segment, every window position is grouped by
    its word via a stable sort, and consecutive positions are diffed.

    Returns (occurrences[4^k], overflow[4^k], gap_keys, gap_counts) where
    gap_keys = word_code * dmax + (d - 1) for the nonzero distance cells,
    sorted, aligned with gap_counts.
    """
    lut = np.full(256, 255, dtype=np.uint8)
    for i, b in enumerate(b"ACGT"):
        lut[b] = i
    occ = np.zeros(4**k, dtype=np.int64)
    over = np.zeros(4**k, dtype=np.int64)
    events = []
    for m in re.finditer(r"[ACGT]+", text):
        seg = m.group().encode()
        n = len(seg) - k + 1
        if n <= 0:
            continue
        arr = lut[np.frombuffer(seg, dtype=np.uint8)]
        win = np.lib.stride_tricks.sliding_window_view(arr, k).astype(np.int64)
        codes = np.zeros(n, dtype=np.int64)
        for j in range(k):
            codes |= win[:, j] << (2 * (k - 1 - j))
        occ += np.bincount(codes, minlength=4**k)
        order = np.argsort(codes, kind="stable")  # per-word ascending positions
        grouped = codes[order]
        same = grouped[1:] == grouped[:-1]
        gaps = np.diff(order)[same]
        words = grouped[1:][same]
        beyond = gaps > dmax
        over += np.bincount(words[beyond], minlength=4**k)
        events.append(words[~beyond] * dmax + (gaps[~beyond] - 1))
    if events:
        keys, counts = np.unique(np.concatenate(events), return_counts=True)
    else:
        keys = counts = np.zeros(0, dtype=np.int64)
    return occ, over, keys, counts


def store_matches_sorted_oracle(store: CountStore, occ, over, keys, counts) -> bool:
    """Exact comparison of a store against sorted_position_oracle output."""
    if not np.array_equal(store.occurrences, occ):
        return False
    if not np.array_equal(store.overflow, over):
        return False
    nz_w, nz_d = np.nonzero(store.counts)
    store_keys = nz_w.astype(np.int64) * store.dmax + nz_d
    return (np.array_equal(store_keys, keys)
            and np.array_equal(store.counts[nz_w, nz_d].astype(np.int64), counts))


def store_matches_oracle(store: CountStore, occ, counts, overflow) -> bool:
    """Exact comparison of a store against naive_scan output."""
    from genodist import encode_word

    got_occ = {}
    got_over = {}
    for code in np.nonzero(store.occurrences)[0]:
        got_occ[code] = int(store.occurrences[code])
    for code in np.nonzero(store.overflow)[0]:
        got_over[code] = int(store.overflow[code])
    want_occ = {encode_word(w, store.k).code: c for w, c in occ.items()}
    want_over = {encode_word(w, store.k).code: c for w, c in overflow.items() if c}
    if got_occ != want_occ or got_over != want_over:
        return False

    nz_w, nz_d = np.nonzero(store.counts)
    got_cells = {(int(w), int(d) + 1): int(store.counts[w, d])
                 for w, d in zip(nz_w, nz_d)}
    want_cells = {(encode_word(w, store.k).code, d): c
                  for w, per in counts.items() for d, c in per.items() if c}
    return got_cells == want_cells


def random_dna(rng, n: int, p=(0.25, 0.25, 0.25, 0.25)) -> bytes:
    codes = rng.choice(4, size=n, p=np.asarray(p, dtype=np.float64))
    return ACGT[codes].tobytes()


def inject_separators(rng, data: bytes, rate: float = 0.001,
                      alphabet: bytes = b"Nnx-") -> bytes:
    """Overwrite random short runs with non-ACGT bytes."""
    arr = np.frombuffer(data, dtype=np.uint8).copy()
    n_runs = max(1, int(len(arr) * rate / 3))
    starts = rng.integers(0, max(1, len(arr) - 10), size=n_runs)
    for s in starts:
        width = int(rng.integers(1, 9))
        sep = alphabet[int(rng.integers(0, len(alphabet)))]
        arr[s:s + width] = sep
    return arr.tobytes()


def random_store(rng, k: int, dmax: int) -> CountStore:
    """Internally consistent store with arbitrary (not scanned) contents."""
    store = CountStore(k, dmax)
    n = 4**k
    store.counts[:] = rng.poisson(0.8, size=(n, dmax)).astype(np.uint32)
    store.counts[:, k] += 1  # every word keeps some retained mass
    store.overflow[:] = rng.integers(0, 5, size=n)
    store.occurrences[:] = store.counts.sum(axis=1) + store.overflow + 1
    store.base_counts[:] = rng.integers(1000, 2000, size=4)
    return store


# -- distributions ---------------------------------------------------------

def random_distribution(rng, k: int = 5, dmax: int = 60,
                        spikes: int = 0, zeros: float = 0.0) -> DistanceDistribution:
    R = dmax - k
    f = rng.random(R)
    if zeros > 0:
        f[rng.random(R) < zeros] = 0.0
    for _ in range(spikes):
        f[int(rng.integers(0, R))] += rng.random() * 10
    if f.sum() == 0:
        f[int(rng.integers(0, R))] = 1.0
    return DistanceDistribution(k=k, dmax=dmax, freqs=f / f.sum(),
                                support_total=float(R))


# -- FASTA writing ----------------------------------------------------------

def write_fasta(path: Path, records: dict[str, bytes], width: int = 70) -> Path:
    with open(path, "wb") as fh:
        for name, seq in records.items():
            fh.write(b">" + name.encode() + b"\n")
            for off in range(0, len(seq), width):
                fh.write(seq[off:off + width] + b"\n")
    return path


# -- synthetic genome (session-scoped, ~10 Mbp) ----------------------------

def build_synthetic_genome(path: Path) -> Path:
    """Three chromosomes, ~10 Mbp total: random background with N runs, a
    soft-masked patch, and planted periodic motifs so some symmetric pairs
    have strong favored distances."""
    rng = np.random.default_rng(7_7_7)
    probs = np.array([0.3, 0.2, 0.2, 0.3])

    def chromosome(n: int) -> np.ndarray:
        codes = rng.choice(4, size=n, p=probs)
        return ACGT[codes].copy()

    def plant(arr: np.ndarray, motif: bytes, start: int, stop: int, period: int):
        m = np.frombuffer(motif, dtype=np.uint8)
        for pos in range(start, stop - len(m), period):
            arr[pos:pos + len(m)] = m

    def mask_runs(arr: np.ndarray, every: int, width_lo=50, width_hi=3000):
        for pos in range(every, len(arr) - width_hi - 1, every):
            width = int(rng.integers(width_lo, width_hi))
            arr[pos:pos + width] = ord("N")

    chr1 = chromosome(4_000_000)
    plant(chr1, b"GGGAGGC", 1_000_000, 2_000_000, 154)
    mask_runs(chr1, 250_000)

    chr2 = chromosome(3_500_000)
    plant(chr2, b"ATCATCG", 500_000, 1_500_000, 311)
    plant(chr2, b"CGATGAT", 1_600_000, 2_600_000, 311)
    mask_runs(chr2, 200_000)

    chr3 = chromosome(2_500_000)
    lower = chr3[100_000:200_000]
    chr3[100_000:200_000] = lower + 32  # acgt soft-masked patch
    mask_runs(chr3, 300_000)

    return write_fasta(path, {
        "chr1": chr1.tobytes(),
        "chr2": chr2.tobytes(),
        "chr3": chr3.tobytes(),
    })


@pytest.fixture(scope="session")
def synthetic_genome(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("genome") / "synthetic.fa"
    build_synthetic_genome(path)
    # warm the scan kernel so timed runs measure scanning, not JIT compilation
    from genodist import Segment, scan_segment
    store = CountStore(7, 1000)
    scan_segment(Segment("warm", 0, b"ACGT" * 300), 7, 1000, store)
    return path
