"""Sliding-window word scanning with distance histograms.

Words of length k are packed into integers, 2 bits per symbol (A=0, C=1,
G=2, T=3, first symbol most significant). A store keeps, per word, the
total occurrence count and a histogram of gaps between the start positions
of consecutive occurrences, capped at `dmax` (longer gaps land in an
overflow bucket so occurrence totals stay exact).

Occurrences overlap: in AAAA the word AAA occurs twice, at distance 1.
Distances never cross segment boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np
import pandas as pd
from numba import njit

from .errors import EncodingError, StoreError
from .fasta import Segment

MAX_K = 8  # 4^8 x dmax counters; larger k would not fit a dense store
DEFAULT_DMAX = 1000

ALPHABET = "ACGT"
_CODE_OF = {c: i for i, c in enumerate(ALPHABET)}

# byte -> 2-bit code, 4 for anything that is not uppercase ACGT
_BYTE_CODES = np.full(256, 4, dtype=np.uint8)
for _i, _c in enumerate(ALPHABET.encode()):
    _BYTE_CODES[_c] = _i

_FEED_CHUNK = 8 << 20  # bytes mapped per kernel call


class WordId(NamedTuple):
    k: int
    code: int


def _check_k(k: int) -> None:
    if not 1 <= int(k) <= MAX_K:
        raise EncodingError(f"word length must be in 1..{MAX_K}, got {k}")


def encode_word(text: str, k: int | None = None) -> WordId:
    """Pack a k-symbol ACGT word into a WordId."""
    if k is None:
        k = len(text)
    _check_k(k)
    if len(text) != k:
        raise EncodingError(f"expected a word of length {k}, got {text!r}")
    code = 0
    for ch in text.upper():
        if ch not in _CODE_OF:
            raise EncodingError(f"invalid symbol {ch!r} in word {text!r}")
        code = (code << 2) | _CODE_OF[ch]
    return WordId(k, code)


def decode_word(word: WordId) -> str:
    k, code = word
    _check_k(k)
    if not 0 <= code < 4**k:
        raise EncodingError(f"code {code} out of range for k={k}")
    out = []
    for shift in range(2 * (k - 1), -1, -2):
        out.append(ALPHABET[(code >> shift) & 3])
    return "".join(out)


def reverse_complement(word: WordId) -> WordId:
    """The word read backwards with A<->T and C<->G swapped."""
    k, code = word
    _check_k(k)
    rc = 0
    for j in range(k):
        sym = (code >> (2 * (k - 1 - j))) & 3
        rc |= (3 - sym) << (2 * j)
    return WordId(k, rc)


def revcomp_text(text: str) -> str:
    return decode_word(reverse_complement(encode_word(text)))


def reverse_complement_codes(k: int) -> np.ndarray:
    """Vectorized reverse-complement map over all 4^k word codes."""
    _check_k(k)
    codes = np.arange(4**k, dtype=np.int64)
    rc = np.zeros_like(codes)
    for j in range(k):
        sym = (codes >> (2 * (k - 1 - j))) & 3
        rc |= (3 - sym) << (2 * j)
    return rc


def decode_table(k: int) -> np.ndarray:
    """All 4^k word texts, indexed by code."""
    _check_k(k)
    letters = np.frombuffer(ALPHABET.encode(), dtype=np.uint8)
    codes = np.arange(4**k, dtype=np.int64)
    cols = [letters[(codes >> (2 * (k - 1 - j))) & 3] for j in range(k)]
    return np.stack(cols, axis=1).view(f"S{k}").ravel().astype(str)


@njit(cache=True, nogil=True)
def _scan_chunk(codes, k, dmax, counts, occurrences, overflow, base_counts,
                last_pos, last_seg, word, nvalid, pos, seg):
    """Single-pass scan of one chunk of 2-bit codes (4 = separator).

    State (word, nvalid, pos, seg) carries across chunks of the same
    sequence. `last_pos`/`last_seg` implement per-segment last-occurrence
    tracking without per-segment resets.
    """
    mask = (1 << (2 * k)) - 1
    for i in range(codes.shape[0]):
        c = codes[i]
        if c > 3:
            nvalid = 0
            seg += 1
            pos += 1
            continue
        base_counts[c] += 1
        word = ((word << 2) | c) & mask
        if nvalid < k:
            nvalid += 1
        if nvalid == k:
            start = pos - k + 1
            occurrences[word] += 1
            if last_seg[word] == seg:
                d = start - last_pos[word]
                if d <= dmax:
                    counts[word, d - 1] += 1
                else:
                    overflow[word] += 1
            last_pos[word] = start
            last_seg[word] = seg
        pos += 1
    return word, nvalid, pos, seg


class CountStore:
    """Dense per-word occurrence counts and distance histograms.

    counts[w, j] is the number of times consecutive occurrences of word w
    were j+1 positions apart (j+1 <= dmax). `inputs` and `metadata` record
    provenance; `base_counts` tallies every scanned A/C/G/T symbol.
    """

    def __init__(self, k: int, dmax: int = DEFAULT_DMAX,
                 inputs: list[str] | None = None,
                 metadata: dict[str, str] | None = None):
        _check_k(k)
        if dmax < 1:
            raise StoreError(f"dmax must be positive, got {dmax}")
        self.k = int(k)
        self.dmax = int(dmax)
        self.counts = np.zeros((4**self.k, self.dmax), dtype=np.uint32)
        self.occurrences = np.zeros(4**self.k, dtype=np.int64)
        self.overflow = np.zeros(4**self.k, dtype=np.int64)
        self.base_counts = np.zeros(4, dtype=np.int64)
        self.inputs: list[str] = list(inputs or [])
        self.metadata: dict[str, str] = dict(metadata or {})
        # scan scratch, excluded from equality/merge/save
        self._last_pos = np.zeros(4**self.k, dtype=np.int64)
        self._last_seg = np.full(4**self.k, -1, dtype=np.int64)
        self._word = 0
        self._nvalid = 0
        self._pos = 0
        self._seg = 0

    # -- scanning ---------------------------------------------------------

    def begin_sequence(self) -> None:
        """Start a new sequence: following symbols never pair with earlier
        occurrences."""
        self._seg += 1
        self._nvalid = 0

    def feed(self, data: bytes) -> None:
        """Scan raw symbols. Non-ACGT bytes act as separators; lowercase is
        NOT folded here (ingest policy is applied upstream)."""
        view = memoryview(data)
        for off in range(0, len(view), _FEED_CHUNK):
            codes = _BYTE_CODES[np.frombuffer(view[off:off + _FEED_CHUNK], dtype=np.uint8)]
            self._word, self._nvalid, self._pos, self._seg = _scan_chunk(
                codes, self.k, self.dmax,
                self.counts, self.occurrences, self.overflow, self.base_counts,
                self._last_pos, self._last_seg,
                self._word, self._nvalid, self._pos, self._seg)

    def histogram(self, word: WordId | int) -> "DistanceHistogram":
        code = word.code if isinstance(word, WordId) else int(word)
        if not 0 <= code < 4**self.k:
            raise EncodingError(f"code {code} out of range for k={self.k}")
        return DistanceHistogram(
            counts=self.counts[code],
            occurrences=int(self.occurrences[code]),
            overflow=int(self.overflow[code]),
        )

    def base_frequencies(self) -> np.ndarray:
        total = int(self.base_counts.sum())
        if total == 0:
            raise StoreError("store has no scanned symbols to estimate base frequencies")
        return self.base_counts / total

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CountStore):
            return NotImplemented
        return (self.k == other.k and self.dmax == other.dmax
                and np.array_equal(self.counts, other.counts)
                and np.array_equal(self.occurrences, other.occurrences)
                and np.array_equal(self.overflow, other.overflow)
                and np.array_equal(self.base_counts, other.base_counts)
                and self.inputs == other.inputs
                and self.metadata == other.metadata)

    __hash__ = None  # mutable


@dataclass
class DistanceHistogram:
    """Per-word view: counts[j] tallies distance j+1, up to dmax."""

    counts: np.ndarray
    occurrences: int
    overflow: int

    @classmethod
    def from_dict(cls, counts: dict[int, int], dmax: int,
                  occurrences: int | None = None, overflow: int = 0) -> "DistanceHistogram":
        arr = np.zeros(dmax, dtype=np.int64)
        for d, c in counts.items():
            if not 1 <= d <= dmax:
                raise ValueError(f"distance {d} outside 1..{dmax}")
            arr[d - 1] = c
        if occurrences is None:
            occurrences = int(arr.sum()) + overflow + 1
        return cls(arr, occurrences, overflow)


def scan_segment(segment: Segment, k: int, dmax: int, store: CountStore) -> CountStore:
    """Scan one ACGT segment into the store. Segments shorter than k
    contribute nothing."""
    if (k, dmax) != (store.k, store.dmax):
        raise StoreError(
            f"store is configured for (k={store.k}, dmax={store.dmax}), "
            f"scan requested (k={k}, dmax={dmax})")
    store.begin_sequence()
    store.feed(segment.symbols)
    return store


def scan_segments(segments: Iterable[Segment], store: CountStore) -> CountStore:
    for seg in segments:
        scan_segment(seg, store.k, store.dmax, store)
    return store


def merge_stores(a: CountStore, b: CountStore) -> CountStore:
    """Element-wise sum of two stores with equal (k, dmax)."""
    if (a.k, a.dmax) != (b.k, b.dmax):
        raise StoreError(
            f"cannot merge stores with (k={a.k}, dmax={a.dmax}) and (k={b.k}, dmax={b.dmax})")
    merged = CountStore(a.k, a.dmax)
    # chunked 64-bit addition so uint32 counter overflow raises instead of wrapping
    rows_per_chunk = max(1, (1 << 22) // max(1, a.dmax))
    for lo in range(0, a.counts.shape[0], rows_per_chunk):
        hi = lo + rows_per_chunk
        s = a.counts[lo:hi].astype(np.int64) + b.counts[lo:hi]
        if s.size and int(s.max()) > np.iinfo(np.uint32).max:
            raise StoreError("distance counter overflow while merging stores")
        merged.counts[lo:hi] = s.astype(np.uint32)
    merged.occurrences = a.occurrences + b.occurrences
    merged.overflow = a.overflow + b.overflow
    merged.base_counts = a.base_counts + b.base_counts
    seen = set()
    merged.inputs = [x for x in a.inputs + b.inputs if not (x in seen or seen.add(x))]
    merged.metadata = {key: val for key, val in a.metadata.items()
                       if b.metadata.get(key, val) == val}
    merged.metadata.update({key: val for key, val in b.metadata.items()
                            if key not in a.metadata})
    return merged


# -- store files ----------------------------------------------------------
#
# Versioned TSV. First line:
#   #genodist-store v1 k=<k> dmax=<dmax>
# then optional "#meta key=value" provenance lines, then one block per word
# with data: a summary row `word<TAB>occurrences<TAB>overflow` followed by
# `word<TAB>d<TAB>count` rows for its nonzero distance counts. Words with no
# occurrences are omitted and load back as zero.

_STORE_TAG = "#genodist-store"
_STORE_VERSION = "v1"


def save_store(store: CountStore, path: str | Path) -> None:
    path = Path(path)
    words = decode_table(store.k)

    nz_w, nz_d = np.nonzero(store.counts)
    sum_w = np.nonzero((store.occurrences > 0) | (store.overflow > 0))[0]

    block = np.concatenate([sum_w, nz_w])
    order_in_block = np.concatenate([np.full(sum_w.size, -1, dtype=np.int64), nz_d])
    col1 = np.concatenate([store.occurrences[sum_w], (nz_d + 1).astype(np.int64)])
    col2 = np.concatenate([store.overflow[sum_w], store.counts[nz_w, nz_d].astype(np.int64)])
    order = np.lexsort((order_in_block, block))

    frame = pd.DataFrame({
        "word": words[block[order]],
        "a": col1[order],
        "b": col2[order],
    })
    tmp = path.with_name(path.name + ".tmp")
    try:
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"{_STORE_TAG} {_STORE_VERSION} k={store.k} dmax={store.dmax}\n")
            for name in store.inputs:
                fh.write(f"#meta input={name}\n")
            for key in sorted(store.metadata):
                fh.write(f"#meta {key}={store.metadata[key]}\n")
            fh.write("#meta bases={}\n".format(",".join(str(int(x)) for x in store.base_counts)))
            frame.to_csv(fh, sep="\t", header=False, index=False, lineterminator="\n")
        tmp.replace(path)
    finally:
        tmp.unlink(missing_ok=True)


def _parse_header(line: str) -> tuple[int, int]:
    parts = line.rstrip("\n").split()
    if len(parts) != 4 or parts[0] != _STORE_TAG:
        raise StoreError("not a genodist count-store file")
    if parts[1] != _STORE_VERSION:
        raise StoreError(f"unsupported store version {parts[1]!r} (expected {_STORE_VERSION})")
    try:
        kv = dict(p.split("=", 1) for p in parts[2:])
        k = int(kv["k"])
        dmax = int(kv["dmax"])
    except (ValueError, KeyError) as exc:
        raise StoreError(f"malformed store header: {line!r}") from exc
    return k, dmax


def load_store(path: str | Path) -> CountStore:
    path = Path(path)
    with open(path, "r", encoding="utf-8", newline="") as fh:
        header = fh.readline()
        if not header:
            raise StoreError("empty store file")
        k, dmax = _parse_header(header)
        store = CountStore(k, dmax)

        pos = fh.tell()
        while True:
            line = fh.readline()
            if not line.startswith("#"):
                break
            body = line[1:].rstrip("\n")
            if not body.startswith("meta "):
                raise StoreError(f"unrecognized comment line in store: {line!r}")
            key, _, val = body[5:].partition("=")
            if key == "input":
                store.inputs.append(val)
            elif key == "bases":
                try:
                    store.base_counts = np.array([int(x) for x in val.split(",")], dtype=np.int64)
                except ValueError as exc:
                    raise StoreError(f"malformed bases metadata: {val!r}") from exc
                if store.base_counts.shape != (4,) or (store.base_counts < 0).any():
                    raise StoreError(f"malformed bases metadata: {val!r}")
            else:
                store.metadata[key] = val
            pos = fh.tell()
        fh.seek(pos)

        try:
            frame = pd.read_csv(fh, sep="\t", header=None, names=["word", "a", "b"],
                                dtype={"word": str, "a": np.int64, "b": np.int64})
        except pd.errors.EmptyDataError:
            return store
        except (ValueError, pd.errors.ParserError) as exc:
            raise StoreError(f"malformed store rows: {exc}") from exc

    words = frame["word"].to_numpy()
    a = frame["a"].to_numpy()
    b = frame["b"].to_numpy()
    if (a < 0).any() or (b < 0).any():
        raise StoreError("negative value in store rows")

    code_of = {w: i for i, w in enumerate(decode_table(k))}
    try:
        codes = np.array([code_of[w] for w in words], dtype=np.int64)
    except KeyError as exc:
        raise StoreError(f"invalid word in store: {exc.args[0]!r}") from None

    is_summary = np.ones(codes.size, dtype=bool)
    is_summary[1:] = codes[1:] != codes[:-1]
    block_codes = codes[is_summary]
    if np.unique(block_codes).size != block_codes.size:
        raise StoreError("duplicate word block in store")

    store.occurrences[block_codes] = a[is_summary]
    store.overflow[block_codes] = b[is_summary]

    cw = codes[~is_summary]
    cd = a[~is_summary]
    cc = b[~is_summary]
    if cd.size:
        if cd.min() < 1 or cd.max() > dmax:
            raise StoreError(f"distance outside 1..{dmax} in store rows")
        if cc.max() > np.iinfo(np.uint32).max:
            raise StoreError("distance count exceeds 32-bit counter range")
        store.counts[cw, cd - 1] = cc.astype(np.uint32)
    return store
