"""FASTA ingestion: streaming record parsing and ACGT segmentation.

Chromosomes are handled as separate sequences. Within a chromosome, any
symbol outside {A,C,G,T} acts as a separator, so downstream distance
counting never spans masked or ambiguous regions.
"""

from __future__ import annotations

import gzip
import io
import re
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Iterator

from .errors import FastaFormatError

GZIP_MAGIC = b"\x1f\x8b"

# whitespace stripped from sequence lines
_WS = b" \t\r\n\x0b\x0c"
_FOLD_UPPER = bytes.maketrans(b"acgt", b"ACGT")
_ACGT_RUN = re.compile(b"[ACGT]+")


@dataclass
class ChromosomeRecord:
    """One FASTA record. `length` counts all sequence symbols, separators
    included, and is final only once the record's symbol stream has been
    fully consumed."""

    id: str
    length: int = 0


@dataclass(frozen=True)
class Segment:
    """A maximal run of A/C/G/T symbols within one chromosome.

    `offset` is the 0-based position of the first symbol in the
    chromosome's own coordinate system (separators included).
    """

    chromosome_id: str
    offset: int
    symbols: bytes

    def __len__(self) -> int:
        return len(self.symbols)


def open_sequence_file(path: str | Path) -> IO[bytes]:
    """Open a FASTA file for binary reading, transparently decompressing
    gzip input (detected by magic bytes, not file name)."""
    raw = open(path, "rb")
    magic = raw.read(2)
    raw.seek(0)
    if magic == GZIP_MAGIC:
        return io.BufferedReader(gzip.GzipFile(fileobj=raw, mode="rb"))
    return raw


def parse_fasta(stream: IO[bytes]) -> Iterator[tuple[ChromosomeRecord, Iterator[bytes]]]:
    """Yield (record, symbol-chunk iterator) pairs in input order.

    Chunks are sequence lines with all whitespace removed. The chunk
    iterator must be consumed before advancing to the next record; if the
    caller advances early, the remaining chunks are drained internally so
    that `record.length` stays correct.

    Raises FastaFormatError for sequence data before the first '>' header
    or for a header with no name. An empty stream yields nothing.
    """
    pending = stream.readline()
    while pending and not pending.strip():
        pending = stream.readline()
    if not pending:
        return
    if not pending.lstrip().startswith(b">"):
        raise FastaFormatError("sequence data before the first '>' header")

    while pending:
        fields = pending.lstrip()[1:].split(None, 1)
        if not fields:
            raise FastaFormatError("FASTA header with no name")
        record = ChromosomeRecord(fields[0].decode("ascii", errors="replace"))

        def chunks(rec: ChromosomeRecord = record) -> Iterator[bytes]:
            nonlocal pending
            while True:
                line = stream.readline()
                if not line or line.lstrip().startswith(b">"):
                    pending = line
                    return
                piece = line.translate(None, _WS)
                if piece:
                    rec.length += len(piece)
                    yield piece

        body = chunks()
        yield record, body
        for _ in body:  # drain if the caller did not
            pass


def segmentize(
    record: ChromosomeRecord,
    symbols: Iterable[bytes],
    lowercase_as_mask: bool = False,
) -> Iterator[Segment]:
    """Split a chromosome's symbol stream into maximal ACGT segments.

    Lowercase a/c/g/t is folded to uppercase and kept; with
    `lowercase_as_mask` it is treated as a separator instead (soft-masked
    input). Offsets refer to the unmodified chromosome coordinates.
    """
    base = 0  # absolute offset of the current chunk
    run_start = -1
    buf = bytearray()
    for chunk in symbols:
        if not lowercase_as_mask:
            chunk = chunk.translate(_FOLD_UPPER)
        for m in _ACGT_RUN.finditer(chunk):
            s, e = m.span()
            if buf and base + s == run_start + len(buf):
                buf += chunk[s:e]
            else:
                if buf:
                    yield Segment(record.id, run_start, bytes(buf))
                run_start = base + s
                buf = bytearray(chunk[s:e])
        base += len(chunk)
    if buf:
        yield Segment(record.id, run_start, bytes(buf))


def iter_fasta(path: str | Path) -> Iterator[tuple[ChromosomeRecord, Iterator[bytes]]]:
    """parse_fasta over a (possibly gzip-compressed) file path."""
    with open_sequence_file(path) as fh:
        yield from parse_fasta(fh)


def iter_segments(path: str | Path, lowercase_as_mask: bool = False) -> Iterator[Segment]:
    """All ACGT segments of all records in a FASTA file."""
    for record, chunks in iter_fasta(path):
        yield from segmentize(record, chunks, lowercase_as_mask=lowercase_as_mask)
