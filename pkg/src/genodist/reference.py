"""Exact inter-occurrence distance model for i.i.d. nucleotide sequences.

For a word w, a small automaton tracks the match progress (the longest
prefix of w matched so far) as symbols are read. Embedding that automaton
in a Markov chain gives the exact probability g(d) that the next
occurrence of w starts d positions after the previous one. Occurrences
overlap, so after a match the chain resumes from the word's longest proper
border.

The restricted, renormalized form of g mirrors the observed-distribution
pipeline so the two sides can be compared with the same machinery.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InsufficientDataError
from .measures import (DistanceDistribution, PeakConfig, mean_distribution,
                       peak_dissimilarity)
from .scan import WordId, decode_word, encode_word

_SUM_TOL = 1e-12


@dataclass(frozen=True)
class BaseFrequencies:
    """Per-nucleotide probabilities (A, C, G, T)."""

    a: float
    c: float
    g: float
    t: float

    def __post_init__(self):
        arr = self.as_array()
        if (arr < 0).any():
            raise ConfigError(f"base frequencies must be non-negative: {arr.tolist()}")
        if abs(arr.sum() - 1.0) > _SUM_TOL:
            raise ConfigError(f"base frequencies must sum to 1, got {arr.sum()!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.c, self.g, self.t], dtype=np.float64)

    @classmethod
    def uniform(cls) -> "BaseFrequencies":
        return cls(0.25, 0.25, 0.25, 0.25)

    @classmethod
    def from_counts(cls, counts) -> "BaseFrequencies":
        arr = np.asarray(counts, dtype=np.float64)
        total = arr.sum()
        if arr.shape != (4,) or total <= 0:
            raise ConfigError(f"need positive counts for 4 bases, got {counts!r}")
        return cls(*(arr / total))

    @classmethod
    def parse(cls, text: str) -> "BaseFrequencies":
        try:
            vals = [float(x) for x in text.split(",")]
        except ValueError as exc:
            raise ConfigError(f"cannot parse base frequencies from {text!r}") from exc
        if len(vals) != 4:
            raise ConfigError(f"expected 4 comma-separated base frequencies, got {text!r}")
        return cls(*vals)


@dataclass(frozen=True, eq=False)
class PatternAutomaton:
    """Match-progress automaton of one word.

    State s (0..k-1) means the last s symbols read are the longest suffix
    equal to a prefix of the word; state k is a completed match.
    transitions[s, c] follows symbol code c; post_match_state is the
    longest proper border of the word, i.e. the state right after a match.
    """

    word: WordId
    transitions: np.ndarray = field(repr=False)
    post_match_state: int

    @property
    def k(self) -> int:
        return self.word.k


def build_automaton(word: WordId | str) -> PatternAutomaton:
    """Transition table over states 0..k: transitions[s, c] is the length
    of the longest suffix of prefix_s + symbol_c that is a prefix of the
    word."""
    if isinstance(word, str):
        word = encode_word(word)
    k, code = word
    syms = [(code >> (2 * (k - 1 - j))) & 3 for j in range(k)]

    # failure function: fail[s] = longest proper border of the length-s prefix
    fail = [0] * (k + 1)
    for s in range(2, k + 1):
        f = fail[s - 1]
        while f > 0 and syms[s - 1] != syms[f]:
            f = fail[f]
        fail[s] = f + 1 if syms[s - 1] == syms[f] else 0

    delta = np.zeros((k + 1, 4), dtype=np.int64)
    for c in range(4):
        delta[0, c] = 1 if c == syms[0] else 0
    for s in range(1, k + 1):
        for c in range(4):
            if s < k and c == syms[s]:
                delta[s, c] = s + 1
            else:
                delta[s, c] = delta[fail[s], c]
    delta.setflags(write=False)
    return PatternAutomaton(word=word, transitions=delta, post_match_state=fail[k])


def first_return_probabilities(automaton: PatternAutomaton, freqs: BaseFrequencies,
                               dmax: int) -> np.ndarray:
    """g[d-1] = probability that the next occurrence starts exactly d
    symbols after the previous one, for d = 1..dmax."""
    if dmax < 1:
        raise ConfigError(f"dmax must be positive, got {dmax}")
    p = freqs.as_array()
    k = automaton.k
    delta = automaton.transitions

    # transient transition matrix and per-state absorption probability
    Q = np.zeros((k, k), dtype=np.float64)
    r = np.zeros(k, dtype=np.float64)
    for s in range(k):
        for c in range(4):
            t = int(delta[s, c])
            if t == k:
                r[s] += p[c]
            else:
                Q[s, t] += p[c]

    u = np.zeros(k, dtype=np.float64)
    u[automaton.post_match_state] = 1.0
    g = np.empty(dmax, dtype=np.float64)
    for d in range(dmax):
        g[d] = u @ r
        u = u @ Q
    return g


def reference_distribution(automaton: PatternAutomaton, freqs: BaseFrequencies,
                           k: int, dmax: int) -> DistanceDistribution:
    """Model distance distribution restricted to d > k and renormalized,
    matching the treatment of observed distributions."""
    if k != automaton.k:
        raise ConfigError(f"automaton is for k={automaton.k}, got k={k}")
    if dmax <= k:
        raise ConfigError(f"dmax must exceed k={k}, got {dmax}")
    g = first_return_probabilities(automaton, freqs, dmax)
    retained = g[k:]
    mass = retained.sum()
    if mass <= 0.0:
        raise InsufficientDataError(
            f"word {decode_word(automaton.word)} has no reachable distance in "
            f"({k}, {dmax}] under the given base frequencies")
    return DistanceDistribution(k=k, dmax=dmax, freqs=retained / mass,
                                support_total=float(mass))


def batch_first_return(codes: np.ndarray, k: int, freqs: BaseFrequencies,
                       dmax: int) -> np.ndarray:
    """first_return_probabilities for many words at once.

    Returns an array of shape (len(codes), dmax). The chain propagation is
    batched with matmul; the per-word automata are built individually (k is
    tiny).
    """
    codes = np.asarray(codes, dtype=np.int64)
    W = codes.size
    p = freqs.as_array()
    Q = np.zeros((W, k, k), dtype=np.float64)
    r = np.zeros((W, k), dtype=np.float64)
    u = np.zeros((W, k), dtype=np.float64)
    for i, code in enumerate(codes):
        auto = build_automaton(WordId(k, int(code)))
        delta = auto.transitions
        for s in range(k):
            for c in range(4):
                t = int(delta[s, c])
                if t == k:
                    r[i, s] += p[c]
                else:
                    Q[i, s, t] += p[c]
        u[i, auto.post_match_state] = 1.0

    g = np.empty((W, dmax), dtype=np.float64)
    for d in range(dmax):
        g[:, d] = np.einsum("ws,ws->w", u, r)
        u = np.matmul(u[:, None, :], Q)[:, 0, :]
    return g


def rs_score(f_w: DistanceDistribution, f_wbar: DistanceDistribution,
             g_w: DistanceDistribution, g_wbar: DistanceDistribution,
             cfg: PeakConfig) -> float:
    """Peak dissimilarity between the averaged observed distribution of a
    symmetric pair and its averaged model distribution. Invariant under
    swapping the pair members."""
    obs = mean_distribution(f_w, f_wbar)
    ref = mean_distribution(g_w, g_wbar)
    return peak_dissimilarity(obs, ref, cfg)
