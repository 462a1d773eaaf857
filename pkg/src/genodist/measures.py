"""Distance distributions and dissimilarity measures between them.

A distribution lives on the restricted domain {k+1, ..., dmax}: distances
up to the word length are excluded because word structure can forbid them,
which would distort any comparison. Frequencies are renormalized over the
retained mass so they always sum to one; the retained mass itself is kept
in `support_total`.

Three dissimilarities are provided: Euclidean distance, Jeffreys
divergence (symmetrized Kullback-Leibler, with exact zeros replaced by a
small epsilon), and a peak dissimilarity that compares the n strongest
peaks of the two distributions. All three are semimetrics: symmetric,
non-negative, zero on identical inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .errors import ConfigError, InsufficientDataError
from .scan import DistanceHistogram

DEFAULT_EPS = 1e-10
_FLAT_GUARD = 1e-12  # stands in for a zero max-peak size in ratio terms


@dataclass(frozen=True)
class PeakConfig:
    """Peak detection parameters: window width h (domain points) and the
    number of strongest peaks compared."""

    h: int = 5
    n_peaks: int = 3

    def __post_init__(self):
        if self.h < 2:
            raise ConfigError(f"peak window width must be >= 2, got {self.h}")
        if self.n_peaks < 1:
            raise ConfigError(f"number of peaks must be >= 1, got {self.n_peaks}")

    def validate_for_domain(self, R: int) -> None:
        if self.n_peaks * self.h > R:
            raise ConfigError(
                f"{self.n_peaks} disjoint windows of width {self.h} do not fit "
                f"a domain of length {R}")


@dataclass(eq=False)
class DistanceDistribution:
    """Relative distance frequencies on {k+1, ..., dmax}.

    freqs[i] is the frequency of distance k+1+i; support_total is the mass
    (count or probability) the frequencies were normalized from.
    """

    k: int
    dmax: int
    freqs: np.ndarray
    support_total: float

    def __post_init__(self):
        self.freqs = np.asarray(self.freqs, dtype=np.float64)
        if self.freqs.shape != (self.R,):
            raise ConfigError(
                f"expected {self.R} frequencies for k={self.k}, dmax={self.dmax}, "
                f"got {self.freqs.shape}")

    @property
    def R(self) -> int:
        """Domain length dmax - k."""
        return self.dmax - self.k

    @property
    def domain(self) -> np.ndarray:
        return np.arange(self.k + 1, self.dmax + 1)


@dataclass(frozen=True)
class Peak:
    """A width-h window of the distribution: covered domain points
    [start, end], midpoint location, and size = mean absolute successive
    frequency difference inside the window."""

    start: int
    end: int
    location: int
    size: float


def to_distribution(hist: DistanceHistogram, k: int, dmax: int) -> DistanceDistribution:
    """Normalize a distance histogram over the restricted domain."""
    counts = np.asarray(hist.counts)
    if counts.shape != (dmax,):
        raise ConfigError(f"histogram covers {counts.shape[0]} distances, expected {dmax}")
    retained = counts[k:].astype(np.float64)
    mass = retained.sum()
    if mass <= 0:
        raise InsufficientDataError(
            f"no distances in ({k}, {dmax}] to build a distribution from")
    return DistanceDistribution(k=k, dmax=dmax, freqs=retained / mass,
                                support_total=float(mass))


def mean_distribution(f: DistanceDistribution, g: DistanceDistribution) -> DistanceDistribution:
    _check_domains(f, g)
    return DistanceDistribution(k=f.k, dmax=f.dmax, freqs=(f.freqs + g.freqs) / 2.0,
                                support_total=(f.support_total + g.support_total) / 2.0)


def _check_domains(*dists: DistanceDistribution) -> None:
    first = dists[0]
    for d in dists[1:]:
        if (d.k, d.dmax) != (first.k, first.dmax):
            raise ConfigError(
                f"distributions live on different domains: "
                f"(k={first.k}, dmax={first.dmax}) vs (k={d.k}, dmax={d.dmax})")


def apr(n_w: int, n_wbar: int) -> float:
    """Frequency discrepancy |n_w - n_wbar| / sqrt(2 (n_w + n_wbar)).

    This is the absolute Pearson residual against equal underlying
    probabilities; it is 0 when both counts are 0.
    """
    if n_w < 0 or n_wbar < 0:
        raise ConfigError("occurrence counts must be non-negative")
    total = n_w + n_wbar
    if total == 0:
        return 0.0
    return abs(n_w - n_wbar) / math.sqrt(2.0 * total)


def euclidean(f: DistanceDistribution, g: DistanceDistribution) -> float:
    """sqrt of the summed squared frequency differences."""
    _check_domains(f, g)
    diff = f.freqs - g.freqs
    return float(np.sqrt(np.dot(diff, diff)))


def jeffreys(f: DistanceDistribution, g: DistanceDistribution,
             eps: float = DEFAULT_EPS) -> float:
    """Symmetrized Kullback-Leibler divergence.

    Exact zero frequencies are replaced by `eps` (no renormalization), then
    D_J = sum (p_i - q_i) (ln p_i - ln q_i) >= 0.
    """
    _check_domains(f, g)
    if not eps > 0:
        raise ConfigError(f"eps must be positive, got {eps}")
    p = np.where(f.freqs == 0.0, eps, f.freqs)
    q = np.where(g.freqs == 0.0, eps, g.freqs)
    return float(np.sum((p - q) * (np.log(p) - np.log(q))))


def window_sizes(f: DistanceDistribution, h: int) -> np.ndarray:
    """Peak size of every width-h window: the mean of the h-1 absolute
    successive frequency differences inside it. Window i covers domain
    points i..i+h-1; there are R-h+1 windows."""
    absdiff = np.abs(np.diff(f.freqs))
    win = np.lib.stride_tricks.sliding_window_view(absdiff, h - 1)
    return win.mean(axis=1)


def _remaining_capacity(starts: list[int], R: int, h: int) -> int:
    """How many more disjoint width-h windows fit around the selected ones."""
    cap = 0
    prev_end = -1
    for s in sorted(starts):
        cap += (s - prev_end - 1) // h
        prev_end = s + h - 1
    cap += (R - 1 - prev_end) // h
    return cap


def find_peaks(f: DistanceDistribution, cfg: PeakConfig) -> list[Peak]:
    """The n strongest peaks with pairwise disjoint windows.

    Every window of h consecutive domain points is scored; the highest-size
    window wins, then the highest among windows disjoint from all selected,
    n times. Ties go to the smaller location.

    On domains barely larger than n*h a pure greedy pick can strand the
    later selections; a candidate is therefore skipped (rare, tiny domains
    only) when taking it would leave no room to place the remaining
    windows. Peaks come back in selection order (non-increasing size).
    """
    cfg.validate_for_domain(f.R)
    h, n = cfg.h, cfg.n_peaks
    sizes = window_sizes(f, h)
    nwin = sizes.size
    lo_domain = f.k + 1
    # candidates by decreasing size, ties to the smaller start (= location)
    order = np.lexsort((np.arange(nwin), -sizes))
    available = np.ones(nwin, dtype=bool)
    starts: list[int] = []
    peaks: list[Peak] = []
    for picked in range(n):
        chosen = -1
        for i in order:
            i = int(i)
            if not available[i]:
                continue
            if _remaining_capacity(starts + [i], nwin + h - 1, h) < n - picked - 1:
                continue
            chosen = i
            break
        if chosen < 0:  # unreachable: capacity >= n is invariant
            raise ConfigError(
                f"could not select {n} disjoint peak windows of width {h} "
                f"on a domain of length {f.R}")
        starts.append(chosen)
        peaks.append(Peak(
            start=lo_domain + chosen,
            end=lo_domain + chosen + h - 1,
            location=lo_domain + chosen + (h - 1) // 2,
            size=float(sizes[chosen]),
        ))
        available[max(0, chosen - h + 1):chosen + h] = False
    return peaks


def peak_pair_dissim(t1: Peak, t2: Peak, v: float, vbar: float, R: int) -> float:
    """Dissimilarity between two peaks.

    (|l1-l2|/R + 1) (|v1-v2|/min(v, vbar) + 1) - 1, where v and vbar are
    the strongest peak sizes of the two distributions; a tiny guard stands
    in for min(v, vbar) when a distribution is flat.
    """
    if R <= 0:
        raise ConfigError(f"domain length must be positive, got {R}")
    scale = max(min(v, vbar), _FLAT_GUARD)
    loc_term = abs(t1.location - t2.location) / R + 1.0
    size_term = abs(t1.size - t2.size) / scale + 1.0
    return loc_term * size_term - 1.0


def peak_dissimilarity(f: DistanceDistribution, g: DistanceDistribution,
                       cfg: PeakConfig) -> float:
    """Minimum over all pairings of the n strongest peaks of the summed
    peak-pair dissimilarities."""
    _check_domains(f, g)
    pf = find_peaks(f, cfg)
    pg = find_peaks(g, cfg)
    return peak_dissimilarity_from_peaks(pf, pg, f.R)


def peak_dissimilarity_from_peaks(pf: list[Peak], pg: list[Peak], R: int) -> float:
    if len(pf) != len(pg):
        raise ConfigError("peak lists must have equal length")
    v = pf[0].size
    vbar = pg[0].size
    n = len(pf)
    return min(
        sum(peak_pair_dissim(pf[i], pg[perm[i]], v, vbar, R) for i in range(n))
        for perm in permutations(range(n))
    )
