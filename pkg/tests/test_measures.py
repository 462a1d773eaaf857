"""Distribution building, dissimilarity measures and peak detection."""

from __future__ import annotations

import math
from itertools import permutations

import numpy as np
import pytest

from genodist import (ConfigError, DistanceDistribution, InsufficientDataError,
                      PeakConfig, apr, euclidean, find_peaks, jeffreys,
                      mean_distribution, peak_dissimilarity, peak_pair_dissim,
                      to_distribution)
from genodist.measures import Peak, window_sizes
from genodist.scan import DistanceHistogram
from conftest import random_distribution


def dist(freqs, k=1, dmax=None) -> DistanceDistribution:
    freqs = np.asarray(freqs, dtype=np.float64)
    if dmax is None:
        dmax = k + freqs.size
    return DistanceDistribution(k=k, dmax=dmax, freqs=freqs, support_total=1.0)


# -- to_distribution -----------------------------------------------------------

def test_two_point_normalization():
    hist = DistanceHistogram.from_dict({6: 2, 8: 2}, dmax=20)
    d = to_distribution(hist, k=5, dmax=20)
    assert d.freqs[d.domain.tolist().index(6)] == 0.5
    assert d.freqs[d.domain.tolist().index(8)] == 0.5
    assert d.freqs.sum() == 1.0
    assert d.support_total == 4


def test_domain_excludes_short_distances():
    hist = DistanceHistogram.from_dict({1: 7, 3: 3}, dmax=5)
    d = to_distribution(hist, k=2, dmax=5)
    assert d.domain.tolist() == [3, 4, 5]
    assert d.freqs.tolist() == [1.0, 0.0, 0.0]


def test_hand_normalization():
    hist = DistanceHistogram.from_dict({6: 1, 7: 2, 9: 1}, dmax=9)
    d = to_distribution(hist, k=5, dmax=9)
    assert d.domain.tolist() == [6, 7, 8, 9]
    assert d.freqs.tolist() == [0.25, 0.5, 0.0, 0.25]


def test_empty_retained_support_raises():
    hist = DistanceHistogram.from_dict({1: 7}, dmax=5)
    with pytest.raises(InsufficientDataError):
        to_distribution(hist, k=2, dmax=5)


# -- apr -------------------------------------------------------------------------

def test_apr_values():
    assert apr(10, 10) == 0.0
    assert apr(8, 2) == pytest.approx(6 / math.sqrt(20), abs=1e-15)
    assert apr(0, 0) == 0.0
    assert apr(3, 9) == apr(9, 3)


# -- euclidean --------------------------------------------------------------------

def test_euclidean_identity_and_point_masses():
    f = dist([1.0, 0.0, 0.0])
    g = dist([0.0, 1.0, 0.0])
    assert euclidean(f, f) == 0.0
    assert euclidean(f, g) == pytest.approx(math.sqrt(2), abs=1e-15)


def test_euclidean_symmetry_and_bound(rng):
    for _ in range(50):
        f = random_distribution(rng, zeros=0.3)
        g = random_distribution(rng, zeros=0.3)
        d = euclidean(f, g)
        assert d == euclidean(g, f)
        assert d * d <= 2.0 + 1e-12


def test_euclidean_rejects_domain_mismatch():
    with pytest.raises(ConfigError):
        euclidean(dist([1.0, 0.0]), dist([1.0, 0.0, 0.0]))


# -- jeffreys ----------------------------------------------------------------------

def test_jeffreys_identity():
    f = dist([0.4, 0.6])
    assert jeffreys(f, f) == 0.0


def test_jeffreys_hand_value():
    f = dist([0.75, 0.25])
    g = dist([0.25, 0.75])
    assert jeffreys(f, g) == pytest.approx(math.log(3.0), abs=1e-12)


def test_jeffreys_zero_replacement_and_eps_monotonicity():
    f = dist([1.0, 0.0])
    g = dist([0.5, 0.5])
    big = jeffreys(f, g, eps=1e-10)
    bigger = jeffreys(f, g, eps=1e-12)
    assert math.isfinite(big)
    assert bigger > big > 0


def test_jeffreys_equals_two_sided_kl(rng):
    for _ in range(50):
        f = random_distribution(rng, zeros=0.4)
        g = random_distribution(rng, zeros=0.4)
        eps = 1e-10
        p = np.where(f.freqs == 0, eps, f.freqs)
        q = np.where(g.freqs == 0, eps, g.freqs)
        kl_pq = float(np.sum(p * (np.log(p) - np.log(q))))
        kl_qp = float(np.sum(q * (np.log(q) - np.log(p))))
        assert jeffreys(f, g, eps=eps) == pytest.approx(kl_pq + kl_qp, abs=1e-12)


# -- peaks -------------------------------------------------------------------------

def test_find_peaks_worked_example():
    f = dist([0.1, 0.1, 0.5, 0.1, 0.1, 0.02, 0.02, 0.02, 0.02, 0.02], k=5, dmax=15)
    [peak] = find_peaks(f, PeakConfig(h=3, n_peaks=1))
    assert (peak.start, peak.end) == (7, 9)
    assert peak.location == 8
    assert peak.size == pytest.approx(0.4, abs=1e-12)


def test_find_peaks_flat_distribution_has_zero_sizes():
    f = dist(np.full(20, 1 / 20))
    peaks = find_peaks(f, PeakConfig(h=5, n_peaks=3))
    assert [p.size for p in peaks] == pytest.approx([0.0, 0.0, 0.0], abs=1e-15)


def test_find_peaks_matches_exhaustive_window_oracle(rng):
    cfg = PeakConfig(h=4, n_peaks=2)
    for _ in range(30):
        f = random_distribution(rng, k=3, dmax=40, spikes=2)
        # oracle: score every window by looping, then greedy selection
        h = cfg.h
        scores = []
        for start in range(f.R - h + 1):
            window = f.freqs[start:start + h]
            diffs = [abs(window[j + 1] - window[j]) for j in range(h - 1)]
            scores.append(sum(diffs) / (h - 1))
        chosen = []
        for _ in range(cfg.n_peaks):
            best = None
            for start, s in enumerate(scores):
                if any(abs(start - c) < h for c in chosen):
                    continue
                if best is None or s > scores[best]:
                    best = start
            chosen.append(best)
        got = find_peaks(f, cfg)
        assert [p.start - (f.k + 1) for p in got] == chosen
        for p, start in zip(got, chosen):
            assert p.size == pytest.approx(scores[start], abs=1e-12)


def test_find_peaks_selected_windows_are_disjoint(rng):
    cfg = PeakConfig(h=5, n_peaks=3)
    for _ in range(50):
        f = random_distribution(rng, spikes=3)
        peaks = find_peaks(f, cfg)
        assert len(peaks) == 3
        assert all(peaks[i].size >= peaks[i + 1].size for i in range(2))
        for i in range(3):
            for j in range(i + 1, 3):
                a, b = peaks[i], peaks[j]
                assert a.end < b.start or b.end < a.start


def test_find_peaks_invariant_under_zero_padding(rng):
    cfg = PeakConfig(h=3, n_peaks=2)
    f = random_distribution(rng, k=3, dmax=30, spikes=2)
    freqs = f.freqs.copy()
    freqs[-6:] = 0.0
    freqs /= freqs.sum()
    base = DistanceDistribution(k=3, dmax=30, freqs=freqs, support_total=1.0)
    padded = DistanceDistribution(k=3, dmax=40, freqs=np.r_[freqs, np.zeros(10)],
                                  support_total=1.0)
    got_base = find_peaks(base, cfg)
    got_padded = find_peaks(padded, cfg)
    assert [(p.start, p.location, p.size) for p in got_base] == \
        [(p.start, p.location, p.size) for p in got_padded]


def test_find_peaks_rejects_oversized_config():
    f = dist(np.full(10, 0.1))
    with pytest.raises(ConfigError):
        find_peaks(f, PeakConfig(h=4, n_peaks=3))


def test_peak_config_guards():
    with pytest.raises(ConfigError):
        PeakConfig(h=1, n_peaks=3)
    with pytest.raises(ConfigError):
        PeakConfig(h=5, n_peaks=0)


def test_even_window_uses_lower_middle_location():
    f = dist([0.0, 0.0, 0.9, 0.0, 0.0, 0.1, 0.0, 0.0], k=2, dmax=10)
    [peak] = find_peaks(f, PeakConfig(h=4, n_peaks=1))
    assert peak.location == peak.start + 1


# -- peak pair dissimilarity ----------------------------------------------------

def mk_peak(location, size):
    return Peak(start=location, end=location, location=location, size=size)


def test_peak_pair_identity():
    t = mk_peak(10, 0.4)
    assert peak_pair_dissim(t, mk_peak(10, 0.4), 0.4, 0.4, R=100) == 0.0


def test_peak_pair_same_location_hand_value():
    t1 = mk_peak(10, 0.4)
    t2 = mk_peak(10, 0.2)
    assert peak_pair_dissim(t1, t2, 0.4, 0.2, R=100) == pytest.approx(1.0, abs=1e-15)


def test_peak_pair_same_size_hand_value():
    t1 = mk_peak(0, 0.3)
    t2 = mk_peak(100, 0.3)
    assert peak_pair_dissim(t1, t2, 0.3, 0.3, R=100) == pytest.approx(1.0, abs=1e-15)


def test_peak_pair_guards_flat_distributions():
    t1 = mk_peak(5, 0.0)
    t2 = mk_peak(9, 0.0)
    got = peak_pair_dissim(t1, t2, 0.0, 0.0, R=10)
    assert got == pytest.approx(0.4, abs=1e-12)  # location term only


# -- peak dissimilarity -----------------------------------------------------------

def brute_force_dp(f, g, cfg):
    pf = find_peaks(f, cfg)
    pg = find_peaks(g, cfg)
    v, vbar = pf[0].size, pg[0].size
    best = None
    for perm in permutations(range(cfg.n_peaks)):
        total = sum(peak_pair_dissim(pf[i], pg[perm[i]], v, vbar, f.R)
                    for i in range(cfg.n_peaks))
        best = total if best is None else min(best, total)
    return best


def test_dp_identity(rng):
    cfg = PeakConfig(h=5, n_peaks=3)
    for _ in range(10):
        f = random_distribution(rng, spikes=2)
        assert peak_dissimilarity(f, f, cfg) == 0.0


def test_dp_matches_brute_force_and_symmetry(rng):
    cfg = PeakConfig(h=5, n_peaks=3)
    for _ in range(50):
        f = random_distribution(rng, spikes=2, zeros=0.2)
        g = random_distribution(rng, spikes=2, zeros=0.2)
        got = peak_dissimilarity(f, g, cfg)
        assert got == brute_force_dp(f, g, cfg)
        # swapping arguments permutes each pairing's float additions, so
        # symmetry holds to addition rounding, not bit-exactly
        assert got == pytest.approx(peak_dissimilarity(g, f, cfg), abs=1e-12)
        assert got >= 0.0


def test_dp_invariant_under_equal_size_peak_relabeling():
    from genodist.measures import peak_dissimilarity_from_peaks
    pf = [mk_peak(10, 0.5), mk_peak(30, 0.5), mk_peak(50, 0.5)]
    pg = [mk_peak(12, 0.4), mk_peak(33, 0.4), mk_peak(70, 0.4)]
    base = peak_dissimilarity_from_peaks(pf, pg, R=100)
    assert peak_dissimilarity_from_peaks(pf[::-1], pg, R=100) == base
    assert peak_dissimilarity_from_peaks(pf, pg[::-1], R=100) == base


def test_mean_distribution_averages_pointwise():
    f = dist([1.0, 0.0])
    g = dist([0.0, 1.0])
    m = mean_distribution(f, g)
    assert m.freqs.tolist() == [0.5, 0.5]


def test_window_sizes_count():
    f = dist(np.linspace(0, 1, 21) / np.linspace(0, 1, 21).sum())
    assert window_sizes(f, 5).size == f.R - 5 + 1
