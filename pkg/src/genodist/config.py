"""Run configuration shared by the CLI and the report writers."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError
from .measures import PeakConfig
from .reference import BaseFrequencies
from .scan import DEFAULT_DMAX, MAX_K

__version__ = "0.1.0"


@dataclass
class RunConfig:
    """Everything that influences scan and report results.

    Defaults: dmax=1000 distance cap, h=5 peak windows, n_peaks=3, Jeffreys
    eps=1e-10, min_freq=100 low-frequency cutoff, selections at the 99th /
    90th / 10th percentiles and top fractions 1% and 10%.
    """

    k: int = 7
    dmax: int = DEFAULT_DMAX
    h: int = 5
    n_peaks: int = 3
    eps: float = 1e-10
    min_freq: int = 100
    top_percentile: float = 99.0
    high_percentile: float = 90.0
    low_percentile: float = 10.0
    overlap_fractions: tuple[float, ...] = (0.01, 0.10)
    lowercase_as_mask: bool = False
    base_freq: BaseFrequencies | None = None
    threads: int = 0  # 0 = available parallelism

    def validate(self) -> None:
        if not 1 <= self.k <= MAX_K:
            raise ConfigError(f"k must be in 1..{MAX_K}, got {self.k}")
        if self.dmax <= self.k:
            raise ConfigError(f"dmax must exceed k={self.k}, got {self.dmax}")
        PeakConfig(h=self.h, n_peaks=self.n_peaks)  # validates h, n_peaks
        if not self.eps > 0:
            raise ConfigError(f"eps must be positive, got {self.eps}")
        if self.min_freq < 0:
            raise ConfigError(f"min-freq must be non-negative, got {self.min_freq}")
        for q in (self.top_percentile, self.high_percentile, self.low_percentile):
            if not 0.0 < q < 100.0:
                raise ConfigError(f"percentiles must be in (0, 100), got {q}")
        for frac in self.overlap_fractions:
            if not 0.0 < frac < 1.0:
                raise ConfigError(f"overlap fractions must be in (0, 1), got {frac}")
        if self.threads < 0:
            raise ConfigError(f"threads must be non-negative, got {self.threads}")

    def peak_config(self) -> PeakConfig:
        return PeakConfig(h=self.h, n_peaks=self.n_peaks)

    def header_items(self) -> list[tuple[str, str]]:
        """Analysis-affecting settings for report metadata headers.

        Runtime-only knobs (threads, paths) are excluded so reruns and
        differently-parallelized runs produce identical reports.
        """
        base = "auto" if self.base_freq is None else ",".join(
            repr(x) for x in self.base_freq.as_array().tolist())
        return [
            ("k", str(self.k)),
            ("dmax", str(self.dmax)),
            ("h", str(self.h)),
            ("n_peaks", str(self.n_peaks)),
            ("eps", repr(self.eps)),
            ("min_freq", str(self.min_freq)),
            ("top_percentile", repr(self.top_percentile)),
            ("high_percentile", repr(self.high_percentile)),
            ("low_percentile", repr(self.low_percentile)),
            ("overlap_fractions", ",".join(repr(f) for f in self.overlap_fractions)),
            ("lowercase_as_mask", "1" if self.lowercase_as_mask else "0"),
            ("base_freq", base),
        ]
