"""Coincidence histograms from time tags: multi-stop and TAC start-stop.

Bins are centred on multiples of the bin width; bin k collects lags
tau = t_stop - t_start in [(k - 1/2) w, (k + 1/2) w). With an odd bin width in
ps no lag can sit on an edge, and swapping the channels mirrors the
histogram exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .timetags import TimeTags, read_timetags

PS_PER_NS = 1000


class NoData(ValueError):
    pass


@dataclass(frozen=True)
class HistogramConfig:
    bin_width: float = 1.0  # ns
    window: float = 50.0  # ns, histogram covers lags up to +-window
    mode: str = "multistop"  # or "tac"
    start_channel: str = "I3"
    plateau_fraction: float = 0.25  # outer fraction of the window averaged in plateau mode

    def __post_init__(self):
        if self.mode == "tac_startstop":
            object.__setattr__(self, "mode", "tac")
        if self.mode not in ("multistop", "tac"):
            raise ValueError(f"mode must be 'multistop' or 'tac', got {self.mode!r}")
        if self.start_channel not in ("I3", "I4"):
            raise ValueError("start_channel must be I3 or I4")
        if not self.bin_width > 0:
            raise ValueError("bin_width must be > 0")
        bps = self.bin_width * PS_PER_NS
        if abs(bps - round(bps)) > 1e-6:
            raise ValueError("bin_width must be a whole number of ps")
        ratio = self.window / self.bin_width
        if self.window <= 0 or abs(ratio - round(ratio)) > 1e-9:
            raise ValueError("window must be a positive integer multiple of bin_width")

    @property
    def bin_ps(self) -> int:
        return int(round(self.bin_width * PS_PER_NS))

    @property
    def nbins_half(self) -> int:
        return int(round(self.window / self.bin_width))


@dataclass
class HistogramResult:
    bin_centers: np.ndarray  # ns
    counts: np.ndarray
    duration: float  # s
    rates: dict  # counts/s per channel
    mode: str
    bin_width: float  # ns
    g2: np.ndarray | None = None  # rate-product normalization
    stderr: np.ndarray | None = None
    g2_plateau: np.ndarray | None = None  # far-bin normalization
    stderr_plateau: np.ndarray | None = None
    flags: list = field(default_factory=list)


@njit(cache=True)
def _multistop(a, b, bin_ps, n):
    counts = np.zeros(2 * n + 1, np.int64)
    span = (2 * n + 1) * bin_ps  # 2 * half range, doubled units
    j0 = 0
    nb = b.size
    for i in range(a.size):
        ta = a[i]
        while j0 < nb and 2 * (b[j0] - ta) < -span:
            j0 += 1
        j = j0
        while j < nb:
            d2 = 2 * (b[j] - ta)
            if d2 >= span:
                break
            counts[(d2 + bin_ps) // (2 * bin_ps) + n] += 1
            j += 1
    return counts


@njit(cache=True)
def _tac(starts, stops, bin_ps, n):
    # Stops run through a delay line of half the range; a start arms the
    # converter, the first delayed stop ends the conversion, starts arriving
    # while busy are lost. Times are doubled to keep half-bin edges integral.
    counts = np.zeros(2 * n + 1, np.int64)
    span = (2 * n + 1) * bin_ps
    busy2 = np.iinfo(np.int64).min
    j = 0
    nb = stops.size
    for i in range(starts.size):
        s2 = 2 * starts[i]
        if s2 < busy2:
            continue
        while j < nb and 2 * stops[j] - s2 < -span:
            j += 1
        if j < nb and 2 * stops[j] - s2 < span:
            d2 = 2 * stops[j] - s2
            counts[(d2 + bin_ps) // (2 * bin_ps) + n] += 1
            busy2 = 2 * stops[j] + span
        else:
            busy2 = s2 + 2 * span
    return counts


def _prepare(ch_a, ch_b):
    a = np.ascontiguousarray(ch_a, dtype=np.int64)
    b = np.ascontiguousarray(ch_b, dtype=np.int64)
    for name, x in (("start", a), ("stop", b)):
        if x.size and np.any(np.diff(x) < 0):
            raise ValueError(f"{name} channel is not sorted")
    return a, b


def _result(counts, cfg, n_a, n_b, duration, mode):
    if duration <= 0:
        raise NoData("duration must be > 0")
    if n_a == 0 or n_b == 0:
        raise NoData("empty channel")
    centers = np.arange(-cfg.nbins_half, cfg.nbins_half + 1) * cfg.bin_width
    hist = HistogramResult(centers, counts, duration, {"start": n_a / duration, "stop": n_b / duration},
                           mode, cfg.bin_width)
    return normalize(hist, cfg)


def correlate_multistop(ch_a, ch_b, cfg: HistogramConfig, duration: float) -> HistogramResult:
    """All pairs with t_b - t_a inside the window (``duration`` in s)."""
    a, b = _prepare(ch_a, ch_b)
    counts = _multistop(a, b, cfg.bin_ps, cfg.nbins_half)
    return _result(counts, cfg, a.size, b.size, duration, "multistop")


def correlate_tac(ch_start, ch_stop, cfg: HistogramConfig, duration: float) -> HistogramResult:
    """Start-stop pairing: each accepted start takes only the first stop in range.

    At high rates this under-counts large lags (pile-up); compare with
    :func:`correlate_multistop`.
    """
    a, b = _prepare(ch_start, ch_stop)
    counts = _tac(a, b, cfg.bin_ps, cfg.nbins_half)
    return _result(counts, cfg, a.size, b.size, duration, "tac")


def normalize(hist: HistogramResult, cfg: HistogramConfig | None = None) -> HistogramResult:
    """Fill in both g2 estimates.

    Rate product: counts / (N_a N_b w / T). Plateau: counts / mean of the
    bins with |tau| in the outer ``plateau_fraction`` of the window.
    """
    cfg = cfg or HistogramConfig(hist.bin_width, float(np.max(np.abs(hist.bin_centers))), hist.mode)
    counts = np.asarray(hist.counts, dtype=float)
    if counts.size == 0:
        raise NoData("no histogram bins")
    n_a = hist.rates["start"] * hist.duration
    n_b = hist.rates["stop"] * hist.duration
    expected = n_a * n_b * (hist.bin_width * 1e-9) / hist.duration
    hist.g2 = counts / expected
    hist.stderr = np.sqrt(counts) / expected
    far = np.abs(hist.bin_centers) >= (1 - cfg.plateau_fraction) * np.max(np.abs(hist.bin_centers))
    plateau = counts[far].mean() if far.any() else 0.0
    if plateau > 0:
        hist.g2_plateau = counts / plateau
        hist.stderr_plateau = np.sqrt(counts) / plateau
    else:
        hist.flags.append("plateau normalization unavailable: empty plateau window")
    return hist


def correlate_file(path, cfg: HistogramConfig) -> HistogramResult:
    """Histogram a HOMTAG1 file; the lag is t(stop) - t(start) with the start channel from ``cfg``."""
    return correlate_tags(read_timetags(path), cfg)


def correlate_tags(tags: TimeTags, cfg: HistogramConfig) -> HistogramResult:
    """Duration comes from the sidecar, else from the last tag."""
    duration = tags.meta.get("duration_s")
    if duration is None:
        last = max(int(tags.i3[-1]) if tags.i3.size else 0, int(tags.i4[-1]) if tags.i4.size else 0)
        duration = last * 1e-12
    a, b = (tags.i3, tags.i4) if cfg.start_channel == "I3" else (tags.i4, tags.i3)
    fn = correlate_multistop if cfg.mode == "multistop" else correlate_tac
    return fn(a, b, cfg, duration)
