"""Measurement chain: collection losses, detector efficiency, timing response, background."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SystemConfig
from .dynamics import CorrelationSeries, p_population, steady_state
from .ion_model import liouvillian

FWHM_PER_SIGMA = 2.0 * np.sqrt(2.0 * np.log(2.0))  # 2.3548


def _unit_interval(name, value):
    if not (0.0 < value <= 1.0):
        raise ValueError(f"{name} must be in (0, 1], got {value}")


@dataclass(frozen=True)
class CollectionChain:
    solid_angle_fraction: float = 0.04
    fiber_coupling: float = 1.0
    optical_transmission: float = 1.0

    def __post_init__(self):
        _unit_interval("solid_angle_fraction", self.solid_angle_fraction)
        _unit_interval("fiber_coupling", self.fiber_coupling)
        _unit_interval("optical_transmission", self.optical_transmission)

    @property
    def efficiency(self) -> float:
        return self.solid_angle_fraction * self.fiber_coupling * self.optical_transmission


@dataclass(frozen=True)
class DetectorModel:
    quantum_efficiency: float = 0.25
    response_fwhm: float = 1.5  # ns, pairwise timing response
    dark_rate: float = 0.0  # counts/s per detector
    dead_time: float = 0.0  # ns, non-paralyzable

    def __post_init__(self):
        _unit_interval("quantum_efficiency", self.quantum_efficiency)
        for name in ("response_fwhm", "dark_rate", "dead_time"):
            v = getattr(self, name)
            if not (v >= 0 and np.isfinite(v)):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")

    @property
    def response_sigma(self) -> float:
        """Gaussian sigma of the pairwise response, ns."""
        return self.response_fwhm / FWHM_PER_SIGMA

    @property
    def jitter_sigma(self) -> float:
        """Per-detection timing sigma, ns; two of them add up to the pairwise response."""
        return self.response_sigma / np.sqrt(2.0)


def green_scattering_rate(config: SystemConfig, rho_ss: np.ndarray | None = None) -> float:
    """Total P1/2 -> S1/2 photon rate into 4 pi, counts/s."""
    if rho_ss is None:
        rho_ss = steady_state(liouvillian(config))
    ch = config.scheme.channel("P12", "S12")
    return ch.rate * ch.branching * p_population(config, rho_ss) * 1e6


def effective_count_rate(config: SystemConfig, chain: CollectionChain, det: DetectorModel,
                         rho_ss: np.ndarray | None = None) -> float:
    """Detected count rate, counts/s."""
    return green_scattering_rate(config, rho_ss) * chain.efficiency * det.quantum_efficiency


def convolve_response(series: CorrelationSeries, det: DetectorModel) -> CorrelationSeries:
    """Convolve with the unit-area Gaussian timing response of ``det``.

    The series is mirrored to negative lags by its parity and padded with its
    last value beyond the grid, so constant plateaus are left untouched.
    """
    if det.response_fwhm == 0:
        return series
    tau = series.tau
    if tau.size < 2:
        raise ValueError("series too short to convolve")
    steps = np.diff(tau)
    dt = steps[0]
    if not np.allclose(steps, dt, rtol=1e-9, atol=1e-12):
        raise ValueError("convolution needs a uniform tau grid")
    if dt > det.response_fwhm / 4 * (1 + 1e-12):
        raise ValueError(f"tau grid too coarse: spacing {dt} ns, need <= {det.response_fwhm / 4} ns (FWHM/4)")
    sigma = det.response_sigma
    half = int(np.ceil(6 * sigma / dt))
    k = np.arange(-half, half + 1) * dt
    kernel = np.exp(-0.5 * (k / sigma) ** 2)
    kernel /= kernel.sum()
    _, full = series.symmetric()
    padded = np.concatenate([np.full(half, full[0]), full, np.full(half, full[-1])])
    if np.iscomplexobj(padded):
        conv = np.convolve(padded.real, kernel, "valid") + 1j * np.convolve(padded.imag, kernel, "valid")
    else:
        conv = np.convolve(padded, kernel, "valid")
    vals = conv[tau.size - 1:]
    return CorrelationSeries(tau, vals, series.kind, series.normalized,
                             {**series.meta, "response_fwhm_ns": det.response_fwhm})


@dataclass(frozen=True)
class BackgroundFloor:
    """Uncorrelated background mixed into a normalized correlation.

    g_meas = (1-b)^2 g + 2b(1-b) + b^2, with b the background fraction of the counts.
    """
    fraction: float

    def __post_init__(self):
        if not (0.0 <= self.fraction <= 1.0):
            raise ValueError(f"background fraction must be in [0, 1], got {self.fraction}")

    @property
    def offset(self) -> float:
        b = self.fraction
        return 2 * b * (1 - b) + b * b

    def apply_value(self, g):
        b = self.fraction
        return (1 - b) ** 2 * np.asarray(g) + self.offset

    def apply(self, series: CorrelationSeries) -> CorrelationSeries:
        if series.kind == "G1":
            raise ValueError("background floor applies to intensity correlations only")
        return CorrelationSeries(series.tau, self.apply_value(series.values), series.kind,
                                 series.normalized, {**series.meta, "background_fraction": self.fraction})


def accidental_floor(signal_rate: float, dark_rate: float = 0.0, stray_rate: float = 0.0) -> BackgroundFloor:
    """Background model for given signal and background count rates (counts/s)."""
    rates = (signal_rate, dark_rate, stray_rate)
    if any(r < 0 for r in rates):
        raise ValueError("rates must be >= 0")
    total = sum(rates)
    if total == 0:
        raise ValueError("no light: all rates are zero, background fraction undefined")
    return BackgroundFloor((dark_rate + stray_rate) / total)
