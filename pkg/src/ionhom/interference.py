"""Beam-splitter combination of two emitters and the derived interference figures.

Ion 1 enters in x polarization, ion 2 at angle phi; the path phase between
the ions is uncontrolled and only the phase-averaged coincidence rate
survives, so no phase appears at runtime.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dynamics import CorrelationSeries

# -i t = r = 1/sqrt(2)
BS_REFLECTION = 1 / math.sqrt(2)
BS_TRANSMISSION = 1j / math.sqrt(2)


class UndefinedContrast(ValueError):
    pass


@dataclass(frozen=True)
class HomResult:
    series: CorrelationSeries
    phi: float
    contrast: float | None = None
    contrast_err: float | None = None


def _check_phi(phi: float) -> None:
    if not (0.0 <= phi <= 90.0) or not math.isfinite(phi):
        raise ValueError(f"polarization angle must be in [0, 90] degrees, got {phi}")


def _check_pair(g1: CorrelationSeries, g2: CorrelationSeries) -> None:
    if g1.kind != "G1" or g2.kind != "G2":
        raise ValueError(f"expected (G1, G2) series, got ({g1.kind}, {g2.kind})")
    if not g1.same_grid(g2):
        raise ValueError("g1 and g2 must share the same tau grid")


def hom_g2_tot(g1: CorrelationSeries, g2: CorrelationSeries, phi: float) -> CorrelationSeries:
    """Normalized cross-port correlation for two identical emitters.

    g2_tot(tau, phi) = g2/2 + (1 - cos^2(phi) |g1|^2)/2
    """
    _check_pair(g1, g2)
    if not (g1.normalized and g2.normalized):
        raise ValueError("hom_g2_tot needs normalized inputs")
    _check_phi(phi)
    c2 = math.cos(math.radians(phi)) ** 2
    vals = 0.5 * g2.values + 0.5 * (1.0 - c2 * np.abs(g1.values) ** 2)
    return CorrelationSeries(g1.tau, vals, "G2TOT", True, {"phi_deg": phi})


def hom_g2_tot_general(g1_a: CorrelationSeries, g1_b: CorrelationSeries,
                       g2_a: CorrelationSeries, g2_b: CorrelationSeries,
                       rate_a: float, rate_b: float, phi: float) -> CorrelationSeries:
    """Cross-port correlation for two different emitters, assembled term by term.

    Raw correlations are G2_k = n_k^2 g2_k and G1_k = n_k g1_k; the sum
    G2_a + G2_b - 2 cos^2(phi) Re[G1_a G1_b^*] + 2 n_a n_b is divided by its
    uncorrelated limit (n_a + n_b)^2.
    """
    _check_pair(g1_a, g2_a)
    _check_pair(g1_b, g2_b)
    if not g1_a.same_grid(g1_b):
        raise ValueError("both emitters must share the same tau grid")
    _check_phi(phi)
    if rate_a <= 0 or rate_b <= 0:
        raise ValueError("emission rates must be positive")
    c2 = math.cos(math.radians(phi)) ** 2
    na, nb = rate_a, rate_b
    raw = (na**2 * g2_a.values + nb**2 * g2_b.values
           - 2 * c2 * np.real(na * g1_a.values * np.conj(nb * g1_b.values))
           + 2 * na * nb)
    return CorrelationSeries(g1_a.tau, raw / (na + nb) ** 2, "G2TOT", True, {"phi_deg": phi})


def polarization_scan(g1: CorrelationSeries, g2: CorrelationSeries,
                      angles: Sequence[float]) -> list[tuple[float, float]]:
    """g2_tot(0, phi) for each angle."""
    return [(float(a), float(hom_g2_tot(g1, g2, a).values[0])) for a in angles]


def contrast(parallel_at0: float, orthogonal_at0: float,
             parallel_err: float = 0.0, orthogonal_err: float = 0.0) -> tuple[float, float]:
    """Interference contrast 1 - g2tot(0, 0)/g2tot(0, 90) and its first-order error."""
    if not orthogonal_at0 > 0:
        raise UndefinedContrast(f"orthogonal coincidence level must be > 0, got {orthogonal_at0}")
    c = 1.0 - parallel_at0 / orthogonal_at0
    err = math.hypot(parallel_err / orthogonal_at0, parallel_at0 * orthogonal_err / orthogonal_at0**2)
    return c, err


def first_local_max(series: CorrelationSeries) -> tuple[float, float] | None:
    """(tau, value) of the first interior local maximum at tau > 0, refined by a 3-point parabola."""
    y = series.values
    t = series.tau
    for i in range(1, y.size - 1):
        if y[i] > y[i - 1] and y[i] >= y[i + 1]:
            y0, y1, y2 = y[i - 1], y[i], y[i + 1]
            denom = y0 - 2 * y1 + y2
            if denom >= 0:
                return float(t[i]), float(y1)
            # non-uniform grids: fit through the three actual points
            a, b, c = np.polyfit(t[i - 1:i + 2], y[i - 1:i + 2], 2)
            tp = -b / (2 * a)
            return float(tp), float(c - b * b / (4 * a))
    return None


def nutation_reduction(parallel: CorrelationSeries, orthogonal: CorrelationSeries) -> float | None:
    """Fractional drop of the first nutation maximum at phi=0 relative to phi=90.

    Returns None when either series has no local maximum (over-damped drive).
    """
    if not parallel.same_grid(orthogonal):
        raise ValueError("series must share the same tau grid")
    mp = first_local_max(parallel)
    mo = first_local_max(orthogonal)
    if mp is None or mo is None:
        return None
    return (mo[1] - mp[1]) / mo[1]
