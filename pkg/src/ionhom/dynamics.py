"""Steady states, propagation, spectra and regression correlation functions."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .config import SystemConfig
from .ion_model import build_jump_operators, liouvillian, unvec, vec

NS_TO_US = 1e-3


class DegenerateSteadyState(RuntimeError):
    def __init__(self, kernel_dim: int):
        super().__init__(f"steady state is not unique: kernel dimension {kernel_dim}")
        self.kernel_dim = kernel_dim


class NoSignal(RuntimeError):
    """The collected emission rate vanishes in the steady state."""


@dataclass(frozen=True)
class CorrelationSeries:
    tau: np.ndarray  # ns, starts at 0, strictly increasing
    values: np.ndarray
    kind: str  # "G1", "G2" or "G2TOT"
    normalized: bool = True
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        tau = np.asarray(self.tau, dtype=float)
        values = np.asarray(self.values)
        if self.kind not in ("G1", "G2", "G2TOT"):
            raise ValueError(f"unknown correlation kind {self.kind!r}")
        check_tau_grid(tau)
        if values.shape != tau.shape:
            raise ValueError("tau and values must have the same shape")
        if self.kind != "G1":
            if np.iscomplexobj(values):
                values = values.real
            values = values.astype(float)
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "values", values)

    def same_grid(self, other: "CorrelationSeries") -> bool:
        return self.tau.shape == other.tau.shape and np.array_equal(self.tau, other.tau)

    def symmetric(self) -> tuple[np.ndarray, np.ndarray]:
        """Both-sided series; negative lags follow g(-tau) = g(tau)* (G1) or g(-tau) = g(tau)."""
        tau = np.concatenate([-self.tau[:0:-1], self.tau])
        neg = self.values[:0:-1]
        if self.kind == "G1":
            neg = np.conj(neg)
        return tau, np.concatenate([neg, self.values])

    def at(self, tau: float) -> complex | float:
        """Value at lag ``tau`` (either sign), linear interpolation between grid points."""
        t, v = self.symmetric()
        if np.iscomplexobj(v):
            return np.interp(tau, t, v.real) + 1j * np.interp(tau, t, v.imag)
        return float(np.interp(tau, t, v))


def check_tau_grid(tau: np.ndarray) -> None:
    if tau.ndim != 1 or tau.size == 0:
        raise ValueError("tau grid must be a non-empty 1-d array")
    if tau[0] != 0.0:
        raise ValueError("tau grid must start at 0")
    if np.any(np.diff(tau) <= 0):
        raise ValueError("tau grid must be strictly increasing")


@dataclass(frozen=True)
class Spectrum:
    axis: np.ndarray  # scanned detuning, rad/us
    values: np.ndarray  # steady-state P1/2 population
    scan: str
    degenerate: np.ndarray  # True where the steady state is not unique


def kernel(lv: np.ndarray, tol: float = 1e-11) -> tuple[np.ndarray, np.ndarray]:
    """Right and left null vectors of ``lv`` (columns), from the SVD."""
    u, s, vh = np.linalg.svd(lv)
    k = max(1, int(np.sum(s <= tol * s[0])))
    return vh[-k:].conj().T, u[:, -k:]


def steady_state(lv: np.ndarray, rho0: np.ndarray | None = None, tol: float = 1e-11) -> np.ndarray:
    """Trace-normalized kernel vector of ``lv``.

    If the kernel is degenerate and ``rho0`` is given, the long-time limit of
    ``rho0`` is returned instead of raising.
    """
    right, left = kernel(lv, tol)
    k = right.shape[1]
    if k > 1:
        if rho0 is None:
            raise DegenerateSteadyState(k)
        proj = right @ np.linalg.solve(left.conj().T @ right, left.conj().T)
        rho = unvec(proj @ vec(rho0))
    else:
        rho = unvec(right[:, 0])
    rho = rho / np.trace(rho)
    rho = 0.5 * (rho + rho.conj().T)
    return rho


def propagate(lv: np.ndarray, rho0: np.ndarray, t: float) -> np.ndarray:
    """Density matrix after ``t`` ns."""
    if t < 0:
        raise ValueError(f"propagation time must be >= 0, got {t}")
    if t == 0:
        return np.array(rho0, dtype=complex)
    return unvec(scipy.linalg.expm(lv * (t * NS_TO_US)) @ vec(rho0))


def evolve_grid(lv: np.ndarray, x0: np.ndarray, tau: np.ndarray) -> np.ndarray:
    """exp(L tau_k) x0 for every grid point; returns matrices of shape (n, d, d)."""
    tau = np.asarray(tau, dtype=float)
    check_tau_grid(tau)
    v = vec(x0).astype(complex)
    out = np.empty((tau.size, v.size), dtype=complex)
    out[0] = v
    cache: dict[float, np.ndarray] = {}
    for k in range(1, tau.size):
        dt = round(tau[k] - tau[k - 1], 12)
        step = cache.get(dt)
        if step is None:
            step = cache[dt] = scipy.linalg.expm(lv * (dt * NS_TO_US))
        v = step @ v
        out[k] = v
    d = int(round(np.sqrt(v.size)))
    # row k holds column-stacked rho_k
    return out.reshape(tau.size, d, d).transpose(0, 2, 1)


def _trace_with(op: np.ndarray, states: np.ndarray) -> np.ndarray:
    return np.einsum("ij,nji->n", op, states)


def emission_rate(rho_ss: np.ndarray, sigma: np.ndarray) -> float:
    """Tr[sigma^dag sigma rho], photons per us."""
    return float(np.real(np.trace(sigma.conj().T @ sigma @ rho_ss)))


def g1(lv, rho_ss, sigma, tau, normalized: bool = True) -> CorrelationSeries:
    """First-order correlation Tr[sigma exp(L tau)(rho_ss sigma^dag)]."""
    tau = np.asarray(tau, dtype=float)
    n = emission_rate(rho_ss, sigma)
    if n <= 1e-14 * max(1.0, np.abs(lv).max()):
        raise NoSignal("collected emission rate is zero")
    states = evolve_grid(lv, rho_ss @ sigma.conj().T, tau)
    vals = _trace_with(sigma, states)
    if normalized:
        vals = vals / vals[0]
        vals[0] = 1.0
    return CorrelationSeries(tau, vals, "G1", normalized, {"rate": n})


def g2(lv, rho_ss, sigma, tau, normalized: bool = True) -> CorrelationSeries:
    """Second-order correlation Tr[sigma^dag sigma exp(L tau)(sigma rho_ss sigma^dag)]."""
    tau = np.asarray(tau, dtype=float)
    n = emission_rate(rho_ss, sigma)
    if n <= 1e-14 * max(1.0, np.abs(lv).max()):
        raise NoSignal("collected emission rate is zero")
    nop = sigma.conj().T @ sigma
    post = sigma @ rho_ss @ sigma.conj().T
    states = evolve_grid(lv, post, tau)
    vals = np.real(_trace_with(nop, states))
    vals[0] = np.real(np.trace(nop @ post))  # exact, no propagation
    if normalized:
        vals = vals / n**2
    vals = np.where(np.abs(vals) < 1e-15, 0.0, vals)
    return CorrelationSeries(tau, vals, "G2", normalized, {"rate": n})


def collection_operator(config: SystemConfig, weights: Sequence[complex] | None = None) -> np.ndarray:
    """Collected field operator: unit-norm weighted sum of the P1/2 -> S1/2 jump operators.

    ``weights`` are indexed by q = -1, 0, +1; components the scheme lacks are dropped.
    """
    green = {j.q: j.matrix for j in build_jump_operators(config) if j.channel == "P12->S12"}
    w = np.ones(3, dtype=complex) if weights is None else np.asarray(weights, dtype=complex)
    if w.shape != (3,):
        raise ValueError("collection weights need three components (q=-1, 0, +1)")
    present = np.array([q in green for q in (-1, 0, 1)])
    w = np.where(present, w, 0)
    norm = np.linalg.norm(w)
    if norm == 0:
        raise ValueError("collection weights select no emitted component")
    w = w / norm
    d = config.scheme.dim
    sigma = np.zeros((d, d), dtype=complex)
    for q, wq in zip((-1, 0, 1), w):
        if q in green:
            sigma += wq * green[q]
    return sigma


@dataclass(frozen=True)
class EmitterModel:
    """Shared read-only setup for one ion: generator, steady state, collected operator."""
    config: SystemConfig
    lv: np.ndarray
    rho_ss: np.ndarray
    sigma: np.ndarray

    @classmethod
    def from_config(cls, config: SystemConfig, weights=None) -> "EmitterModel":
        lv = liouvillian(config)
        return cls(config, lv, steady_state(lv), collection_operator(config, weights))

    @property
    def rate(self) -> float:
        """Collected emission rate, photons per us."""
        return emission_rate(self.rho_ss, self.sigma)

    def g1(self, tau, normalized=True) -> CorrelationSeries:
        return g1(self.lv, self.rho_ss, self.sigma, tau, normalized)

    def g2(self, tau, normalized=True) -> CorrelationSeries:
        return g2(self.lv, self.rho_ss, self.sigma, tau, normalized)


def p_population(config: SystemConfig, rho: np.ndarray) -> float:
    return float(np.real(np.trace(config.scheme.projector("P12") @ rho)))


def excitation_spectrum(config: SystemConfig, scan: str, grid: Sequence[float]) -> Spectrum:
    """Steady-state P1/2 population versus the detuning of one laser.

    ``scan`` is "green" (S-P laser) or "red" (D-P laser); ``grid`` in rad/us.
    Points with a degenerate steady state report the long-time limit of the
    maximally mixed state and are flagged.
    """
    lower = {"green": "S12", "red": "D32"}.get(scan)
    if lower is None:
        raise ValueError(f"scan must be 'green' or 'red', got {scan!r}")
    grid = np.asarray(grid, dtype=float)
    if not np.all(np.isfinite(grid)):
        raise ValueError("detuning grid must be finite")
    d = config.scheme.dim
    mixed = np.eye(d, dtype=complex) / d
    vals = np.empty(grid.size)
    degen = np.zeros(grid.size, dtype=bool)
    for k, det in enumerate(grid):
        cfg = config.replace_laser(lower, detuning=float(det))
        lv = liouvillian(cfg)
        try:
            rho = steady_state(lv)
        except DegenerateSteadyState:
            degen[k] = True
            rho = steady_state(lv, rho0=mixed)
        vals[k] = p_population(cfg, rho)
    return Spectrum(grid, vals, scan, degen)
