"""Rotating-frame Hamiltonian, jump operators and Lindblad generator.

Angular factors use Condon-Shortley Clebsch-Gordan coefficients
<J_l m_l; 1 q | J_u m_u> with q = m_u - m_l. Superoperators act on
column-stacked density matrices, ``vec(rho) = rho.ravel(order="F")``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from sympy import Rational
from sympy.physics.wigner import clebsch_gordan

from .config import TERM_J, InvalidConfig, LevelScheme, SystemConfig

QS = (-1, 0, 1)


@lru_cache(maxsize=None)
def _cg(j_lower: float, m_lower: float, j_upper: float, m_upper: float) -> float:
    q = m_upper - m_lower
    if abs(q) > 1:
        return 0.0
    r = lambda x: Rational(int(round(2 * x)), 2)
    return float(clebsch_gordan(r(j_lower), 1, r(j_upper), r(m_lower), int(round(q)), r(m_upper)))


def angular_factor(scheme: LevelScheme, lower: int, upper: int) -> float:
    """Coupling coefficient between sublevel indices ``lower`` and ``upper``."""
    tl, ml = scheme.levels[lower]
    tu, mu = scheme.levels[upper]
    c = _cg(TERM_J[tl], ml, TERM_J[tu], mu)
    if scheme.reduced and c != 0.0:
        norm = math.sqrt(sum(_cg(TERM_J[tl], m, TERM_J[tu], mu) ** 2
                             for t, m in scheme.levels if t == tl))
        c /= norm
    return c


@dataclass(frozen=True)
class TransitionOperator:
    matrix: np.ndarray
    label: tuple[str, int]  # ("P12->S12", q)
    rate_weight: float  # Gamma * branching, rad/us

    @property
    def channel(self) -> str:
        return self.label[0]

    @property
    def q(self) -> int:
        return self.label[1]


def frame_energies(config: SystemConfig) -> dict[str, float]:
    """Term energies in the frame co-rotating with both lasers (zero field)."""
    terms = config.scheme.terms
    energies = {"S12": 0.0}
    try:
        energies["P12"] = -config.laser("S12").detuning
    except KeyError:
        energies["P12"] = 0.0
    if "D32" in terms:
        energies["D32"] = energies["P12"] + config.laser("D32").detuning
    return energies


def build_hamiltonian(config: SystemConfig) -> np.ndarray:
    scheme = config.scheme
    d = scheme.dim
    h = np.zeros((d, d), dtype=complex)
    energies = frame_energies(config)
    zu = config.field.zeeman_unit * config.field.magnitude
    for i, (term, mj) in enumerate(scheme.levels):
        h[i, i] = energies.get(term, 0.0) + scheme.lande_g[term] * mj * zu
    for laser in config.lasers:
        lower, upper = laser.transition
        for u in scheme.indices(upper):
            for l in scheme.indices(lower):
                q = scheme.levels[u][1] - scheme.levels[l][1]
                if abs(q) > 1:
                    continue
                amp = 0.5 * laser.rabi_frequency * angular_factor(scheme, l, u) * laser.polarization[int(round(q)) + 1]
                h[u, l] += amp
                h[l, u] += np.conj(amp)
    if not np.all(np.isfinite(h)):
        raise InvalidConfig("hamiltonian: non-finite entries")
    return h


def build_jump_operators(config: SystemConfig) -> list[TransitionOperator]:
    scheme = config.scheme
    d = scheme.dim
    ops = []
    for ch in scheme.decay_channels:
        weight = ch.rate * ch.branching
        for q in QS:
            m = np.zeros((d, d), dtype=complex)
            for u in scheme.indices(ch.upper):
                for l in scheme.indices(ch.lower):
                    if scheme.levels[u][1] - scheme.levels[l][1] == q:
                        m[l, u] = math.sqrt(weight) * angular_factor(scheme, l, u)
            if np.any(m):
                ops.append(TransitionOperator(m, (f"{ch.upper}->{ch.lower}", q), weight))
    return ops


def build_dephasing_operators(config: SystemConfig) -> list[np.ndarray]:
    """Collapse operators for Lorentzian laser phase noise.

    Green-laser phase noise shifts the P and D frame energies together, red
    noise only D; a projector with rate gamma damps the crossing coherences
    at gamma/2 (half the FWHM).
    """
    scheme = config.scheme
    ops = []
    for laser in config.lasers:
        if laser.linewidth <= 0:
            continue
        if laser.transition[0] == "S12":
            proj = sum(scheme.projector(t) for t in scheme.terms if t != "S12")
        else:
            proj = scheme.projector("D32")
        ops.append(math.sqrt(laser.linewidth) * proj)
    return ops


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).ravel(order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    d = int(round(math.sqrt(v.size)))
    return np.asarray(v).reshape((d, d), order="F")


def build_liouvillian(h: np.ndarray, jumps: Sequence, dephasing: Sequence[np.ndarray] | None = None) -> np.ndarray:
    """Lindblad generator L with vec(drho/dt) = L @ vec(rho)."""
    h = np.asarray(h, dtype=complex)
    d = h.shape[0]
    if h.shape != (d, d):
        raise ValueError(f"hamiltonian must be square, got {h.shape}")
    if not np.allclose(h, h.conj().T, atol=1e-10, rtol=0):
        raise ValueError("hamiltonian is not Hermitian")
    eye = np.eye(d)
    lv = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    ops = [j.matrix if isinstance(j, TransitionOperator) else np.asarray(j, dtype=complex) for j in jumps]
    ops += [np.asarray(o, dtype=complex) for o in (dephasing or [])]
    for a in ops:
        if a.shape != (d, d):
            raise ValueError(f"jump operator shape {a.shape} does not match hamiltonian {h.shape}")
        ada = a.conj().T @ a
        lv += np.kron(a.conj(), a) - 0.5 * (np.kron(eye, ada) + np.kron(ada.T, eye))
    return lv


def liouvillian(config: SystemConfig) -> np.ndarray:
    return build_liouvillian(build_hamiltonian(config), build_jump_operators(config),
                             build_dephasing_operators(config))
