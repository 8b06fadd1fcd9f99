"""Physical description of one ion: level scheme, lasers, magnetic field.

All frequencies are angular frequencies in rad/us (numerically MHz*2pi).
Times at public interfaces are in ns.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi

# Bohr magneton / h = 1.39962449 MHz/G
ZEEMAN_UNIT = TWO_PI * 1.39962449

TERM_J = {"S12": 0.5, "P12": 0.5, "D32": 1.5}
ALLOWED_TRANSITIONS = (("S12", "P12"), ("D32", "P12"))

FULL_LEVELS = (
    ("S12", -0.5), ("S12", 0.5),
    ("P12", -0.5), ("P12", 0.5),
    ("D32", -1.5), ("D32", -0.5), ("D32", 0.5), ("D32", 1.5),
)


class InvalidConfig(ValueError):
    """Raised for physically or structurally invalid configurations."""


def mhz(value: float) -> float:
    """Convert an ordinary frequency in MHz to rad/us."""
    return TWO_PI * value


def _finite(name: str, *values: float) -> None:
    for v in values:
        if not np.all(np.isfinite(v)):
            raise InvalidConfig(f"{name}: non-finite value {v!r}")


@dataclass(frozen=True)
class DecayChannel:
    upper: str
    lower: str
    rate: float  # total decay rate of the upper term, rad/us
    branching: float


@dataclass(frozen=True)
class LevelScheme:
    levels: tuple[tuple[str, float], ...]
    decay_channels: tuple[DecayChannel, ...]
    lande_g: Mapping[str, float] = field(default_factory=dict)
    # Reduced schemes (test hooks) renormalize the angular factors so that
    # each upper sublevel still decays at the full channel rate.
    reduced: bool = False

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple((str(t), float(m)) for t, m in self.levels))
        object.__setattr__(self, "decay_channels", tuple(self.decay_channels))
        for term, mj in self.levels:
            if term not in TERM_J:
                raise InvalidConfig(f"scheme.levels: unknown term {term!r}")
            if abs(mj) > TERM_J[term] or (2 * mj) % 2 != 1:
                raise InvalidConfig(f"scheme.levels: invalid mJ {mj} for {term}")
        if len(set(self.levels)) != len(self.levels):
            raise InvalidConfig("scheme.levels: duplicate sublevel")
        if not self.reduced and tuple(sorted(self.levels)) != tuple(sorted(FULL_LEVELS)):
            raise InvalidConfig("scheme.levels: a full scheme needs exactly the 8 S1/2, P1/2, D3/2 sublevels")
        terms = self.terms
        for ch in self.decay_channels:
            _finite("scheme.decay_channels", ch.rate, ch.branching)
            if ch.upper not in terms or ch.lower not in terms:
                raise InvalidConfig(f"scheme.decay_channels: {ch.upper}->{ch.lower} references a missing term")
            if ch.rate <= 0 or ch.branching <= 0:
                raise InvalidConfig(f"scheme.decay_channels: {ch.upper}->{ch.lower} rates must be > 0")
        uppers = {ch.upper for ch in self.decay_channels}
        for up in uppers:
            chans = [ch for ch in self.decay_channels if ch.upper == up]
            total = sum(ch.branching for ch in chans)
            if abs(total - 1.0) > 1e-12:
                raise InvalidConfig(f"scheme.decay_channels: branching of {up} sums to {total}, not 1")
            if len({ch.rate for ch in chans}) != 1:
                raise InvalidConfig(f"scheme.decay_channels: inconsistent total rate for {up}")
        for term in terms:
            if term not in self.lande_g:
                raise InvalidConfig(f"scheme.lande_g: missing g-factor for {term}")
            _finite("scheme.lande_g", self.lande_g[term])

    @property
    def dim(self) -> int:
        return len(self.levels)

    @property
    def terms(self) -> tuple[str, ...]:
        seen = []
        for t, _ in self.levels:
            if t not in seen:
                seen.append(t)
        return tuple(seen)

    def index(self, term: str, mj: float) -> int:
        return self.levels.index((term, float(mj)))

    def indices(self, term: str) -> list[int]:
        return [i for i, (t, _) in enumerate(self.levels) if t == term]

    def projector(self, term: str) -> np.ndarray:
        p = np.zeros((self.dim, self.dim), dtype=complex)
        for i in self.indices(term):
            p[i, i] = 1.0
        return p

    def channel(self, upper: str, lower: str) -> DecayChannel:
        for ch in self.decay_channels:
            if ch.upper == upper and ch.lower == lower:
                return ch
        raise KeyError(f"no decay channel {upper}->{lower}")

    def restricted(self, levels: Sequence[tuple[str, float]]) -> "LevelScheme":
        """Sub-scheme on the given sublevels, with branching renormalized over the remaining channels."""
        levels = tuple((t, float(m)) for t, m in levels)
        terms = {t for t, _ in levels}
        chans = [ch for ch in self.decay_channels if ch.upper in terms and ch.lower in terms]
        out = []
        for ch in chans:
            tot = sum(c.branching for c in chans if c.upper == ch.upper)
            out.append(DecayChannel(ch.upper, ch.lower, ch.rate * tot, ch.branching / tot))
        return LevelScheme(levels, tuple(out), {t: self.lande_g[t] for t in terms}, reduced=True)


def standard_scheme(gamma_p: float, branching_s: float, lande_g: Mapping[str, float] | None = None) -> LevelScheme:
    """8-level S1/2, P1/2, D3/2 scheme with P1/2 total decay rate ``gamma_p`` (rad/us)."""
    g = {"S12": 2.0, "P12": 2.0 / 3.0, "D32": 4.0 / 5.0}
    if lande_g:
        g.update(lande_g)
    chans = (
        DecayChannel("P12", "S12", gamma_p, branching_s),
        DecayChannel("P12", "D32", gamma_p, 1.0 - branching_s),
    )
    return LevelScheme(FULL_LEVELS, chans, g)


def linear_polarization(angle_deg: float) -> tuple[complex, complex, complex]:
    """Spherical components (sigma-, pi, sigma+) of linear polarization at ``angle_deg`` from the field axis."""
    th = math.radians(angle_deg)
    s = math.sin(th) / math.sqrt(2.0)
    return (complex(s), complex(math.cos(th)), complex(-s))


@dataclass(frozen=True)
class LaserDrive:
    transition: tuple[str, str]  # (lower term, upper term)
    rabi_frequency: float  # rad/us
    detuning: float  # rad/us, laser minus zero-field transition frequency
    polarization: tuple[complex, complex, complex] = (0j, 1 + 0j, 0j)  # (sigma-, pi, sigma+)
    linewidth: float = 0.0  # rad/us FWHM, Lorentzian

    def __post_init__(self):
        object.__setattr__(self, "transition", tuple(self.transition))
        object.__setattr__(self, "polarization", tuple(complex(c) for c in self.polarization))
        if self.transition not in ALLOWED_TRANSITIONS:
            raise InvalidConfig(f"lasers.transition: {self.transition} is not a dipole-allowed pair")
        _finite("lasers", self.rabi_frequency, self.detuning, self.linewidth,
                *[c.real for c in self.polarization], *[c.imag for c in self.polarization])
        if len(self.polarization) != 3:
            raise InvalidConfig("lasers.polarization: need 3 spherical components")
        norm = math.sqrt(sum(abs(c) ** 2 for c in self.polarization))
        if abs(norm - 1.0) > 1e-12:
            raise InvalidConfig(f"lasers.polarization: norm {norm!r} is not 1")
        if self.rabi_frequency < 0 or self.linewidth < 0:
            raise InvalidConfig("lasers: rabi_frequency and linewidth must be >= 0")


@dataclass(frozen=True)
class MagneticField:
    magnitude: float = 0.0  # gauss
    zeeman_unit: float = ZEEMAN_UNIT

    def __post_init__(self):
        _finite("field", self.magnitude, self.zeeman_unit)
        if self.magnitude < 0:
            raise InvalidConfig("field.magnitude must be >= 0")


@dataclass(frozen=True)
class SystemConfig:
    scheme: LevelScheme
    lasers: tuple[LaserDrive, ...]
    field: MagneticField = MagneticField()

    def __post_init__(self):
        object.__setattr__(self, "lasers", tuple(self.lasers))
        terms = set(self.scheme.terms)
        for las in self.lasers:
            if not set(las.transition) <= terms:
                raise InvalidConfig(f"lasers: transition {las.transition} references a term missing from the scheme")
        needed = [tr for tr in ALLOWED_TRANSITIONS if set(tr) <= terms]
        got = [las.transition for las in self.lasers]
        if sorted(got) != sorted(needed):
            raise InvalidConfig(f"lasers: need exactly one laser per transition {needed}, got {got}")

    def laser(self, lower: str) -> LaserDrive:
        for las in self.lasers:
            if las.transition[0] == lower:
                return las
        raise KeyError(lower)

    def replace_laser(self, lower: str, **changes) -> "SystemConfig":
        from dataclasses import replace
        lasers = tuple(replace(l, **changes) if l.transition[0] == lower else l for l in self.lasers)
        return replace(self, lasers=lasers)


def two_level(gamma: float, rabi: float, detuning: float = 0.0) -> SystemConfig:
    """Two-level reduction: S1/2(+1/2) <-> P1/2(+1/2) driven by pi light."""
    scheme = LevelScheme(
        (("S12", 0.5), ("P12", 0.5)),
        (DecayChannel("P12", "S12", gamma, 1.0),),
        {"S12": 2.0, "P12": 2.0 / 3.0},
        reduced=True,
    )
    return SystemConfig(scheme, (LaserDrive(("S12", "P12"), rabi, detuning),))
