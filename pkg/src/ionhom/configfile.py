"""JSON run configuration: physics, detection chain and simulation settings.

Frequencies are given in MHz (keys ending in ``_mhz``) and converted to rad/us
on load; the field is in gauss, times in ns, rates in counts/s.
"""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .config import (DecayChannel, InvalidConfig, LaserDrive, LevelScheme, MagneticField, SystemConfig,
                     FULL_LEVELS, linear_polarization, mhz)
from .detection import BackgroundFloor, CollectionChain, DetectorModel

PRESETS = {"ba-like": "ba_like.json", "ca-like": "ca_like.json"}


@dataclass(frozen=True)
class SimulationSettings:
    tau_max: float = 200.0  # ns, analytic correlation grid
    tau_step: float = 0.05  # ns
    duration: float = 1.0  # s, Monte Carlo run length
    seed: int = 1
    time_quantum: int = 1  # ps
    collection_weights: tuple | None = None  # q = -1, 0, +1

    @property
    def tau(self) -> np.ndarray:
        n = int(round(self.tau_max / self.tau_step))
        return np.arange(n + 1) * self.tau_step


@dataclass(frozen=True)
class RunConfig:
    system: SystemConfig
    chain: CollectionChain
    detector: DetectorModel
    stray_fraction: float  # stray light as a fraction of detected non-dark counts
    simulation: SimulationSettings
    name: str = ""
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def config_hash(self) -> str:
        return config_hash(self.raw)

    def background(self, signal_rate: float) -> BackgroundFloor:
        """Background model at ``signal_rate`` detected counts/s per detector."""
        b = self.stray_fraction
        stray = signal_rate * b / (1 - b) if b < 1 else float("inf")
        total = signal_rate + stray + self.detector.dark_rate
        if total == 0:
            return BackgroundFloor(0.0)
        return BackgroundFloor(min(1.0, (stray + self.detector.dark_rate) / total))


def config_hash(raw: dict) -> str:
    """Git blob hash of the canonical JSON form."""
    body = json.dumps(raw, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha1(b"blob %d\0" % len(body) + body).hexdigest()


class _Reader:
    """Pulls typed values out of nested dicts, naming the field path on error."""

    def __init__(self, data, path):
        if not isinstance(data, dict):
            raise InvalidConfig(f"{path or 'config'}: expected an object")
        self.data, self.path = data, path

    def _p(self, key):
        return f"{self.path}.{key}" if self.path else key

    def section(self, key, optional=False):
        if key not in self.data:
            if optional:
                return _Reader({}, self._p(key))
            raise InvalidConfig(f"{self._p(key)}: missing section")
        return _Reader(self.data[key], self._p(key))

    def num(self, key, default=None, lo=None, hi=None, lo_open=False):
        if key not in self.data:
            if default is None:
                raise InvalidConfig(f"{self._p(key)}: missing")
            return default
        v = self.data[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not np.isfinite(v):
            raise InvalidConfig(f"{self._p(key)}: expected a finite number, got {v!r}")
        if lo is not None and (v < lo or (lo_open and v == lo)):
            raise InvalidConfig(f"{self._p(key)}: must be {'>' if lo_open else '>='} {lo}, got {v}")
        if hi is not None and v > hi:
            raise InvalidConfig(f"{self._p(key)}: must be <= {hi}, got {v}")
        return float(v)

    def get(self, key, default=None):
        return self.data.get(key, default)


def _polarization(r: _Reader):
    if "polarization" in r.data:
        comps = r.get("polarization")
        try:
            return tuple(complex(c[0], c[1]) if isinstance(c, list) else complex(c) for c in comps)
        except (TypeError, ValueError, IndexError):
            raise InvalidConfig(f"{r._p('polarization')}: expected 3 numbers or [re, im] pairs") from None
    return linear_polarization(r.num("polarization_angle_deg", 0.0))


def parse_config(raw: dict) -> RunConfig:
    """Validate a config document and build the typed objects."""
    root = _Reader(raw, "")
    sch = root.section("scheme")
    lande = sch.get("lande_g", {})
    if not isinstance(lande, dict):
        raise InvalidConfig("scheme.lande_g: expected an object")
    gamma = sch.num("gamma_mhz", lo=0, lo_open=True)
    br = sch.num("branching_s", lo=0, hi=1, lo_open=True)
    g = {"S12": 2.0, "P12": 2.0 / 3.0, "D32": 4.0 / 5.0}
    for k, v in lande.items():
        if k not in g:
            raise InvalidConfig(f"scheme.lande_g.{k}: unknown term")
        g[k] = _Reader(lande, "scheme.lande_g").num(k)
    chans = [DecayChannel("P12", "S12", mhz(gamma), br)]
    if br < 1:
        chans.append(DecayChannel("P12", "D32", mhz(gamma), 1 - br))
    scheme = LevelScheme(FULL_LEVELS, tuple(chans), g)

    lasers_raw = raw.get("lasers")
    if not isinstance(lasers_raw, list) or len(lasers_raw) != 2:
        raise InvalidConfig("lasers: expected a list of exactly 2 lasers")
    lasers = []
    for i, lr in enumerate(lasers_raw):
        r = _Reader(lr, f"lasers[{i}]")
        tr = r.get("transition")
        if not (isinstance(tr, list) and len(tr) == 2):
            raise InvalidConfig(f"lasers[{i}].transition: expected [lower, upper]")
        try:
            lasers.append(LaserDrive(tuple(tr), mhz(r.num("rabi_mhz", lo=0)), mhz(r.num("detuning_mhz")),
                                     _polarization(r), mhz(r.num("linewidth_mhz", 0.0, lo=0))))
        except InvalidConfig as e:
            raise InvalidConfig(f"lasers[{i}]: {e}") from None
    fld = root.section("field", optional=True)
    system = SystemConfig(scheme, tuple(lasers), MagneticField(fld.num("gauss", 0.0, lo=0)))

    det = root.section("detection", optional=True)
    try:
        chain = CollectionChain(det.num("solid_angle_fraction", 0.04), det.num("fiber_coupling", 1.0),
                                det.num("optical_transmission", 1.0))
        detector = DetectorModel(det.num("quantum_efficiency", 0.25), det.num("response_fwhm_ns", 1.5),
                                 det.num("dark_rate_cps", 0.0), det.num("dead_time_ns", 0.0))
    except ValueError as e:
        raise InvalidConfig(f"detection: {e}") from None
    stray = det.num("stray_fraction", 0.0, lo=0, hi=1)

    sim = root.section("simulation", optional=True)
    weights = sim.get("collection_weights")
    if weights is not None:
        try:
            weights = tuple(complex(c[0], c[1]) if isinstance(c, list) else complex(c) for c in weights)
        except (TypeError, ValueError, IndexError):
            raise InvalidConfig("simulation.collection_weights: expected 3 numbers or [re, im] pairs") from None
        if len(weights) != 3:
            raise InvalidConfig("simulation.collection_weights: expected 3 components (q=-1, 0, +1)")
    seed = sim.get("seed", 1)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise InvalidConfig("simulation.seed: expected an integer in [0, 2^64)")
    quantum = sim.num("time_quantum_ps", 1, lo=1)
    if quantum != int(quantum):
        raise InvalidConfig("simulation.time_quantum_ps: expected an integer")
    settings = SimulationSettings(sim.num("tau_max_ns", 200.0, lo=0, lo_open=True),
                                  sim.num("tau_step_ns", 0.05, lo=0, lo_open=True),
                                  sim.num("duration_s", 1.0, lo=0, lo_open=True), seed, int(quantum), weights)
    return RunConfig(system, chain, detector, stray, settings, str(raw.get("name", "")), copy.deepcopy(raw))


def load_preset_raw(name: str) -> dict:
    key = name.lower().replace("_", "-")
    if key not in PRESETS:
        raise InvalidConfig(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    text = resources.files("ionhom").joinpath("presets", PRESETS[key]).read_text()
    return json.loads(text)


def load_config(path_or_preset) -> RunConfig:
    """Load a config file, or a bundled preset by name ("ba-like", "ca-like")."""
    p = Path(str(path_or_preset))
    if not p.exists() and str(path_or_preset).lower().replace("_", "-") in PRESETS:
        return parse_config(load_preset_raw(str(path_or_preset)))
    try:
        raw = json.loads(p.read_text())
    except json.JSONDecodeError as e:
        raise InvalidConfig(f"{p}: not valid JSON ({e})") from None
    return parse_config(raw)
