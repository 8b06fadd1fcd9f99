"""Synthetic photon streams: quantum-jump trajectories, beam-splitter routing, detectors.

Each ion is unravelled into a pure-state trajectory under the non-Hermitian
H_eff = H - i/2 sum_k A_k^dag A_k. Time runs on an integer grid of
``time_quantum`` ps. The jump time is the first grid point where the norm
squared drops to a uniform threshold r; it is located by galloping up and
then bisecting down through a table of propagators exp(-i H_eff q 2^k), so
one jump costs about 2 log2(wait / q) matrix-vector products.

Green jump operators are mixed unitarily so that the first one equals the
collection operator; only jumps into that channel become photons.

Interference between the two ions is imposed after the fact: photons are
routed to the two output ports at random and, for each cross-ion pair on
opposite ports, the later photon is deleted with probability
cos^2(phi) |g1(dt)|^2. This is a low-flux approximation: it is exact for
second-order statistics when at most one partner photon falls inside a
coherence window.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
from numba import njit
from scipy.linalg import expm, qr

from .config import SystemConfig
from .detection import CollectionChain, DetectorModel
from .dynamics import CorrelationSeries, collection_operator, steady_state
from .ion_model import build_dephasing_operators, build_hamiltonian, build_jump_operators, liouvillian

PS_PER_US = 1e6
ORIGINS = ("ion1", "ion2", "dark")
DARK = 2
_TABLE_DEPTH = 32  # longest single descent: 2^32 quanta
_CHUNK = 1 << 16
_GALLOP_START = 12  # 4 ns at 1 ps quanta


class IntegrationFailure(RuntimeError):
    def __init__(self, message: str, time_ps: int):
        super().__init__(f"{message} at t = {time_ps} ps")
        self.time_ps = time_ps


@dataclass(frozen=True)
class PhotonRecord:
    time: int  # ps since run start
    channel: str  # I1, I2, I3 or I4
    origin: str  # ion1, ion2 or dark


@dataclass
class PhotonStream:
    """Columnar photon list; ``origin`` codes index ORIGINS."""
    times: np.ndarray  # int64 ps, non-decreasing
    channel: str
    duration: float  # s
    origin: np.ndarray = field(default=None)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.int64)
        if self.origin is None:
            self.origin = np.zeros(self.times.size, dtype=np.int8)
        self.origin = np.asarray(self.origin, dtype=np.int8)
        if self.origin.shape != self.times.shape:
            raise ValueError("times and origin must have the same length")

    def __len__(self) -> int:
        return int(self.times.size)

    def records(self) -> Iterator[PhotonRecord]:
        for t, o in zip(self.times.tolist(), self.origin.tolist()):
            yield PhotonRecord(t, self.channel, ORIGINS[o])

    @property
    def rate(self) -> float:
        """counts/s"""
        return len(self) / self.duration

    def is_sorted(self) -> bool:
        return bool(self.times.size < 2 or np.all(np.diff(self.times) >= 0))


@dataclass(frozen=True)
class TrajectoryConfig:
    duration: float  # s
    seed: int
    time_quantum: int = 1  # ps

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError("duration must be > 0")
        if int(self.time_quantum) != self.time_quantum or self.time_quantum < 1:
            raise ValueError("time_quantum must be an integer >= 1 ps")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 bits")

    @property
    def duration_ps(self) -> int:
        return int(round(self.duration * 1e12))


def _mixed_green(config: SystemConfig, weights) -> tuple[list[np.ndarray], list[bool]]:
    """Jump operators with the green ones rotated so that the first is the collection operator."""
    jumps = build_jump_operators(config)
    green = [j for j in jumps if j.channel == "P12->S12"]
    other = [j.matrix for j in jumps if j.channel != "P12->S12"]
    sigma = collection_operator(config, weights)
    qs = [j.q for j in green]
    w = np.array([np.vdot(j.matrix, sigma) / np.vdot(j.matrix, j.matrix) for j in green])
    # unitary with first row w: complete w^* to an orthonormal basis
    basis, _ = qr(np.column_stack([w.conj(), np.eye(len(qs))]).astype(complex))
    basis = basis[:, :len(qs)]
    basis[:, 0] *= np.vdot(basis[:, 0], w.conj()) / abs(np.vdot(basis[:, 0], w.conj()))
    u = basis.conj().T
    mixed = [sum(u[a, b] * green[b].matrix for b in range(len(qs))) for a in range(len(qs))]
    assert np.allclose(mixed[0], sigma, atol=1e-12)
    # Dephasing sqrt(g) P is unravelled as the unitary reflection sqrt(g/4) (1 - 2P):
    # same dissipator, but state-independent events at rate g/4 instead of g<P>.
    eye = np.eye(config.scheme.dim)
    deph = []
    for o in build_dephasing_operators(config):
        g = np.real(np.trace(o.conj().T @ o)) / np.real(np.trace(o))  # o = sqrt(g) P
        proj = np.asarray(o, complex) / np.sqrt(g)
        deph.append(0.5 * np.sqrt(g) * (eye - 2 * proj))
    ops = mixed + other + deph
    collected = [True] + [False] * (len(ops) - 1)
    return ops, collected


def _propagator_table(h_eff: np.ndarray, quantum_ps: int) -> np.ndarray:
    dt_us = quantum_ps / PS_PER_US
    return np.stack([expm(-1j * h_eff * dt_us * 2.0**k) for k in range(_TABLE_DEPTH)])


@njit(cache=True)
def _norm2(v):
    s = 0.0
    for x in v:
        s += x.real * x.real + x.imag * x.imag
    return s


@njit(cache=True)
def _matvec(m, v, out):
    d = v.size
    for i in range(d):
        acc = 0j
        for j in range(d):
            acc += m[i, j] * v[j]
        out[i] = acc


@njit(cache=True)
def _trajectory_chunk(psi, t, t_end, r, table, ops, collected, uni, quantum, out):
    """Advance one trajectory until uniforms, output space or time run out.

    ``r < 0`` means a fresh threshold is needed. Returns
    (t, r, uniforms used, photons written, status) with status 0 = needs more
    input, 1 = reached t_end, 2 = numerical failure.
    """
    n_ops = ops.shape[0]
    depth = table.shape[0]
    iu = 0
    n = 0
    weights = np.empty(n_ops)
    cand = np.empty_like(psi)
    while True:
        if iu + 2 > uni.size or n >= out.size:
            return t, r, iu, n, 0
        if r < 0.0:
            r = uni[iu]
            iu += 1
        # gallop up from a few ns, then bisect down to one quantum
        steps = 0
        k = min(_GALLOP_START, depth - 1)
        while True:
            _matvec(table[k], psi, cand)
            if _norm2(cand) > r:
                psi[:] = cand
                steps += 1 << k
                if k == depth - 1:
                    break
                k += 1
            else:
                break
        for k in range(k - 1, -1, -1):
            _matvec(table[k], psi, cand)
            if _norm2(cand) > r:
                psi[:] = cand
                steps += 1 << k
        t += steps * quantum
        _matvec(table[0], psi, cand)
        nn = _norm2(cand)
        if nn != nn or nn > 1.0 + 1e-9:
            return t, r, iu, n, 2
        t += quantum
        if t >= t_end:
            return t, r, iu, n, 1
        if nn > r:
            # no jump within the table span: renormalize and keep the threshold
            psi[:] = cand / np.sqrt(nn)
            r = r / nn
            continue
        psi[:] = cand
        total = 0.0
        for k in range(n_ops):
            _matvec(ops[k], psi, cand)
            weights[k] = _norm2(cand)
            total += weights[k]
        if not total > 0.0:
            return t, r, iu, n, 2
        x = uni[iu] * total
        iu += 1
        pick = n_ops - 1
        acc = 0.0
        for k in range(n_ops):
            acc += weights[k]
            if x < acc:
                pick = k
                break
        _matvec(ops[pick], psi, cand)
        psi[:] = cand / np.sqrt(weights[pick])
        r = -1.0
        if collected[pick]:
            out[n] = t
            n += 1


def mcwf_photon_stream(config: SystemConfig, traj: TrajectoryConfig, weights=None,
                       channel: str = "I1", origin: int = 0) -> PhotonStream:
    """Collected-photon emission times of one quantum-jump trajectory.

    The trajectory starts from a pure state drawn from the steady-state
    ensemble, so the stream is stationary from t = 0.
    """
    rng = np.random.default_rng(np.random.SeedSequence(int(traj.seed)))
    ops, collected = _mixed_green(config, weights)
    h = build_hamiltonian(config)
    h_eff = h - 0.5j * sum(a.conj().T @ a for a in ops)
    table = _propagator_table(h_eff, int(traj.time_quantum))
    ops_arr = np.ascontiguousarray(np.stack(ops))
    coll = np.array(collected)

    rho = steady_state(liouvillian(config))
    vals, vecs = np.linalg.eigh(rho)
    p = np.clip(vals, 0, None)
    k = rng.choice(p.size, p=p / p.sum())
    psi = np.ascontiguousarray(vecs[:, k].astype(complex))

    t, r, t_end = 0, -1.0, traj.duration_ps
    parts = []
    while True:
        uni = rng.random(_CHUNK)
        out = np.empty(_CHUNK // 2, dtype=np.int64)
        t, r, _, n, status = _trajectory_chunk(psi, t, t_end, r, table, ops_arr, coll, uni,
                                               int(traj.time_quantum), out)
        parts.append(out[:n].copy())
        if status == 2:
            raise IntegrationFailure("trajectory norm became invalid", int(t))
        if status == 1:
            break
    times = np.concatenate(parts) if parts else np.zeros(0, np.int64)
    return PhotonStream(times, channel, traj.duration, np.full(times.size, origin, np.int8))


def coherence_window(g1: CorrelationSeries, threshold: float = 1e-3) -> float:
    """Lag in ns beyond which |g1|^2 stays below ``threshold`` on the grid."""
    a2 = np.abs(g1.values) ** 2
    above = np.flatnonzero(a2 >= threshold)
    if above.size == 0:
        return float(g1.tau[0])
    if above[-1] == a2.size - 1:
        raise ValueError("g1 grid does not reach the end of the interference window "
                         f"(|g1|^2 = {a2[-1]:.3g} at {g1.tau[-1]} ns)")
    return float(g1.tau[above[-1] + 1])


@njit(cache=True)
def _veto(times, origin, port, u, c2, tau_ps, g1sq, window_ps):
    n = times.size
    keep = np.ones(n, dtype=np.bool_)
    for j in range(n):
        p_keep = 1.0
        i = j - 1
        while i >= 0 and times[j] - times[i] <= window_ps:
            if keep[i] and origin[i] != origin[j] and port[i] != port[j]:
                p_keep *= 1.0 - c2 * np.interp(float(times[j] - times[i]), tau_ps, g1sq)
            i -= 1
        if u[j] >= p_keep:
            keep[j] = False
    return keep


def interfere(stream1: PhotonStream, stream2: PhotonStream, phi: float, g1: CorrelationSeries,
              rng: np.random.Generator) -> tuple[PhotonStream, PhotonStream, int]:
    """Beam-splitter stage without detector effects; returns (I3, I4, vetoed count)."""
    if not (0.0 <= phi <= 90.0):
        raise ValueError(f"polarization angle must be in [0, 90] degrees, got {phi}")
    for s in (stream1, stream2):
        if not s.is_sorted():
            raise ValueError(f"stream {s.channel} is not sorted")
    if g1.kind != "G1":
        raise ValueError("interference needs a G1 series")
    times = np.concatenate([stream1.times, stream2.times])
    origin = np.concatenate([np.zeros(len(stream1), np.int8), np.ones(len(stream2), np.int8)])
    order = np.argsort(times, kind="stable")
    times, origin = times[order], origin[order]
    port = (rng.random(times.size) >= 0.5).astype(np.int8)  # 0 -> I3, 1 -> I4
    u = rng.random(times.size)
    c2 = float(np.cos(np.radians(phi)) ** 2)
    if c2 < 1e-15:
        keep = np.ones(times.size, dtype=bool)
    else:
        window = coherence_window(g1)
        keep = _veto(times, origin, port, u, c2, g1.tau * 1000.0, np.abs(g1.values) ** 2,
                     int(np.ceil(window * 1000.0)))
    duration = max(stream1.duration, stream2.duration)
    outs = []
    for p, name in ((0, "I3"), (1, "I4")):
        sel = keep & (port == p)
        outs.append(PhotonStream(times[sel], name, duration, origin[sel]))
    return outs[0], outs[1], int(times.size - keep.sum())


@njit(cache=True)
def _dead_time(times, dead_ps):
    keep = np.ones(times.size, dtype=np.bool_)
    last = np.iinfo(np.int64).min // 2
    for i in range(times.size):
        if times[i] - last < dead_ps:
            keep[i] = False
        else:
            last = times[i]
    return keep


def apply_detector(stream: PhotonStream, det: DetectorModel, efficiency: float,
                   rng: np.random.Generator, background_rate: float = 0.0) -> PhotonStream:
    """Efficiency thinning, dark counts, timing jitter, then non-paralyzable dead time.

    ``background_rate`` (counts/s) adds stray light to the dark counts; both
    are homogeneous Poisson processes. Jittered times are clipped at 0 and
    sorted before the dead-time pass, which needs time order.
    """
    if background_rate < 0:
        raise ValueError("background_rate must be >= 0")
    if not 0.0 < efficiency <= 1.0:
        raise ValueError("efficiency must be in (0, 1]")
    times, origin = stream.times, stream.origin
    sel = rng.random(times.size) < efficiency
    times, origin = times[sel], origin[sel]
    duration_ps = int(round(stream.duration * 1e12))
    n_dark = rng.poisson((det.dark_rate + background_rate) * stream.duration)
    dark = rng.integers(0, max(duration_ps, 1), n_dark)
    times = np.concatenate([times, dark])
    origin = np.concatenate([origin, np.full(n_dark, DARK, np.int8)])
    if det.jitter_sigma > 0:
        jitter = rng.normal(0.0, det.jitter_sigma * 1000.0, times.size)
        times = np.maximum(times + np.rint(jitter).astype(np.int64), 0)
    order = np.argsort(times, kind="stable")
    times, origin = times[order], origin[order]
    if det.dead_time > 0:
        keep = _dead_time(times, int(round(det.dead_time * 1000.0)))
        times, origin = times[keep], origin[keep]
    return PhotonStream(times, stream.channel, stream.duration, origin)


def route_and_interfere(stream1: PhotonStream, stream2: PhotonStream, phi: float,
                        g1: CorrelationSeries, det: DetectorModel, seed: int,
                        chain: CollectionChain | None = None,
                        background_rate: float = 0.0) -> tuple[PhotonStream, PhotonStream]:
    """Two ion streams in, detected I3 and I4 streams out.

    Overall detection probability is chain efficiency times quantum
    efficiency; with ``chain=None`` the collection losses are taken as
    already included in the input streams. ``background_rate`` is stray
    light per port in counts/s.
    """
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    i3, i4, _ = interfere(stream1, stream2, phi, g1, rng)
    eff = det.quantum_efficiency * (chain.efficiency if chain is not None else 1.0)
    return (apply_detector(i3, det, eff, rng, background_rate),
            apply_detector(i4, det, eff, rng, background_rate))
