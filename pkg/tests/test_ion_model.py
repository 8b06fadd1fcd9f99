import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from conftest import full_config, random_density
from ionhom.config import (ZEEMAN_UNIT, DecayChannel, InvalidConfig, LaserDrive, LevelScheme, MagneticField,
                           SystemConfig, linear_polarization, mhz, standard_scheme, two_level)
from ionhom.ion_model import (angular_factor, build_dephasing_operators, build_hamiltonian,
                              build_jump_operators, build_liouvillian, liouvillian, unvec, vec)


def _idle(field=0.0, pol_g=(0, 1, 0), rabi_g=0.0, rabi_r=0.0):
    lasers = (LaserDrive(("S12", "P12"), rabi_g, 0.0, pol_g), LaserDrive(("D32", "P12"), rabi_r, 0.0))
    return SystemConfig(standard_scheme(mhz(20.0), 0.73), lasers, MagneticField(field))


def test_no_drive_no_field_is_zero():
    assert np.array_equal(build_hamiltonian(_idle()), np.zeros((8, 8)))


def test_pi_coupling_two_equal_pairs():
    cfg = _idle(pol_g=(0, 1, 0), rabi_g=1.0)
    h = build_hamiltonian(cfg)
    off = h - np.diag(np.diag(h))
    nz = np.argwhere(np.abs(np.triu(off)) > 0)
    s = cfg.scheme
    pairs = {(s.levels[i], s.levels[j]) for i, j in nz}
    assert pairs == {(("S12", -0.5), ("P12", -0.5)), (("S12", 0.5), ("P12", 0.5))}
    vals = np.abs(off[np.abs(off) > 0])
    assert np.allclose(vals, vals[0])


def test_zeeman_splitting_of_ground_state():
    cfg = _idle(field=4.0)
    h = build_hamiltonian(cfg)
    s = cfg.scheme
    split = h[s.index("S12", 0.5), s.index("S12", 0.5)] - h[s.index("S12", -0.5), s.index("S12", -0.5)]
    assert split.real == pytest.approx(2 * ZEEMAN_UNIT * 4.0, rel=1e-14)


@given(st.floats(0, 200), st.floats(-100, 100), st.floats(0, 200), st.floats(-100, 100), st.floats(0, 20),
       st.floats(0, 90), st.floats(0, 90))
def test_hamiltonian_hermitian(og, dg, orr, dr, b, ag, ar):
    h = build_hamiltonian(full_config(og, dg, orr, dr, b, ag, ar))
    assert np.allclose(h, h.conj().T, atol=1e-12, rtol=0)


def test_invalid_polarization_and_nan():
    with pytest.raises(InvalidConfig):
        LaserDrive(("S12", "P12"), 1.0, 0.0, (0, 1.1, 0))
    with pytest.raises(InvalidConfig):
        LaserDrive(("S12", "P12"), float("nan"), 0.0)
    with pytest.raises(InvalidConfig):
        LaserDrive(("S12", "D32"), 1.0, 0.0)


def test_scheme_invariants():
    with pytest.raises(InvalidConfig):
        LevelScheme((("S12", 0.5),), (), {"S12": 2.0})
    with pytest.raises(InvalidConfig):
        standard_scheme(-1.0, 0.7)
    bad = (DecayChannel("P12", "S12", 1.0, 0.7), DecayChannel("P12", "D32", 1.0, 0.2))
    from ionhom.config import FULL_LEVELS
    with pytest.raises(InvalidConfig):
        LevelScheme(FULL_LEVELS, bad, {"S12": 2, "P12": 2 / 3, "D32": 0.8})


def test_one_laser_per_transition():
    sch = standard_scheme(mhz(20.0), 0.73)
    green = LaserDrive(("S12", "P12"), 1.0, 0.0)
    with pytest.raises(InvalidConfig):
        SystemConfig(sch, (green,))
    with pytest.raises(InvalidConfig):
        SystemConfig(sch, (green, green))


def test_green_completeness(config8):
    ops = [j for j in build_jump_operators(config8) if j.channel == "P12->S12"]
    total = sum(j.matrix.conj().T @ j.matrix for j in ops)
    ch = config8.scheme.channel("P12", "S12")
    assert np.allclose(total, ch.rate * ch.branching * config8.scheme.projector("P12"), atol=1e-12)


def test_red_completeness(config8):
    ops = [j for j in build_jump_operators(config8) if j.channel == "P12->D32"]
    total = sum(j.matrix.conj().T @ j.matrix for j in ops)
    ch = config8.scheme.channel("P12", "D32")
    assert np.allclose(total, ch.rate * ch.branching * config8.scheme.projector("P12"), atol=1e-12)


def test_red_operator_entry_counts(config8):
    s = config8.scheme
    for j in build_jump_operators(config8):
        if j.channel != "P12->D32":
            continue
        expected = sum(1 for u in s.indices("P12") for l in s.indices("D32")
                       if s.levels[u][1] - s.levels[l][1] == j.q)
        assert np.count_nonzero(j.matrix) == expected == 2


def test_two_level_single_jump():
    cfg = two_level(mhz(20.0), mhz(5.0))
    (j,) = build_jump_operators(cfg)
    assert np.allclose(j.matrix, np.sqrt(mhz(20.0)) * np.array([[0, 1], [0, 0]]))


def test_angular_factors_are_normalized():
    s = standard_scheme(1.0, 0.5)
    for u in s.indices("P12"):
        for lower in ("S12", "D32"):
            tot = sum(angular_factor(s, l, u) ** 2 for l in s.indices(lower))
            assert tot == pytest.approx(1.0, abs=1e-14)


def test_trace_preservation(config8):
    lv = liouvillian(config8)
    rng = np.random.default_rng(0)
    for _ in range(100):
        rho = random_density(rng, 8)
        assert abs(np.trace(unvec(lv @ vec(rho)))) <= 1e-10 * np.linalg.norm(rho) * np.abs(lv).max()


def test_pure_decay_action():
    g = 3.0
    a = np.sqrt(g) * np.array([[0, 1], [0, 0]], dtype=complex)
    lv = build_liouvillian(np.zeros((2, 2)), [a])
    ee = np.diag([0, 1]).astype(complex)
    assert np.allclose(unvec(lv @ vec(ee)), g * np.diag([1, -1]))


def test_liouvillian_rejects_bad_input():
    with pytest.raises(ValueError):
        build_liouvillian(np.array([[0, 1], [0, 0]]), [])
    with pytest.raises(ValueError):
        build_liouvillian(np.zeros((2, 2)), [np.zeros((3, 3))])


def test_barium_like_spectrum_has_zero_top(ba_run):
    ev = np.linalg.eigvals(ba_run.model.lv)
    assert abs(ev.real.max()) < 1e-8


def test_positivity_after_evolution(config8):
    lv = liouvillian(config8)
    gamma = config8.scheme.channel("P12", "S12").rate
    prop = scipy.linalg.expm(lv * 5 / gamma)
    rng = np.random.default_rng(1)
    for _ in range(100):
        rho = unvec(prop @ vec(random_density(rng, 8)))
        assert np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() >= -1e-8


def test_dephasing_operators_follow_linewidth():
    cfg = full_config(lw=1.0)
    ops = build_dephasing_operators(cfg)
    assert len(ops) == 2
    assert len(build_dephasing_operators(full_config(lw=0.0))) == 0
    # green noise touches P and D, red noise only D
    s = cfg.scheme
    green, red = ops
    assert np.allclose(np.diag(green).real ** 2, mhz(1.0) * np.array([t != "S12" for t, _ in s.levels]))
    assert np.allclose(np.diag(red).real ** 2, mhz(1.0) * np.array([t == "D32" for t, _ in s.levels]))


def test_phase_convention_invariance(config8):
    """A global phase on every jump operator leaves the generator unchanged."""
    h = build_hamiltonian(config8)
    ops = [j.matrix for j in build_jump_operators(config8)]
    ref = build_liouvillian(h, ops)
    rotated = build_liouvillian(h, [np.exp(0.7j * k) * m for k, m in enumerate(ops)])
    assert np.allclose(ref, rotated, atol=1e-10)


def test_polarization_vector_components():
    s = linear_polarization(90.0)
    assert np.allclose(s, (1 / np.sqrt(2), 0, -1 / np.sqrt(2)))
    assert np.allclose(linear_polarization(0.0), (0, 1, 0))
