import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ionhom.detection import (BackgroundFloor, CollectionChain, DetectorModel, accidental_floor, convolve_response,
                              effective_count_rate, green_scattering_rate)
from ionhom.dynamics import CorrelationSeries, p_population, steady_state
from ionhom.ion_model import liouvillian

TAU = np.arange(0, 4001) * 0.05


def test_chain_efficiency_and_validation():
    c = CollectionChain(0.04, 0.25, 0.8)
    assert c.efficiency == pytest.approx(0.008)
    with pytest.raises(ValueError):
        CollectionChain(0.0)
    with pytest.raises(ValueError):
        DetectorModel(1.5)
    with pytest.raises(ValueError):
        DetectorModel(0.25, -1.0)


def test_count_rate_formula(config8):
    rho = steady_state(liouvillian(config8))
    ch = config8.scheme.channel("P12", "S12")
    chain, det = CollectionChain(0.04, 0.5, 0.8), DetectorModel(0.25)
    want = ch.rate * ch.branching * p_population(config8, rho) * 1e6 * 0.04 * 0.5 * 0.8 * 0.25
    assert effective_count_rate(config8, chain, det, rho) == pytest.approx(want, rel=1e-12)
    assert green_scattering_rate(config8) == pytest.approx(want / (0.04 * 0.5 * 0.8 * 0.25), rel=1e-9)


@given(st.floats(0.0, 5.0), st.floats(0.2, 3.0))
def test_convolution_keeps_constants(level, fwhm):
    s = CorrelationSeries(TAU, np.full(TAU.size, level), "G2")
    out = convolve_response(s, DetectorModel(0.25, fwhm))
    assert np.allclose(out.values, level, atol=1e-12)


def test_convolution_of_narrow_dip_has_expected_depth():
    # a triangular dip of area A is smeared into a Gaussian dip of depth A / (sqrt(2 pi) sigma)
    width = 0.1
    vals = 1 - np.clip(1 - TAU / width, 0, None)
    det = DetectorModel(0.25, 1.5)
    out = convolve_response(CorrelationSeries(TAU, vals, "G2"), det)
    area = width  # both sides together
    assert 1 - out.values[0] == pytest.approx(area / (np.sqrt(2 * np.pi) * det.response_sigma), rel=2e-2)
    assert np.all(np.diff(out.values[:100]) >= -1e-12)


def test_zero_fwhm_is_identity_and_grid_checks():
    s = CorrelationSeries(TAU, np.ones(TAU.size), "G2")
    assert convolve_response(s, DetectorModel(0.25, 0.0)) is s
    coarse = CorrelationSeries(np.arange(10.0), np.ones(10), "G2")
    with pytest.raises(ValueError):
        convolve_response(coarse, DetectorModel(0.25, 1.5))


def test_jitter_sigma_adds_to_pairwise():
    det = DetectorModel(0.25, 1.5)
    assert np.hypot(det.jitter_sigma, det.jitter_sigma) == pytest.approx(det.response_sigma)
    assert det.response_sigma * 2 * np.sqrt(2 * np.log(2)) == pytest.approx(1.5)


@given(st.floats(0, 1), st.floats(0, 3))
def test_background_formula(b, g):
    fl = BackgroundFloor(b)
    assert fl.apply_value(g) == pytest.approx((1 - b) ** 2 * g + 2 * b - b * b, abs=1e-12)


def test_background_limits():
    assert BackgroundFloor(0.0).apply_value(0.0) == 0.0
    assert BackgroundFloor(1.0).apply_value(0.0) == 1.0
    assert BackgroundFloor(0.0151).apply_value(0.0) == pytest.approx(0.02997, abs=1e-5)
    with pytest.raises(ValueError):
        BackgroundFloor(1.2)
    assert accidental_floor(900.0, 50.0, 50.0).fraction == pytest.approx(0.1)
    with pytest.raises(ValueError):
        accidental_floor(0.0)
    g1 = CorrelationSeries(TAU, np.ones(TAU.size, complex), "G1")
    with pytest.raises(ValueError):
        BackgroundFloor(0.1).apply(g1)
