import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from entropy_sensing.errors import UnsupportedLengthError
from entropy_sensing.montecarlo import draw_samples
from entropy_sensing.signal import ChannelKind, ChannelModel, Hypothesis, ScenarioConfig, trial_rng
from entropy_sensing.spectral import Spectrum, amplitude, dft, dft_array, power_density

from oracles import direct_dft

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def frames_of(n):
    return arrays(np.float64, n, elements=finite)


def test_dc_only():
    spec = dft(np.full(16, 2.5))
    assert abs(spec.bins[0] - 2.5) < 1e-12
    assert np.max(np.abs(spec.bins[1:])) < 1e-12


def test_matches_direct_eight_points():
    x = trial_rng(1).standard_normal(8)
    np.testing.assert_allclose(dft(x).bins, direct_dft(x), rtol=0, atol=1e-12)


@pytest.mark.parametrize("n", [1, 2, 4, 32, 256])
def test_matches_direct_batched(n):
    x = trial_rng(2, n).standard_normal((5, n))
    np.testing.assert_allclose(dft_array(x), direct_dft(x), rtol=0, atol=1e-12)


def test_single_row_and_odd_batch():
    x = trial_rng(3).standard_normal((3, 64))
    np.testing.assert_allclose(dft_array(x[0]), direct_dft(x[0]), atol=1e-12)
    np.testing.assert_allclose(dft_array(x), direct_dft(x), atol=1e-12)


def test_complex_input():
    rng = trial_rng(4)
    z = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    np.testing.assert_allclose(dft_array(z), direct_dft(z), atol=1e-12)


@pytest.mark.parametrize("n", [3, 12, 1000])
def test_rejects_non_power_of_two(n):
    with pytest.raises(UnsupportedLengthError):
        dft(np.zeros(n))


@settings(max_examples=50, deadline=None)
@given(frames_of(64))
def test_parseval(x):
    spec = dft(x)
    lhs = np.sum(np.abs(spec.bins) ** 2)
    rhs = np.sum(x ** 2) / x.size
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-300)


@settings(max_examples=50, deadline=None)
@given(frames_of(32))
def test_conjugate_symmetry(x):
    b = dft(x).bins
    np.testing.assert_allclose(b[1:], np.conj(b[:0:-1]), atol=1e-9 * (1 + np.abs(x).max()))


@settings(max_examples=30, deadline=None)
@given(frames_of(16), frames_of(16), finite, finite)
def test_linearity(x, y, a, b):
    lhs = dft(a * x + b * y).bins
    rhs = a * dft(x).bins + b * dft(y).bins
    scale = 1 + np.abs(a * x).max() + np.abs(b * y).max()
    np.testing.assert_allclose(lhs, rhs, atol=1e-9 * scale)


def test_scale_equivariance_of_power():
    x = trial_rng(5).standard_normal(128)
    np.testing.assert_allclose(power_density(dft(3.0 * x)).values,
                               9.0 * power_density(dft(x)).values, rtol=1e-12)


def test_amplitude_modulus():
    spec = Spectrum(np.array([3 + 4j, 0, 0, 0]))
    np.testing.assert_array_equal(amplitude(spec).values, [5, 0, 0, 0])


def test_amplitude_zero_spectrum():
    assert np.all(amplitude(Spectrum(np.zeros(8, complex))).values == 0)


def test_amplitude_conjugate_pair():
    b = dft(trial_rng(6).standard_normal(16)).bins
    a = amplitude(Spectrum(b)).values
    assert a[3] == pytest.approx(a[13], rel=1e-12)


def test_power_density_squared_modulus():
    assert power_density(Spectrum(np.array([3 + 4j]))).values[0] == 25


def test_power_is_amplitude_squared():
    spec = dft(trial_rng(7).standard_normal(256))
    np.testing.assert_allclose(power_density(spec).values, amplitude(spec).values ** 2, rtol=1e-12)


def test_h0_power_bins_mean():
    sc = ScenarioConfig(channel=ChannelModel(ChannelKind.AWGN))
    n = sc.frame_len
    samples, _ = draw_samples(Hypothesis.H0, sc, 13, range(200))
    p = power_density(dft(samples)).values[..., 0, :]
    non_dc = np.delete(p, [0, n // 2], axis=-1).ravel()
    assert non_dc.size >= 100_000
    assert abs(non_dc.mean() / (sc.noise.actual_power / n) - 1) < 0.03
