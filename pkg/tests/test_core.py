import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from singular_circuits.core import (
    BallastDescriptor,
    FourierSeries,
    PeriodicWaveform,
    ZeroCrossingSet,
    asymptotic_inductance,
    derivative,
    detect_zerocrossings,
    require_same_grid,
    synthesize,
    to_fourier,
)
from singular_circuits.errors import (
    DegenerateInputError,
    GridMismatchError,
    InconsistentCrossingsError,
    NoAsymptoticInductanceError,
)
from singular_circuits.fourier import SquareWaveSpec, sign_series_general

W = 2 * math.pi


def wave(fn, n=4096, period=1.0):
    return PeriodicWaveform.from_function(fn, period, n)


def test_waveform_validation():
    with pytest.raises(ValueError):
        PeriodicWaveform(1.0, np.zeros(8))
    with pytest.raises(ValueError):
        PeriodicWaveform(1.0, np.full(16, np.nan))
    with pytest.raises(ValueError):
        PeriodicWaveform(-1.0, np.zeros(16))
    w = PeriodicWaveform(1.0, np.zeros(16))
    with pytest.raises(ValueError):
        w.samples[0] = 1.0


def test_grid_mismatch():
    with pytest.raises(GridMismatchError):
        require_same_grid(PeriodicWaveform(1.0, np.zeros(16)), PeriodicWaveform(1.0, np.zeros(32)))


def test_pure_tone_projection():
    f = to_fourier(wave(lambda t: np.sin(W * t)), 5)
    assert abs(f.sin_coeffs[1] - 1.0) < 1e-12
    others = np.concatenate([f.cos_coeffs, f.sin_coeffs[2:]])
    assert np.max(np.abs(others)) < 1e-12


def test_constant_projection():
    f = to_fourier(wave(lambda t: 3.0 + 0 * t), 5)
    assert f.cos_coeffs[0] == pytest.approx(3.0, abs=1e-14)
    assert np.max(np.abs(f.cos_coeffs[1:])) < 1e-14
    assert np.max(np.abs(f.sin_coeffs)) < 1e-14


def test_sampled_square_wave_matches_exact_coefficients():
    n = 2 ** 14
    cs = ZeroCrossingSet(1.0, (0.0, 0.5), (1, -1))
    # value 0 at the jumps: the midpoint rule then equals the trapezoid rule on each piece
    k = np.arange(n)
    w = PeriodicWaveform(1.0, np.where(k < n // 2, 1.0, -1.0) * (k % (n // 2) != 0))
    got = to_fourier(w, 7)
    exact = sign_series_general(SquareWaveSpec(1.0, cs, W), 7)
    assert np.max(np.abs(got.sin_coeffs - exact.sin_coeffs)) < 1e-6
    assert np.max(np.abs(got.cos_coeffs - exact.cos_coeffs)) < 1e-6


def test_synthesize_zero_and_fundamental():
    assert np.all(synthesize(FourierSeries.zeros(W, 4), 64).samples == 0)
    f = FourierSeries(W, [0, 0], [0, 4 / math.pi])
    w = synthesize(f, 256)
    assert np.allclose(w.samples, 4 / math.pi * np.sin(W * w.times), atol=1e-14)


def test_round_trip_third_harmonic():
    w = wave(lambda t: np.sin(3 * W * t), 512)
    back = synthesize(to_fourier(w, 10), 512)
    assert np.max(np.abs(back.samples - w.samples)) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=12, max_size=12))
def test_round_trip_band_limited(coeffs):
    a = np.array([0.0] + coeffs[:5] + [0.0] * 4)
    b = np.array([0.0] + coeffs[5:10] + [0.0] * 4)
    a[0] = coeffs[10]
    f = FourierSeries(W, a, b)
    g = to_fourier(synthesize(f, 64), 9)
    assert np.max(np.abs(g.cos_coeffs - f.cos_coeffs)) < 1e-12
    assert np.max(np.abs(g.sin_coeffs - f.sin_coeffs)) < 1e-12


def test_evaluate_scalar_and_vector():
    f = FourierSeries(W, [1.0, 0.5], [0.0, 2.0])
    assert isinstance(f.evaluate(0.1), float)
    t = np.linspace(0, 1, 7)
    assert np.allclose(f.evaluate(t), 1 + 0.5 * np.cos(W * t) + 2 * np.sin(W * t))


def test_spectral_derivative():
    w = wave(lambda t: np.sin(2 * W * t), 256)
    d = derivative(w)
    assert np.max(np.abs(d.samples - 2 * W * np.cos(2 * W * w.times))) < 1e-10


def test_crossings_of_sine():
    cs = detect_zerocrossings(wave(lambda t: np.sin(W * t)))
    assert len(cs) == 2
    assert cs.times[0] == pytest.approx(0.0, abs=1e-12)
    assert cs.times[1] == pytest.approx(0.5, abs=1e-10)
    assert cs.directions == (1, -1)


def test_crossings_with_third_harmonic_against_dense_grid():
    fn = lambda t: np.sin(W * t) + 0.2 * np.sin(3 * W * t)
    cs = detect_zerocrossings(wave(fn, 256))
    m = 2 ** 16
    s = np.sign(fn((np.arange(m) + 0.5) / m))  # half-sample offset avoids the exact zeros
    assert int(np.count_nonzero(s != np.roll(s, 1))) == 2
    assert len(cs) == 2
    assert cs.times[1] == pytest.approx(0.5, abs=1e-10)


def test_constant_has_no_crossings():
    assert len(detect_zerocrossings(wave(lambda t: 1.0 + 0 * t))) == 0


def test_degenerate_inputs():
    with pytest.raises(DegenerateInputError):
        detect_zerocrossings(PeriodicWaveform(1.0, np.zeros(32)))
    x = np.sin(W * np.arange(32) / 32)
    x[3:6] = 0.0
    with pytest.raises(DegenerateInputError):
        detect_zerocrossings(PeriodicWaveform(1.0, x))


def test_crossing_set_invariants():
    with pytest.raises(InconsistentCrossingsError):
        ZeroCrossingSet(1.0, (0.1,), (1,))
    with pytest.raises(InconsistentCrossingsError):
        ZeroCrossingSet(1.0, (0.1, 0.2), (1, 1))
    with pytest.raises(InconsistentCrossingsError):
        ZeroCrossingSet(1.0, (0.3, 0.2), (1, -1))
    with pytest.raises(InconsistentCrossingsError):
        ZeroCrossingSet(1.0, (0.1, 1.2), (1, -1))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=6, max_size=6))
def test_detected_crossings_always_valid(c):
    fn = lambda t: sum(c[k] * np.sin((k + 1) * W * t + c[k + 3]) for k in range(3)) + 1e-3
    w = wave(fn, 128)
    try:
        cs = detect_zerocrossings(w)
    except DegenerateInputError:
        return
    assert len(cs) % 2 == 0
    assert all(b > a for a, b in zip(cs.times, cs.times[1:]))
    assert all(a != b for a, b in zip(cs.directions, cs.directions[1:]))


def test_half_wave_symmetric_waveform_has_no_even_harmonics():
    w = wave(lambda t: np.sin(W * t) + 0.3 * np.cos(3 * W * t) + 0.1 * np.sin(5 * W * t + 1))
    f = to_fourier(w, 20)
    assert np.max(f.amplitudes()[0::2]) < 1e-10


def test_asymptotic_inductance_examples():
    assert asymptotic_inductance(BallastDescriptor.series(R=5, L=0.5)) == 0.5
    assert asymptotic_inductance(BallastDescriptor.series(L=0.5, C=1e-4)) == 0.5
    with pytest.raises(NoAsymptoticInductanceError):
        asymptotic_inductance(BallastDescriptor.series(R=2.0))
    with pytest.raises(NoAsymptoticInductanceError):
        asymptotic_inductance(BallastDescriptor.rational([1.0], [2.0]))
    # Y = 1/(0.25 s + 3) given as a rational form
    assert asymptotic_inductance(BallastDescriptor.rational([1.0], [0.25, 3.0])) == pytest.approx(0.25)


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-3, 1e3), st.floats(0, 1e3), st.one_of(st.none(), st.floats(1e-6, 1.0)))
def test_asymptotic_inductance_series_exact(L, R, C):
    assert asymptotic_inductance(BallastDescriptor.series(R=R, L=L, C=C)) == L


def test_series_admittance_matches_rational():
    b = BallastDescriptor.series(R=2.0, L=0.5, C=1e-2)
    num, den = b.polynomials
    s = 1j * np.array([1.0, 7.0, 30.0])
    assert np.allclose(b.admittance(s), np.polyval(num, s) / np.polyval(den, s))
    assert np.allclose(b.admittance(s), 1 / (2.0 + 0.5 * s + 1 / (1e-2 * s)))
