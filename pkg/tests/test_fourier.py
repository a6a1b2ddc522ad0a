import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from singular_circuits.core import FourierSeries, PeriodicWaveform, ZeroCrossingSet, synthesize
from singular_circuits.fourier import (
    SUPER_POLYNOMIAL,
    SquareWaveSpec,
    coefficient_decay_order,
    periodic_orthogonality,
    sign_series_general,
    sign_series_two_crossing,
    sign_wave_antiderivative,
    triangle_wave,
)

W = 2 * math.pi


def test_two_crossing_coefficients():
    f = sign_series_two_crossing(0.0, W, 9)
    assert f.sin_coeffs[1] == pytest.approx(4 / math.pi, abs=1e-15)
    assert f.amplitudes()[2] == 0.0
    for n_max in (1, 5, 51, 999):
        assert abs(sign_series_two_crossing(0.13, W, n_max).evaluate(0.13)) < 1e-12


def test_general_reduces_to_two_crossing():
    for t1 in (0.0, 0.1, 0.37):
        cs = ZeroCrossingSet.two_crossing(1.0, t1)
        g = sign_series_general(SquareWaveSpec(1.0, cs, W), 51)
        f = sign_series_two_crossing(t1, W, 51)
        assert np.max(np.abs(g.cos_coeffs - f.cos_coeffs)) < 1e-12
        assert np.max(np.abs(g.sin_coeffs - f.sin_coeffs)) < 1e-12


def exact_coefficient(cs: ZeroCrossingSet, n: int) -> tuple:
    """Piecewise integration of s(t) cos/sin(n w t) over each constant interval."""
    edges = list(cs.times) + [cs.times[0] + cs.period]
    a = b = 0.0
    for k, lev in enumerate(cs.levels()):
        t0, t1 = edges[k], edges[k + 1]
        a += lev * (math.sin(n * W * t1) - math.sin(n * W * t0)) / (n * W)
        b += lev * (math.cos(n * W * t0) - math.cos(n * W * t1)) / (n * W)
    return 2 * a / cs.period, 2 * b / cs.period


def test_four_crossings_against_piecewise_integration():
    cs = ZeroCrossingSet(1.0, (0.0, 0.25, 0.5, 0.75), (1, -1, 1, -1))
    f = sign_series_general(SquareWaveSpec(1.0, cs, W), 8)
    assert abs(f.sin_coeffs[1]) < 1e-12 and abs(f.cos_coeffs[1]) < 1e-12
    assert f.amplitudes()[2] > 0.5
    for n in range(1, 9):
        a, b = exact_coefficient(cs, n)
        assert f.cos_coeffs[n] == pytest.approx(a, abs=1e-12)
        assert f.sin_coeffs[n] == pytest.approx(b, abs=1e-12)


def test_empty_crossing_set_is_constant():
    cs = ZeroCrossingSet(1.0, (), ())
    f = sign_series_general(SquareWaveSpec(2.5, cs, W), 5)
    assert f.cos_coeffs[0] == 2.5
    assert np.all(f.amplitudes()[1:] == 0)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.0, 0.999), min_size=2, max_size=8, unique=True), st.floats(0.1, 3))
def test_coefficient_bound(times, amp):
    times = sorted(times)
    if len(times) % 2 or min(np.diff(times), default=1) < 1e-6:
        return
    cs = ZeroCrossingSet(1.0, tuple(times), tuple((-1) ** k for k in range(len(times))))
    f = sign_series_general(SquareWaveSpec(amp, cs, W), 40)
    n = np.arange(1, 41)
    assert np.all(f.amplitudes()[1:] <= 4 * amp * cs.lobes / (math.pi * n) * (1 + 1e-12))


def test_half_wave_symmetric_set_has_no_even_harmonics():
    cs = ZeroCrossingSet.from_unordered(1.0, [0.1, 0.23, 0.31, 0.6, 0.73, 0.81], [1, -1, 1, -1, 1, -1])
    assert cs.is_half_wave_symmetric()
    f = sign_series_general(SquareWaveSpec(1.0, cs, W), 30)
    assert np.max(f.amplitudes()[0::2]) < 1e-12


def test_parseval_and_partial_sum():
    f = sign_series_two_crossing(0.0, W, 999)
    w = synthesize(f, 2 ** 14)
    assert np.mean(w.samples ** 2) == pytest.approx(1.0, rel=0.01)


def test_decay_orders():
    sq = sign_series_two_crossing(0.2, W, 999)
    assert 0.9 <= coefficient_decay_order(sq, 1, 999) <= 1.1
    tri = triangle_wave(1.0, 1.0, 2 ** 14)
    from singular_circuits.core import to_fourier

    assert 1.9 <= coefficient_decay_order(to_fourier(tri, 999), 1, 999) <= 2.1
    assert coefficient_decay_order(FourierSeries(W, [0, 0, 0, 0, 0, 0, 0], [0, 1, 0, 0, 0, 0, 0]), 1, 6) is SUPER_POLYNOMIAL


def test_orthogonality_examples():
    n = 4096
    t = (np.arange(n) + 0.5) / n  # time origin shifted half a sample so no sample sits on a zero
    i = PeriodicWaveform(1.0, np.sin(W * t))
    didt = PeriodicWaveform(1.0, W * np.cos(W * t))
    assert abs(periodic_orthogonality(i.with_samples(np.sign(i.samples)), didt)) < 1e-10
    assert abs(periodic_orthogonality(i, didt)) < 1e-10
    assert abs(periodic_orthogonality(i.with_samples(np.ones(n)), didt)) < 1e-10


def test_antiderivative_is_zero_mean_integral():
    cs = ZeroCrossingSet(1.0, (0.1, 0.45, 0.5, 0.8), (1, -1, 1, -1))
    G = sign_wave_antiderivative(cs)
    t = (np.arange(2 ** 16) + 0.5) / 2 ** 16
    assert abs(np.mean(G(t))) < 1e-9
    h = 1e-6
    for tt in (0.2, 0.47, 0.6, 0.9):
        slope = (G(tt + h) - G(tt - h)) / (2 * h)
        assert slope == pytest.approx(cs.level_at(tt) - cs.mean_level(), abs=1e-8)
