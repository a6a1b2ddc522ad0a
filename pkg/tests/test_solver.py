import math

import numpy as np
import pytest

from conftest import OMEGA, lamp_lprime, pure_l, series_lc, series_rl
from singular_circuits.core import (
    BallastDescriptor,
    FourierSeries,
    PeriodicWaveform,
    ZeroCrossingSet,
    detect_zerocrossings,
    to_fourier,
)
from singular_circuits.elements import SignHardlimiter
from singular_circuits.errors import (
    AssumptionViolatedError,
    NoSolutionError,
    ResonanceError,
)
from singular_circuits.fourier import SquareWaveSpec, sign_series_general
from singular_circuits.solver import (
    LampCircuit,
    affine_response,
    affine_superposition_check,
    linear_crossings_guess,
    multi_crossing_solver,
    power_scaling_sweep,
    smooth_rough_decompose,
    steady_state_two_crossing,
    time_domain_oracle,
)

T = 2 * math.pi / OMEGA
SIX = FourierSeries(OMEGA, [0, 0, 0, 0], [0, 1 / 3, 0, 2 / 3])


def closed_form_t1(U, A):
    return math.acos(A * math.pi / (2 * U)) / OMEGA


@pytest.mark.parametrize("ratio", [2.0, 5.0, 10.0, math.pi])
def test_pure_l_closed_form(ratio):
    s = steady_state_two_crossing(pure_l(U=ratio))
    assert abs(s.t1 - closed_form_t1(ratio, 1.0)) < 1e-10 * T


def test_pi_third():
    s = steady_state_two_crossing(pure_l(U=math.pi))
    assert OMEGA * s.t1 == pytest.approx(math.pi / 3, abs=1e-9)


def test_below_threshold_reports_no_solution():
    with pytest.raises(NoSolutionError) as exc:
        steady_state_two_crossing(pure_l(U=1.5))
    assert "1.5708" in str(exc.value)
    assert exc.value.code == "no-solution"


def test_element_removed_gives_quarter_period_lag():
    s = steady_state_two_crossing(pure_l(U=3.0, A=0.0))
    assert OMEGA * s.t1 == pytest.approx(math.pi / 2, abs=1e-9)


def test_t1_depends_only_on_ratio():
    a = steady_state_two_crossing(pure_l(U=3.0, A=1.0)).t1
    b = steady_state_two_crossing(pure_l(U=6.0, A=2.0)).t1
    assert abs(a - b) < 1e-12 * T


@pytest.mark.parametrize("make", [pure_l, series_rl, series_lc, lamp_lprime])
def test_steady_state_invariants(make):
    tol = 1e-9
    s = steady_state_two_crossing(make(), tol=tol)
    i = s.current.samples
    scale = np.max(np.abs(i))
    assert np.max(np.abs(i + s.current.shifted_half_period())) < 1e-8 * scale
    rep = s.representation
    assert np.max(np.abs(rep(np.array(s.crossings.times)))) < tol * scale
    again = detect_zerocrossings(s.current, refine_tol=1e-3 * tol * T, evaluator=lambda t: float(rep(t)))
    assert again.distance(s.crossings) < 10 * tol * T
    assert len(s.crossings) == 2


def test_multi_m1_matches_two_crossing():
    c = pure_l(U=5.0)
    two = steady_state_two_crossing(c)
    multi = multi_crossing_solver(c, 1, linear_crossings_guess(c))
    assert two.crossings.distance(multi.crossings) < 1e-9 * T


def test_symmetric_guess_stays_symmetric():
    c = series_lc(U=4.0)
    guess = ZeroCrossingSet.two_crossing(T, 0.2)
    s = multi_crossing_solver(c, 1, guess)
    assert s.crossings.is_half_wave_symmetric(tol=1e-9)


def test_six_crossings_confirmed_by_oracle():
    c = LampCircuit(BallastDescriptor.series(L=1.0), SignHardlimiter(1.0), 10.0, OMEGA, SIX)
    s = multi_crossing_solver(c, 3, linear_crossings_guess(c), tol=1e-10)
    assert len(s.crossings) == 6
    o = time_domain_oracle(c)
    assert len(o.crossings) == 6
    assert o.crossings.distance(s.crossings) < 1e-6 * T


def test_non_symmetric_drive_rejected_by_two_crossing_solver():
    xi = FourierSeries(OMEGA, [0, 0, 0.3], [0, 1, 0])
    with pytest.raises(AssumptionViolatedError):
        steady_state_two_crossing(LampCircuit(BallastDescriptor.series(L=1.0), SignHardlimiter(1.0), 5.0, OMEGA, xi))


def test_circuit_validation():
    with pytest.raises(ValueError):
        pure_l(U=0.0)
    with pytest.raises(ValueError):
        LampCircuit(BallastDescriptor.series(L=1.0), SignHardlimiter(1.0), 1.0, OMEGA,
                    FourierSeries(OMEGA, [0.5, 0], [0, 1]))


def test_oracle_pure_l_closed_form():
    o = time_domain_oracle(pure_l(U=math.pi))
    assert abs(o.t1 - closed_form_t1(math.pi, 1.0)) < 1e-6 * T


def test_oracle_linear_matches_phasor():
    c = series_rl(U=3.0, A=0.0)
    o = time_domain_oracle(c, steps_per_period=1024)
    t = o.current.times
    Z = 2.0 + 1j * OMEGA * 1.0
    exact = np.imag(3.0 / Z * np.exp(1j * OMEGA * t))
    assert np.max(np.abs(o.current.samples - exact)) < 1e-8 * np.max(np.abs(exact))


@pytest.mark.parametrize("make", [pure_l, series_rl, series_lc, lamp_lprime])
def test_oracle_matches_harmonic_solver(make):
    c = make()
    s = steady_state_two_crossing(c, n_samples=1024)
    o = time_domain_oracle(c, steps_per_period=1024)
    scale = np.max(np.abs(o.current.samples))
    assert np.max(np.abs(s.current.samples - o.current.samples)) < 1e-3 * scale


def test_decomposition_pure_l():
    U, A = 5.0, 1.0
    s = steady_state_two_crossing(pure_l(U=U, A=A), n_samples=4096)
    i1, i2 = smooth_rough_decompose(s, A, 1.0)
    t = s.current.times
    assert np.max(np.abs(i1.samples + U / OMEGA * np.cos(OMEGA * t))) < 1e-10
    slopes = np.diff(i2.samples) / np.diff(t)
    level = s.crossings.level_at(t[:-1] + 0.5 * (t[1] - t[0]))
    kinks = s.crossings.level_at(t[:-1]) != s.crossings.level_at(t[1:])
    assert np.allclose(slopes[~kinks], -A * level[~kinks], atol=1e-6)
    assert abs(np.mean(i2.samples)) < 1e-12
    assert np.all(i1.samples + i2.samples == s.current.samples)


def test_decomposition_without_element():
    s = steady_state_two_crossing(series_rl(A=0.0))
    i1, i2 = smooth_rough_decompose(s, 0.0, 1.0)
    assert np.all(i2.samples == 0)
    assert np.all(i1.samples == s.current.samples)


def test_sweep_linear_slope_two():
    c = LampCircuit(BallastDescriptor.series(R=3.0), SignHardlimiter(0.0), 1.0, OMEGA)
    rows = power_scaling_sweep(c, [1.0, 2.0, 5.0, 10.0])
    assert all(abs(r.slope - 2.0) < 1e-6 for r in rows)


def test_sweep_lamp_slope_tends_to_one():
    rows = power_scaling_sweep(series_lc(), [2.0, 5.0, 20.0, 50.0], n_samples=2048)
    slopes = [r.slope for r in rows]
    assert all(1.0 < s < 2.0 for s in slopes)
    assert all(b < a for a, b in zip(slopes, slopes[1:]))


def test_sweep_near_threshold_pure_l():
    rows = power_scaling_sweep(pure_l(), [1.9, 2.0, 2.1], n_samples=1024)
    assert rows[1].slope > 1.0 and abs(rows[1].slope - 2.0) > 0.1
    # closed form: P ~ sqrt(U^2 - (A pi / 2)^2), differenced like the sweep
    lnP = [0.5 * math.log(u * u - math.pi ** 2 / 4) for u in (1.9, 2.1)]
    # 1024-point power quadrature over the kinked current limits agreement to ~1e-6
    assert rows[1].slope == pytest.approx((lnP[1] - lnP[0]) / math.log(2.1 / 1.9), rel=1e-5)


def test_dead_time_band_is_reported():
    # roots of the crossing condition exist, but the current would stall at zero
    with pytest.raises(NoSolutionError) as exc:
        steady_state_two_crossing(pure_l(U=1.7))
    assert "stall" in str(exc.value)
    assert time_domain_oracle(pure_l(U=1.7)).stuck_fraction > 0.01


def test_sweep_single_point():
    rows = power_scaling_sweep(series_lc(), [5.0], n_samples=1024)
    assert rows[0].slope is None and rows[0].P > 0


def frozen_setup(n=1024):
    xi = PeriodicWaveform.from_function(lambda t: np.sin(OMEGA * t), T, n)
    cs = ZeroCrossingSet.two_crossing(T, 0.2)
    f = PeriodicWaveform(T, -1.0 * cs.level_at(xi.times))
    return xi, f


def test_affine_deviation_small():
    xi, f = frozen_setup()
    b = BallastDescriptor.series(R=1.0, L=1.0)
    for U1, U2 in [(1.0, 2.0), (3.0, 7.5), (10.0, 0.5)]:
        assert affine_superposition_check(b, xi, f, U1, U2) < 1e-10


def test_affine_scaling():
    xi, f = frozen_setup()
    b = BallastDescriptor.series(R=1.0, L=1.0)
    zero = f.with_samples(np.zeros(f.n))
    lin1, lin2 = affine_response(b, xi, zero, 2.0), affine_response(b, xi, zero, 4.0)
    assert np.max(np.abs(lin2.samples - 2 * lin1.samples)) < 1e-13
    i1, i2 = affine_response(b, xi, f, 2.0), affine_response(b, xi, f, 4.0)
    only_f = affine_response(b, zero, f, 1.0)
    gap = np.max(np.abs(i2.samples - 2 * i1.samples))
    assert gap == pytest.approx(np.max(np.abs(only_f.samples)), rel=1e-10)
    assert gap > 0.1 * np.max(np.abs(only_f.samples))


def test_affine_resonance_detected():
    xi, f = frozen_setup()
    resonant = BallastDescriptor.series(L=1.0, C=1.0 / OMEGA ** 2)
    with pytest.raises(ResonanceError):
        affine_superposition_check(resonant, xi, f, 1.0, 2.0)
