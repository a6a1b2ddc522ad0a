"""Exact Fourier coefficients of square waves defined by their zerocrossings,
decay-order estimation, and periodic orthogonality checks."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import FourierSeries, PeriodicWaveform, ZeroCrossingSet, require_same_grid

DECAY_FLOOR = 1e-13
SUPER_POLYNOMIAL_FLOOR = 1e-14
MIN_FIT_POINTS = 5


class DecayOutcome(enum.Enum):
    SUPER_POLYNOMIAL = "super-polynomial"


SUPER_POLYNOMIAL = DecayOutcome.SUPER_POLYNOMIAL


@dataclass(frozen=True)
class SquareWaveSpec:
    """+/-amplitude step function switching at the given crossings.

    The level after a -/+ crossing is +amplitude.  With no crossings the wave
    is the constant ``amplitude``.
    """

    amplitude: float
    crossings: ZeroCrossingSet
    omega: float

    def __post_init__(self):
        if not math.isclose(2 * math.pi / self.omega, self.crossings.period, rel_tol=1e-12):
            raise ValueError("crossing set period does not match omega")

    def value(self, t):
        return self.amplitude * self.crossings.level_at(t)


def sign_series_two_crossing(t1: float, omega: float, n_max: int) -> FourierSeries:
    """(4/pi) sum_{n odd <= n_max} sin(n w (t - t1)) / n in cos/sin form."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    n = np.arange(n_max + 1)
    amp = np.zeros(n_max + 1)
    odd = n % 2 == 1
    amp[odd] = 4.0 / (math.pi * n[odd])
    phase = n * omega * t1
    return FourierSeries(omega, -amp * np.sin(phase), amp * np.cos(phase))


def sign_series_general(wave: SquareWaveSpec, n_max: int) -> FourierSeries:
    """Exact coefficients of the step function by summing over its jumps.

    Each jump of height J_k at t_k contributes (J_k / (pi n)) (cos(n w t_k),
    -sin(n w t_k)) to (b_n, a_n); the mean is the time-weighted level.
    """
    omega = wave.omega
    cs = wave.crossings
    a = np.zeros(n_max + 1)
    b = np.zeros(n_max + 1)
    if not cs.times:
        a[0] = wave.amplitude
        return FourierSeries(omega, a, b)
    t = cs.as_array()
    jumps = 2.0 * wave.amplitude * np.array(cs.directions, dtype=float)
    n = np.arange(1, n_max + 1)
    phase = np.multiply.outer(n * omega, t)
    a[1:] = -(np.sin(phase) @ jumps) / (math.pi * n)
    b[1:] = (np.cos(phase) @ jumps) / (math.pi * n)
    a[0] = wave.amplitude * cs.mean_level()
    return FourierSeries(omega, a, b)


def coefficient_decay_order(f: FourierSeries, n_min: int, n_max: int):
    """Negated least-squares slope of log|c_n| against log n.

    Harmonics with |c_n| below ``DECAY_FLOOR`` (relative to the largest
    coefficient in range) are skipped.  Returns ``SUPER_POLYNOMIAL`` when
    fewer than five harmonics survive, i.e. the coefficients vanish faster
    than any power the window can resolve.
    """
    if n_min < 1 or n_max <= n_min:
        raise ValueError("need 1 <= n_min < n_max")
    n_max = min(n_max, f.n_harmonics)
    n = np.arange(n_min, n_max + 1)
    c = f.amplitudes()[n_min:n_max + 1]
    scale = max(float(f.amplitudes()[1:].max(initial=0.0)), 1e-300)
    keep = c > DECAY_FLOOR * scale
    if keep.sum() < MIN_FIT_POINTS:
        return SUPER_POLYNOMIAL
    slope, _ = np.polyfit(np.log(n[keep]), np.log(c[keep]), 1)
    return float(-slope)


def periodic_orthogonality(g_of_i: PeriodicWaveform, didt: PeriodicWaveform) -> float:
    """Period mean of g * di/dt by the trapezoid rule on the periodic grid."""
    require_same_grid(g_of_i, didt)
    return float(np.mean(g_of_i.samples * didt.samples))


def triangle_wave(amplitude: float, period: float, n: int) -> PeriodicWaveform:
    """Zero-mean symmetric triangle with peak ``amplitude`` at t = 0."""
    x = np.arange(n) / n
    return PeriodicWaveform(period, amplitude * (1.0 - 4.0 * np.abs(x - np.round(x))))


def sign_wave_antiderivative(crossings: ZeroCrossingSet):
    """Zero-mean periodic antiderivative of (s(t) - mean s) for the +/-1 step s(t).

    The result is continuous and piecewise linear with corners at the
    crossings; it is returned as a vectorised callable of t.
    """
    T = crossings.period
    if not crossings.times:
        return lambda t: np.zeros_like(np.asarray(t, dtype=float))
    levels = crossings.levels() - crossings.mean_level()
    nodes = np.concatenate([[0.0], crossings.as_array(), [T]])
    slopes = np.concatenate([[levels[-1]], levels])
    values = np.concatenate([[0.0], np.cumsum(slopes * np.diff(nodes))])
    mean = np.sum(0.5 * (values[:-1] + values[1:]) * np.diff(nodes)) / T
    values = values - mean

    def antiderivative(t):
        return np.interp(np.mod(np.asarray(t, dtype=float), T), nodes, values)

    return antiderivative
