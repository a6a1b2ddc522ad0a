"""Periodic signals, Fourier series, zerocrossing sets and linear ballasts.

All values here are immutable after construction.  Arithmetic is plain SI
with the unit tags carried as metadata only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    DegenerateInputError,
    GridMismatchError,
    InconsistentCrossingsError,
    NoAsymptoticInductanceError,
)

UNITS = ("volt", "ampere", "dimensionless")
DEFAULT_SAMPLES = 4096
MIN_SAMPLES = 16


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PeriodicWaveform:
    """A T-periodic real signal sampled at t_j = j*T/N, j = 0..N-1."""

    period: float
    samples: np.ndarray
    unit: str = "dimensionless"

    def __post_init__(self):
        if not (self.period > 0 and math.isfinite(self.period)):
            raise ValueError(f"period must be positive and finite, got {self.period}")
        samples = _frozen(self.samples)
        if samples.ndim != 1 or samples.size < MIN_SAMPLES:
            raise ValueError(f"need a 1-D grid of at least {MIN_SAMPLES} samples")
        if not np.all(np.isfinite(samples)):
            raise ValueError("waveform samples must be finite")
        if self.unit not in UNITS:
            raise ValueError(f"unknown unit tag {self.unit!r}")
        object.__setattr__(self, "samples", samples)

    @classmethod
    def from_function(cls, fn: Callable[[np.ndarray], np.ndarray], period: float,
                      n: int = DEFAULT_SAMPLES, unit: str = "dimensionless") -> "PeriodicWaveform":
        t = np.arange(n) * (period / n)
        return cls(period, np.broadcast_to(fn(t), t.shape), unit)

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def omega(self) -> float:
        return 2.0 * math.pi / self.period

    @property
    def dt(self) -> float:
        return self.period / self.n

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n) * self.dt

    def same_grid(self, other: "PeriodicWaveform") -> bool:
        return self.n == other.n and math.isclose(self.period, other.period, rel_tol=1e-12)

    def with_samples(self, samples, unit: Optional[str] = None) -> "PeriodicWaveform":
        return PeriodicWaveform(self.period, samples, unit or self.unit)

    def shifted_half_period(self) -> np.ndarray:
        """Samples of w(t + T/2); requires an even grid."""
        if self.n % 2:
            raise ValueError("half-period shift needs an even number of samples")
        return np.roll(self.samples, -self.n // 2)


def require_same_grid(*waves: PeriodicWaveform) -> None:
    first = waves[0]
    for w in waves[1:]:
        if not first.same_grid(w):
            raise GridMismatchError(
                f"grid mismatch: ({first.n}, {first.period}) vs ({w.n}, {w.period})")


@dataclass(frozen=True, eq=False)
class FourierSeries:
    """x(t) = a_0 + sum_{n>=1} a_n cos(n w t) + b_n sin(n w t).

    ``cos_coeffs[0]`` is the mean value; ``sin_coeffs[0]`` is always zero.
    """

    omega: float
    cos_coeffs: np.ndarray
    sin_coeffs: np.ndarray

    def __post_init__(self):
        a = _frozen(self.cos_coeffs)
        b = np.array(self.sin_coeffs, dtype=float)
        if a.ndim != 1 or a.shape != b.shape or a.size < 1:
            raise ValueError("cos and sin coefficient arrays must have equal length >= 1")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("Fourier coefficients must be finite")
        if not self.omega > 0:
            raise ValueError("omega must be positive")
        b[0] = 0.0
        b.setflags(write=False)
        object.__setattr__(self, "cos_coeffs", a)
        object.__setattr__(self, "sin_coeffs", b)

    @classmethod
    def zeros(cls, omega: float, n_harmonics: int) -> "FourierSeries":
        return cls(omega, np.zeros(n_harmonics + 1), np.zeros(n_harmonics + 1))

    @classmethod
    def from_phasors(cls, omega: float, phasors: np.ndarray) -> "FourierSeries":
        """Build from X_n with x(t) = Re sum X_n exp(j n w t); X_0 is the mean."""
        phasors = np.asarray(phasors, dtype=complex)
        a = phasors.real.copy()
        b = -phasors.imag.copy()
        b[0] = 0.0
        return cls(omega, a, b)

    @property
    def n_harmonics(self) -> int:
        return self.cos_coeffs.size - 1

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega

    @property
    def phasors(self) -> np.ndarray:
        ph = self.cos_coeffs - 1j * self.sin_coeffs
        ph[0] = self.cos_coeffs[0]
        return ph

    def amplitudes(self) -> np.ndarray:
        """|c_n| = sqrt(a_n^2 + b_n^2); entry 0 is |a_0|."""
        return np.hypot(self.cos_coeffs, self.sin_coeffs)

    def evaluate(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        flat = t.reshape(-1)
        out = np.empty(flat.size)
        w = np.arange(1, self.n_harmonics + 1) * self.omega
        chunk = max(1, 2_000_000 // max(1, w.size))
        for start in range(0, flat.size, chunk):
            phase = np.multiply.outer(flat[start:start + chunk], w)
            out[start:start + chunk] = (np.cos(phase) @ self.cos_coeffs[1:]
                                        + np.sin(phase) @ self.sin_coeffs[1:])
        out += self.cos_coeffs[0]
        return out.reshape(t.shape) if t.ndim else float(out[0])

    def derivative(self) -> "FourierSeries":
        n = np.arange(self.n_harmonics + 1) * self.omega
        return FourierSeries(self.omega, n * self.sin_coeffs, -n * self.cos_coeffs)

    def scaled(self, k: float) -> "FourierSeries":
        return FourierSeries(self.omega, k * self.cos_coeffs, k * self.sin_coeffs)

    def truncated(self, n_harmonics: int) -> "FourierSeries":
        m = n_harmonics + 1
        a = np.zeros(m)
        b = np.zeros(m)
        k = min(m, self.cos_coeffs.size)
        a[:k] = self.cos_coeffs[:k]
        b[:k] = self.sin_coeffs[:k]
        return FourierSeries(self.omega, a, b)

    def is_half_wave_symmetric(self, rtol: float = 1e-12) -> bool:
        """True when only odd harmonics (and no mean) are present."""
        amp = self.amplitudes()
        scale = max(amp.max(), 1e-300)
        return bool(np.all(amp[0::2] <= rtol * scale))


def to_fourier(w: PeriodicWaveform, n_harmonics: int) -> FourierSeries:
    """Discrete trigonometric projections of the samples up to ``n_harmonics``."""
    if n_harmonics < 0 or int(n_harmonics) != n_harmonics:
        raise ValueError("n_harmonics must be a non-negative integer")
    if not n_harmonics < w.n / 2:
        raise ValueError(f"n_harmonics={n_harmonics} needs fewer than N/2 = {w.n / 2}")
    spectrum = np.fft.rfft(w.samples) / w.n
    a = 2.0 * spectrum.real[: n_harmonics + 1]
    b = -2.0 * spectrum.imag[: n_harmonics + 1]
    a[0] = spectrum[0].real
    b[0] = 0.0
    return FourierSeries(w.omega, a, b)


def synthesize(f: FourierSeries, n_points: int = DEFAULT_SAMPLES,
               unit: str = "dimensionless") -> PeriodicWaveform:
    """Sample the trigonometric sum on N uniform points over one period.

    Harmonics at or above N/2 are folded onto their grid aliases, which is
    exact for the sampled values.
    """
    if n_points < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} points")
    n = np.arange(1, f.n_harmonics + 1)
    half = 0.5 * (f.cos_coeffs[1:] - 1j * f.sin_coeffs[1:])
    bins = np.zeros(n_points, dtype=complex)
    bins[0] += f.cos_coeffs[0]
    np.add.at(bins, n % n_points, half)
    np.add.at(bins, (-n) % n_points, np.conj(half))
    samples = n_points * np.fft.ifft(bins).real
    return PeriodicWaveform(f.period, samples, unit)


def derivative(w: PeriodicWaveform) -> PeriodicWaveform:
    """Spectral time derivative of the trigonometric interpolant (Nyquist bin dropped)."""
    spectrum = np.fft.rfft(w.samples)
    k = np.arange(spectrum.size) * w.omega
    d = 1j * k * spectrum
    if w.n % 2 == 0:
        d[-1] = 0.0
    return PeriodicWaveform(w.period, np.fft.irfft(d, w.n), "dimensionless")


def trig_interpolant(w: PeriodicWaveform) -> Callable[[float], float]:
    """Band-limited interpolant through the samples, evaluable at any t."""
    spectrum = np.fft.rfft(w.samples) / w.n
    m = spectrum.size
    weights = np.full(m, 2.0)
    weights[0] = 1.0
    if w.n % 2 == 0:
        weights[-1] = 1.0
    coeffs = weights * spectrum
    k = np.arange(m) * w.omega

    def value(t: float) -> float:
        return float(np.real(np.exp(1j * k * t) @ coeffs))

    return value


@dataclass(frozen=True, eq=False)
class ZeroCrossingSet:
    """Ordered crossing instants in [0, T) with direction +1 (-/+) or -1 (+/-)."""

    period: float
    times: tuple
    directions: tuple

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        dirs = tuple(int(d) for d in self.directions)
        if len(times) != len(dirs):
            raise InconsistentCrossingsError("times and directions differ in length")
        if len(times) % 2:
            raise InconsistentCrossingsError(f"odd number of crossings ({len(times)})")
        if any(d not in (-1, 1) for d in dirs):
            raise InconsistentCrossingsError("directions must be +1 or -1")
        if times and not (0.0 <= times[0] and times[-1] < self.period):
            raise InconsistentCrossingsError("crossing instants must lie in [0, T)")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise InconsistentCrossingsError("crossing instants must be strictly increasing")
        if any(a == b for a, b in zip(dirs, dirs[1:])):
            raise InconsistentCrossingsError("crossing directions must alternate")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "directions", dirs)

    @classmethod
    def from_unordered(cls, period: float, times: Sequence[float],
                       directions: Sequence[int]) -> "ZeroCrossingSet":
        """Wrap times into [0, T) and sort, keeping each time's direction."""
        wrapped = [(float(t) % period, int(d)) for t, d in zip(times, directions)]
        wrapped = [(0.0 if t >= period else t, d) for t, d in wrapped]
        wrapped.sort()
        return cls(period, tuple(t for t, _ in wrapped), tuple(d for _, d in wrapped))

    @classmethod
    def two_crossing(cls, period: float, t1: float) -> "ZeroCrossingSet":
        """Rising crossing at t1 and falling crossing half a period later."""
        return cls.from_unordered(period, [t1, t1 + period / 2], [1, -1])

    def __len__(self) -> int:
        return len(self.times)

    @property
    def lobes(self) -> int:
        return len(self.times) // 2

    def as_array(self) -> np.ndarray:
        return np.array(self.times)

    def levels(self) -> np.ndarray:
        """Sign level (+1/-1) holding on [t_k, t_{k+1})."""
        return np.array(self.directions, dtype=float)

    def level_at(self, t) -> np.ndarray:
        """The +/-1 step function defined by the crossings, evaluated at t."""
        t = np.mod(np.asarray(t, dtype=float), self.period)
        if not self.times:
            return np.ones_like(t)
        idx = np.searchsorted(self.times, t, side="right") - 1
        return np.asarray(self.levels()[idx])

    def mean_level(self) -> float:
        if not self.times:
            return 1.0
        edges = np.append(self.times, self.times[0] + self.period)
        return float(np.sum(self.levels() * np.diff(edges)) / self.period)

    def is_half_wave_symmetric(self, tol: float = 1e-12) -> bool:
        if not self.times or len(self.times) % 4 not in (0, 2):
            return False
        m = len(self.times) // 2
        t = np.array(self.times)
        d = np.array(self.directions)
        shifted = np.roll(t, -m)
        gap = np.mod(shifted - t, self.period)
        return bool(np.all(np.abs(gap - self.period / 2) <= tol * self.period)
                    and np.all(np.roll(d, -m) == -d))

    def distance(self, other: "ZeroCrossingSet") -> float:
        """Largest circular time offset between matched crossings (inf if counts differ)."""
        if len(self) != len(other) or self.directions != other.directions:
            return math.inf
        if not self.times:
            return 0.0
        d = np.mod(np.array(self.times) - np.array(other.times) + self.period / 2,
                   self.period) - self.period / 2
        return float(np.max(np.abs(d)))


def _bisect(fn: Callable[[float], float], lo: float, hi: float, f_lo: float,
            tol: float) -> float:
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = fn(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def detect_zerocrossings(w: PeriodicWaveform, refine_tol: Optional[float] = None,
                         method: str = "trig",
                         evaluator: Optional[Callable[[float], float]] = None) -> ZeroCrossingSet:
    """Locate the sign changes of a periodic waveform to sub-sample accuracy.

    Brackets come from consecutive nonzero samples of opposite sign (the
    sample at t = T is the sample at t = 0).  The bracket is refined by
    bisection on the band-limited interpolant (``method="trig"``), on the
    linear interpolant (``method="linear"``), or on ``evaluator`` if given.
    A sample that is exactly zero between opposite signs is itself the
    crossing.
    """
    if refine_tol is None:
        refine_tol = 1e-10 * w.period
    if method not in ("trig", "linear"):
        raise ValueError(f"unknown refinement method {method!r}")
    x = w.samples
    n = w.n
    h = w.dt
    sgn = np.sign(x)
    nz = np.flatnonzero(sgn)
    if nz.size == 0:
        raise DegenerateInputError("waveform is identically zero")
    interp = None
    if evaluator is None and method == "trig":
        interp = trig_interpolant(w)
    fn = evaluator or interp

    times, dirs = [], []
    for idx, a in enumerate(nz):
        b = nz[(idx + 1) % nz.size]
        gap = (b - a) % n - 1
        if nz.size == 1:
            gap = n - 1
        if gap >= 2:
            raise DegenerateInputError(
                f"waveform vanishes on an interval of {gap} samples after t={a * h:g}")
        if sgn[a] == sgn[b]:
            continue
        direction = 1 if sgn[b] > 0 else -1
        t_a = a * h
        if gap == 1:
            t = t_a + h
        elif fn is None:
            t = t_a + h * x[a] / (x[a] - x[b])
        else:
            t = _bisect(fn, t_a, t_a + h, x[a], refine_tol)
        times.append(t % w.period)
        dirs.append(direction)
    if len(times) % 2:
        raise InconsistentCrossingsError(f"odd crossing count {len(times)} after period closure")
    return ZeroCrossingSet.from_unordered(w.period, times, dirs)


@dataclass(frozen=True)
class BallastDescriptor:
    """Linear one-port in series with the element, described by its admittance Y(s).

    Either a series R-L-C chain (``series_C=None`` means no capacitor) or a
    rational admittance num(s)/den(s) with coefficients highest power first.
    """

    series_R: Optional[float] = None
    series_L: Optional[float] = None
    series_C: Optional[float] = None
    num: Optional[tuple] = None
    den: Optional[tuple] = None
    _poly: tuple = field(init=False, repr=False, compare=False, default=())

    def __post_init__(self):
        is_series = any(v is not None for v in (self.series_R, self.series_L, self.series_C))
        is_rational = self.num is not None or self.den is not None
        if is_series == is_rational:
            raise ValueError("give either series R/L/C values or num/den polynomials")
        if is_series:
            R = float(self.series_R or 0.0)
            L = float(self.series_L or 0.0)
            if R < 0 or L < 0 or not (math.isfinite(R) and math.isfinite(L)):
                raise ValueError("series R and L must be finite and non-negative")
            object.__setattr__(self, "series_R", R)
            object.__setattr__(self, "series_L", L)
            if self.series_C is None:
                if R == 0 and L == 0:
                    raise ValueError("series ballast without R, L or C is a short circuit")
                num, den = (1.0,), (L, R)
            else:
                C = float(self.series_C)
                if not (C > 0 and math.isfinite(C)):
                    raise ValueError("series C must be positive")
                object.__setattr__(self, "series_C", C)
                num, den = (C, 0.0), (L * C, R * C, 1.0)
        else:
            if self.num is None or self.den is None:
                raise ValueError("rational admittance needs both num and den")
            num, den = tuple(map(float, self.num)), tuple(map(float, self.den))
            object.__setattr__(self, "num", num)
            object.__setattr__(self, "den", den)
        object.__setattr__(self, "_poly", (_strip(num), _strip(den)))

    @classmethod
    def series(cls, R: float = 0.0, L: float = 0.0, C: Optional[float] = None) -> "BallastDescriptor":
        return cls(series_R=R, series_L=L, series_C=C)

    @classmethod
    def rational(cls, num: Sequence[float], den: Sequence[float]) -> "BallastDescriptor":
        return cls(num=tuple(num), den=tuple(den))

    @property
    def is_series(self) -> bool:
        return self.num is None

    @property
    def polynomials(self) -> tuple:
        return self._poly

    def admittance(self, s) -> np.ndarray:
        num, den = self._poly
        s = np.asarray(s, dtype=complex)
        return np.polyval(num, s) / np.polyval(den, s)

    def harmonic_admittance(self, omega: float, n_harmonics: int,
                            extra_inductance: float = 0.0) -> np.ndarray:
        """Y(j n w) for n = 1..N_h, optionally with an inductance added in series."""
        n = np.arange(1, n_harmonics + 1)
        y = self.admittance(1j * n * omega)
        if not np.all(np.isfinite(y)):
            raise ValueError("ballast admittance is not finite at every harmonic")
        if extra_inductance:
            y = y / (1.0 + 1j * n * omega * extra_inductance * y)
        return y

    def dc_admittance(self) -> float:
        """Y(0); ``math.inf`` when the ballast is a DC short through an inductance."""
        num, den = self._poly
        d0 = den[-1]
        n0 = num[-1]
        if d0 == 0.0:
            return 0.0 if n0 == 0.0 else math.inf
        return n0 / d0


def _strip(p) -> tuple:
    p = list(p)
    while len(p) > 1 and p[0] == 0.0:
        p.pop(0)
    if not p or all(c == 0.0 for c in p):
        raise ValueError("polynomial must have a nonzero coefficient")
    return tuple(p)


def asymptotic_inductance(b: BallastDescriptor, omega: Optional[float] = None) -> float:
    """L with 1/L = lim n w |Y(j n w)|, the high-frequency inductance of the ballast."""
    if omega is not None and not omega > 0:
        raise ValueError("omega must be positive")
    if b.is_series:
        if b.series_L > 0:
            return b.series_L
        raise NoAsymptoticInductanceError(
            "series ballast without inductance: n w |Y| grows without bound")
    num, den = b.polynomials
    rel_degree = (len(den) - 1) - (len(num) - 1)
    if rel_degree != 1:
        raise NoAsymptoticInductanceError(
            f"admittance has relative degree {rel_degree}; need exactly 1")
    return abs(den[0] / num[0])
