"""Periodic steady states of a linear series ballast driving a sign-type element.

The harmonic-balance solvers parameterise the current by its zerocrossings.
For a given crossing set the element voltage is a known square wave, so the
current follows from the ballast admittance harmonic by harmonic.  The slowly
converging part of that series, the response of the asymptotic inductance to
the square wave, is summed in closed form as a piecewise-linear wave; only the
fast-decaying remainder is truncated.  The crossing instants are then fixed by
requiring the current to vanish at them.

``time_domain_oracle`` integrates the circuit ODE directly and serves as an
independent check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .core import (
    DEFAULT_SAMPLES,
    BallastDescriptor,
    FourierSeries,
    PeriodicWaveform,
    ZeroCrossingSet,
    asymptotic_inductance,
    detect_zerocrossings,
    synthesize,
    to_fourier,
)
from .elements import HysteresisLamp, SignHardlimiter
from .errors import (
    AssumptionViolatedError,
    ConvergenceError,
    CrossingCountMismatchError,
    MultipleSolutionsError,
    NoAsymptoticInductanceError,
    NoSolutionError,
    ResonanceError,
    TransientNotSettledError,
)
from .fourier import sign_series_general, sign_wave_antiderivative, SquareWaveSpec

DEFAULT_HARMONICS = 999
ROOT_SCAN_POINTS = 512
JACOBIAN_STEP = 1e-7
MAX_HALVINGS = 8

Element = Union[SignHardlimiter, HysteresisLamp]


def sine_drive(omega: float) -> FourierSeries:
    return FourierSeries(omega, [0.0, 0.0], [0.0, 1.0])


@dataclass(frozen=True)
class LampCircuit:
    """v_in = U xi(t) driving ``ballast`` in series with ``element``.

    ``xi`` may be the name ``"sin"``, a FourierSeries or a PeriodicWaveform; it
    is stored as a FourierSeries.
    """

    ballast: BallastDescriptor
    element: Element
    U: float
    omega: float
    xi: Union[str, FourierSeries, PeriodicWaveform] = "sin"

    def __post_init__(self):
        if not (self.omega > 0 and math.isfinite(self.omega)):
            raise ValueError("omega must be positive")
        if not (self.U > 0 and math.isfinite(self.U)):
            raise ValueError("U must be positive")
        xi = self.xi
        if isinstance(xi, str):
            if xi != "sin":
                raise ValueError(f"unknown named waveform {xi!r}")
            xi = sine_drive(self.omega)
        elif isinstance(xi, PeriodicWaveform):
            xi = to_fourier(xi, xi.n // 2 - 1)
        if not math.isclose(xi.omega, self.omega, rel_tol=1e-12):
            raise ValueError("drive waveform frequency does not match omega")
        if abs(xi.cos_coeffs[0]) > 1e-12 * max(xi.amplitudes().max(), 1e-300):
            raise ValueError("drive waveform must have zero mean")
        object.__setattr__(self, "xi", xi)

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega

    @property
    def A1(self) -> float:
        return self.element.A1

    @property
    def L_prime(self) -> float:
        return self.element.L_prime

    def total_inductance(self) -> float:
        """Asymptotic inductance of the ballast plus the element's own L'."""
        try:
            L = asymptotic_inductance(self.ballast, self.omega)
        except NoAsymptoticInductanceError:
            if self.L_prime > 0:
                return self.L_prime
            raise
        return L + self.L_prime

    def with_U(self, U: float) -> "LampCircuit":
        return replace(self, U=U)

    def drive_value(self, t):
        return self.U * self.xi.evaluate(t)


@dataclass(frozen=True, eq=False)
class CurrentRepresentation:
    """i(t) = smooth(t) - (A1/L) * G(t), G the zero-mean integral of the sign wave."""

    smooth: FourierSeries
    crossings: ZeroCrossingSet
    rough_slope: float
    _antiderivative: Callable = field(repr=False)
    _smooth_rate: FourierSeries = field(repr=False)

    @classmethod
    def build(cls, smooth: FourierSeries, crossings: ZeroCrossingSet,
              rough_slope: float) -> "CurrentRepresentation":
        return cls(smooth, crossings, rough_slope,
                   sign_wave_antiderivative(crossings), smooth.derivative())

    def __call__(self, t):
        return self.smooth.evaluate(t) - self.rough_slope * self._antiderivative(t)

    def rough(self, t):
        return -self.rough_slope * self._antiderivative(t)

    def didt(self, t):
        level = self.crossings.level_at(t) - self.crossings.mean_level()
        return self._smooth_rate.evaluate(t) - self.rough_slope * level

    def sample(self, n: int) -> np.ndarray:
        t = np.arange(n) * (self.crossings.period / n)
        return synthesize(self.smooth, n).samples + self.rough(t)

    def sample_didt(self, n: int) -> np.ndarray:
        t = np.arange(n) * (self.crossings.period / n)
        level = self.crossings.level_at(t) - self.crossings.mean_level()
        return synthesize(self._smooth_rate, n).samples - self.rough_slope * level


@dataclass(frozen=True, eq=False)
class SteadyState:
    current: PeriodicWaveform
    voltage: PeriodicWaveform
    crossings: ZeroCrossingSet
    iterations: int
    residual: float
    drive: Optional[PeriodicWaveform] = None
    didt: Optional[PeriodicWaveform] = None
    representation: Optional[CurrentRepresentation] = None
    method: str = "harmonic"
    stuck_fraction: float = 0.0

    @property
    def t1(self) -> float:
        """First -/+ crossing."""
        for t, d in zip(self.crossings.times, self.crossings.directions):
            if d > 0:
                return t
        raise ValueError("no rising crossing")


class _HarmonicModel:
    """Per-circuit precomputation for building currents from crossing sets."""

    def __init__(self, c: LampCircuit, n_harmonics: int):
        self.c = c
        self.nh = n_harmonics
        self.omega = c.omega
        self.T = c.period
        self.A1 = c.A1
        n = np.arange(1, n_harmonics + 1)
        self.Y = c.ballast.harmonic_admittance(c.omega, n_harmonics, extra_inductance=c.L_prime)
        if self.A1 > 0:
            L = c.total_inductance()
            self.rough_slope = self.A1 / L
            self.Y_rough = 1.0 / (1j * n * c.omega * L)
            self.L = L
        else:
            self.rough_slope = 0.0
            self.Y_rough = np.zeros(n_harmonics, dtype=complex)
            self.L = None
        xi = c.xi.truncated(n_harmonics)
        self.drive_phasors = c.U * xi.phasors
        self.Y0 = c.ballast.dc_admittance()
        self.dc_free = math.isinf(self.Y0) and self.A1 > 0

    def sign_phasors(self, cs: ZeroCrossingSet) -> np.ndarray:
        return sign_series_general(SquareWaveSpec(1.0, cs, self.omega), self.nh).phasors

    def smooth_series(self, cs: ZeroCrossingSet, i0: float = 0.0) -> FourierSeries:
        S = self.sign_phasors(cs)
        ph = np.zeros(self.nh + 1, dtype=complex)
        ph[1:] = self.Y * self.drive_phasors[1:] - self.A1 * S[1:] * (self.Y - self.Y_rough)
        if self.dc_free:
            ph[0] = i0
        elif math.isinf(self.Y0):
            ph[0] = 0.0
        else:
            ph[0] = self.Y0 * (self.drive_phasors[0].real - self.A1 * S[0].real)
        return FourierSeries.from_phasors(self.omega, ph)

    def current(self, cs: ZeroCrossingSet, i0: float = 0.0) -> CurrentRepresentation:
        return CurrentRepresentation.build(self.smooth_series(cs, i0), cs, self.rough_slope)

    def dc_residual(self, cs: ZeroCrossingSet) -> float:
        """Net current drift per period forced by a nonzero mean of v_in - A1 s(t)."""
        return (self.drive_phasors[0].real - self.A1 * cs.mean_level()) * self.T / self.L

    def linear_response(self) -> FourierSeries:
        ph = np.zeros(self.nh + 1, dtype=complex)
        ph[1:] = self.Y * self.drive_phasors[1:]
        return FourierSeries.from_phasors(self.omega, ph)


def _element_voltage(c: LampCircuit, i: np.ndarray, didt: np.ndarray) -> np.ndarray:
    return c.A1 * np.sign(i) + c.L_prime * didt


def _assemble(c: LampCircuit, rep: CurrentRepresentation, n_samples: int, iterations: int,
              residual: float, method: str) -> SteadyState:
    T = c.period
    i = rep.sample(n_samples)
    didt = rep.sample_didt(n_samples)
    t = np.arange(n_samples) * (T / n_samples)
    return SteadyState(
        current=PeriodicWaveform(T, i, "ampere"),
        voltage=PeriodicWaveform(T, _element_voltage(c, i, didt), "volt"),
        crossings=rep.crossings,
        iterations=iterations,
        residual=residual,
        drive=PeriodicWaveform(T, c.drive_value(t), "volt"),
        didt=PeriodicWaveform(T, didt),
        representation=rep,
        method=method,
    )


def _count_offset_crossings(rep: CurrentRepresentation, t_ref: float, n: int = 4096):
    """Sign pattern of i on the grid t_ref + (j + 1/2) h; returns (count, rising_at_ref)."""
    T = rep.crossings.period
    t = t_ref + (np.arange(n) + 0.5) * (T / n)
    s = np.sign(rep(t))
    changes = int(np.count_nonzero(s != np.roll(s, 1)))
    return changes, bool(s[0] > 0 and s[-1] < 0)


def threshold_amplitude(c: LampCircuit, n_harmonics: int = DEFAULT_HARMONICS) -> float:
    """Smallest U for which the two-crossing condition can have a root.

    At its own crossing the element-driven part of the current is a constant
    independent of t1; the drive-driven part has peak U * max|i_lin|.
    """
    model = _HarmonicModel(replace(c, U=1.0), n_harmonics)
    unit_response = synthesize(model.linear_response(), 4096).samples
    if model.A1 == 0:
        return 0.0
    cs = ZeroCrossingSet.two_crossing(c.period, 0.0)
    rep = model.current(cs)
    element_part = float(rep(0.0) - rep.smooth.evaluate(0.0)) + float(
        FourierSeries.from_phasors(c.omega, np.concatenate(
            [[0.0], -model.A1 * model.sign_phasors(cs)[1:] * (model.Y - model.Y_rough)])).evaluate(0.0))
    return abs(element_part) / np.max(np.abs(unit_response))


def steady_state_two_crossing(c: LampCircuit, tol: float = 1e-9,
                              n_harmonics: int = DEFAULT_HARMONICS,
                              n_samples: int = DEFAULT_SAMPLES) -> SteadyState:
    """Half-wave-symmetric steady state with one -/+ crossing t1 and one +/- at t1 + T/2.

    ``tol`` bounds the residual |i(t1)| relative to max|i|.
    """
    if not c.xi.is_half_wave_symmetric():
        raise AssumptionViolatedError("drive is not half-wave symmetric; use multi_crossing_solver")
    model = _HarmonicModel(c, n_harmonics)
    T = c.period

    def g(t1: float) -> float:
        return float(model.current(ZeroCrossingSet.two_crossing(T, t1 % T))(t1 % T))

    grid = np.arange(ROOT_SCAN_POINTS) * (T / ROOT_SCAN_POINTS)
    values = np.array([g(t) for t in grid])
    brackets = []
    for k in range(ROOT_SCAN_POINTS):
        a, fa = grid[k], values[k]
        b = grid[k] + T / ROOT_SCAN_POINTS
        fb = values[(k + 1) % ROOT_SCAN_POINTS]
        if fa == 0.0 or (fa > 0) != (fb > 0):
            brackets.append((a, b, fa))

    iterations = 0
    solutions, multi, stalled = [], [], []
    for a, b, fa in brackets:
        lo, hi, flo = a, b, fa
        while hi - lo > 1e-12 * T:
            mid = 0.5 * (lo + hi)
            fm = g(mid)
            iterations += 1
            if fm == 0.0:
                lo = hi = mid
                break
            if (fm > 0) == (flo > 0):
                lo, flo = mid, fm
            else:
                hi = mid
        t1 = 0.5 * (lo + hi)
        r = g(t1)
        step = 1e-9 * T
        for _ in range(3):
            slope = (g(t1 + step) - g(t1 - step)) / (2 * step)
            iterations += 1
            if slope == 0.0:
                break
            cand = t1 - r / slope
            rc = g(cand)
            if abs(rc) < abs(r) and abs(cand - t1) < T / ROOT_SCAN_POINTS:
                t1, r = cand, rc
        t1 %= T
        rep = model.current(ZeroCrossingSet.two_crossing(T, t1))
        count, rising = _count_offset_crossings(rep, t1)
        if not rising:
            stalled.append(t1)
            continue
        if count == 2:
            solutions.append((t1, rep, abs(r)))
        else:
            multi.append((t1, count))

    if len(solutions) > 1:
        raise MultipleSolutionsError(
            f"{len(solutions)} two-crossing solutions: t1 = {[s[0] for s in solutions]}",
            brackets=[(a, b) for a, b, _ in brackets])
    if not solutions:
        if multi:
            raise AssumptionViolatedError(
                f"the candidate current has {multi[0][1]} crossings per period, not 2; "
                "use multi_crossing_solver")
        u_min = threshold_amplitude(c, n_harmonics)
        if stalled and c.U >= u_min:
            raise NoSolutionError(
                f"no consistent two-crossing steady state at U = {c.U:.6g}: the crossing "
                "condition has roots, but the current would fall back through zero right "
                "after its rising crossing (it would stall at zero for part of the period)")
        raise NoSolutionError(
            f"no two-crossing steady state: U = {c.U:.6g} is below the threshold "
            f"U >= {u_min:.6g} (U >= A*pi/2 for a purely inductive ballast and sine drive)")
    t1, rep, resid = solutions[0]
    scale = float(np.max(np.abs(rep.sample(1024)))) or 1.0
    if resid > tol * scale:
        raise ConvergenceError(f"residual |i(t1)| = {resid:.3g} exceeds tolerance")
    return _assemble(c, rep, n_samples, iterations, resid / scale, "harmonic")


def linear_crossings_guess(c: LampCircuit, n_harmonics: int = DEFAULT_HARMONICS,
                           n_samples: int = DEFAULT_SAMPLES) -> ZeroCrossingSet:
    """Crossings of the element-free (A = 0) response, a starting point for Newton."""
    model = _HarmonicModel(c, n_harmonics)
    lin = synthesize(model.linear_response(), n_samples)
    return detect_zerocrossings(lin)


def multi_crossing_solver(c: LampCircuit, m: int, initial_guess: ZeroCrossingSet,
                          tol: float = 1e-10, n_harmonics: int = DEFAULT_HARMONICS,
                          n_samples: int = DEFAULT_SAMPLES, max_iter: int = 60) -> SteadyState:
    """Damped Newton on F_p = i(t_p; {t_k}) = 0 for a current with 2m crossings.

    ``tol`` is relative: ||F||_inf < tol * max|i|, and the realised current's
    detected crossings must match the solved ones within 10 * tol * T.
    """
    if len(initial_guess) != 2 * m:
        raise ValueError(f"initial guess has {len(initial_guess)} crossings, expected {2 * m}")
    model = _HarmonicModel(c, n_harmonics)
    T = c.period
    dirs = initial_guess.directions
    t0 = initial_guess.as_array()
    # unwrap so that times increase from the first crossing
    times = t0.copy()

    def crossing_set(z) -> Optional[ZeroCrossingSet]:
        t = z[: 2 * m]
        if np.any(np.diff(t) <= 0) or t[-1] - t[0] >= T:
            return None
        return ZeroCrossingSet.from_unordered(T, t, dirs)

    i0 = 0.0
    z = np.concatenate([times, [i0]]) if model.dc_free else times.copy()
    cs0 = crossing_set(z)
    scale = float(np.max(np.abs(model.current(cs0, i0).sample(1024))))
    scale = max(scale, float(np.max(np.abs(synthesize(model.linear_response(), 1024).samples))), 1e-300)

    def residual(z) -> Optional[np.ndarray]:
        cs = crossing_set(z)
        if cs is None:
            return None
        i0 = z[-1] if model.dc_free else 0.0
        rep = model.current(cs, i0)
        F = np.asarray(rep(z[: 2 * m])) / scale
        if model.dc_free:
            F = np.append(F, model.dc_residual(cs) / scale)
        return F

    steps = np.full(z.size, JACOBIAN_STEP * T)
    if model.dc_free:
        steps[-1] = JACOBIAN_STEP * scale
    F = residual(z)
    if F is None:
        raise ValueError("initial guess does not define a valid crossing set")
    norm = np.max(np.abs(F))
    it = 0
    while norm >= tol:
        if it >= max_iter:
            raise ConvergenceError(f"Newton did not converge in {max_iter} iterations (|F| = {norm:.3g})")
        it += 1
        J = np.empty((F.size, z.size))
        for k in range(z.size):
            dz = np.zeros_like(z)
            dz[k] = steps[k]
            fp, fm = residual(z + dz), residual(z - dz)
            if fp is None or fm is None:
                raise ConvergenceError("crossings collided while forming the Jacobian")
            J[:, k] = (fp - fm) / (2 * steps[k])
        delta = np.linalg.lstsq(J, -F, rcond=None)[0]
        lam = 1.0
        for _ in range(MAX_HALVINGS + 1):
            Fn = residual(z + lam * delta)
            if Fn is not None and np.max(np.abs(Fn)) < norm:
                break
            lam *= 0.5
        else:
            raise ConvergenceError(f"Newton step failed to reduce the residual (|F| = {norm:.3g})")
        z = z + lam * delta
        F = Fn
        norm = np.max(np.abs(F))

    cs = crossing_set(z)
    rep = model.current(cs, z[-1] if model.dc_free else 0.0)
    w = PeriodicWaveform(T, rep.sample(n_samples), "ampere")
    realized = detect_zerocrossings(w, refine_tol=1e-3 * tol * T, evaluator=lambda t: float(rep(t)))
    if len(realized) != len(cs):
        raise CrossingCountMismatchError(
            f"assumed {len(cs)} crossings but the synthesized current has {len(realized)}")
    if realized.distance(cs) > 10 * tol * T:
        raise CrossingCountMismatchError(
            f"realised crossings differ from the solved set by {realized.distance(cs):.3g} s")
    return _assemble(c, rep, n_samples, it, float(norm), "harmonic")


# ---------------------------------------------------------------- time domain


def time_domain_oracle(c: LampCircuit, x0: Sequence[float] = (0.0, 0.0), tol_ss: float = 1e-9,
                       max_periods: int = 2000, steps_per_period: int = 1024) -> SteadyState:
    """Integrate (L + L') di/dt + R i + q/C + A1 sign(i) = U xi(t) to steady state.

    Fixed-step RK4 on the sample grid.  Within a step the sign of i is frozen;
    a sign change is located by bisection on the length of the frozen-mode
    step, and the step is continued from that instant in the new mode.  When
    the drive cannot overcome A1 at i = 0 the current stays at zero until it
    can.  Stops once consecutive periods differ by less than tol_ss * max|i|.
    """
    b = c.ballast
    if not b.is_series:
        raise ValueError("the time-domain oracle needs a series R-L-C ballast")
    R = b.series_R
    Lt = b.series_L + c.L_prime
    if Lt <= 0:
        raise ValueError("the time-domain oracle needs a nonzero series inductance")
    inv_C = 0.0 if b.series_C is None else 1.0 / b.series_C
    A1 = c.A1
    T = c.period
    N = steps_per_period
    h = T / N
    xi = c.xi
    w_n = np.arange(1, xi.n_harmonics + 1) * c.omega
    ca = c.U * xi.cos_coeffs[1:]
    sb = c.U * xi.sin_coeffs[1:]

    def drive(t: float) -> float:
        ph = w_n * t
        return float(ca @ np.cos(ph) + sb @ np.sin(ph))

    half_grid = np.arange(2 * N + 1) * (h / 2)
    table = c.U * xi.evaluate(half_grid)

    def rk4(i, q, s, e0, em, e1, dt):
        if s == 0:
            return 0.0, q
        k1i = (e0 - R * i - q * inv_C - A1 * s) / Lt
        k1q = i
        i2, q2 = i + 0.5 * dt * k1i, q + 0.5 * dt * k1q
        k2i = (em - R * i2 - q2 * inv_C - A1 * s) / Lt
        i3, q3 = i + 0.5 * dt * k2i, q + 0.5 * dt * i2
        k3i = (em - R * i3 - q3 * inv_C - A1 * s) / Lt
        i4, q4 = i + dt * k3i, q + dt * i3
        k4i = (e1 - R * i4 - q4 * inv_C - A1 * s) / Lt
        return (i + dt / 6.0 * (k1i + 2 * k2i + 2 * k3i + k4i),
                q + dt / 6.0 * (i + 2 * i2 + 2 * i3 + i4))

    def substep(i, q, s, t, dt):
        return rk4(i, q, s, drive(t), drive(t + 0.5 * dt), drive(t + dt), dt)

    def free_mode(q, t):
        f = drive(t) - q * inv_C
        return (1 if f > 0 else -1) if abs(f) > A1 else 0

    i, q = float(x0[0]), float(x0[1]) if len(x0) > 1 else 0.0
    s = (1 if i > 0 else -1) if i != 0 else free_mode(q, 0.0)
    prev = None
    events = []
    last_sign, stick_start = s, 0.0
    for period in range(1, max_periods + 1):
        samples = np.empty(N)
        modes = np.empty(N)
        charges = np.empty(N)
        events = []
        t_base = (period - 1) * T
        for k in range(N):
            samples[k], modes[k], charges[k] = i, s, q
            tau0 = 0.0
            remaining = h
            t_step = t_base + k * h
            full = True
            switches = 0
            while remaining > 0:
                t_now = t_step + tau0
                if full:
                    i_new, q_new = rk4(i, q, s, table[2 * k], table[2 * k + 1], table[2 * k + 2], h)
                else:
                    i_new, q_new = substep(i, q, s, t_now, remaining)
                if s != 0 and i_new * s > 0:
                    i, q = i_new, q_new
                    break
                if s == 0:
                    f_end = drive(t_now + remaining) - q * inv_C
                    if abs(f_end) <= A1:
                        break
                    lo, hi = 0.0, remaining
                    while hi - lo > 1e-13 * h:
                        mid = 0.5 * (lo + hi)
                        if abs(drive(t_now + mid) - q * inv_C) > A1:
                            hi = mid
                        else:
                            lo = mid
                    tau = hi
                    s = 1 if drive(t_now + tau) - q * inv_C > 0 else -1
                    # a sign reversal across a stuck interval counts as one crossing at its start
                    if s == -last_sign:
                        events.append(((stick_start - t_base) % T, s))
                    last_sign = s
                else:
                    lo, hi = 0.0, remaining
                    while hi - lo > 1e-13 * h:
                        mid = 0.5 * (lo + hi)
                        i_mid, _ = substep(i, q, s, t_now, mid)
                        if i_mid * s > 0:
                            lo = mid
                        else:
                            hi = mid
                    tau = hi
                    _, q = substep(i, q, s, t_now, tau)
                    i = 0.0
                    old = s
                    s = free_mode(q, t_now + tau)
                    if s == -old:
                        events.append(((t_now + tau - t_base) % T, s))
                        last_sign = s
                    elif s == 0:
                        last_sign, stick_start = old, t_now + tau
                switches += 1
                if switches > 16:
                    raise TransientNotSettledError("current chatters around zero within one step")
                tau0 += tau
                remaining = h - tau0
                full = False
                if remaining <= 1e-14 * h:
                    break
        scale = max(float(np.max(np.abs(samples))), 1e-300)
        if prev is not None and float(np.max(np.abs(samples - prev))) < tol_ss * scale:
            return _oracle_state(c, samples, modes, charges, events, period,
                                 float(np.max(np.abs(samples - prev))) / scale, Lt, R, inv_C)
        prev = samples
    raise TransientNotSettledError(f"no periodic steady state after {max_periods} periods")


def _oracle_state(c, samples, modes, charges, events, periods, residual, Lt, R, inv_C):
    T = c.period
    N = samples.size
    t = np.arange(N) * (T / N)
    e = c.drive_value(t)
    didt = np.where(modes == 0, 0.0, (e - R * samples - charges * inv_C - c.A1 * modes) / Lt)
    crossings = ZeroCrossingSet.from_unordered(T, [e[0] for e in events], [e[1] for e in events])
    voltage = c.A1 * np.sign(samples) + c.L_prime * didt
    return SteadyState(
        current=PeriodicWaveform(T, samples, "ampere"),
        voltage=PeriodicWaveform(T, voltage, "volt"),
        crossings=crossings,
        iterations=periods,
        residual=residual,
        drive=PeriodicWaveform(T, e, "volt"),
        didt=PeriodicWaveform(T, didt),
        method="oracle",
        stuck_fraction=float(np.mean(modes == 0)),
    )


# ------------------------------------------------------------ derived studies


def smooth_rough_decompose(s: SteadyState, A_eff: float, L: float):
    """Split i = i1 + i2 with di2/dt = -(A_eff/L) sign(i) and i2 of zero mean.

    i2 is the exact piecewise-linear integral of the step; i1 = i - i2, and i2
    is then re-derived as i - i1 so the split is exact in floating point.
    """
    w = s.current
    G = sign_wave_antiderivative(s.crossings)
    i2 = -(A_eff / L) * G(w.times)
    i1 = w.samples - i2
    i2 = w.samples - i1
    return (PeriodicWaveform(w.period, i1, w.unit), PeriodicWaveform(w.period, i2, w.unit))


@dataclass(frozen=True)
class SweepRow:
    U: float
    P: float
    t1: float
    slope: Optional[float]


def _solve(c: LampCircuit, method: str, **kw) -> SteadyState:
    if method == "harmonic":
        return steady_state_two_crossing(c, **kw)
    if method == "oracle":
        return time_domain_oracle(c, **kw)
    raise ValueError(f"unknown solver {method!r}")


def power_scaling_sweep(c: LampCircuit, U_grid: Sequence[float], method: str = "harmonic",
                        **solver_kw) -> list:
    """Input power P(U) = <v_in i> with local log-log slopes d ln P / d ln U.

    Interior slopes use centred differences, end points one-sided ones; a
    single-point grid has no slope.
    """
    from .analysis import average_power

    rows = []
    for U in U_grid:
        st = _solve(c.with_U(float(U)), method, **solver_kw)
        P = average_power(st.current, st.drive)
        rows.append((float(U), P, st.t1))
    lnU = np.log([r[0] for r in rows])
    lnP = np.log([r[1] for r in rows])
    slopes = [None] * len(rows)
    if len(rows) > 1:
        for k in range(len(rows)):
            lo, hi = max(k - 1, 0), min(k + 1, len(rows) - 1)
            slopes[k] = float((lnP[hi] - lnP[lo]) / (lnU[hi] - lnU[lo]))
    return [SweepRow(U, P, t1, sl) for (U, P, t1), sl in zip(rows, slopes)]


def affine_response(linear_op: BallastDescriptor, xi: PeriodicWaveform, f_wave: PeriodicWaveform,
                    U: float) -> PeriodicWaveform:
    """Periodic solution of (L i)(t) = U xi(t) + f(t) by harmonic division."""
    if xi.n != f_wave.n or not math.isclose(xi.period, f_wave.period, rel_tol=1e-12):
        raise ValueError("xi and f must share the sample grid")
    N = xi.n
    V = np.fft.rfft(U * xi.samples + f_wave.samples)
    k = np.arange(V.size)
    s = 1j * k * xi.omega
    num, den = linear_op.polynomials
    num_v = np.polyval(num, s)
    den_v = np.polyval(den, s)
    size = sum(abs(d) * np.abs(s) ** (len(den) - 1 - j) for j, d in enumerate(den))
    I = np.zeros_like(V)
    vscale = max(float(np.max(np.abs(V))), 1e-300)
    for idx in range(V.size):
        if abs(V[idx]) <= 1e-14 * vscale:
            continue
        if abs(den_v[idx]) <= 1e-12 * size[idx]:
            raise ResonanceError(f"ballast impedance vanishes at harmonic {idx}")
        I[idx] = num_v[idx] / den_v[idx] * V[idx]
    if N % 2 == 0:
        I[-1] = 0.0
    return PeriodicWaveform(xi.period, np.fft.irfft(I, N), "ampere")


def affine_superposition_check(linear_op: BallastDescriptor, xi: PeriodicWaveform,
                               f_wave: PeriodicWaveform, U1: float, U2: float) -> float:
    """||(i(U1) - i(U2)) / (U1 - U2) - L^-1 xi||_inf; zero for an affine map."""
    if U1 == U2:
        raise ValueError("U1 and U2 must differ")
    zero = f_wave.with_samples(np.zeros(f_wave.n))
    i1 = affine_response(linear_op, xi, f_wave, U1).samples
    i2 = affine_response(linear_op, xi, f_wave, U2).samples
    base = affine_response(linear_op, xi, zero, 1.0).samples
    return float(np.max(np.abs((i1 - i2) / (U1 - U2) - base)))
