"""Switched linear systems dx/dt = A_m x + B_m u(t) with time- or level-triggered modes.

Within a mode the dynamics are integrated by classical RK4; a switch is
located inside the step and the step is resumed from there in the new mode.
Includes a largest-Lyapunov-exponent estimator and the mirror-reflection map.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Optional, Sequence, Union

import numpy as np

from .errors import DivergenceError, StepTooLargeError, ZenoError

ZENO_LIMIT = 1_000_000
STATE_BOUND = 1e6
EVENT_TOL = 1e-10


@dataclass(frozen=True)
class Drive:
    """u(t) = offset + amplitude * cos(omega t), componentwise."""

    offset: tuple = (0.0,)
    amplitude: tuple = (0.0,)
    omega: float = 0.0

    def __post_init__(self):
        off = tuple(float(x) for x in np.atleast_1d(self.offset))
        amp = tuple(float(x) for x in np.atleast_1d(self.amplitude))
        if len(amp) == 1 and len(off) > 1:
            amp = amp * len(off)
        if len(off) == 1 and len(amp) > 1:
            off = off * len(amp)
        if len(off) != len(amp):
            raise ValueError("offset and amplitude must have the same length")
        object.__setattr__(self, "offset", off)
        object.__setattr__(self, "amplitude", amp)

    @property
    def dim(self) -> int:
        return len(self.offset)

    @property
    def is_constant(self) -> bool:
        return self.omega == 0.0 or not any(self.amplitude)

    def __call__(self, t: float) -> np.ndarray:
        return np.asarray(self.offset) + np.asarray(self.amplitude) * math.cos(self.omega * t)


@dataclass(frozen=True)
class LevelRule:
    """Mode ``mode_above`` while x[index] >= threshold, ``mode_below`` otherwise."""

    index: int
    threshold: float
    mode_below: int
    mode_above: int

    def mode(self, x: np.ndarray) -> int:
        return self.mode_above if x[self.index] >= self.threshold else self.mode_below


@dataclass(frozen=True)
class TimeSchedule:
    """modes[k] is active on [instants[k-1], instants[k]); repeats with ``period`` if given."""

    instants: tuple
    modes: tuple
    period: Optional[float] = None

    def __post_init__(self):
        inst = tuple(float(t) for t in self.instants)
        if len(self.modes) != len(inst) + 1:
            raise ValueError("a schedule needs one more mode than instants")
        if any(b <= a for a, b in zip(inst, inst[1:])):
            raise ValueError("switching instants must increase")
        if self.period is not None and inst and not (0 < inst[0] and inst[-1] < self.period):
            raise ValueError("periodic schedule instants must lie in (0, period)")
        object.__setattr__(self, "instants", inst)
        object.__setattr__(self, "modes", tuple(int(m) for m in self.modes))

    def mode(self, t: float) -> int:
        if self.period is not None:
            t = t % self.period
        return self.modes[int(np.searchsorted(self.instants, t, side="right"))]

    def next_instant(self, t: float) -> float:
        """First switching instant strictly after t."""
        ev = self.events_in(t, math.inf, 0.0, limit=1)
        return ev[0][0] if ev else math.inf

    def events_in(self, t0: float, t1: float, tol: float, limit: Optional[int] = None) -> list:
        """(instant, mode after it) for instants in (t0 + tol, t1 + tol]."""
        out = []
        if not self.instants:
            return out
        if self.period is None:
            for s, m in zip(self.instants, self.modes[1:]):
                if t0 + tol < s <= t1 + tol:
                    out.append((s, m))
            return out[:limit]
        cycle = math.floor(t0 / self.period) - 1
        while True:
            for s, m in zip(self.instants, self.modes[1:]):
                ts = cycle * self.period + s
                if ts > t1 + tol or (limit is not None and len(out) >= limit):
                    return out
                if ts > t0 + tol:
                    out.append((ts, m))
            cycle += 1


SwitchRule = Union[None, LevelRule, TimeSchedule]


@dataclass(frozen=True, eq=False)
class SwitchedLinearSystem:
    modes: tuple
    rule: SwitchRule = None
    drive: Drive = field(default_factory=Drive)
    input_gain: float = 1.0

    def __post_init__(self):
        mats = []
        for A, B in self.modes:
            A = np.array(A, dtype=float)
            B = np.array(B, dtype=float).reshape(A.shape[0], -1)
            if A.ndim != 2 or A.shape[0] != A.shape[1]:
                raise ValueError("mode matrices must be square")
            if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
                raise ValueError("mode matrices must be finite")
            A.setflags(write=False)
            B.setflags(write=False)
            mats.append((A, B))
        if not mats:
            raise ValueError("at least one mode is required")
        d = mats[0][0].shape[0]
        if any(A.shape[0] != d or B.shape[1] != self.drive.dim for A, B in mats):
            raise ValueError("mode shapes are inconsistent with each other or with the drive")
        object.__setattr__(self, "modes", tuple(mats))
        if self.rule is not None:
            if len(mats) < 2:
                raise ValueError("switching needs at least two modes")
            used = ((self.rule.mode_below, self.rule.mode_above)
                    if isinstance(self.rule, LevelRule) else self.rule.modes)
            if any(not 0 <= m < len(mats) for m in used):
                raise ValueError("switch rule refers to an unknown mode")
            if isinstance(self.rule, LevelRule) and not 0 <= self.rule.index < d:
                raise ValueError("level rule refers to an invalid state index")

    @property
    def dim(self) -> int:
        return self.modes[0][0].shape[0]

    def with_gain(self, k: float) -> "SwitchedLinearSystem":
        return replace(self, input_gain=self.input_gain * k)

    def mode_at(self, t: float, x: np.ndarray) -> int:
        if self.rule is None:
            return 0
        if isinstance(self.rule, TimeSchedule):
            return self.rule.mode(t)
        return self.rule.mode(x)

    def forcing(self, mode: int, t: float) -> np.ndarray:
        return self.input_gain * (self.modes[mode][1] @ self.drive(t))


@dataclass(frozen=True, eq=False)
class SwitchedTrajectory:
    times: np.ndarray
    states: np.ndarray
    modes: np.ndarray
    switch_times: np.ndarray
    x0: np.ndarray
    dt: float
    aperiodicity: Optional[float] = None

    @property
    def n_switches(self) -> int:
        return self.switch_times.size


def _rk4(A: np.ndarray, x, b0, bm, b1, h: float):
    """One RK4 step of dx/dt = A x + b(t); operands may be vectors or column blocks."""
    k1 = A @ x + b0
    k2 = A @ (x + 0.5 * h * k1) + bm
    k3 = A @ (x + 0.5 * h * k2) + bm
    k4 = A @ (x + h * k3) + b1
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


class _Stepper:
    """Mode-wise RK4 with the full-step map cached as x -> P x + Q0 b0 + Qm bm + Q1 b1."""

    def __init__(self, sys: SwitchedLinearSystem, dt: float, mirror: bool = False):
        self.sys = sys
        self.dt = dt
        self.mirror = mirror
        d = sys.dim
        I, Z = np.eye(d), np.zeros((d, d))
        self.maps = []
        for A, _ in sys.modes:
            self.maps.append((_rk4(A, I, Z, Z, Z, dt), _rk4(A, Z, I, Z, Z, dt),
                              _rk4(A, Z, Z, I, Z, dt), _rk4(A, Z, Z, Z, I, dt)))
        self.const = sys.drive.is_constant
        if self.const:
            self.const_b = [sys.forcing(m, 0.0) for m in range(len(sys.modes))]
            self.const_step = [Q0 @ b + Qm @ b + Q1 @ b
                               for (P, Q0, Qm, Q1), b in zip(self.maps, self.const_b)]

        self.table = None

    def precompute(self, n_steps: int) -> None:
        """Tabulate the drive part of every full grid step k*dt -> (k+1)*dt."""
        if self.const:
            return
        sys, h = self.sys, self.dt
        t = np.arange(n_steps) * h
        drv = sys.drive
        off, amp = np.asarray(drv.offset), np.asarray(drv.amplitude)

        def u(tt):
            return off[None, :] + np.cos(drv.omega * tt)[:, None] * amp[None, :]

        u0, um, u1 = u(t), u(t + 0.5 * h), u((np.arange(n_steps) + 1) * h)
        self.table = []
        for (P, Q0, Qm, Q1), (_, B) in zip(self.maps, sys.modes):
            g = sys.input_gain
            self.table.append(g * (u0 @ (Q0 @ B).T + um @ (Qm @ B).T + u1 @ (Q1 @ B).T))

    def b(self, mode: int, t: float) -> np.ndarray:
        return self.const_b[mode] if self.const else self.sys.forcing(mode, t)

    def full(self, x, mode: int, t: float, k: Optional[int] = None) -> np.ndarray:
        P, Q0, Qm, Q1 = self.maps[mode]
        if self.const:
            return P @ x + self.const_step[mode]
        if k is not None and self.table is not None and k < len(self.table[mode]):
            return P @ x + self.table[mode][k]
        h = self.dt
        return P @ x + Q0 @ self.b(mode, t) + Qm @ self.b(mode, t + 0.5 * h) + Q1 @ self.b(mode, t + h)

    def partial(self, x, mode: int, t: float, h: float) -> np.ndarray:
        A = self.sys.modes[mode][0]
        return _rk4(A, x, self.b(mode, t), self.b(mode, t + 0.5 * h), self.b(mode, t + h), h)

    def _side(self, x) -> bool:
        rule = self.sys.rule
        if self.mirror:
            return x[0] >= 0.0
        return x[rule.index] >= rule.threshold

    def advance(self, x, mode: int, t: float, k: Optional[int] = None):
        """One grid step from t = k dt. Returns (x, mode, [(t_k, x_k, mode_k), ...])."""
        sys, h = self.sys, self.dt
        rule = sys.rule
        events = []
        if isinstance(rule, TimeSchedule):
            t_end = t + h
            # instants within tol of a grid point switch exactly there
            tol = 1e-12 * h
            t_now, at_end = t, []
            for ts, m in rule.events_in(t, t_end, tol):
                if ts >= t_end - tol:
                    at_end.append((ts, m))
                    continue
                x = self.partial(x, mode, t_now, ts - t_now)
                t_now, mode = ts, m
                events.append((ts, x.copy(), mode))
            if t_now == t:
                x = self.full(x, mode, t, k)
            else:
                x = self.partial(x, mode, t_now, t_end - t_now)
            for ts, m in at_end:
                mode = m
                events.append((ts, x.copy(), mode))
            return x, mode, events
        x_new = self.full(x, mode, t, k)
        if rule is None and not self.mirror:
            return x_new, mode, events
        side0 = self._side(x)
        if self._side(x_new) == side0:
            return x_new, mode, events
        lo, hi = 0.0, h
        while hi - lo > EVENT_TOL * h:
            mid = 0.5 * (lo + hi)
            if self._side(self.partial(x, mode, t, mid)) == side0:
                lo = mid
            else:
                hi = mid
        if self.mirror:
            tau = lo
            x_ev = self.partial(x, mode, t, tau)
            x_ev[1] = -x_ev[1]
            new_mode = mode
        else:
            tau = hi
            x_ev = self.partial(x, mode, t, tau)
            new_mode = rule.mode(x_ev)
        events.append((t + tau, x_ev.copy(), new_mode))
        rest = h - tau
        if rest <= 0:
            return x_ev, new_mode, events
        x_end = self.partial(x_ev, new_mode, t + tau, rest)
        if self._side(x_end) != self._side(x_ev):
            raise StepTooLargeError(
                f"more than one switching inside the step at t = {t:.6g}; reduce dt")
        return x_end, new_mode, events


def _check_bound(x: np.ndarray, t: float, bound: float):
    if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > bound:
        raise DivergenceError(f"state left the bound {bound:g} at t = {t:.6g}")


def _run(sys: SwitchedLinearSystem, x0, t_end: float, dt: float, mirror: bool = False,
         bound: float = STATE_BOUND) -> SwitchedTrajectory:
    if dt <= 0 or t_end <= 0:
        raise ValueError("dt and t_end must be positive")
    x = np.array(x0, dtype=float)
    if x.shape != (sys.dim,):
        raise ValueError(f"x0 must have {sys.dim} components")
    stepper = _Stepper(sys, dt, mirror)
    n_steps = int(round(t_end / dt))
    stepper.precompute(n_steps)
    mode = sys.mode_at(0.0, x)
    times, states, modes, switches = [0.0], [x.copy()], [mode], []
    for k in range(n_steps):
        t = k * dt
        x, mode, events = stepper.advance(x, mode, t, k)
        for te, xe, me in events:
            times.append(te)
            states.append(xe)
            modes.append(me)
            switches.append(te)
        if len(switches) > ZENO_LIMIT:
            raise ZenoError(f"more than {ZENO_LIMIT} switches before t = {t:.6g}")
        _check_bound(x, t + dt, bound)
        times.append((k + 1) * dt)
        states.append(x.copy())
        modes.append(mode)
    return SwitchedTrajectory(np.array(times), np.array(states), np.array(modes),
                              np.array(switches), np.array(x0, dtype=float), dt)


def simulate_switched(sys: SwitchedLinearSystem, x0: Sequence[float], t_end: float,
                      dt: float) -> SwitchedTrajectory:
    """Trajectory on the grid k*dt plus one extra sample at every switching instant.

    Level crossings are bracketed by the step and bisected on the sub-step
    length to 1e-10 dt; the state carries over unchanged into the new mode.
    """
    return _run(sys, x0, t_end, dt)


class SwitchingKind(str, enum.Enum):
    LTI = "LTI"
    LTV = "LTV"
    NL = "NL"


@dataclass(frozen=True)
class SwitchingVerdict:
    kind: SwitchingKind
    instant_shift: float


def scaling_probe(sys: SwitchedLinearSystem, x0: Sequence[float], t_end: float, dt: float,
                  k: float = 2.0) -> float:
    """Largest shift of the switching instants when the input is scaled by k.

    Returns inf when the number of switches changes.
    """
    a = simulate_switched(sys, x0, t_end, dt).switch_times
    b = simulate_switched(sys.with_gain(k), x0, t_end, dt).switch_times
    if a.size != b.size:
        return math.inf
    return float(np.max(np.abs(a - b))) if a.size else 0.0


def classify_switching(sys: SwitchedLinearSystem, trajectory: SwitchedTrajectory,
                       k: float = 2.0) -> SwitchingVerdict:
    """LTI without a rule, LTV for a time schedule, NL for a level rule.

    The verdict carries the switching-instant shift under u -> k u observed
    over the trajectory's own horizon; it is zero for LTI and LTV systems.
    """
    t_end = float(trajectory.times[-1])
    if sys.rule is None:
        return SwitchingVerdict(SwitchingKind.LTI, 0.0)
    shift = scaling_probe(sys, trajectory.x0, t_end, trajectory.dt, k)
    if isinstance(sys.rule, TimeSchedule):
        return SwitchingVerdict(SwitchingKind.LTV, shift)
    return SwitchingVerdict(SwitchingKind.NL, shift)


def largest_lyapunov(sys: SwitchedLinearSystem, x0: Sequence[float], horizon: float,
                     renorm_interval: float, dt: float, delta0: float = 1e-8,
                     transient: float = 0.0, bound: float = STATE_BOUND) -> float:
    """Mean log growth rate of a co-integrated neighbour renormalised to delta0."""
    steps_per = max(int(round(renorm_interval / dt)), 1)
    n_blocks = int(round(horizon / (steps_per * dt)))
    if n_blocks < 1:
        raise ValueError("horizon shorter than one renormalisation interval")
    stepper = _Stepper(sys, dt)
    n_transient = int(round(transient / dt))
    stepper.precompute(n_transient + n_blocks * steps_per)
    x = np.array(x0, dtype=float)
    mode = sys.mode_at(0.0, x)
    t = 0.0
    n_switch = 0
    for k in range(n_transient):
        x, mode, ev = stepper.advance(x, mode, t, k)
        n_switch += len(ev)
        t = (k + 1) * dt
        _check_bound(x, t, bound)
    d = sys.dim
    direction = np.ones(d) / math.sqrt(d)
    y = x + delta0 * direction
    mode_y = sys.mode_at(t, y)
    step0 = int(round(t / dt))
    total = 0.0
    for blk in range(n_blocks):
        for j in range(steps_per):
            s = step0 + blk * steps_per + j
            tt = s * dt
            x, mode, ev = stepper.advance(x, mode, tt, s)
            y, mode_y, ev_y = stepper.advance(y, mode_y, tt, s)
            n_switch += len(ev)
            if n_switch > ZENO_LIMIT:
                raise ZenoError("switch count exceeded the Zeno guard")
        t_now = (step0 + (blk + 1) * steps_per) * dt
        _check_bound(x, t_now, bound)
        sep = float(np.linalg.norm(y - x))
        if sep == 0.0:
            sep = delta0 * 1e-300
        total += math.log(sep / delta0)
        y = x + (delta0 / sep) * (y - x)
        mode_y = sys.mode_at(t_now, y)
    return total / (n_blocks * steps_per * dt)


def mirror_reflection_map(base: SwitchedLinearSystem, x0: Sequence[float], t_end: float,
                          dt: float, drive_period: Optional[float] = None,
                          transient: float = 0.0, max_multiple: int = 8) -> SwitchedTrajectory:
    """Single-mode system whose velocity x[1] is negated whenever x[0] crosses zero.

    The result's ``aperiodicity`` is min over p = 1..max_multiple of the mean
    distance between stroboscopic states p drive periods apart, normalised by
    the spread of the post-transient trajectory; it is near zero for periodic
    motion, and None for runs too short to measure.
    """
    if base.dim != 2:
        raise ValueError("the mirror map needs a 2-dimensional (position, velocity) state")
    if base.rule is not None:
        raise ValueError("the mirror map applies to a single-mode system")
    traj = _run(base, x0, t_end, dt, mirror=True)
    period = drive_period
    if period is None and base.drive.omega > 0:
        period = 2.0 * math.pi / base.drive.omega
    ap = None
    # left as None when the run is too short to strobe 2 * max_multiple + 2 periods
    if period is not None and traj.times[-1] - transient > (2 * max_multiple + 2) * period:
        ap = aperiodicity(traj, period, transient, max_multiple)
    return replace(traj, aperiodicity=ap)


def aperiodicity(traj: SwitchedTrajectory, period: float, transient: float = 0.0,
                 max_multiple: int = 8) -> float:
    strobe = np.arange(transient, traj.times[-1], period)
    if strobe.size < 2 * max_multiple + 2:
        raise ValueError("trajectory too short for the recurrence measure")
    pts = np.column_stack([np.interp(strobe, traj.times, traj.states[:, j])
                           for j in range(traj.states.shape[1])])
    tail = traj.states[traj.times >= transient]
    spread = float(np.max(np.linalg.norm(tail - tail.mean(axis=0), axis=1))) or 1.0
    best = math.inf
    for p in range(1, max_multiple + 1):
        dist = np.linalg.norm(pts[p:] - pts[:-p], axis=1)
        best = min(best, float(np.mean(dist)) / spread)
    return best


# ------------------------------------------------------------------- fixtures


def jerk_system(a: float) -> SwitchedLinearSystem:
    """x''' = -a x'' - x' + |x| - 1 as two linear modes switched on the sign of x."""
    above = [[0, 1, 0], [0, 0, 1], [1, -1, -a]]
    below = [[0, 1, 0], [0, 0, 1], [-1, -1, -a]]
    B = [[0.0], [0.0], [-1.0]]
    return SwitchedLinearSystem(((below, B), (above, B)), LevelRule(0, 0.0, 0, 1),
                                Drive(offset=(1.0,)))


def impact_oscillator(zeta: float, forcing: float, omega: float, offset: float) -> SwitchedLinearSystem:
    """x'' + 2 zeta x' + x = offset + forcing cos(omega t), to be used with the mirror map."""
    A = [[0.0, 1.0], [-1.0, -2.0 * zeta]]
    B = [[0.0, 0.0], [1.0, 1.0]]
    return SwitchedLinearSystem(((A, B),), None,
                                Drive(offset=(offset, 0.0), amplitude=(0.0, forcing), omega=omega))


def load_fixture(name: str) -> dict:
    text = resources.files("singular_circuits").joinpath("fixtures").joinpath(f"{name}.json").read_text()
    return json.loads(text)


def chaos_fixture() -> tuple:
    """(system, x0, settings) for the stored chaotic parameter set."""
    fx = load_fixture("chaos")
    return jerk_system(fx["a"]), fx["x0"], fx


def sweep_jerk_parameter(a_grid: Sequence[float], x0=(0.0, 0.0, 0.0), horizon: float = 1000.0,
                         dt: float = 0.02, transient: float = 100.0) -> list:
    """(a, lambda) for each candidate damping; escaping orbits give nan."""
    rows = []
    for a in a_grid:
        try:
            lam = largest_lyapunov(jerk_system(a), x0, horizon, 1.0, dt, transient=transient)
        except (DivergenceError, StepTooLargeError, ZenoError):
            lam = math.nan
        rows.append((float(a), lam))
    return rows


def mirror_fixture() -> tuple:
    """(system, x0, dt, t_end, transient) for the stored aperiodic impact oscillator."""
    fx = load_fixture("mirror")
    sys_ = impact_oscillator(fx["zeta"], fx["forcing"], fx["omega"], fx["offset"])
    T = 2.0 * math.pi / fx["omega"]
    return sys_, fx["x0"], T / fx["steps_per_period"], fx["periods"] * T, fx["transient_periods"] * T
