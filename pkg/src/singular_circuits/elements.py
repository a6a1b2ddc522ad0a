"""Nonlinear element models: sign hardlimiter, hysteresis lamp, power-law pair,
and memristive one-ports of the form v = R(x, i) i, dx/dt = f(x, i).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import AmbiguousBranchError, DegenerateLoopError, ModelDomainError


def sign(x):
    """Signum with sign(0) = 0."""
    return np.sign(x)


@dataclass(frozen=True)
class SignHardlimiter:
    A: float

    def __post_init__(self):
        if not (self.A >= 0 and math.isfinite(self.A)):
            raise ValueError("A must be finite and non-negative")

    @property
    def A1(self) -> float:
        return self.A

    @property
    def L_prime(self) -> float:
        return 0.0


@dataclass(frozen=True)
class HysteresisLamp:
    """v = A1 sign(i) + L' di/dt with A1 = A (1 + 2 L'/L_ballast)."""

    A: float
    L_prime: float
    L_ballast: float

    def __post_init__(self):
        if not (self.A >= 0 and math.isfinite(self.A)):
            raise ValueError("A must be finite and non-negative")
        if not (self.L_prime >= 0 and math.isfinite(self.L_prime)):
            raise ValueError("L' must be finite and non-negative")
        if not (self.L_ballast > 0 and math.isfinite(self.L_ballast)):
            raise ValueError("ballast inductance must be positive")

    @property
    def A1(self) -> float:
        return self.A * (1.0 + 2.0 * self.L_prime / self.L_ballast)


def hardlimiter_voltage(e: SignHardlimiter, i):
    return e.A * sign(i)


def lamp_voltage(e: HysteresisLamp, i, didt):
    return e.A1 * sign(i) + e.L_prime * np.asarray(didt, dtype=float)


def stored_inductive_energy(e: HysteresisLamp, i):
    i = np.asarray(i, dtype=float)
    return 0.5 * e.L_prime * i * i


@dataclass(frozen=True)
class PowerLawBranch:
    """v = D |i|^alpha sign(i); D = v_o / i_o**alpha."""

    D: float
    alpha: float

    def __post_init__(self):
        if not (self.D > 0 and math.isfinite(self.D)):
            raise ValueError("D must be positive and finite")
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValueError("alpha must be positive and finite")

    @classmethod
    def through_point(cls, i_o: float, v_o: float, alpha: float) -> "PowerLawBranch":
        return cls(v_o / i_o ** alpha, alpha)

    def voltage(self, i):
        i = np.asarray(i, dtype=float)
        return self.D * np.abs(i) ** self.alpha * np.sign(i)

    def current(self, v):
        """Inverse characteristic i(v)."""
        v = np.asarray(v, dtype=float)
        return (np.abs(v) / self.D) ** (1.0 / self.alpha) * np.sign(v)

    def slope(self, i):
        """dv/di = D alpha |i|^(alpha-1)."""
        i = np.asarray(i, dtype=float)
        return self.D * self.alpha * np.abs(i) ** (self.alpha - 1.0)


@dataclass(frozen=True)
class PowerLawHysteresisElement:
    """Rising branch for di/dt > 0, falling branch for di/dt < 0."""

    rising: PowerLawBranch
    falling: PowerLawBranch

    @property
    def is_degenerate(self) -> bool:
        return self.rising.alpha == self.falling.alpha


def powerlaw_voltage(e: PowerLawHysteresisElement, i, didt_sign):
    """Voltage on the branch selected by the sign of di/dt.

    A zero slope sign is rejected: the branch then depends on the history the
    caller must carry.
    """
    s = np.asarray(didt_sign)
    if np.any(s == 0):
        raise AmbiguousBranchError("di/dt sign is 0; pass the last nonzero slope sign")
    if np.any(np.abs(s) != 1):
        raise ValueError("didt_sign must be -1 or +1")
    return np.where(s > 0, e.rising.voltage(i), e.falling.voltage(i))


def powerlaw_return_point(e: PowerLawHysteresisElement) -> tuple[float, float]:
    """Intersection (i_r, v_r), i_r > 0, of the two branches."""
    a1, a2 = e.rising.alpha, e.falling.alpha
    if a1 == a2:
        raise DegenerateLoopError("alpha1 == alpha2: the branches have no isolated return point")
    if a2 - a1 == 1.0:
        # exact quotient; the general power form can be an ulp off
        i_r = e.rising.D / e.falling.D
    else:
        i_r = (e.falling.D / e.rising.D) ** (1.0 / (a1 - a2))
    return i_r, e.rising.D * i_r ** a1


def slope_signs(didt) -> np.ndarray:
    """Sign of di/dt with zeros replaced by the last nonzero sign (cyclically)."""
    s = np.sign(np.asarray(didt, dtype=float))
    nz = np.flatnonzero(s)
    if nz.size == 0:
        raise AmbiguousBranchError("current never changes: no branch can be selected")
    # carry forward around the period, starting from the last nonzero entry
    out = s.copy()
    last = s[nz[-1]]
    for k in range(s.size):
        if s[k] == 0:
            out[k] = last
        else:
            last = s[k]
    return out


@dataclass(frozen=True)
class MemristiveSystem:
    """Generic memristive one-port v = R(x, i) i, dx/dt = f(x, i) with x in R^d."""

    state_dim: int
    memristance: Callable[[np.ndarray, float], float]
    state_rate: Callable[[np.ndarray, float], np.ndarray]
    initial_state: tuple = ()

    def __post_init__(self):
        if self.state_dim < 1:
            raise ValueError("state dimension must be at least 1")
        x0 = tuple(float(v) for v in (self.initial_state or (0.0,) * self.state_dim))
        if len(x0) != self.state_dim:
            raise ValueError("initial state does not match the state dimension")
        object.__setattr__(self, "initial_state", x0)


@dataclass(frozen=True)
class ChargeControlledInstance:
    """R(q) = R0 + k q with dq/dt = i: the charge is the single state variable."""

    R0: float
    k: float
    q0: float = 0.0

    def __post_init__(self):
        if not self.R0 > 0:
            raise ValueError("R0 must be positive")

    state_dim = 1

    @property
    def initial_state(self) -> tuple:
        return (self.q0,)

    def memristance(self, x, i):
        return self.R0 + self.k * x[0]

    def state_rate(self, x, i):
        return np.array([i], dtype=float)

    def flux_of_charge(self, q):
        """psi(q) = R0 q + k q^2 / 2 (relative to q = 0)."""
        q = np.asarray(q, dtype=float)
        return self.R0 * q + 0.5 * self.k * q * q

    def as_system(self) -> MemristiveSystem:
        return MemristiveSystem(1, self.memristance, self.state_rate, (self.q0,))


def memristive_voltage(m, x, i: float) -> float:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if i == 0:
        return 0.0
    R = m.memristance(x, i)
    if not math.isfinite(R):
        raise ModelDomainError(f"memristance is not finite at x={x}, i={i}")
    if isinstance(m, ChargeControlledInstance) and R <= 0:
        raise ModelDomainError(f"R0 + k q = {R} <= 0: outside the passive working range")
    return R * i


def memristive_state_rate(m, x, i: float) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    rate = np.atleast_1d(np.asarray(m.state_rate(x, i), dtype=float))
    if rate.shape != (m.state_dim,):
        raise ModelDomainError(
            f"state rate has shape {rate.shape}, expected ({m.state_dim},)")
    return rate


def drive_memristive(m, current: Callable[[float], float], period: float,
                     n_samples: int = 4096, n_periods: int = 1,
                     x0: Sequence[float] | None = None):
    """Drive a memristive one-port with an imposed current i(t).

    Fixed-step RK4 on the sample grid for the state, then v = R(x, i) i at each
    sample.  Returns (t, i, v, x) over ``n_periods`` periods, endpoint excluded.
    """
    x = np.array(x0 if x0 is not None else m.initial_state, dtype=float)
    h = period / n_samples
    total = n_samples * n_periods
    t = np.arange(total) * h
    xs = np.empty((total, m.state_dim))
    i_s = np.empty(total)
    v_s = np.empty(total)
    for k in range(total):
        tk = t[k]
        ik = current(tk)
        xs[k] = x
        i_s[k] = ik
        v_s[k] = memristive_voltage(m, x, ik)
        i_mid = current(tk + 0.5 * h)
        k1 = memristive_state_rate(m, x, ik)
        k2 = memristive_state_rate(m, x + 0.5 * h * k1, i_mid)
        k3 = memristive_state_rate(m, x + 0.5 * h * k2, i_mid)
        k4 = memristive_state_rate(m, x + h * k3, current(tk + h))
        x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return t, i_s, v_s, xs
