"""Loop extraction and classification, power identities, flux-charge integrals."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .core import PeriodicWaveform, derivative, require_same_grid
from .elements import (
    HysteresisLamp,
    PowerLawHysteresisElement,
    SignHardlimiter,
    powerlaw_voltage,
    slope_signs,
)
from .errors import DegenerateInputError

AREA_EPS = 1e-6
DVDI_EXCLUSION = 0.05
JUMP_RATIO = 10.0


class Direction(str, enum.Enum):
    CLOCKWISE = "clockwise"
    COUNTERCLOCKWISE = "counterclockwise"
    DEGENERATE = "degenerate"


class LoopClass(str, enum.Enum):
    INDUCTIVE = "inductive"
    CAPACITIVE = "capacitive"
    RESISTIVE = "resistive"


def shoelace(i: np.ndarray, v: np.ndarray) -> float:
    """Signed area of the closed polygon (i_k, v_k); counterclockwise is positive."""
    i = np.asarray(i, dtype=float)
    v = np.asarray(v, dtype=float)
    return 0.5 * float(np.sum(i * np.roll(v, -1) - np.roll(i, -1) * v))


def _with_jumps(i: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Insert the vertical segment at i = 0 wherever v jumps sign together with i.

    Without it the chord across a sign-type jump adds an O(dt) sliver of area.
    A jump is a step in v more than JUMP_RATIO times either neighbouring step.
    """
    i_next, v_next = np.roll(i, -1), np.roll(v, -1)
    dv = np.abs(v_next - v)
    smooth = np.maximum(np.roll(dv, 1), np.roll(dv, -1))
    jump = (i * i_next < 0) & (np.sign(v) == np.sign(i)) & (np.sign(v_next) == np.sign(i_next))
    jump &= dv > JUMP_RATIO * smooth
    if not jump.any():
        return i, v
    ii, vv = [], []
    for k in range(i.size):
        ii.append(i[k])
        vv.append(v[k])
        if jump[k]:
            ii += [0.0, 0.0]
            vv += [v[k], v_next[k]]
    return np.array(ii), np.array(vv)


def _positive_lobe_area(i: np.ndarray, v: np.ndarray) -> float:
    """Signed area of the part of the loop traced while i >= 0, closed along v = 0...

    used to orient figure-eight loops whose lobes cancel.
    """
    mask = i >= 0
    if not mask.any() or mask.all():
        return 0.0
    # rotate so the sequence starts at the beginning of a positive run
    start = int(np.flatnonzero(mask & ~np.roll(mask, 1))[0])
    ii, vv, mm = np.roll(i, -start), np.roll(v, -start), np.roll(mask, -start)
    total = 0.0
    k, n = 0, ii.size
    while k < n:
        if mm[k]:
            end = k
            while end < n and mm[end]:
                end += 1
            seg_i = np.concatenate([[0.0], ii[k:end], [0.0]])
            seg_v = np.concatenate([[0.0], vv[k:end], [0.0]])
            total += shoelace(seg_i, seg_v)
            k = end
        else:
            k += 1
    return total


@dataclass(frozen=True, eq=False)
class HysteresisLoop:
    i: np.ndarray
    v: np.ndarray
    signed_area: float
    direction: Direction

    def __post_init__(self):
        if self.i.size < 16 or self.i.size != self.v.size:
            raise ValueError("a loop needs at least 16 (i, v) points")

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.i, self.v])

    def __len__(self) -> int:
        return self.i.size


def _orientation(i: np.ndarray, v: np.ndarray, area: float) -> Direction:
    scale = float(np.max(np.abs(i)) * np.max(np.abs(v)))
    if scale == 0.0:
        return Direction.DEGENERATE
    if abs(area) < AREA_EPS * scale:
        area = _positive_lobe_area(i, v)
        if abs(area) < AREA_EPS * scale:
            return Direction.DEGENERATE
    return Direction.COUNTERCLOCKWISE if area > 0 else Direction.CLOCKWISE


def loop_from_points(i, v) -> HysteresisLoop:
    i = np.array(i, dtype=float)
    v = np.array(v, dtype=float)
    ij, vj = _with_jumps(i, v)
    area = shoelace(ij, vj)
    return HysteresisLoop(i, v, area, _orientation(ij, vj, area))


def extract_loop(i: PeriodicWaveform, v: PeriodicWaveform) -> HysteresisLoop:
    """Loop over one period with i on the abscissa.

    The signed area treats a simultaneous sign change of i and v as a vertical
    jump at i = 0.

    When the net area vanishes (a figure-eight with equal, opposite lobes) the
    direction is taken from the lobe traced at positive current.
    """
    require_same_grid(i, v)
    return loop_from_points(i.samples, v.samples)


def classify_loop(loop: HysteresisLoop) -> LoopClass:
    return {
        Direction.CLOCKWISE: LoopClass.INDUCTIVE,
        Direction.COUNTERCLOCKWISE: LoopClass.CAPACITIVE,
        Direction.DEGENERATE: LoopClass.RESISTIVE,
    }[loop.direction]


def pinch_test(loop: HysteresisLoop, tol_v: float, allow_jump: bool = True) -> bool:
    """True when v vanishes wherever i changes sign.

    Between samples of opposite current sign v is linearly interpolated to the
    crossing.  With ``allow_jump`` a crossing also passes when v switches sign
    together with i, as a sign-type element does (v passes through 0 inside
    the jump).
    """
    i, v = loop.i, loop.v
    i_next, v_next = np.roll(i, -1), np.roll(v, -1)
    for k in np.flatnonzero(i == 0):
        if abs(v[k]) >= tol_v:
            return False
    for k in np.flatnonzero(i * i_next < 0):
        frac = i[k] / (i[k] - i_next[k])
        v_star = v[k] + frac * (v_next[k] - v[k])
        if abs(v_star) < tol_v:
            continue
        if allow_jump and np.sign(v[k]) == np.sign(i[k]) and np.sign(v_next[k]) == np.sign(i_next[k]):
            continue
        return False
    return True


def average_power(i: PeriodicWaveform, v: PeriodicWaveform) -> float:
    """<v i> over one period (trapezoid rule on the periodic grid)."""
    require_same_grid(i, v)
    return float(np.mean(i.samples * v.samples))


def mean_abs(i: PeriodicWaveform) -> float:
    return float(np.mean(np.abs(i.samples)))


def lamp_power_identity_residual(i: PeriodicWaveform,
                                 element: Union[HysteresisLamp, SignHardlimiter],
                                 didt: Optional[PeriodicWaveform] = None) -> float:
    """Relative gap between <i (A1 sign i + L' di/dt)> and A1 <|i|>."""
    ref = element.A1 * mean_abs(i)
    if ref == 0.0:
        raise DegenerateInputError("A1 <|i|> is zero: the relative residual is undefined")
    if didt is None:
        didt = derivative(i)
    require_same_grid(i, didt)
    v = element.A1 * np.sign(i.samples) + element.L_prime * didt.samples
    return abs(float(np.mean(i.samples * v)) - ref) / ref


def poynting_balance(l: float, r: float, v: float, i: float) -> tuple[float, float]:
    """(surface flow s E H, v i) for a straight conductor of length l and radius r.

    The surface product is formed in exact rational arithmetic, so it rounds to
    the same float as v * i.
    """
    if not (l > 0 and r > 0):
        raise ValueError("conductor length and radius must be positive")
    two_pi = 2 * Fraction(math.pi)
    L, R, V, I = Fraction(l), Fraction(r), Fraction(v), Fraction(i)
    s = two_pi * R * L
    E = V / L
    H = I / (two_pi * R)
    return float(s * E * H), v * i


@dataclass(frozen=True, eq=False)
class FluxChargeTrajectory:
    t: np.ndarray
    psi: np.ndarray
    q: np.ndarray


def flux_charge(i: PeriodicWaveform, v: PeriodicWaveform, n_periods: int = 1) -> FluxChargeTrajectory:
    """psi = int v dt and q = int i dt from t = 0, over ``n_periods`` periods."""
    require_same_grid(i, v)
    if n_periods < 1:
        raise ValueError("n_periods must be >= 1")
    total = i.n * n_periods
    t = np.arange(total + 1) * i.dt
    ii = np.append(np.tile(i.samples, n_periods), i.samples[0])
    vv = np.append(np.tile(v.samples, n_periods), v.samples[0])
    return FluxChargeTrajectory(t, cumulative_trapezoid(vv, t, initial=0.0),
                                cumulative_trapezoid(ii, t, initial=0.0))


@dataclass(frozen=True, eq=False)
class FrequencyRow:
    omega: float
    area: float
    classification: LoopClass
    loop: HysteresisLoop


def imposed_sine_loop(element, amplitude: float, omega: float,
                      n_samples: int = 4096) -> HysteresisLoop:
    """Loop of ``element`` under the imposed current amplitude * sin(omega t)."""
    theta = 2.0 * math.pi * np.arange(n_samples) / n_samples
    i = amplitude * np.sin(theta)
    didt = amplitude * omega * np.cos(theta)
    if isinstance(element, PowerLawHysteresisElement):
        v = powerlaw_voltage(element, i, slope_signs(didt))
    elif isinstance(element, (HysteresisLamp, SignHardlimiter)):
        v = element.A1 * np.sign(i) + element.L_prime * didt
    else:
        raise TypeError(f"unsupported element {type(element).__name__}")
    return loop_from_points(i, v)


def frequency_dependence_study(element, amplitude: float, omegas: Sequence[float],
                               n_samples: int = 4096) -> list:
    rows = []
    for w in omegas:
        loop = imposed_sine_loop(element, amplitude, float(w), n_samples)
        rows.append(FrequencyRow(float(w), abs(loop.signed_area), classify_loop(loop), loop))
    return rows


def dvdi_range(loop: HysteresisLoop, exclusion: Optional[float] = None) -> tuple[float, float]:
    """Extreme finite-difference slopes dv/di along the loop branches.

    Segments touching |i| < exclusion (default 5% of max|i|) are dropped, as
    are segments next to a reversal of the current's direction, where the
    loop switches branch.
    """
    i, v = loop.i, loop.v
    if exclusion is None:
        exclusion = DVDI_EXCLUSION * float(np.max(np.abs(i)))
    di = np.roll(i, -1) - i
    dv = np.roll(v, -1) - v
    direction = np.sign(di)
    keep = (np.abs(i) >= exclusion) & (np.abs(np.roll(i, -1)) >= exclusion) & (di != 0)
    keep &= (direction == np.roll(direction, 1)) & (direction == np.roll(direction, -1))
    if np.count_nonzero(keep) < 2:
        raise DegenerateInputError("too few loop points outside the exclusion band")
    slopes = dv[keep] / di[keep]
    return float(slopes.min()), float(slopes.max())
