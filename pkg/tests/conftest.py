import math

import pytest

from singular_circuits.core import BallastDescriptor
from singular_circuits.elements import HysteresisLamp, SignHardlimiter
from singular_circuits.solver import LampCircuit

OMEGA = 2.0 * math.pi
# series L-C with 1/(w^2 L C) = 0.75: capacitive compensation of the ballast
LC_C = 1.0 / (0.75 * OMEGA ** 2)


def pure_l(U=5.0, A=1.0, L=1.0):
    return LampCircuit(BallastDescriptor.series(L=L), SignHardlimiter(A), U, OMEGA)


def series_rl(U=5.0, A=1.0, R=2.0, L=1.0):
    return LampCircuit(BallastDescriptor.series(R=R, L=L), SignHardlimiter(A), U, OMEGA)


def series_lc(U=5.0, A=1.0, L=1.0, C=LC_C):
    return LampCircuit(BallastDescriptor.series(L=L, C=C), SignHardlimiter(A), U, OMEGA)


def lamp_lprime(U=5.0, A=1.0, L_prime=0.1, L=1.0):
    return LampCircuit(BallastDescriptor.series(L=L), HysteresisLamp(A, L_prime, L), U, OMEGA)


@pytest.fixture
def omega():
    return OMEGA
