"""Circuits with singular (switching-type) elements: sign-type lamp models,
memristive one-ports, power-law hysteresis, harmonic-balance steady states and
switched-linear dynamics."""
from .core import (
    BallastDescriptor,
    FourierSeries,
    PeriodicWaveform,
    ZeroCrossingSet,
    asymptotic_inductance,
    detect_zerocrossings,
    synthesize,
    to_fourier,
)
from .elements import (
    ChargeControlledInstance,
    HysteresisLamp,
    MemristiveSystem,
    PowerLawBranch,
    PowerLawHysteresisElement,
    SignHardlimiter,
    powerlaw_return_point,
)
from .errors import CircuitError
from .solver import (
    LampCircuit,
    SteadyState,
    multi_crossing_solver,
    power_scaling_sweep,
    smooth_rough_decompose,
    steady_state_two_crossing,
    time_domain_oracle,
)

__version__ = "0.1.0"
