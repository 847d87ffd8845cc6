"""Messenger and adaptive-detector primitives.

A messenger carries a two-component unit vector (the hand of a clock rotating
with its frequency) plus its accumulated time of flight.  A detection unit is
a learning input stage (a simplex-constrained vector ``x`` and one message
register per input port), a linear transformation stage and a stochastic
threshold output stage.  An optional delay model turns the transformed vector
length into a click delay time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass
class Message:
    """The full state of one messenger.

    ``phase_origin`` is the phase at emission (radians in [0, 2pi)), and
    ``time_of_flight`` is stamped on arrival.  The carried vector is
    (cos psi, sin psi) with psi = 2*pi*frequency*time_of_flight + phase_origin.
    """

    phase_origin: float
    frequency: float = 1.0
    time_of_flight: float = 0.0

    def phase(self) -> float:
        # reduce f*t mod 1 before scaling to keep precision at large flight times
        return TWO_PI * math.fmod(self.frequency * self.time_of_flight, 1.0) + self.phase_origin

    def vector(self) -> np.ndarray:
        psi = self.phase()
        return np.array([math.cos(psi), math.sin(psi)])


def emit(source: int, delta: float, frequency: float = 1.0) -> Message:
    """Create a fresh messenger at source 0 or 1 with phase ``delta``."""
    if source not in (0, 1):
        raise ValueError(f"source index must be 0 or 1, got {source}")
    if not 0.0 <= delta < TWO_PI:
        raise ValueError(f"emission phase must lie in [0, 2pi), got {delta}")
    if frequency <= 0.0:
        raise ValueError("frequency must be positive")
    return Message(phase_origin=delta, frequency=frequency, time_of_flight=0.0)


class Detector:
    """Event-based detection unit with ``ports`` input channels.

    The learning vector ``x`` starts at (1, 0, ..., 0); the registers start
    as random unit vectors drawn from ``rng`` (or from explicit
    ``register_angles``).  Processing one message means: update ``x`` toward
    the one-hot vector of the arrival port, overwrite that port's register,
    form T = sum_k x_k Y_k and click iff |T|^2 >= r.
    """

    def __init__(self, ports: int, gamma: float,
                 rng: np.random.Generator | None = None,
                 register_angles: np.ndarray | None = None):
        if ports < 1:
            raise ValueError("need at least one input port")
        if not 0.0 <= gamma < 1.0:
            raise ValueError("gamma must lie in [0, 1)")
        self.ports = ports
        self.gamma = gamma
        self.x = np.zeros(ports)
        self.x[0] = 1.0
        if register_angles is None:
            if rng is None:
                raise ValueError("provide rng or register_angles")
            register_angles = TWO_PI * rng.random(ports)
        a = np.asarray(register_angles, dtype=float)
        if a.shape != (ports,):
            raise ValueError("need one register angle per port")
        self.registers = np.column_stack([np.cos(a), np.sin(a)])

    def update(self, port: int, vector: np.ndarray) -> None:
        """Learning-stage update: x <- gamma*x + (1-gamma)*e_port, Y_port <- vector."""
        if not 0 <= port < self.ports:
            raise ValueError(f"port {port} out of range for {self.ports}-port detector "
                             "(wiring bug upstream)")
        self.x *= self.gamma
        self.x[port] += 1.0 - self.gamma
        self.registers[port] = vector

    def transform(self) -> np.ndarray:
        """Transformation stage: the convex combination of the registers."""
        return self.x @ self.registers

    def process(self, port: int, vector: np.ndarray) -> float:
        """Update with the arriving message and return |T|^2 (the message
        takes part in the decision that gates its own click)."""
        self.update(port, vector)
        t = self.transform()
        return float(t @ t)

    def detect(self, port: int, vector: np.ndarray, r: float) -> bool:
        """Process one message and decide the click with threshold draw ``r``."""
        return threshold(self.process(port, vector), r)


def threshold(t_norm_sq: float, r: float) -> bool:
    """Output stage: click iff |T|^2 - r >= 0 (step function with Theta(0)=1)."""
    if not 0.0 <= r < 1.0:
        raise ValueError("threshold draw must lie in [0, 1)")
    return t_norm_sq >= r


@dataclass(frozen=True)
class DelayConfig:
    """Parameters of the stochastic click-delay model.

    The excess of the delay over the arrival time of flight is exponential
    with mean t_max * (1 - |T|^2)**h; ``window`` is the coincidence window.
    """

    t_max: float = 1000.0
    h: float = 8.0
    window: float = 1.0
    enabled: bool = True

    def __post_init__(self):
        if self.t_max <= 0.0:
            raise ValueError("t_max must be positive")
        if self.window <= 0.0:
            raise ValueError("coincidence window must be positive")
        if self.h < 0.0:
            raise ValueError("delay exponent must be non-negative")


def delay_time(cfg: DelayConfig, t_norm_sq: float, arrival_tof: float, r: float) -> float:
    """Click delay: arrival_tof - t_max*(1-|T|^2)**h * ln(r), with r in (0, 1].

    r = 1 gives zero excess; r = 0 is excluded so the logarithm stays finite.
    """
    if not 0.0 < r <= 1.0:
        raise ValueError("delay draw must lie in (0, 1]")
    return arrival_tof - cfg.t_max * (1.0 - t_norm_sq) ** cfg.h * math.log(r)
