"""Two-source / two-detector experiment machinery.

Covers the geometry and times of flight, pair generation with block-fixed
random phases, classical and boson routing, the scan over detector positions,
logical and time-windowed coincidence counting, the detection-efficiency run
and the non-monochromatic (down-conversion) source mode.

Two execution paths exist and are kept bit-identical:

* :func:`run_pair` processes one messenger pair at a time through
  :class:`~hbtsim.core.Detector` objects (reference path, also the public
  per-event API);
* :func:`run_scan` uses a vectorized engine that exploits the linearity of
  the learning update (a first-order IIR filter) to process a whole scan
  point with numpy, consuming the same random streams in the same order.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.signal import lfilter

from . import rng as streams
from .core import DelayConfig, Detector, Message, TWO_PI


# ---------------------------------------------------------------------------
# geometry

@dataclass(frozen=True)
class Geometry:
    """Sources on the y axis separated by ``source_separation``, detectors on
    a parallel line at ``screen_distance``.  Natural units: lengths in c/f,
    times in 1/f, ``speed`` = c = 1."""

    screen_distance: float
    source_separation: float
    y0: float = 0.0
    y1: float = 0.0
    speed: float = 1.0

    def __post_init__(self):
        if self.screen_distance <= 0.0:
            raise ValueError("screen distance must be positive")
        if self.source_separation <= 0.0:
            raise ValueError("source separation must be positive")
        if self.speed <= 0.0:
            raise ValueError("propagation speed must be positive")

    def source_height(self, source: int) -> float:
        return (1 - 2 * source) * self.source_separation / 2.0

    def detector_height(self, detector: int) -> float:
        return self.y0 if detector == 0 else self.y1


def time_of_flight(g: Geometry, source: int, detector: int) -> float:
    """Flight time from source m to detector n: sqrt(X^2 + (y_s - y_n)^2)/c."""
    dy = g.source_height(source) - g.detector_height(detector)
    return math.hypot(g.screen_distance, dy) / g.speed


def _hypot_diff(x: float, u: float, v: float) -> float:
    # hypot(x,u) - hypot(x,v) without cancellation (difference of ~1e5-sized
    # flight times can be of order 1 and still needs full precision)
    return (u * u - v * v) / (math.hypot(x, u) + math.hypot(x, v))


def detector_time_difference(g: Geometry, detector: int) -> float:
    """T_{0,n} - T_{1,n}: flight-time difference of the two sources to one detector."""
    y = g.detector_height(detector)
    return _hypot_diff(g.screen_distance, g.source_height(0) - y,
                       g.source_height(1) - y) / g.speed


def path_time_difference(g: Geometry) -> float:
    """The fringe argument dT = (T00 - T10) - (T01 - T11)."""
    return detector_time_difference(g, 0) - detector_time_difference(g, 1)


# ---------------------------------------------------------------------------
# run configuration

@dataclass(frozen=True)
class RunConfig:
    """Parameters of a simulation run (per scan point)."""

    n_tot: int = 200_000          # messenger pairs per scan point
    n_f: int = 50                 # pairs per fixed-phase block
    gamma: float = 0.99
    ports: int = 2                # K; port index = source index, extra ports inert
    routing: str = "classical"    # "classical" | "boson"
    delay: DelayConfig | None = None
    spectral: str = "mono"        # "mono" | "pdc"
    f0: float = 2.0               # pump frequency (pdc mode)
    linewidth: float = 0.1        # Lorentzian half-width of the f1 draw (pdc mode)
    frequency: float = 1.0        # oscillator frequency (mono mode)
    seed: int = 12345

    def __post_init__(self):
        if self.n_tot < 1:
            raise ValueError("n_tot must be positive")
        if self.n_f < 1:
            raise ValueError("n_f must be at least 1")
        if self.ports < 2:
            raise ValueError("need at least one port per source direction")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must lie in [0, 1)")
        if self.routing not in ("classical", "boson"):
            raise ValueError(f"unknown routing mode {self.routing!r}")
        if self.spectral not in ("mono", "pdc"):
            raise ValueError(f"unknown spectral mode {self.spectral!r}")
        if self.frequency <= 0.0 or self.f0 <= 0.0:
            raise ValueError("frequencies must be positive")
        if self.linewidth < 0.0:
            raise ValueError("linewidth must be non-negative")


# ---------------------------------------------------------------------------
# per-event path

@dataclass
class PairEvent:
    """Outcome of one messenger pair."""

    destinations: tuple[int, int]       # detector hit by messenger from S0, S1
    ports: tuple[int, int]
    flight_times: tuple[float, float]
    clicks: tuple[bool, bool]           # click decision per messenger
    delays: tuple[float, float] | None  # click delay per messenger (delay mode)

    @property
    def split(self) -> bool:
        return self.destinations[0] != self.destinations[1]

    def coincident(self, window: float | None = None) -> bool:
        """Both detectors clicked; with a window, their delay times differ by
        at most ``window``."""
        if not (self.split and self.clicks[0] and self.clicks[1]):
            return False
        if window is None:
            return True
        if self.delays is None:
            raise ValueError("windowed coincidence needs delay times")
        return abs(self.delays[0] - self.delays[1]) <= window


def draw_pair_frequencies(f0: float, linewidth: float,
                          rng: np.random.Generator) -> tuple[float, float]:
    """Draw (f1, f2 = f0 - f1) with f1 Lorentzian around f0/2, truncated to
    (0, f0) by rejection."""
    if f0 <= 0.0 or linewidth < 0.0:
        raise ValueError("need f0 > 0 and linewidth >= 0")
    if linewidth == 0.0:
        return 0.5 * f0, 0.5 * f0
    while True:
        f1 = 0.5 * f0 + linewidth * math.tan(math.pi * (rng.random() - 0.5))
        if 0.0 < f1 < f0:
            return f1, f0 - f1


def run_pair(detectors: Sequence[Detector], g: Geometry, cfg: RunConfig,
             phases: tuple[float, float], point_streams: streams.PointStreams) -> PairEvent:
    """Generate, route and detect one messenger pair.

    ``phases`` are the block-fixed emission phases (phi0, phi1).  Random
    numbers are consumed in the engine's canonical order: routing coin(s),
    then per arriving messenger one threshold draw and one delay draw from
    the destination detector's streams.
    """
    if cfg.routing == "classical":
        r = point_streams.routing.random(2)
        dest = (int(r[0] >= 0.5), int(r[1] >= 0.5))
    else:
        dest = (0, 1) if point_streams.routing.random() < 0.5 else (1, 0)

    if cfg.spectral == "pdc":
        freqs = draw_pair_frequencies(cfg.f0, cfg.linewidth, point_streams.spectral)
    else:
        freqs = (cfg.frequency, cfg.frequency)

    clicks = [False, False]
    delays = [0.0, 0.0]
    tofs = [0.0, 0.0]
    for m in (0, 1):
        n = dest[m]
        tofs[m] = time_of_flight(g, m, n)
        msg = Message(phases[m], freqs[m], tofs[m])
        t_sq = detectors[n].process(m, msg.vector())
        clicks[m] = t_sq >= point_streams.thresholds[n].random()
        u = point_streams.delays[n].random()
        excess_scale = 0.0 if cfg.delay is None else cfg.delay.t_max * (1.0 - t_sq) ** cfg.delay.h
        delays[m] = tofs[m] - excess_scale * math.log1p(-u)

    return PairEvent(destinations=dest, ports=(0, 1), flight_times=tuple(tofs),
                     clicks=tuple(clicks),
                     delays=tuple(delays) if cfg.delay is not None else None)


def coincide_windowed(event: PairEvent, window: float) -> bool:
    """Windowed coincidence flag for one pair event."""
    return event.coincident(window)


# ---------------------------------------------------------------------------
# vectorized scan engine

@dataclass(frozen=True)
class ScanPoint:
    """Aggregated counts for one detector-D1 position."""

    y1: float
    n_tot: int
    n_count_d0: int
    n_count_d1: int
    n_coincidence: int
    delta_t: float


def _draw_frequencies(n: int, f0: float, linewidth: float,
                      rng: np.random.Generator) -> np.ndarray:
    """Vectorized rejection sampling of n Lorentzian f1 values in (0, f0)."""
    if linewidth == 0.0:
        return np.full(n, 0.5 * f0)
    out = np.empty(n)
    pending = np.arange(n)
    while pending.size:
        u = rng.random(pending.size)
        f1 = 0.5 * f0 + linewidth * np.tan(np.pi * (u - 0.5))
        ok = (f1 > 0.0) & (f1 < f0)
        out[pending[ok]] = f1[ok]
        pending = pending[~ok]
    return out


def _detector_pass(n: int, dest: np.ndarray, block: np.ndarray, freq: np.ndarray,
                   tof: np.ndarray, phases: np.ndarray, init_angles: np.ndarray,
                   cfg: RunConfig, rng_thresh: np.random.Generator,
                   rng_delay: np.random.Generator):
    """Process every messenger arriving at detector ``n``, in event order.

    Returns (click count, per-pair click flags, per-pair delay times); the
    per-pair outputs are only meaningful for pairs that sent exactly one
    messenger to this detector.
    """
    n_tot = dest.shape[0]
    # arrival order: pair-major, messenger from S0 before S1
    keys = np.sort(np.concatenate([
        2 * np.flatnonzero(dest[:, 0] == n),
        2 * np.flatnonzero(dest[:, 1] == n) + 1,
    ]))
    pair = keys >> 1
    src = keys & 1
    tof_arr = tof[src, n]

    # message phase on arrival; f*T reduced mod 1 first to keep precision
    psi = TWO_PI * np.mod(freq[pair, src] * tof_arr, 1.0) + phases[block[pair], src]

    # learning vector: each component obeys x_k <- gamma*x_k + (1-gamma)*[port==k],
    # i.e. a first-order IIR filter over the arrival sequence
    b = [1.0 - cfg.gamma]
    a = [1.0, -cfg.gamma]
    v0 = (src == 0).astype(float)
    x0, _ = lfilter(b, a, v0, zi=np.array([cfg.gamma * 1.0]))   # x starts at (1,0,...)
    x1, _ = lfilter(b, a, 1.0 - v0, zi=np.array([cfg.gamma * 0.0]))

    # register content at each arrival = message of the latest arrival on that
    # port (the arriving message overwrites its own port first)
    idx = np.arange(keys.size)
    last0 = np.maximum.accumulate(np.where(src == 0, idx, -1))
    last1 = np.maximum.accumulate(np.where(src == 1, idx, -1))
    a0 = np.where(last0 >= 0, psi[np.maximum(last0, 0)], init_angles[0])
    a1 = np.where(last1 >= 0, psi[np.maximum(last1, 0)], init_angles[1])

    tx = x0 * np.cos(a0) + x1 * np.cos(a1)
    ty = x0 * np.sin(a0) + x1 * np.sin(a1)
    t_sq = tx * tx + ty * ty

    click = t_sq >= rng_thresh.random(keys.size)
    u = rng_delay.random(keys.size)
    if cfg.delay is not None:
        t_del = tof_arr - cfg.delay.t_max * (1.0 - t_sq) ** cfg.delay.h * np.log1p(-u)
    else:
        t_del = tof_arr

    click_pair = np.zeros(n_tot, dtype=bool)
    delay_pair = np.zeros(n_tot)
    click_pair[pair] = click      # split pairs have exactly one arrival here
    delay_pair[pair] = t_del
    return int(click.sum()), click_pair, delay_pair


def _run_point(g: Geometry, cfg: RunConfig, point_index: int) -> ScanPoint:
    """Simulate all pairs of one scan point with fresh detectors."""
    s = streams.PointStreams(cfg.seed, point_index)
    n_tot, n_f = cfg.n_tot, cfg.n_f
    n_blocks = -(-n_tot // n_f)
    block = np.arange(n_tot) // n_f

    tof = np.array([[time_of_flight(g, m, n) for n in (0, 1)] for m in (0, 1)])
    init_angles = [TWO_PI * s.init[n].random(cfg.ports) for n in (0, 1)]
    phases = TWO_PI * s.phases.random((n_blocks, 2))

    if cfg.routing == "classical":
        r = s.routing.random((n_tot, 2))
        dest = (r >= 0.5).astype(np.int64)
    else:
        swap = s.routing.random(n_tot) >= 0.5
        dest = np.empty((n_tot, 2), dtype=np.int64)
        dest[:, 0] = swap
        dest[:, 1] = 1 - dest[:, 0]

    if cfg.spectral == "pdc":
        f1 = _draw_frequencies(n_tot, cfg.f0, cfg.linewidth, s.spectral)
        freq = np.column_stack([f1, cfg.f0 - f1])
    else:
        freq = np.full((n_tot, 2), cfg.frequency)

    counts = [0, 0]
    click_pair = [None, None]
    delay_pair = [None, None]
    for n in (0, 1):
        counts[n], click_pair[n], delay_pair[n] = _detector_pass(
            n, dest, block, freq, tof, phases, init_angles[n], cfg,
            s.thresholds[n], s.delays[n])

    split = dest[:, 0] != dest[:, 1]
    coincident = split & click_pair[0] & click_pair[1]
    if cfg.delay is not None:
        coincident &= np.abs(delay_pair[0] - delay_pair[1]) <= cfg.delay.window

    return ScanPoint(y1=g.y1, n_tot=n_tot, n_count_d0=counts[0],
                     n_count_d1=counts[1], n_coincidence=int(coincident.sum()),
                     delta_t=path_time_difference(g))


def _run_point_args(args) -> ScanPoint:
    return _run_point(*args)


def run_scan(g: Geometry, cfg: RunConfig, y1_values: Sequence[float],
             jobs: int = 1) -> list[ScanPoint]:
    """Scan detector D1 over ``y1_values`` with detectors re-initialized per
    point.  Points are independent; ``jobs`` > 1 runs them in parallel with
    identical results."""
    tasks = [(replace(g, y1=float(y)), cfg, i) for i, y in enumerate(y1_values)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_point_args, tasks))
    return [_run_point(*t) for t in tasks]


# ---------------------------------------------------------------------------
# detection-efficiency experiment

def run_efficiency(n_messages: int, gamma: float = 0.99, ports: int = 2,
                   port: int = 0, seed: int = 0,
                   arrivals=None) -> float:
    """Fraction of messages that produce a click on a single detector.

    Models a far point source: by default every messenger arrives with the
    same message at the same port, so the detector locks in and the click
    fraction approaches one.  ``arrivals`` (an iterable of (port, vector)
    pairs) overrides the arriving traffic, e.g. to probe non-stationary
    input.
    """
    if n_messages < 1:
        raise ValueError("need at least one message")
    det = Detector(ports, gamma, rng=streams.stream(seed, 0, streams.INIT, 0))
    rng_thresh = streams.stream(seed, 0, streams.THRESHOLDS, 0)
    if arrivals is None:
        vec = np.array([1.0, 0.0])
        arrivals = ((port, vec) for _ in range(n_messages))
    count = 0
    for k, vec in arrivals:
        count += det.detect(k, vec, rng_thresh.random())
    return count / n_messages
