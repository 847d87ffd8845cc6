"""Named, splittable random streams.

Every stochastic ingredient of a run (register initialization, block phases,
routing, click thresholds, delay draws, pair frequencies) gets its own
counter-based Philox stream, keyed by (scan-point index, stream kind,
sub-index).  Scan points are therefore statistically independent and can be
simulated in any order or in parallel without changing the results.
"""

from __future__ import annotations

import numpy as np

# stream kinds
INIT = 0        # detector register initialization (sub = detector index)
PHASES = 1      # per-block source phases
ROUTING = 2     # messenger routing coins
THRESHOLDS = 3  # click threshold draws (sub = detector index)
DELAYS = 4      # delay-time draws (sub = detector index)
SPECTRAL = 5    # pair-frequency draws for the down-conversion mode


def stream(seed: int, point: int, kind: int, sub: int = 0) -> np.random.Generator:
    """Return the named substream for one scan point."""
    key = (int(point), int(kind), int(sub))
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))


class PointStreams:
    """All streams belonging to a single scan point, created lazily."""

    def __init__(self, seed: int, point: int):
        self.seed = int(seed)
        self.point = int(point)
        self.init = (stream(seed, point, INIT, 0), stream(seed, point, INIT, 1))
        self.phases = stream(seed, point, PHASES)
        self.routing = stream(seed, point, ROUTING)
        self.thresholds = (stream(seed, point, THRESHOLDS, 0),
                           stream(seed, point, THRESHOLDS, 1))
        self.delays = (stream(seed, point, DELAYS, 0),
                       stream(seed, point, DELAYS, 1))
        self.spectral = stream(seed, point, SPECTRAL)
