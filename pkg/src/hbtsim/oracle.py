"""Closed-form wave-theory and boson predictions used as ground truth.

All functions are pure and accept scalars or numpy arrays.  Amplitude
defaults to 1; predictions scale trivially as A^2 (intensity) or A^4
(correlation).
"""

from __future__ import annotations

import numpy as np

from .core import TWO_PI
from .experiment import Geometry, detector_time_difference, path_time_difference

delta_t = path_time_difference   # fringe argument of a geometry


def intensity(g: Geometry, detector: int, phi0: float, phi1: float,
              amplitude: float = 1.0, frequency: float = 1.0):
    """Single-detector intensity 2A^2 {1 + cos[phi0-phi1 + 2 pi f (T0n-T1n)]}."""
    dt = detector_time_difference(g, detector)
    return 2.0 * amplitude**2 * (1.0 + np.cos(phi0 - phi1 + TWO_PI * frequency * dt))


def correlation(dt, mode: str = "classical", amplitude: float = 1.0,
                frequency: float = 1.0):
    """Phase-averaged intensity-intensity correlation at fringe argument ``dt``.

    classical: 4A^4 (1 + cos(2 pi f dt)/2); boson: 4A^4 (1 + cos(2 pi f dt)).
    """
    contrast = {"classical": 0.5, "boson": 1.0}.get(mode)
    if contrast is None:
        raise ValueError(f"unknown correlation mode {mode!r}")
    return 4.0 * amplitude**4 * (1.0 + contrast * np.cos(TWO_PI * frequency * np.asarray(dt)))


def predicted_coincidence(dt, n_tot: int, frequency: float = 1.0):
    """Expected coincidence count of the classical no-delay simulation:
    (n_tot/8) (1 + cos(2 pi f dt)/2)."""
    return n_tot / 8.0 * (1.0 + 0.5 * np.cos(TWO_PI * frequency * np.asarray(dt)))


def visibility(values) -> float:
    """Fringe contrast (max - min) / (max + min) of a sampled signal."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("visibility of an empty signal is undefined")
    hi, lo = float(np.max(v)), float(np.min(v))
    if hi + lo <= 0.0:
        raise ValueError("visibility undefined: max + min is not positive")
    return (hi - lo) / (hi + lo)
