"""Event-by-event simulation of second-order intensity interference."""

__version__ = "0.1.0"

from .core import DelayConfig, Detector, Message, delay_time, emit, threshold
from .experiment import (Geometry, PairEvent, RunConfig, ScanPoint,
                         coincide_windowed, draw_pair_frequencies,
                         path_time_difference, run_efficiency, run_pair,
                         run_scan, time_of_flight)
from .analysis import FitResult, fit_fringe, fit_scan, visibility_from_counts
from . import oracle

__all__ = [
    "DelayConfig", "Detector", "Message", "delay_time", "emit", "threshold",
    "Geometry", "PairEvent", "RunConfig", "ScanPoint", "coincide_windowed",
    "draw_pair_frequencies", "path_time_difference", "run_efficiency",
    "run_pair", "run_scan", "time_of_flight",
    "FitResult", "fit_fringe", "fit_scan", "visibility_from_counts",
    "oracle",
]
