"""Fringe fitting and visibility extraction from scan results.

The fringe phase 2 pi f dT is known from the geometry, so the fit model
a*N_tot*(1 + b*cos(2 pi f dT)) is linear in the coefficients (c0, c1) of the
basis {1, cos}; a = c0 and the contrast is b = c1/c0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import TWO_PI
from .experiment import ScanPoint


@dataclass(frozen=True)
class FitResult:
    """Linear least-squares fit of count fractions on {1, cos(2 pi f dT)}."""

    offset: float               # a: constant coefficient, fraction of n_tot
    contrast: float             # b = c1 / c0
    offset_stderr: float
    contrast_stderr: float
    cosine_coeff: float         # c1 = a * b
    cosine_coeff_stderr: float
    residual_norm: float

    @property
    def visibility(self) -> float:
        """The fitted contrast, clamped to the physical range [0, 1]."""
        return min(max(self.contrast, 0.0), 1.0)


def fit_fringe(dt, counts, n_tot: int, frequency: float = 1.0) -> FitResult:
    """Fit counts/n_tot against {1, cos(2 pi f dT)} over the scan."""
    dt = np.asarray(dt, dtype=float)
    frac = np.asarray(counts, dtype=float) / n_tot
    if dt.size < 3:
        raise ValueError("need at least 3 scan points to fit a fringe")
    basis = np.column_stack([np.ones_like(dt), np.cos(TWO_PI * frequency * dt)])
    if np.linalg.matrix_rank(basis) < 2:
        raise np.linalg.LinAlgError(
            "degenerate cosine basis: fringe argument does not vary over the scan")
    coef, _, _, _ = np.linalg.lstsq(basis, frac, rcond=None)
    resid = frac - basis @ coef
    rss = float(resid @ resid)
    dof = dt.size - 2
    sigma_sq = rss / dof if dof > 0 else float("nan")
    cov = sigma_sq * np.linalg.inv(basis.T @ basis)
    c0, c1 = float(coef[0]), float(coef[1])
    var0, var1, cov01 = cov[0, 0], cov[1, 1], cov[0, 1]
    b = c1 / c0
    # first-order error propagation for the ratio
    b_var = var1 / c0**2 + c1**2 * var0 / c0**4 - 2.0 * c1 * cov01 / c0**3
    return FitResult(offset=c0, contrast=b,
                     offset_stderr=float(np.sqrt(var0)),
                     contrast_stderr=float(np.sqrt(max(b_var, 0.0))),
                     cosine_coeff=c1,
                     cosine_coeff_stderr=float(np.sqrt(var1)),
                     residual_norm=float(np.sqrt(rss)))


def fit_scan(scan: Sequence[ScanPoint], frequency: float = 1.0,
             which: str = "coincidence") -> FitResult:
    """Convenience wrapper fitting one count channel of a scan."""
    attr = {"coincidence": "n_coincidence", "d0": "n_count_d0",
            "d1": "n_count_d1"}[which]
    dt = [p.delta_t for p in scan]
    counts = [getattr(p, attr) for p in scan]
    return fit_fringe(dt, counts, scan[0].n_tot, frequency)


def visibility_from_counts(counts) -> float:
    """Raw (max - min)/(max + min) of a count sequence; noisier than the
    fitted contrast but model-free."""
    v = np.asarray(counts, dtype=float)
    if v.size == 0:
        raise ValueError("empty count sequence")
    hi, lo = float(np.max(v)), float(np.min(v))
    if hi + lo <= 0.0:
        raise ValueError("visibility undefined for an all-zero signal")
    return (hi - lo) / (hi + lo)
