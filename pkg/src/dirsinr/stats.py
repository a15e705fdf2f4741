"""Empirical CDFs, outage quantiles, per-UE delta summaries, Shannon rate."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError


@dataclass(frozen=True)
class EmpiricalCdf:
    sorted_values: np.ndarray
    count: int

    def __call__(self, x):
        """F(x) = #(samples <= x) / count; accepts scalars or arrays."""
        k = np.searchsorted(self.sorted_values, x, side="right")
        f = k / self.count
        return float(f) if np.ndim(f) == 0 else f

    def quantile(self, p: float) -> float:
        return quantile(self, p)


def build_cdf(samples) -> EmpiricalCdf:
    values = np.asarray(samples, dtype=float).ravel()
    if values.size == 0:
        raise InvalidParameterError("cannot build a CDF from no samples")
    if not np.all(np.isfinite(values)):
        raise InvalidParameterError("CDF samples must be finite")
    values = np.sort(values)
    values.setflags(write=False)
    return EmpiricalCdf(sorted_values=values, count=int(values.size))


def quantile(cdf: EmpiricalCdf, p: float) -> float:
    """Lower empirical quantile: the smallest sample x with F(x) >= p."""
    if not 0.0 < p <= 1.0:
        raise InvalidParameterError(f"p must lie in (0, 1], got {p}")
    n = cdf.count
    k = max(1, math.ceil(p * n))
    # p*n can round up past an integer (0.07*100 -> 7.000000000000001).
    if k > 1 and (k - 1) / n >= p:
        k -= 1
    return float(cdf.sorted_values[k - 1])


@dataclass(frozen=True)
class DeltaSummary:
    frac_degraded: float
    frac_neutral: float
    frac_improved: float
    min_delta_db: float
    max_delta_db: float


def delta_summary(deltas, neutral_band_db: float = 0.5) -> DeltaSummary:
    """Split per-UE SINR differences into degraded / neutral / improved."""
    d = np.asarray(deltas, dtype=float).ravel()
    if d.size == 0:
        raise InvalidParameterError("no deltas given")
    if not neutral_band_db >= 0:
        raise InvalidParameterError("neutral_band_db must be non-negative")
    n = d.size
    degraded = int(np.count_nonzero(d < -neutral_band_db))
    improved = int(np.count_nonzero(d > neutral_band_db))
    neutral = n - degraded - improved
    return DeltaSummary(degraded / n, neutral / n, improved / n, float(d.min()), float(d.max()))


def shannon_throughput(bandwidth_hz: float, sinr_linear):
    """Shannon rate ``W log2(1 + gamma)`` in bit/s."""
    if not bandwidth_hz > 0:
        raise InvalidParameterError("bandwidth must be positive")
    g = np.asarray(sinr_linear, dtype=float)
    if np.any(g < 0) or np.any(np.isnan(g)):
        raise InvalidParameterError("SINR must be non-negative")
    rate = bandwidth_hz * np.log2(1.0 + g)
    return float(rate) if rate.ndim == 0 else rate
