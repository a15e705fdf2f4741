"""Distance-power path gain, lognormal shadowing and thermal noise."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .antenna import Pattern
from .errors import InvalidParameterError

SPEED_OF_LIGHT = 299_792_458.0
CARRIER_HZ = 2.6e9


def free_space_gain_db(frequency_hz: float, distance_m: float = 1.0) -> float:
    """Free-space path gain 20*log10(c / (4 pi f d))."""
    return 20.0 * math.log10(SPEED_OF_LIGHT / (4.0 * math.pi * frequency_hz * distance_m))


@dataclass(frozen=True)
class PropagationParams:
    path_loss_exponent: float = 3.5
    # Reference gain at 1 m.  Absorbs BS antenna gain and clutter losses; the
    # default places ISD 2000 m close to interference-limited while omni
    # cell-edge SINR at ISD 10 km is noise-dominated.
    k_ref_db: float = -20.0
    shadowing_sigma_db: float = 8.0
    shadowing_enabled: bool = True

    def __post_init__(self):
        if not self.path_loss_exponent > 2:
            raise InvalidParameterError("path_loss_exponent must exceed 2")
        if not self.shadowing_sigma_db >= 0:
            raise InvalidParameterError("shadowing_sigma_db must be non-negative")

    @property
    def k_linear(self) -> float:
        return 10.0 ** (self.k_ref_db / 10.0)

    @property
    def effective_sigma_db(self) -> float:
        return self.shadowing_sigma_db if self.shadowing_enabled else 0.0


@dataclass(frozen=True)
class NoiseModel:
    noise_density_dbm_per_hz: float = -174.0
    bandwidth_hz: float = 10e6
    noise_figure_db: float = 9.0

    def __post_init__(self):
        if not self.bandwidth_hz > 0:
            raise InvalidParameterError("bandwidth_hz must be positive")
        if not self.noise_figure_db >= 0:
            raise InvalidParameterError("noise_figure_db must be non-negative")

    @property
    def power_dbm(self) -> float:
        return (self.noise_density_dbm_per_hz + 10.0 * math.log10(self.bandwidth_hz)
                + self.noise_figure_db)


@dataclass(frozen=True)
class ShadowingDraw:
    """Linear shadowing multiplier(s); a scalar or an array of draws."""

    linear_factor: float | np.ndarray

    def __post_init__(self):
        if not np.all(np.asarray(self.linear_factor) > 0):
            raise InvalidParameterError("shadowing factor must be positive")


NO_SHADOW = ShadowingDraw(1.0)


def path_gain_linear(params: PropagationParams, r):
    """Deterministic path gain ``K r^-eta`` (scalar or array ``r``)."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(~(r_arr > 0)):
        raise InvalidParameterError("distance must be positive")
    g = params.k_linear * r_arr ** (-params.path_loss_exponent)
    return float(g) if g.ndim == 0 else g


def shadowing_factors(sigma_db: float, rng: np.random.Generator, size=None):
    """Draw ``10**(Z/10)`` with ``Z ~ N(0, sigma_db^2)``.

    The normal variates are consumed even when ``sigma_db`` is 0, so the
    generator state after the call does not depend on sigma.
    """
    if not sigma_db >= 0:
        raise InvalidParameterError("sigma_db must be non-negative")
    z = rng.standard_normal(size)
    return 10.0 ** (sigma_db * z / 10.0)


def sample_shadowing(sigma_db: float, rng: np.random.Generator, size=None) -> ShadowingDraw:
    factor = shadowing_factors(sigma_db, rng, size)
    return ShadowingDraw(float(factor) if size is None else factor)


def thermal_noise_mw(noise: NoiseModel) -> float:
    return 10.0 ** (noise.power_dbm / 10.0)


def dbm_to_mw(dbm):
    return 10.0 ** (np.asarray(dbm, dtype=float) / 10.0)


def received_power_mw(ptx_dbm: float, params: PropagationParams, tx_pattern: Pattern,
                      rx_pattern: Pattern, r, theta_tx_deg, phi_rx_deg,
                      shadow: ShadowingDraw = NO_SHADOW):
    """Received power ``P_t K r^-eta G_T(theta) G_R(phi) X`` in mW."""
    p = (10.0 ** (ptx_dbm / 10.0) * np.asarray(path_gain_linear(params, r))
         * np.asarray(tx_pattern.gain_linear(theta_tx_deg))
         * np.asarray(rx_pattern.gain_linear(phi_rx_deg))
         * np.asarray(shadow.linear_factor))
    return float(p) if p.ndim == 0 else p
