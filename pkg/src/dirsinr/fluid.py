"""Closed-form fluid-model SINR for a UE at (r, theta) from its serving sector.

The discrete interferers beyond the serving site are replaced by a uniform
site density; what remains is a pattern-convolution integral, the two
co-sited sectors, and thermal noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .antenna import BS_SECTOR, OMNI, Pattern
from .errors import InvalidParameterError, OutOfDomainError
from .propagation import NoiseModel, thermal_noise_mw

DEFAULT_STEP_DEG = 0.05

# "averaged": the radial factor 2*pi*rho*(...) already integrates over
# bearing, so the angular term enters as a mean (divided by 2*pi) and the
# three sectors of an interfering site are summed individually,
# sum_a integral G_T(t) G_R(t + 120a - theta_i).
# "integrated": 6*pi*rho*(...) times the raw integral of G_T(t) G_R(t - theta_i);
# kept for comparison, it overstates interference by 2*pi.
KernelMode = Literal["integrated", "averaged"]


def hex_site_density(isd: float) -> float:
    """Sites per square metre of a hexagonal lattice, 2 / (sqrt(3) isd^2)."""
    if not isd > 0:
        raise InvalidParameterError("isd must be positive")
    return 2.0 / (math.sqrt(3.0) * isd * isd)


@dataclass(frozen=True)
class FluidParams:
    site_density: float
    half_isd: float
    path_loss_exponent: float = 3.5
    ptx_dbm: float = 46.0
    k_ref_db: float = -20.0
    noise: NoiseModel | None = field(default_factory=NoiseModel)
    tx_pattern: Pattern = BS_SECTOR
    rx_pattern: Pattern = OMNI
    integral_step_deg: float = DEFAULT_STEP_DEG
    kernel: KernelMode = "averaged"

    def __post_init__(self):
        if not self.path_loss_exponent > 2:
            raise InvalidParameterError("path_loss_exponent must exceed 2")
        if not self.site_density > 0:
            raise InvalidParameterError("site_density must be positive")
        if not self.half_isd > 0:
            raise InvalidParameterError("half_isd must be positive")
        if not self.integral_step_deg > 0:
            raise InvalidParameterError("integral_step_deg must be positive")
        if self.kernel not in ("integrated", "averaged"):
            raise InvalidParameterError(f"unknown kernel {self.kernel!r}")

    @classmethod
    def from_isd(cls, isd: float, **kwargs) -> "FluidParams":
        return cls(site_density=hex_site_density(isd), half_isd=isd / 2.0, **kwargs)


def pattern_convolution(tx_pattern: Pattern, rx_pattern: Pattern, theta_i: float,
                        step: float = DEFAULT_STEP_DEG) -> float:
    """Integral over one turn of ``G_T(theta) G_R(theta - theta_i)`` in radians.

    The integrand is periodic, so the composite trapezoid rule on a uniform
    grid reduces to ``step * sum(f)``.
    """
    if not step > 0:
        raise InvalidParameterError("step must be positive")
    n = int(round(360.0 / step))
    if n < 1 or abs(n * step - 360.0) > 1e-9 * 360.0:
        raise InvalidParameterError(f"step {step} does not divide 360")
    theta = np.arange(n) * (360.0 / n)
    f = tx_pattern.gain_linear(theta) * rx_pattern.gain_linear(theta - theta_i)
    return float(np.sum(f) * math.radians(360.0 / n))


def sector_sum_convolution(tx_pattern: Pattern, rx_pattern: Pattern, theta_i: float,
                           step: float = DEFAULT_STEP_DEG) -> float:
    """Sum of :func:`pattern_convolution` over the three sector orientations."""
    return sum(pattern_convolution(tx_pattern, rx_pattern, theta_i - 120.0 * a, step)
               for a in range(3))


def cosite_ratio(tx_pattern: Pattern, theta_i: float) -> float:
    """Co-sited sector power relative to the serving sector."""
    g = tx_pattern.gain_linear
    return (g(theta_i + 120.0) + g(theta_i - 120.0)) / g(theta_i)


def _check_radius(params: FluidParams, r_i: float):
    if not r_i > 0:
        raise InvalidParameterError("r_i must be positive")
    if r_i >= 2.0 * params.half_isd:
        raise OutOfDomainError(f"r_i={r_i} must be below the inter-site distance "
                               f"{2.0 * params.half_isd}")


def inverse_sinr_terms(params: FluidParams, r_i: float, theta_i: float) -> tuple[float, float, float]:
    """The three additive terms of ``1/gamma``: network, co-site, noise."""
    _check_radius(params, r_i)
    eta = params.path_loss_exponent
    g_t = params.tx_pattern.gain_linear(theta_i)
    g_r0 = params.rx_pattern.gain_linear(0.0)
    radial = (params.site_density * (2.0 * params.half_isd - r_i) ** (2.0 - eta)
              / ((eta - 2.0) * r_i ** (-eta)))
    if params.kernel == "integrated":
        angular = 6.0 * math.pi * pattern_convolution(
            params.tx_pattern, params.rx_pattern, theta_i, params.integral_step_deg)
    else:
        angular = sector_sum_convolution(
            params.tx_pattern, params.rx_pattern, theta_i, params.integral_step_deg)
    network = radial * angular / (g_t * g_r0)
    cosite = cosite_ratio(params.tx_pattern, theta_i)
    if params.noise is None:
        noise = 0.0
    else:
        useful = (10.0 ** (params.ptx_dbm / 10.0) * 10.0 ** (params.k_ref_db / 10.0)
                  * r_i ** (-eta) * g_t * g_r0)
        noise = thermal_noise_mw(params.noise) / useful
    return network, cosite, noise


def fluid_sinr(params: FluidParams, r_i: float, theta_i: float) -> float:
    """Linear fluid-model SINR at distance ``r_i`` and boresight offset ``theta_i``."""
    return 1.0 / sum(inverse_sinr_terms(params, r_i, theta_i))
