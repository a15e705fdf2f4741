"""Azimuthal antenna gain patterns (parabolic-in-dB with a floor)."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Union

import numpy as np

from .errors import InvalidParameterError


def _fold_deg(angle) -> np.ndarray:
    """|angle| folded onto [0, 180].

    Works on the absolute value so that the fold is exactly even; the
    reflection ``360 - b`` is exact for b in (180, 360).
    """
    b = np.mod(np.abs(np.asarray(angle, dtype=float)), 360.0)
    return np.where(b > 180.0, 360.0 - b, b)


def _scalarize(value):
    return float(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True)
class AntennaPattern:
    """Gain ``peak - min(12 (a / beamwidth)^2, max_attenuation)`` in dB."""

    beamwidth_3db_deg: float
    max_attenuation_db: float
    peak_gain_db: float = 0.0

    def __post_init__(self):
        if not self.beamwidth_3db_deg > 0:
            raise InvalidParameterError("beamwidth_3db_deg must be positive")
        if not self.max_attenuation_db >= 0:
            raise InvalidParameterError("max_attenuation_db must be non-negative")

    def gain_db(self, angle_deg):
        a = _fold_deg(angle_deg)
        att = np.minimum(12.0 * (a / self.beamwidth_3db_deg) ** 2, self.max_attenuation_db)
        return _scalarize(self.peak_gain_db - att)

    def gain_linear(self, angle_deg):
        return _scalarize(10.0 ** (np.asarray(self.gain_db(angle_deg)) / 10.0))


@dataclass(frozen=True)
class OmniPattern:
    """Unit gain in every direction."""

    def gain_db(self, angle_deg):
        return _scalarize(np.zeros_like(np.asarray(angle_deg, dtype=float)))

    def gain_linear(self, angle_deg):
        return _scalarize(np.ones_like(np.asarray(angle_deg, dtype=float)))


Pattern = Union[AntennaPattern, OmniPattern]


def gain_db(pattern: Pattern, angle_deg):
    return pattern.gain_db(angle_deg)


def gain_linear(pattern: Pattern, angle_deg):
    return pattern.gain_linear(angle_deg)


# Base-station sector antenna and the two UE receive antennas studied.
BS_SECTOR = AntennaPattern(70.0, 25.0)
RX_DIR_35 = AntennaPattern(35.0, 23.0)
RX_DIR_17_5 = AntennaPattern(17.5, 21.0)
OMNI = OmniPattern()

RX_PATTERNS: dict[str, Pattern] = {
    "omni": OMNI,
    "dir_35": RX_DIR_35,
    "dir_17_5": RX_DIR_17_5,
}


# Empirical gain/beamwidth rule for a beam of equal azimuth and elevation
# width: G ~ 32400 / bw^2 (bw in degrees).
DIRECTIVITY_CONSTANT = 32400.0


def directivity_gain_db(beamwidth_deg: float) -> float:
    """Boresight gain in dBi of a pencil beam with the given 3 dB width."""
    if not beamwidth_deg > 0:
        raise InvalidParameterError("beamwidth must be positive")
    return 10.0 * math.log10(DIRECTIVITY_CONSTANT / beamwidth_deg ** 2)


def rx_pattern(choice: str, boresight_gain: str = "none") -> Pattern:
    """Receive pattern for ``choice``.

    ``boresight_gain="directivity"`` gives directional patterns the peak gain
    of :func:`directivity_gain_db`; ``"none"`` keeps them normalised to 0 dB.
    The omnidirectional pattern is 0 dBi either way.
    """
    try:
        pattern = RX_PATTERNS[choice]
    except KeyError:
        raise InvalidParameterError(
            f"unknown receiver {choice!r}; expected one of {sorted(RX_PATTERNS)}") from None
    if boresight_gain == "none" or isinstance(pattern, OmniPattern):
        return pattern
    if boresight_gain == "directivity":
        return replace(pattern, peak_gain_db=directivity_gain_db(pattern.beamwidth_3db_deg))
    raise InvalidParameterError(f"unknown boresight_gain {boresight_gain!r}")
