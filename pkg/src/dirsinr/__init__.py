"""Downlink SINR of cellular UEs with omnidirectional or directional receive antennas."""

from .antenna import AntennaPattern, OmniPattern, gain_db, gain_linear
from .errors import DegenerateGeometryError, InvalidParameterError, OutOfDomainError
from .fluid import FluidParams, cosite_ratio, fluid_sinr, pattern_convolution
from .geometry import NetworkLayout, Point2D, PolarOffset, Sector, build_layout, drop_ues
from .montecarlo import (ScenarioConfig, UeSample, attach, compute_sinr, delta_analysis,
                         run_scenario, simulate)
from .propagation import NoiseModel, PropagationParams, ShadowingDraw
from .stats import EmpiricalCdf, build_cdf, delta_summary, quantile, shannon_throughput

__version__ = "0.1.0"
