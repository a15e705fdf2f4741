"""Per-UE downlink SINR over the discrete hexagonal network.

Every UE is attached to the sector with the highest useful power (receive
gain excluded, since the terminal aims its antenna at whichever sector it
evaluates).  Its antenna then stays aimed at the serving site, and each
interferer ``j`` is weighted by the receive gain at the angle between the
bearing to the serving site and the bearing to ``j``.

UEs are processed in blocks of :data:`~dirsinr.geometry.BLOCK_SIZE`; block
``b`` draws its positions and shadowing from substreams keyed by
``(seed, b)``, so results are identical for any thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Literal, Sequence

import numpy as np

from . import geometry
from .antenna import BS_SECTOR, OMNI, Pattern, rx_pattern
from .errors import DegenerateGeometryError, InvalidParameterError
from .geometry import NetworkLayout, Point2D, PolarOffset
from .propagation import NoiseModel, PropagationParams, shadowing_factors, thermal_noise_mw

RxAngleMode = Literal["geometric", "boresight_offset"]
RX_CHOICES = ("omni", "dir_35", "dir_17_5")


@dataclass(frozen=True)
class UeSample:
    position: Point2D
    serving_sector: int
    polar: PolarOffset
    sinr_linear: float
    sinr_db: float
    central: bool


@dataclass(frozen=True)
class ScenarioConfig:
    isd: float = 2000.0
    rings: int = 4
    rx_pattern_choice: str = "omni"
    ue_count: int = 100_000
    seed: int = 0
    shadowing_enabled: bool = False
    propagation: PropagationParams = field(default_factory=PropagationParams)
    noise: NoiseModel = field(default_factory=NoiseModel)
    ptx_dbm: float = 46.0
    drop_region: geometry.DropRegion = "central_site_disk"
    rx_angle_mode: RxAngleMode = "geometric"
    rx_boresight_gain: str = "directivity"

    def __post_init__(self):
        if self.ue_count <= 0:
            raise InvalidParameterError("ue_count must be positive")
        if not self.isd > 0:
            raise InvalidParameterError("isd must be positive")
        if self.rings < 0:
            raise InvalidParameterError("rings must be non-negative")
        if self.drop_region not in ("central_site_disk", "whole_network"):
            raise InvalidParameterError(f"unknown drop_region {self.drop_region!r}")
        if self.rx_pattern_choice not in RX_CHOICES:
            raise InvalidParameterError(f"unknown rx_pattern_choice {self.rx_pattern_choice!r}")
        if self.rx_angle_mode not in ("geometric", "boresight_offset"):
            raise InvalidParameterError(f"unknown rx_angle_mode {self.rx_angle_mode!r}")
        if self.rx_boresight_gain not in ("directivity", "none"):
            raise InvalidParameterError(f"unknown rx_boresight_gain {self.rx_boresight_gain!r}")

    def receiver(self, choice: str | None = None) -> Pattern:
        return rx_pattern(choice or self.rx_pattern_choice, self.rx_boresight_gain)

    @property
    def resolved_propagation(self) -> PropagationParams:
        return replace(self.propagation, shadowing_enabled=self.shadowing_enabled)


class _LayoutArrays:
    """Sector arrays extracted once from a layout."""

    def __init__(self, layout: NetworkLayout):
        self.xy = layout.sector_xy
        self.boresight = layout.sector_boresight_deg
        self.site = layout.sector_site
        self.n = len(layout.sectors)


def _link_geometry(ue_xy: np.ndarray, arrs: _LayoutArrays):
    """Distances, transmit offsets and UE-side bearings, each (n_ue, n_sector)."""
    dx = arrs.xy[None, :, 0] - ue_xy[:, None, 0]
    dy = arrs.xy[None, :, 1] - ue_xy[:, None, 1]
    r = np.hypot(dx, dy)
    if np.any(r == 0.0):
        raise DegenerateGeometryError("UE coincides with a site position")
    bearing_to_bs = np.degrees(np.arctan2(dy, dx))
    bearing_from_bs = np.degrees(np.arctan2(-dy, -dx))
    theta_tx = geometry.wrap_deg(bearing_from_bs - arrs.boresight[None, :])
    return r, theta_tx, bearing_to_bs


def _useful_power(ptx_dbm, params: PropagationParams, tx_pattern: Pattern, r, theta_tx, shadows):
    # Useful power per link without receive gain: P_t K r^-eta G_T X.
    p = (10.0 ** (ptx_dbm / 10.0) * params.k_linear * r ** (-params.path_loss_exponent)
         * tx_pattern.gain_linear(theta_tx))
    if shadows is not None:
        p = p * shadows
    return p


def _rx_angles(serving: np.ndarray, theta_tx, bearing_to_bs, mode: RxAngleMode):
    rows = np.arange(len(serving))
    if mode == "geometric":
        ref = bearing_to_bs[rows, serving]
        return geometry.wrap_deg(bearing_to_bs - ref[:, None])
    # Difference of transmit-side boresight offsets, theta_j - theta_i.
    ref = theta_tx[rows, serving]
    return geometry.wrap_deg(theta_tx - ref[:, None])


def _sinr_from_links(useful, serving, phi, rx: Pattern, noise_mw: float):
    rows = np.arange(len(serving))
    g_r = rx.gain_linear(phi)
    received = useful * g_r
    signal = useful[rows, serving] * rx.gain_linear(0.0)
    # Masked sum rather than total-minus-serving: avoids cancellation.
    mask = np.ones_like(received, dtype=bool)
    mask[rows, serving] = False
    interference = np.where(mask, received, 0.0).sum(axis=1)
    return signal / (interference + noise_mw)


def attach(ue: Point2D, layout: NetworkLayout, propagation: PropagationParams,
           tx_pattern: Pattern = BS_SECTOR, shadows=None, ptx_dbm: float = 46.0) -> int:
    """Ordinal of the sector offering the highest useful power to ``ue``.

    ``shadows`` is an optional per-sector array of linear shadowing factors.
    Ties resolve to the lowest ordinal.
    """
    arrs = _LayoutArrays(layout)
    ue_xy = np.array([[ue.x, ue.y]], dtype=float)
    r, theta_tx, _ = _link_geometry(ue_xy, arrs)
    sh = None if shadows is None else np.asarray(shadows, dtype=float)[None, :]
    useful = _useful_power(ptx_dbm, propagation, tx_pattern, r, theta_tx, sh)
    return int(np.argmax(useful[0]))


def compute_sinr(ue: Point2D, serving: int, layout: NetworkLayout,
                 propagation: PropagationParams, noise: NoiseModel | None,
                 tx_pattern: Pattern = BS_SECTOR, rx: Pattern = OMNI, shadows=None,
                 ptx_dbm: float = 46.0, rx_angle_mode: RxAngleMode = "geometric") -> float:
    """Linear SINR of ``ue`` served by sector ``serving``.

    ``noise=None`` evaluates the interference-only ratio.
    """
    if not 0 <= serving < len(layout.sectors):
        raise InvalidParameterError(f"invalid serving sector {serving}")
    arrs = _LayoutArrays(layout)
    ue_xy = np.array([[ue.x, ue.y]], dtype=float)
    r, theta_tx, bearing = _link_geometry(ue_xy, arrs)
    sh = None if shadows is None else np.asarray(shadows, dtype=float)[None, :]
    useful = _useful_power(ptx_dbm, propagation, tx_pattern, r, theta_tx, sh)
    srv = np.array([serving])
    phi = _rx_angles(srv, theta_tx, bearing, rx_angle_mode)
    noise_mw = 0.0 if noise is None else thermal_noise_mw(noise)
    return float(_sinr_from_links(useful, srv, phi, rx, noise_mw)[0])


@dataclass
class ScenarioArrays:
    """Column-oriented scenario output.

    ``sinr_linear`` maps each evaluated receiver choice to an (n,) array.
    """

    positions: np.ndarray
    serving: np.ndarray
    r: np.ndarray
    theta_deg: np.ndarray
    central: np.ndarray
    sinr_linear: dict[str, np.ndarray]

    def sinr_db(self, choice: str) -> np.ndarray:
        return 10.0 * np.log10(self.sinr_linear[choice])


def _run_block(config: ScenarioConfig, layout: NetworkLayout, arrs: _LayoutArrays,
               block: int, n: int, choices: Sequence[str], tx_pattern: Pattern):
    params = config.resolved_propagation
    ue_xy = geometry.drop_block(layout, n, config.drop_region, config.seed, block)
    r, theta_tx, bearing = _link_geometry(ue_xy, arrs)
    shadows = None
    if params.shadowing_enabled:
        rng = geometry.block_rng(config.seed, block, geometry.STREAM_SHADOW)
        shadows = shadowing_factors(params.shadowing_sigma_db, rng, size=r.shape)
    useful = _useful_power(config.ptx_dbm, params, tx_pattern, r, theta_tx, shadows)
    serving = np.argmax(useful, axis=1)
    phi = _rx_angles(serving, theta_tx, bearing, config.rx_angle_mode)
    noise_mw = thermal_noise_mw(config.noise)
    sinr = {c: _sinr_from_links(useful, serving, phi, config.receiver(c), noise_mw)
            for c in choices}
    rows = np.arange(n)
    return (ue_xy, serving, r[rows, serving], theta_tx[rows, serving],
            arrs.site[serving] == 0, sinr)


def simulate(config: ScenarioConfig, choices: Sequence[str] | None = None, threads: int = 1,
             tx_pattern: Pattern = BS_SECTOR, layout: NetworkLayout | None = None) -> ScenarioArrays:
    """Vectorised scenario run; evaluates every receiver in ``choices`` on the
    same drops, shadowing and attachment."""
    if choices is None:
        choices = (config.rx_pattern_choice,)
    for c in choices:
        rx_pattern(c)
    if layout is None:
        layout = geometry.build_layout(config.isd, config.rings)
    arrs = _LayoutArrays(layout)
    starts = list(range(0, config.ue_count, geometry.BLOCK_SIZE))
    jobs = [(b, min(geometry.BLOCK_SIZE, config.ue_count - s)) for b, s in enumerate(starts)]

    def work(job):
        return _run_block(config, layout, arrs, job[0], job[1], choices, tx_pattern)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, jobs))
    else:
        parts = [work(j) for j in jobs]

    return ScenarioArrays(
        positions=np.concatenate([p[0] for p in parts]),
        serving=np.concatenate([p[1] for p in parts]),
        r=np.concatenate([p[2] for p in parts]),
        theta_deg=np.concatenate([p[3] for p in parts]),
        central=np.concatenate([p[4] for p in parts]),
        sinr_linear={c: np.concatenate([p[5][c] for p in parts]) for c in choices},
    )


def run_scenario(config: ScenarioConfig, threads: int = 1) -> list[UeSample]:
    """Drop, attach and evaluate ``config.ue_count`` UEs."""
    res = simulate(config, threads=threads)
    lin = res.sinr_linear[config.rx_pattern_choice]
    db = 10.0 * np.log10(lin)
    return [
        UeSample(position=Point2D(float(x), float(y)), serving_sector=int(s),
                 polar=PolarOffset(float(r), float(t)), sinr_linear=float(g), sinr_db=float(d),
                 central=bool(c))
        for (x, y), s, r, t, g, d, c in zip(res.positions, res.serving, res.r, res.theta_deg,
                                            lin, db, res.central)
    ]


def delta_analysis(config_base: ScenarioConfig, threads: int = 1) -> list[tuple[Point2D, float]]:
    """Per-UE ``sinr_dir_db - sinr_omni_db`` under one radio realisation.

    The directional receiver is ``config_base.rx_pattern_choice``.
    """
    if config_base.rx_pattern_choice == "omni":
        raise InvalidParameterError("delta analysis needs a directional rx_pattern_choice")
    res = simulate(config_base, choices=(config_base.rx_pattern_choice, "omni"), threads=threads)
    delta = res.sinr_db(config_base.rx_pattern_choice) - res.sinr_db("omni")
    return [(Point2D(float(x), float(y)), float(d)) for (x, y), d in zip(res.positions, delta)]


def sinr_at(points: np.ndarray, serving: np.ndarray | int, layout: NetworkLayout,
            propagation: PropagationParams, noise: NoiseModel | None,
            tx_pattern: Pattern = BS_SECTOR, rx: Pattern = OMNI, ptx_dbm: float = 46.0,
            rx_angle_mode: RxAngleMode = "geometric") -> np.ndarray:
    """Shadowing-free linear SINR at given points with a forced serving sector."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    arrs = _LayoutArrays(layout)
    r, theta_tx, bearing = _link_geometry(points, arrs)
    useful = _useful_power(ptx_dbm, propagation, tx_pattern, r, theta_tx, None)
    srv = np.broadcast_to(np.asarray(serving, dtype=int), (len(points),))
    phi = _rx_angles(srv, theta_tx, bearing, rx_angle_mode)
    noise_mw = 0.0 if noise is None else thermal_noise_mw(noise)
    return _sinr_from_links(useful, srv, phi, rx, noise_mw)


def to_db(x) -> float:
    return 10.0 * math.log10(x)
