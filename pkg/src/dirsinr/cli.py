"""Command-line scenario runner.

    dirsinr run <config> [--out DIR] [--seed-override N] [--threads N]
    dirsinr compare-fluid <config> [--out DIR] [--threads N]

Exit status: 0 success, 2 configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import logging
import math
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import geometry
from .config import ConfigError, FluidGrid, NamedScenario, RunManifest, load_config
from .errors import InvalidParameterError
from .fluid import FluidParams, fluid_sinr
from .montecarlo import ScenarioArrays, ScenarioConfig, simulate, sinr_at
from .stats import build_cdf, delta_summary, shannon_throughput

log = logging.getLogger("dirsinr")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3


def _atomic_write(path: Path, text: str) -> str:
    """Write via a temp file in the same directory; returns the sha256."""
    data = text.encode("utf-8")
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return hashlib.sha256(data).hexdigest()


def _csv(checksum: str, columns: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write(f"# config_sha256={checksum}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def _fmt(x: float, digits: int = 6) -> str:
    if not math.isfinite(x):
        return "nan"
    s = f"{x:.{digits}f}"
    return "0." + "0" * digits if s == "-0." + "0" * digits else s


def cdf_table(sinr_db: np.ndarray, checksum: str) -> str:
    cdf = build_cdf(sinr_db)
    n = cdf.count
    rows = ((_fmt(v), _fmt((i + 1) / n, 8)) for i, v in enumerate(cdf.sorted_values))
    return _csv(checksum, ["value_db", "cumulative_prob"], rows)


def quantile_table(sinr_db: np.ndarray, quantiles, bandwidth_hz: float, checksum: str) -> str:
    cdf = build_cdf(sinr_db)
    rows = []
    for p in quantiles:
        q = cdf.quantile(p)
        mbps = shannon_throughput(bandwidth_hz, 10.0 ** (q / 10.0)) / 1e6
        rows.append((f"{p:g}", _fmt(q), _fmt(mbps)))
    return _csv(checksum, ["p", "sinr_db", "throughput_mbps"], rows)


def delta_table(positions: np.ndarray, delta_db: np.ndarray, checksum: str) -> str:
    rows = ((_fmt(x, 3), _fmt(y, 3), _fmt(d)) for (x, y), d in zip(positions, delta_db))
    return _csv(checksum, ["x_m", "y_m", "delta_db"], rows)


def _pair_key(cfg: ScenarioConfig):
    # Everything that fixes the radio realisation, i.e. all but the receiver.
    return replace(cfg, rx_pattern_choice="omni")


def find_delta_pairs(scenarios) -> list[tuple[NamedScenario, NamedScenario]]:
    """(directional, omni) scenario pairs that share seed, drops and shadowing."""
    omni = {_pair_key(s.config): s for s in scenarios if s.config.rx_pattern_choice == "omni"}
    pairs = []
    for s in scenarios:
        if s.config.rx_pattern_choice != "omni" and _pair_key(s.config) in omni:
            pairs.append((s, omni[_pair_key(s.config)]))
    return pairs


def run_manifest(manifest: RunManifest, out_dir: Path, threads: int = 1) -> dict[str, str]:
    """Execute every scenario and write reports; returns {file name: sha256}."""
    out_dir.mkdir(parents=True, exist_ok=True)
    checksum = manifest.checksum
    written: dict[str, str] = {}
    results: dict[str, ScenarioArrays] = {}

    for sc in manifest.scenarios:
        log.info("scenario %s (%d UEs)", sc.name, sc.config.ue_count)
        res = simulate(sc.config, threads=threads)
        results[sc.name] = res
        db = res.sinr_db(sc.config.rx_pattern_choice)
        for fname, text in (
            (f"cdf_{sc.name}.csv", cdf_table(db, checksum)),
            (f"quantiles_{sc.name}.csv",
             quantile_table(db, manifest.quantiles, sc.config.noise.bandwidth_hz, checksum)),
        ):
            written[fname] = _atomic_write(out_dir / fname, text)

    summaries = {}
    for dir_sc, omni_sc in find_delta_pairs(manifest.scenarios):
        a, b = results[dir_sc.name], results[omni_sc.name]
        delta = a.sinr_db(dir_sc.config.rx_pattern_choice) - b.sinr_db("omni")
        fname = f"delta_{dir_sc.name}.csv"
        written[fname] = _atomic_write(out_dir / fname, delta_table(a.positions, delta, checksum))
        s = delta_summary(delta, manifest.neutral_band_db)
        summaries[dir_sc.name] = {"omni_reference": omni_sc.name, **s.__dict__}

    if manifest.fluid is not None:
        written["fluid_compare.csv"] = _atomic_write(
            out_dir / "fluid_compare.csv",
            fluid_table(manifest.fluid, manifest.base, checksum))

    echo = {**manifest.resolved(), "delta_summaries": summaries,
            "artifacts": dict(sorted(written.items()))}
    written["manifest.json"] = _atomic_write(
        out_dir / "manifest.json", json.dumps(echo, indent=2, sort_keys=True) + "\n")
    return written


def fluid_rows(grid: FluidGrid, base: ScenarioConfig):
    """Yield (rx, r, theta, fluid_db, mc_db, diff_db, note) per probe."""
    layout = geometry.build_layout(grid.isd, grid.rings)
    serving = 0
    boresight = layout.sectors[serving].boresight_deg
    prop = replace(base.propagation, shadowing_enabled=False)
    for rx_choice in grid.rx:
        rx = base.receiver(rx_choice)
        params = FluidParams.from_isd(
            grid.isd, path_loss_exponent=prop.path_loss_exponent, ptx_dbm=base.ptx_dbm,
            k_ref_db=prop.k_ref_db, noise=base.noise, rx_pattern=rx,
            integral_step_deg=grid.integral_step_deg, kernel=grid.kernel)
        for r in grid.radii_m:
            for theta in grid.angles_deg:
                if r >= grid.isd:
                    log.warning("probe r=%g m >= isd=%g m skipped", r, grid.isd)
                    yield rx_choice, r, theta, math.nan, math.nan, math.nan, "skipped:r>=isd"
                    continue
                b = math.radians(boresight + theta)
                point = np.array([[r * math.cos(b), r * math.sin(b)]])
                mc = float(sinr_at(point, serving, layout, prop, base.noise, rx=rx,
                                   ptx_dbm=base.ptx_dbm, rx_angle_mode=base.rx_angle_mode)[0])
                fl = fluid_sinr(params, r, theta)
                f_db, m_db = 10.0 * math.log10(fl), 10.0 * math.log10(mc)
                yield rx_choice, r, theta, f_db, m_db, f_db - m_db, ""


def fluid_table(grid: FluidGrid, base: ScenarioConfig, checksum: str) -> str:
    rows = ((rx, _fmt(r, 3), _fmt(t, 3), _fmt(f), _fmt(m), _fmt(d), note)
            for rx, r, t, f, m, d, note in fluid_rows(grid, base))
    return _csv(checksum, ["rx", "r_m", "theta_deg", "fluid_sinr_db", "mc_sinr_db",
                           "diff_db", "note"], rows)


def _apply_seed_override(manifest: RunManifest, seed: int | None) -> RunManifest:
    if seed is None:
        return manifest
    scenarios = tuple(replace(s, config=replace(s.config, seed=seed)) for s in manifest.scenarios)
    return replace(manifest, scenarios=scenarios, base=replace(manifest.base, seed=seed))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dirsinr",
        description="Downlink SINR with omnidirectional vs directional UE antennas.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (("run", "run every scenario in a config file"),
                            ("compare-fluid", "compare the fluid model with exact sums")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", type=Path)
        p.add_argument("--out", type=Path, default=None, help="output directory")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads; results do not depend on it")
        if name == "run":
            p.add_argument("--seed-override", type=int, default=None,
                           help="replace every scenario seed")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        manifest = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: cannot read {args.config}: {exc.strerror}", file=sys.stderr)
        return EXIT_CONFIG

    out_dir = args.out or Path(manifest.output_dir or "out")
    try:
        if args.command == "run":
            manifest = _apply_seed_override(manifest, args.seed_override)
            written = run_manifest(manifest, out_dir, threads=args.threads)
        else:
            if manifest.fluid is None:
                print(f"config error: {args.config}: no 'fluid' section", file=sys.stderr)
                return EXIT_CONFIG
            out_dir.mkdir(parents=True, exist_ok=True)
            written = {"fluid_compare.csv": _atomic_write(
                out_dir / "fluid_compare.csv",
                fluid_table(manifest.fluid, manifest.base, manifest.checksum))}
    except InvalidParameterError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    for name in sorted(written):
        print(out_dir / name)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
