"""Run-configuration loading.

A run file is YAML (JSON is accepted as-is since it is a YAML subset)::

    defaults:
      rings: 4
      ue_count: 100000
      seed: 1
      propagation: {path_loss_exponent: 3.5, k_ref_db: -20.0, shadowing_sigma_db: 8.0}
      noise: {noise_figure_db: 9.0}
    quantiles: [0.05, 0.1, 0.25, 0.5, 0.75, 0.9]
    matrix:                       # cartesian product, expanded into scenarios
      isd: [2000, 5000, 10000]
      rx: [omni, dir_35, dir_17_5]
      shadowing: [false, true]
    scenarios:                    # explicit entries, optional
      - {name: extra, isd: 3000, rx: omni, shadowing: false}
    fluid:                        # optional probe grid for compare-fluid
      isd: 5000
      rings: 6
      rx: [omni, dir_17_5]
      radii_m: [312.5, 625.0]
      angles_deg: [-30, 0, 30]

Every scenario field not given falls back to ``defaults`` and then to the
library defaults.  Errors carry the line of the offending key.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import yaml

from .errors import InvalidParameterError
from .montecarlo import RX_CHOICES, ScenarioConfig
from .propagation import NoiseModel, PropagationParams

DEFAULT_QUANTILES = (0.01, 0.02, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99)

_SCENARIO_KEYS = {"name", "isd", "rings", "rx", "ue_count", "seed", "shadowing", "ptx_dbm",
                  "drop_region", "rx_angle_mode", "rx_boresight_gain", "propagation", "noise"}
_DEFAULT_KEYS = _SCENARIO_KEYS - {"name", "isd", "rx", "shadowing"}
_TOP_KEYS = {"defaults", "quantiles", "matrix", "scenarios", "fluid", "neutral_band_db",
             "output_dir"}
_FLUID_KEYS = {"isd", "rings", "rx", "radii_m", "angles_deg", "kernel", "integral_step_deg"}


class ConfigError(Exception):
    def __init__(self, message: str, source: str = "<config>", line: int | None = None):
        self.message = message
        self.source = source
        self.line = line
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class NamedScenario:
    name: str
    config: ScenarioConfig


@dataclass(frozen=True)
class FluidGrid:
    isd: float
    rings: int
    rx: tuple[str, ...]
    radii_m: tuple[float, ...]
    angles_deg: tuple[float, ...]
    kernel: str = "averaged"
    integral_step_deg: float = 0.05


@dataclass(frozen=True)
class RunManifest:
    scenarios: tuple[NamedScenario, ...]
    quantiles: tuple[float, ...] = DEFAULT_QUANTILES
    neutral_band_db: float = 0.5
    fluid: FluidGrid | None = None
    output_dir: str | None = None
    base: ScenarioConfig = field(default_factory=ScenarioConfig)
    checksum: str = ""

    def resolved(self) -> dict[str, Any]:
        """Plain-data echo of the fully resolved run."""
        out = {
            "config_sha256": self.checksum,
            "quantiles": list(self.quantiles),
            "neutral_band_db": self.neutral_band_db,
            "scenarios": [{"name": s.name, **asdict(s.config)} for s in self.scenarios],
        }
        if self.fluid is not None:
            out["fluid"] = asdict(self.fluid)
        return out


def _line_map(text: str) -> dict[tuple, int]:
    """Map key paths to 1-based source lines."""
    lines: dict[tuple, int] = {}

    def walk(node, path):
        lines[path] = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                walk(v, path + (k.value,))
                # Prefer the key's line over the value's.
                lines[path + (k.value,)] = k.start_mark.line + 1
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                walk(v, path + (i,))

    root = yaml.compose(text, Loader=yaml.SafeLoader)
    if root is not None:
        walk(root, ())
    return lines


class _Parser:
    def __init__(self, text: str, source: str):
        self.source = source
        try:
            self.data = yaml.safe_load(text)
            self.lines = _line_map(text)
        except yaml.MarkedYAMLError as exc:
            line = exc.problem_mark.line + 1 if exc.problem_mark else None
            raise ConfigError(f"parse error: {exc.problem}", source, line) from None
        except yaml.YAMLError as exc:
            raise ConfigError(f"parse error: {exc}", source) from None

    def fail(self, message: str, path: tuple = ()):
        # Fall back to the nearest ancestor that has a recorded line.
        while path and path not in self.lines:
            path = path[:-1]
        raise ConfigError(message, self.source, self.lines.get(path))

    def mapping(self, value, path, allowed):
        if not isinstance(value, dict):
            self.fail("expected a mapping", path)
        for key in value:
            if key not in allowed:
                self.fail(f"unknown key {key!r}", path + (key,))
        return value

    def number(self, value, path, *, integer=False):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(f"expected a number, got {value!r}", path)
        if integer and int(value) != value:
            self.fail(f"expected an integer, got {value!r}", path)
        return int(value) if integer else float(value)

    def numbers(self, value, path):
        if not isinstance(value, list) or not value:
            self.fail("expected a non-empty list", path)
        return tuple(self.number(v, path + (i,)) for i, v in enumerate(value))

    def flag(self, value, path):
        if not isinstance(value, bool):
            self.fail(f"expected true/false, got {value!r}", path)
        return value

    def dataclass_block(self, cls, value, path):
        names = {f.name for f in fields(cls)}
        self.mapping(value, path, names)
        kwargs = {}
        for k, v in value.items():
            if isinstance(v, bool):
                kwargs[k] = self.flag(v, path + (k,))
            else:
                kwargs[k] = self.number(v, path + (k,))
        try:
            return cls(**kwargs)
        except InvalidParameterError as exc:
            self.fail(str(exc), path)

    def apply(self, base: ScenarioConfig, block: dict, path: tuple) -> ScenarioConfig:
        updates: dict[str, Any] = {}
        for key, value in block.items():
            p = path + (key,)
            if key in ("isd", "ptx_dbm"):
                updates[key] = self.number(value, p)
            elif key in ("rings", "ue_count", "seed"):
                updates[key] = self.number(value, p, integer=True)
            elif key == "rx":
                if value not in RX_CHOICES:
                    self.fail(f"rx must be one of {list(RX_CHOICES)}, got {value!r}", p)
                updates["rx_pattern_choice"] = value
            elif key == "shadowing":
                updates["shadowing_enabled"] = self.flag(value, p)
            elif key in ("drop_region", "rx_angle_mode", "rx_boresight_gain"):
                if not isinstance(value, str):
                    self.fail(f"expected a string, got {value!r}", p)
                updates[key] = value
            elif key == "propagation":
                merged = {**asdict(base.propagation), **self.mapping(
                    value, p, {f.name for f in fields(PropagationParams)})}
                updates[key] = self.dataclass_block(PropagationParams, merged, p)
            elif key == "noise":
                merged = {**asdict(base.noise), **self.mapping(
                    value, p, {f.name for f in fields(NoiseModel)})}
                updates[key] = self.dataclass_block(NoiseModel, merged, p)
        try:
            return replace(base, **updates)
        except InvalidParameterError as exc:
            # Point at the key the validator complained about when it is named.
            culprit = next((k for k in block if str(exc).startswith(k)), None)
            self.fail(str(exc), path + ((culprit,) if culprit else ()))

    def parse(self) -> RunManifest:
        data = self.data
        if data is None:
            self.fail("empty configuration")
        self.mapping(data, (), _TOP_KEYS)

        base = ScenarioConfig()
        if "defaults" in data:
            base = self.apply(base, self.mapping(data["defaults"], ("defaults",), _DEFAULT_KEYS),
                              ("defaults",))

        scenarios: list[NamedScenario] = []
        if "matrix" in data:
            m = self.mapping(data["matrix"], ("matrix",), {"isd", "rx", "shadowing"})
            axes = []
            for key in ("isd", "rx", "shadowing"):
                vals = m.get(key)
                if key not in m:
                    vals = [getattr(base, {"rx": "rx_pattern_choice",
                                           "shadowing": "shadowing_enabled"}.get(key, key))]
                elif not isinstance(vals, list) or not vals:
                    self.fail("expected a non-empty list", ("matrix", key))
                axes.append(vals)
            for isd, rx, sh in itertools.product(*axes):
                cfg = self.apply(base, {"isd": isd, "rx": rx, "shadowing": sh}, ("matrix",))
                scenarios.append(NamedScenario(scenario_name(cfg), cfg))
        for i, entry in enumerate(data.get("scenarios") or []):
            p = ("scenarios", i)
            entry = self.mapping(entry, p, _SCENARIO_KEYS)
            cfg = self.apply(base, {k: v for k, v in entry.items() if k != "name"}, p)
            name = entry.get("name", scenario_name(cfg))
            if not isinstance(name, str) or not name.replace("_", "").replace("-", "").isalnum():
                self.fail(f"invalid scenario name {name!r}", p + ("name",))
            scenarios.append(NamedScenario(name, cfg))
        if not scenarios and "fluid" not in data:
            self.fail("no scenarios defined (use 'matrix' or 'scenarios')")
        names = [s.name for s in scenarios]
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            self.fail(f"duplicate scenario names: {dupes}", ("scenarios",))

        quantiles = DEFAULT_QUANTILES
        if "quantiles" in data:
            quantiles = self.numbers(data["quantiles"], ("quantiles",))
            for i, q in enumerate(quantiles):
                if not 0 < q <= 1:
                    self.fail(f"quantile {q} outside (0, 1]", ("quantiles", i))

        band = 0.5
        if "neutral_band_db" in data:
            band = self.number(data["neutral_band_db"], ("neutral_band_db",))
            if band < 0:
                self.fail("neutral_band_db must be non-negative", ("neutral_band_db",))

        fluid = None
        if "fluid" in data:
            fluid = self.parse_fluid(data["fluid"], base)

        out_dir = data.get("output_dir")
        if out_dir is not None and not isinstance(out_dir, str):
            self.fail("output_dir must be a string", ("output_dir",))

        return RunManifest(scenarios=tuple(scenarios), quantiles=tuple(quantiles),
                           neutral_band_db=band, fluid=fluid, output_dir=out_dir, base=base)

    def parse_fluid(self, block, base: ScenarioConfig) -> FluidGrid:
        p = ("fluid",)
        self.mapping(block, p, _FLUID_KEYS)
        for key in ("radii_m", "angles_deg"):
            if key not in block:
                self.fail(f"missing key {key!r}", p)
        rx = block.get("rx", ["omni", "dir_17_5"])
        if isinstance(rx, str):
            rx = [rx]
        if not isinstance(rx, list) or any(r not in RX_CHOICES for r in rx):
            self.fail(f"rx must list values from {list(RX_CHOICES)}", p + ("rx",))
        kernel = block.get("kernel", "averaged")
        if kernel not in ("integrated", "averaged"):
            self.fail("kernel must be 'integrated' or 'averaged'", p + ("kernel",))
        isd = self.number(block.get("isd", base.isd), p + ("isd",))
        if isd <= 0:
            self.fail("isd must be positive", p + ("isd",))
        rings = self.number(block.get("rings", 6), p + ("rings",), integer=True)
        if rings < 0:
            self.fail("rings must be non-negative", p + ("rings",))
        step = self.number(block.get("integral_step_deg", 0.05), p + ("integral_step_deg",))
        radii = self.numbers(block["radii_m"], p + ("radii_m",))
        for i, r in enumerate(radii):
            if r <= 0:
                self.fail(f"radius {r} must be positive", p + ("radii_m", i))
        return FluidGrid(isd=isd, rings=rings, rx=tuple(rx), radii_m=radii,
                         angles_deg=self.numbers(block["angles_deg"], p + ("angles_deg",)),
                         kernel=kernel, integral_step_deg=step)


def scenario_name(cfg: ScenarioConfig) -> str:
    shadow = "shadow" if cfg.shadowing_enabled else "noshadow"
    return f"isd{cfg.isd:g}_{cfg.rx_pattern_choice}_{shadow}"


def parse_config(text: str, source: str = "<config>") -> RunManifest:
    manifest = _Parser(text, source).parse()
    checksum = hashlib.sha256(text.encode("utf-8")).hexdigest()
    return replace(manifest, checksum=checksum)


def load_config(path: str | Path) -> RunManifest:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    return parse_config(text, str(path))
