"""Run configuration: strict TOML schema, presets and exact round-trip.

A configuration is a tree of dotted sections.  Every key is optional; omitted
keys take the stock values: the reference optical link, the reference AUV
dynamics, and the 150 s / 5 ms circling-ship tracking run.
Unknown keys are rejected so a typo cannot silently fall back to a default.

``RunConfig`` keeps the flat, typed key/value map as its canonical form;
the simulator objects (:class:`~uwoc_track.sim.Scenario`, the optical link,
contour grid and output paths) are built from it and validated on
construction.  Angles are written in degrees and converted on build, so the
stored values are exactly what the file says and ``parse_config(serialize(c))
== c`` holds bit for bit.
"""

from __future__ import annotations

import math
import re
import sys
from dataclasses import dataclass
from typing import Any, NamedTuple, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .control import GainLaw, GainSchedule
from .optics import SOLAR_MODELS, OpticalLink, Receiver, Transmitter, Water
from .sim import DEFAULT_DEPTH, ControllerConfig, DisturbanceSpec, NoiseSpec, Scenario
from .vehicle import AuvParams

PRESETS = ("nominal", "case1", "case2")
CONTROLLER_TYPES = ("pd", "nlpd", "none")


class ConfigError(ValueError):
    """Malformed or invalid configuration."""


# -- schema ------------------------------------------------------------------
# kind: "float", "int", "str", "bool", "vec2", "vec3".  Order fixes the
# serialized layout.

_NLPD = GainSchedule.nlpd_default()

_SCHEMA: tuple[tuple[str, str, Any], ...] = (
    ("scenario.name", "str", "nominal"),
    ("scenario.duration", "float", 150.0),
    ("scenario.dt", "float", 0.005),
    ("scenario.initial_eta", "vec3", (5.0, 5.0, 0.0)),
    ("scenario.initial_nu", "vec3", (0.0, 0.0, 0.0)),
    ("scenario.depth", "float", DEFAULT_DEPTH),
    ("scenario.mass_scale", "float", 1.0),
    ("scenario.rmse_window", "vec2", None),
    ("controller.type", "str", "pd"),
    ("controller.velocity_error_frame", "str", "world"),
    ("controller.kp", "float", 300.0),
    ("controller.kv", "float", 250.0),
    ("controller.nlpd.kp_a", "vec3", tuple(g.a for g in _NLPD.position)),
    ("controller.nlpd.kp_b", "vec3", tuple(g.b for g in _NLPD.position)),
    ("controller.nlpd.kp_mu", "vec3", tuple(g.mu for g in _NLPD.position)),
    ("controller.nlpd.kv_a", "vec3", tuple(g.a for g in _NLPD.velocity)),
    ("controller.nlpd.kv_b", "vec3", tuple(g.b for g in _NLPD.velocity)),
    ("controller.nlpd.kv_mu", "vec3", tuple(g.mu for g in _NLPD.velocity)),
    ("disturbance.enabled", "bool", False),
    ("disturbance.start", "float", 30.0),
    ("disturbance.duration", "float", 1.0),
    ("disturbance.wrench", "vec3", (350.0, 350.0, 350.0)),
    ("noise.enabled", "bool", False),
    ("noise.sigma_pos", "float", 0.02),
    ("noise.sigma_yaw", "float", 0.005),
    ("noise.sigma_vel", "float", 0.02),
    ("noise.seed", "int", 20210331),
    ("vehicle.m11", "float", 100.0),
    ("vehicle.m22", "float", 250.0),
    ("vehicle.m33", "float", 80.0),
    ("vehicle.d11_lin", "float", 70.0),
    ("vehicle.d22_lin", "float", 100.0),
    ("vehicle.d33_lin", "float", 50.0),
    ("vehicle.d11_quad", "float", 100.0),
    ("vehicle.d22_quad", "float", 200.0),
    ("vehicle.d33_quad", "float", 100.0),
    ("optics.solar_model", "str", "surface"),
    ("optics.transmitter.power_tx", "float", 0.1),
    ("optics.transmitter.half_angle_deg", "float", 15.0),
    ("optics.transmitter.filter_bandwidth", "float", 30.0),
    ("optics.receiver.area", "float", 1e-4),
    ("optics.receiver.fov_half_angle_deg", "float", 30.0),
    ("optics.receiver.refractive_index", "float", 1.52),
    ("optics.receiver.responsivity", "float", 0.6),
    ("optics.water.attenuation", "float", 0.15),
    ("optics.water.transmittance", "float", 0.95),
    ("optics.water.surface_irradiance", "float", 0.7645),
    ("cone.target_ber", "float", 1e-4),
    ("cone.min_bit_rate", "float", 1e7),
    ("contour.offset_min", "float", -5.0),
    ("contour.offset_max", "float", 5.0),
    ("contour.depth_min", "float", 0.0),
    ("contour.depth_max", "float", 8.0),
    ("contour.step", "float", 0.05),
    ("output.timeseries", "str", ""),
    ("output.metrics", "str", ""),
    ("output.contour", "str", ""),
)

KINDS = {key: kind for key, kind, _ in _SCHEMA}
DEFAULTS = {key: default for key, _, default in _SCHEMA}

_PRESET_OVERLAYS = {
    "nominal": {},
    "case1": {"scenario.name": "case1", "disturbance.enabled": True, "noise.enabled": True},
    "case2": {"scenario.name": "case2", "disturbance.enabled": True, "noise.enabled": True,
              "scenario.mass_scale": 1.2},
}


class ContourSpec(NamedTuple):
    offset_min: float
    offset_max: float
    depth_min: float
    depth_max: float
    step: float

    def axes(self):
        """Grid axes ``(offsets, depths)``; nodes are ``lo + i * step``."""
        import numpy as np

        def axis(lo, hi):
            n = int(math.floor((hi - lo) / self.step + 1e-9)) + 1
            return lo + np.arange(n) * self.step

        return axis(self.offset_min, self.offset_max), axis(self.depth_min, self.depth_max)


class OutputSpec(NamedTuple):
    timeseries: str
    metrics: str
    contour: str


# -- coercion ----------------------------------------------------------------

def _coerce(key: str, value: Any) -> Any:
    kind = KINDS[key]
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key}: expected a number, got {value!r}")
        return float(value)
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return value
    if kind == "bool":
        if not isinstance(value, bool):
            raise ConfigError(f"{key}: expected true or false, got {value!r}")
        return value
    if kind == "str":
        if not isinstance(value, str):
            raise ConfigError(f"{key}: expected a string, got {value!r}")
        return value
    n = 3 if kind == "vec3" else 2
    if not isinstance(value, (list, tuple)) or len(value) != n:
        raise ConfigError(f"{key}: expected an array of {n} numbers, got {value!r}")
    return tuple(_coerce_num(key, v) for v in value)


def _coerce_num(key, v):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{key}: expected numbers, got {v!r}")
    return float(v)


def _flatten(tree: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in tree.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def _line_of(text: str, key: str) -> Optional[int]:
    leaf = re.escape(key.rsplit(".", 1)[-1])
    for i, line in enumerate(text.splitlines(), 1):
        if re.match(rf"\s*(\S+\.)?\"?{leaf}\"?\s*=", line):
            return i
    return None


# -- config object -----------------------------------------------------------

@dataclass(frozen=True, eq=True)
class RunConfig:
    """Validated configuration; ``values`` maps every schema key to its value."""

    values: dict

    def __post_init__(self):
        missing = [k for k in KINDS if k not in self.values]
        extra = [k for k in self.values if k not in KINDS]
        if missing or extra:
            raise ConfigError(f"incomplete or unknown keys: missing={missing}, unknown={extra}")
        object.__setattr__(self, "values", {k: _coerce(k, v) if v is not None else None
                                            for k, v in self.values.items()})
        self._validate()

    def __getitem__(self, key: str):
        return self.values[key]

    def with_values(self, **dotted) -> "RunConfig":
        """Copy with overrides; keys use ``__`` in place of dots."""
        vals = dict(self.values)
        for k, v in dotted.items():
            key = k.replace("__", ".")
            if key not in KINDS:
                raise ConfigError(f"unknown key {key!r}")
            vals[key] = v
        return RunConfig(vals)

    def _validate(self):
        v = self.values
        if v["controller.type"] not in CONTROLLER_TYPES:
            raise ConfigError(f"controller.type must be one of {CONTROLLER_TYPES}, "
                              f"got {v['controller.type']!r}")
        if v["optics.solar_model"] not in SOLAR_MODELS:
            raise ConfigError(f"optics.solar_model must be one of {SOLAR_MODELS}")
        if not v["contour.step"] > 0:
            raise ConfigError("contour: step > 0 violated")
        for axis in ("offset", "depth"):
            if not v[f"contour.{axis}_max"] >= v[f"contour.{axis}_min"]:
                raise ConfigError(f"contour: {axis}_max >= {axis}_min violated")
        if not v["contour.depth_min"] >= 0:
            raise ConfigError("contour: depth_min >= 0 violated")
        win = v["scenario.rmse_window"]
        if win is not None and not 0 <= win[0] <= win[1] <= v["scenario.duration"]:
            raise ConfigError("scenario: 0 <= rmse_window[0] <= rmse_window[1] <= duration violated")
        # building the objects runs every module's own invariant checks
        try:
            self.scenario
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    # -- derived objects -----------------------------------------------------

    @property
    def link(self) -> OpticalLink:
        v = self.values
        tx = Transmitter(v["optics.transmitter.power_tx"],
                         math.radians(v["optics.transmitter.half_angle_deg"]),
                         v["optics.transmitter.filter_bandwidth"])
        rx = Receiver(v["optics.receiver.area"], math.radians(v["optics.receiver.fov_half_angle_deg"]),
                      v["optics.receiver.refractive_index"], v["optics.receiver.responsivity"])
        water = Water(v["optics.water.attenuation"], v["optics.water.transmittance"],
                      v["optics.water.surface_irradiance"])
        return OpticalLink(tx, rx, water, v["optics.solar_model"])

    @property
    def vehicle(self) -> AuvParams:
        v = self.values
        names = ("m11", "m22", "m33", "d11_lin", "d22_lin", "d33_lin",
                 "d11_quad", "d22_quad", "d33_quad")
        return AuvParams(**{n: v[f"vehicle.{n}"] for n in names})

    @property
    def controller(self) -> ControllerConfig:
        v = self.values
        kind = v["controller.type"]
        frame = v["controller.velocity_error_frame"]
        if kind == "nlpd":
            n = "controller.nlpd."
            pos = tuple(GainLaw(*g) for g in zip(v[n + "kp_a"], v[n + "kp_b"], v[n + "kp_mu"]))
            vel = tuple(GainLaw(*g) for g in zip(v[n + "kv_a"], v[n + "kv_b"], v[n + "kv_mu"]))
            return ControllerConfig.nlpd(GainSchedule(pos, vel), velocity_frame=frame)
        if not (v["controller.kp"] > 0 and v["controller.kv"] > 0):
            raise ConfigError("controller: kp > 0 and kv > 0 violated")
        return ControllerConfig(kind, GainSchedule.pd(v["controller.kp"], v["controller.kv"]), frame)

    @property
    def scenario(self) -> Scenario:
        v = self.values
        dist = noise = None
        if v["disturbance.enabled"]:
            dist = DisturbanceSpec(v["disturbance.start"], v["disturbance.duration"],
                                   v["disturbance.wrench"])
        if v["noise.enabled"]:
            noise = NoiseSpec(v["noise.sigma_pos"], v["noise.sigma_yaw"], v["noise.sigma_vel"],
                              v["noise.seed"])
        return Scenario(
            name=v["scenario.name"], duration=v["scenario.duration"], dt=v["scenario.dt"],
            initial_eta=v["scenario.initial_eta"], initial_nu=v["scenario.initial_nu"],
            depth=v["scenario.depth"], controller=self.controller, disturbance=dist, noise=noise,
            mass_scale=v["scenario.mass_scale"], vehicle=self.vehicle, link=self.link,
            target_ber=v["cone.target_ber"], min_bit_rate=v["cone.min_bit_rate"],
            rmse_window=v["scenario.rmse_window"],
        )

    @property
    def contour(self) -> ContourSpec:
        return ContourSpec(*(self.values[f"contour.{f}"] for f in ContourSpec._fields))

    @property
    def output(self) -> OutputSpec:
        return OutputSpec(*(self.values[f"output.{f}"] for f in OutputSpec._fields))

    @property
    def seed(self) -> Optional[int]:
        return self.values["noise.seed"] if self.values["noise.enabled"] else None


def default_config() -> RunConfig:
    return RunConfig(dict(DEFAULTS))


def preset(name: str) -> RunConfig:
    """Stock experiment: ``nominal``, ``case1`` (pulse + noise) or ``case2`` (case1, mass x1.2)."""
    if name not in _PRESET_OVERLAYS:
        raise ConfigError(f"unknown preset {name!r}; expected one of {PRESETS}")
    vals = dict(DEFAULTS)
    vals.update(_PRESET_OVERLAYS[name])
    return RunConfig(vals)


def parse_config(text: str) -> RunConfig:
    """Parse and validate configuration text.

    An optional top-level ``preset`` key selects the base the file overlays.
    """
    try:
        tree = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"parse error: {exc}") from None
    base = tree.pop("preset", "nominal")
    if not isinstance(base, str):
        raise ConfigError("preset: expected a string")
    vals = dict(preset(base).values)
    for key, value in _flatten(tree).items():
        if key not in KINDS:
            line = _line_of(text, key)
            where = f" (line {line})" if line else ""
            raise ConfigError(f"unknown key {key!r}{where}")
        try:
            vals[key] = _coerce(key, value)
        except ConfigError as exc:
            line = _line_of(text, key)
            raise ConfigError(f"{exc}" + (f" (line {line})" if line else "")) from None
    return RunConfig(vals)


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from None
    try:
        return parse_config(text)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _fmt(kind: str, value: Any) -> str:
    if kind == "float":
        return _float(value)
    if kind == "int":
        return str(value)
    if kind == "bool":
        return "true" if value else "false"
    if kind == "str":
        return _string(value)
    return "[" + ", ".join(_float(x) for x in value) + "]"


def _string(s: str) -> str:
    out = []
    for ch in s:
        if ch in '"\\':
            out.append("\\" + ch)
        elif ord(ch) < 0x20 or ord(ch) == 0x7F:
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    return '"' + "".join(out) + '"'


def _float(x: float) -> str:
    # repr is the shortest string that round-trips; TOML needs inf/nan spelled out
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(x))


def serialize(config: RunConfig) -> str:
    """Canonical text; every key is written, grouped by section."""
    lines: list[str] = []
    section = None
    for key, kind, _ in _SCHEMA:
        value = config.values[key]
        if value is None:
            continue
        sect, leaf = key.rsplit(".", 1)
        if sect != section:
            if lines:
                lines.append("")
            lines.append(f"[{sect}]")
            section = sect
        lines.append(f"{leaf} = {_fmt(kind, value)}")
    return "\n".join(lines) + "\n"
