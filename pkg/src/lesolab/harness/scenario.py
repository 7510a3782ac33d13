"""Declarative closed-loop experiments and their INI file format.

A scenario file is an INI document. Every option has a flat dotted name
``<section>.<key>`` (``plant.m1``, ``learner.alpha``); unknown names are
errors. Signal sections may be split into labelled parts that are summed,
e.g. ``[reference.training]`` and ``[reference.step]``.

Numbers accept ``pi`` and products/quotients such as ``0.5*pi`` or ``pi/10``.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import math
import re
from dataclasses import asdict, dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Mapping

from ..errors import ConfigError
from ..eso import EsoVariant, normalize_tag
from ..learner import LearnerConfig
from ..linalg import canonical_transform
from ..plant import NoiseSpec, PlantModel, SignalSpec, build_from_transfer_function, build_two_mass

SIGNAL_GROUPS = ("reference", "w1", "w2")
_NUMBER = re.compile(r"^[+-]?(\d+\.?\d*(e[+-]?\d+)?|\.\d+(e[+-]?\d+)?|inf|pi)$", re.IGNORECASE)


@dataclass(frozen=True)
class PlantSpec:
    """Either the two-mass benchmark or a transfer function ``num/den`` (ascending)."""

    kind: str = "two_mass"
    m1: float = 1.0
    m2: float = 1.0
    k: float = 1.0
    c1: float = 0.0
    c2: float = 1.0
    numerator: tuple[float, ...] = ()
    denominator: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("two_mass", "transfer_function"):
            raise ConfigError(f"unknown plant kind {self.kind!r}")

    def build(self) -> PlantModel:
        if self.kind == "two_mass":
            return build_two_mass(self.m1, self.m2, self.k, self.c1, self.c2)
        return build_from_transfer_function(self.numerator, self.denominator)

    def default_a(self) -> float:
        """Known coefficient on the (n-1)-th output derivative for the model-based observer."""
        if self.kind == "two_mass":
            return -self.k * (self.m1 + self.m2) / (self.m1 * self.m2)
        canon = canonical_transform(self.build().nominal())
        return float(canon.last_row[-2])


@dataclass(frozen=True)
class ObserverSpec:
    variant: str = "model_free"
    omega_o: float = 10.0
    a: float | None = None

    def __post_init__(self):
        try:
            object.__setattr__(self, "variant", normalize_tag(self.variant))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if not self.omega_o > 0:
            raise ConfigError("observer.omega_o must be positive")


@dataclass(frozen=True)
class ControllerSpec:
    omega_c: float = 1.0
    b0: float = 1.0
    clamp: float | None = None

    def __post_init__(self):
        if not self.omega_c > 0:
            raise ConfigError("controller.omega_c must be positive")
        if self.b0 == 0:
            raise ConfigError("controller.b0 must be nonzero")


@dataclass(frozen=True)
class MetricsSpec:
    """Where the step response and the disturbance-rejection window sit."""

    step_time: float | None = None
    step_end: float | None = None
    window_start: float | None = None
    window_end: float | None = None
    band: float = 0.02


@dataclass(frozen=True)
class Scenario:
    name: str = "scenario"
    plant: PlantSpec = field(default_factory=PlantSpec)
    observer: ObserverSpec = field(default_factory=ObserverSpec)
    controller: ControllerSpec = field(default_factory=ControllerSpec)
    learner: LearnerConfig = field(default_factory=LearnerConfig)
    reference: tuple[SignalSpec, ...] = ()
    w1: tuple[SignalSpec, ...] = ()
    w2: tuple[SignalSpec, ...] = ()
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    dt: float = 1e-3
    horizon: float = 10.0
    seed: int = 0
    metrics: MetricsSpec = field(default_factory=MetricsSpec)

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError("scenario.dt must be positive")
        if not self.horizon > 0:
            raise ConfigError("scenario.horizon must be positive")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("scenario.seed must be an unsigned 64-bit integer")

    @property
    def steps(self) -> int:
        return int(round(self.horizon / self.dt))

    def variant(self) -> EsoVariant:
        a = self.observer.a
        if a is None:
            a = self.plant.default_a() if self.observer.variant == "model_based" else 0.0
        return EsoVariant(self.observer.variant, self.controller.b0, self.plant.build().n, a)

    def with_variant(self, variant: str, omega_o: float | None = None) -> "Scenario":
        obs = replace(self.observer, variant=variant)
        if omega_o is not None:
            obs = replace(obs, omega_o=omega_o)
        return replace(self, observer=obs)

    def digest(self) -> str:
        """Stable SHA-256 of the scenario contents."""
        blob = json.dumps(asdict(self), sort_keys=True, default=str, allow_nan=True)
        return hashlib.sha256(blob.encode()).hexdigest()


# -- parsing -----------------------------------------------------------------

def parse_number(text: str) -> float:
    """Parse a float, allowing ``pi`` factors: ``3``, ``pi``, ``0.5*pi``, ``pi/10``."""
    s = text.strip().replace(" ", "")
    if not s:
        raise ConfigError("empty number")
    tokens = re.split(r"([*/])", s)
    value = None
    op = "*"
    for tok in tokens:
        if tok in ("*", "/"):
            op = tok
            continue
        if not _NUMBER.match(tok):
            raise ConfigError(f"cannot parse number {text!r}")
        v = math.pi if tok.lower().lstrip("+-") == "pi" else float(tok)
        if tok.startswith("-") and tok.lower().endswith("pi"):
            v = -v
        if value is None:
            value = v
        elif op == "*":
            value *= v
        else:
            value /= v
    return float(value)


def _parse_optional(text: str) -> float | None:
    return None if text.strip().lower() in ("", "none", "off") else parse_number(text)


def _parse_list(text: str) -> tuple[float, ...]:
    return tuple(parse_number(p) for p in text.replace(",", " ").split())


def _parse_int(text: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise ConfigError(f"expected an integer, got {text!r}") from None


_SCHEMA: dict[str, dict] = {
    "scenario": {"name": str.strip, "dt": parse_number, "horizon": parse_number, "seed": _parse_int},
    "plant": {
        "kind": str.strip, "m1": parse_number, "m2": parse_number, "k": parse_number,
        "c1": parse_number, "c2": parse_number, "numerator": _parse_list, "denominator": _parse_list,
    },
    "observer": {"variant": str.strip, "omega_o": parse_number, "a": _parse_optional},
    "controller": {"omega_c": parse_number, "b0": parse_number, "clamp": _parse_optional},
    "learner": {
        "alpha": parse_number, "batch_capacity": _parse_int, "iterations_per_step": _parse_int,
        "warmup": _parse_int, "input_gain_floor": _parse_optional, "freeze_time": parse_number,
    },
    "noise": {"power": parse_number, "sample_time": parse_number},
    "metrics": {
        "step_time": _parse_optional, "step_end": _parse_optional,
        "window_start": _parse_optional, "window_end": _parse_optional, "band": parse_number,
    },
}
_SIGNAL_KEYS = {
    "kind": str.strip, "amplitude": parse_number, "frequency": parse_number, "phase": parse_number,
    "start_time": parse_number, "ramp_duration": parse_number, "final_value": parse_number,
    "stop_time": parse_number,
}


def _schema_for(section: str) -> dict:
    group = section.split(".", 1)[0]
    if group in SIGNAL_GROUPS:
        return _SIGNAL_KEYS
    if section in _SCHEMA:
        return _SCHEMA[section]
    raise ConfigError(f"unknown section [{section}]")


def parse_scenario(sections: Mapping[str, Mapping[str, str]]) -> Scenario:
    """Build a scenario from ``{section: {key: text}}``; missing keys keep defaults."""
    values: dict[str, dict] = {}
    for section, items in sections.items():
        schema = _schema_for(section)
        parsed = {}
        for key, text in items.items():
            if key not in schema:
                raise ConfigError(f"unknown key {section}.{key}")
            try:
                parsed[key] = schema[key](text)
            except ConfigError as exc:
                raise ConfigError(f"{section}.{key}: {exc}") from None
        values[section] = parsed

    def signals(group: str) -> tuple[SignalSpec, ...]:
        out = []
        for section in sorted(s for s in values if s.split(".", 1)[0] == group):
            try:
                out.append(SignalSpec(**values[section]))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"[{section}]: {exc}") from None
        return tuple(out)

    def build(cls, section: str):
        try:
            return cls(**values.get(section, {}))
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[{section}]: {exc}") from None

    top = values.get("scenario", {})
    seed = top.get("seed", 0)
    try:
        noise = NoiseSpec(seed=seed, **values.get("noise", {}))
    except ValueError as exc:
        raise ConfigError(f"[noise]: {exc}") from None
    return Scenario(
        name=top.get("name", "scenario"),
        plant=build(PlantSpec, "plant"),
        observer=build(ObserverSpec, "observer"),
        controller=build(ControllerSpec, "controller"),
        learner=build(LearnerConfig, "learner"),
        reference=signals("reference"),
        w1=signals("w1"),
        w2=signals("w2"),
        noise=noise,
        dt=top.get("dt", 1e-3),
        horizon=top.get("horizon", 10.0),
        seed=seed,
        metrics=build(MetricsSpec, "metrics"),
    )


def read_sections(text: str) -> dict[str, dict[str, str]]:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed scenario file: {exc}") from None
    return {s: dict(cp.items(s)) for s in cp.sections()}


def apply_overrides(sections: dict[str, dict[str, str]], overrides: Mapping[str, str]) -> dict:
    """Set flat ``section.key`` values (the section is everything before the last dot)."""
    out = {s: dict(v) for s, v in sections.items()}
    for name, text in overrides.items():
        if "." not in name:
            raise ConfigError(f"override {name!r} is not of the form section.key")
        section, key = name.rsplit(".", 1)
        out.setdefault(section, {})[key] = str(text)
    return out


def bundled_configs() -> list[str]:
    root = resources.files("lesolab") / "configs"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".ini"))


def _resolve(path: str | Path) -> str:
    p = Path(path)
    if p.is_file():
        return p.read_text()
    name = p.name[:-4] if p.name.endswith(".ini") else p.name
    if name in bundled_configs() and not p.parent.name:
        return (resources.files("lesolab") / "configs" / f"{name}.ini").read_text()
    raise ConfigError(f"scenario file not found: {path}")


def load_scenario(path: str | Path, overrides: Mapping[str, str] | None = None) -> Scenario:
    """Load a scenario file, or a bundled config by bare name (e.g. ``two_mass_benchmark``)."""
    sections = read_sections(_resolve(path))
    if overrides:
        sections = apply_overrides(sections, overrides)
    return parse_scenario(sections)


__all__ = [
    "ControllerSpec", "MetricsSpec", "ObserverSpec", "PlantSpec", "Scenario",
    "apply_overrides", "bundled_configs", "load_scenario", "parse_number",
    "parse_scenario", "read_sections",
]
