"""INI-style scenario files.

Sections mirror the groups of :class:`ScenarioConfig`::

    [run]
    preset = fig2        ; optional base preset
    duration = 4000

    [monitor]
    q_init = 20

Resolution order, later wins: built-in defaults, the preset, the file, then
``section.key=value`` overrides from the command line.
"""

from __future__ import annotations

import configparser
import dataclasses
import io
import math
from pathlib import Path

from .closedloop import ScenarioConfig
from .presets import PRESETS

SECTIONS = {
    "plant": ("tau_c", "disturbance", "disturbance_start", "disturbance_stop"),
    "cost": ("horizon", "Q", "R", "J_floor", "reference_levels", "reference_period"),
    "solver": ("momentum", "s_max", "lipschitz", "u_max"),
    "monitor": ("q_init", "delta", "q_max", "adaptive"),
    "run": ("duration", "x0", "p0", "warm_start"),
}
_SECTION_OF = {key: sec for sec, keys in SECTIONS.items() for key in keys}
_DEFAULTS = {f.name: f.default for f in dataclasses.fields(ScenarioConfig)}
_BOOL = {"1": True, "yes": True, "true": True, "on": True,
         "0": False, "no": False, "false": False, "off": False}


class ConfigError(ValueError):
    pass


def parse_value(key: str, text: str):
    """Convert one textual value to the type the config field expects."""
    text = text.strip()
    default = _DEFAULTS[key]
    try:
        if key == "s_max":
            if text.lower() in ("none", "inf", "infinity", ""):
                return None
            val = float(text)
            return None if math.isinf(val) else int(val)
        if key in ("momentum", "lipschitz"):
            return text if text in ("tuned", "hessian") else float(text)
        if isinstance(default, bool):
            return _BOOL[text.lower()]
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
        if isinstance(default, tuple):
            return tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {text!r}") from exc
    return text


def _field_name(key: str) -> str:
    key = key.split(".")[-1]
    for name in _DEFAULTS:
        if name.lower() == key.lower():
            return name
    raise ConfigError(f"unknown config key {key!r}")


def load_config_file(path) -> tuple[str | None, dict]:
    """Return (base preset or None, field values) from an INI file."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.optionxform = str
    path = Path(path)
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    preset, values = None, {}
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError(f"{path}: unknown section [{section}]")
        for key, text in parser.items(section):
            if section == "run" and key == "preset":
                preset = text.strip()
                continue
            name = _field_name(key)
            if _SECTION_OF[name] != section:
                raise ConfigError(f"{path}: {name} belongs in [{_SECTION_OF[name]}], not [{section}]")
            values[name] = parse_value(name, text)
    return preset, values


def parse_overrides(items) -> dict:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigError(f"override must look like key=value, got {item!r}")
        key, text = item.split("=", 1)
        name = _field_name(key.strip())
        out[name] = parse_value(name, text)
    return out


def resolve(source: str | None = None, overrides=None) -> tuple[str | None, ScenarioConfig]:
    """Build a config from a preset name or file path plus overrides."""
    preset, values = None, {}
    if source in PRESETS or source == "fig1":
        preset = "fig2" if source == "fig1" else source
    elif source is not None:
        preset, values = load_config_file(source)
        if preset is not None and preset not in PRESETS:
            raise ConfigError(f"unknown base preset {preset!r}")
    merged = {**(PRESETS[preset] if preset else {}), **values, **parse_overrides(overrides)}
    try:
        return preset, ScenarioConfig(**merged)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def dump_config(config: ScenarioConfig) -> str:
    """INI text that resolves back to ``config``."""
    parser = configparser.ConfigParser()
    parser.optionxform = str
    data = config.as_dict()
    for section, keys in SECTIONS.items():
        parser[section] = {}
        for key in keys:
            val = data[key]
            if isinstance(val, tuple):
                text = ", ".join(repr(v) for v in val)
            elif val is None:
                text = "none"
            else:
                text = repr(val) if isinstance(val, float) else str(val)
            parser[section][key] = text
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()
