"""JSON configuration: sections ``drone``, ``network``, ``schedule``,
``experiment`` and ``margins``. User files are merged over the packaged
defaults key by key."""
from __future__ import annotations

import copy
import json
import math
from importlib import resources
from pathlib import Path

from .composer import Margins
from .drone import DroneError, DroneSpec

SECTIONS = ("drone", "network", "schedule", "experiment", "margins")
DRONE_KEYS = (
    "max_payload",
    "max_speed",
    "range_empty",
    "range_full",
    "recharge_duration",
    "drop_handling_time",
    "cruise_fraction",
)


class ConfigError(ValueError):
    def __init__(self, message: str, key_path: str = ""):
        self.key_path = key_path
        super().__init__(f"{key_path}: {message}" if key_path else message)


def default_config() -> dict:
    text = resources.files("skyway").joinpath("default_config.json").read_text()
    return json.loads(text)


def merge_config(base: dict, override: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    if not isinstance(override, dict):
        raise ConfigError("expected an object", path or "<root>")
    for key, value in override.items():
        where = f"{path}.{key}" if path else key
        if not path and key not in SECTIONS:
            raise ConfigError("unknown section", where)
        if isinstance(out.get(key), dict):
            out[key] = merge_config(out[key], value, where)
        else:
            out[key] = value
    return out


def load_config(path: str | Path | None = None) -> dict:
    cfg = default_config()
    if path is None:
        return cfg
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON ({exc.msg})", f"line {exc.lineno} col {exc.colno}") from exc
    return merge_config(cfg, doc)


def _num(section: dict, key: str, where: str) -> float:
    value = section.get(key)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", f"{where}.{key}")
    return float(value)


def drone_from_config(cfg: dict) -> DroneSpec:
    """Accepts either a full config or a bare ``drone`` section."""
    section = cfg.get("drone", cfg)
    try:
        return DroneSpec(**{k: _num(section, k, "drone") for k in DRONE_KEYS if k in section})
    except DroneError as exc:
        raise ConfigError(str(exc), "drone") from exc


def margins_from_config(cfg: dict) -> Margins:
    m = cfg["margins"]
    return Margins(
        angle=math.radians(_num(m, "angle_deg", "margins")),
        radius=_num(m, "radius_fraction", "margins"),
    )
