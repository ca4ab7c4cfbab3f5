"""Default numeric configuration, loaded from the bundled JSON document."""

from __future__ import annotations

import copy
import json
from importlib import resources
from pathlib import Path
from typing import Any

from .errors import ConfigError

_DEFAULTS: dict[str, Any] = json.loads(
    resources.files(__package__).joinpath("default_config.json").read_text(encoding="utf-8")
)

HORIZON: int = int(_DEFAULTS["horizon"])
ESCAPE_RADIUS: float = float(_DEFAULTS["escape_radius"])
GUARD: float = float(_DEFAULTS["guard"])


def default_config() -> dict[str, Any]:
    """Return a deep copy of the bundled defaults."""
    return copy.deepcopy(_DEFAULTS)


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def load_config(path: str | Path | None) -> dict[str, Any]:
    """Load a JSON config and overlay it on the defaults.

    Raises
    ------
    ConfigError
        If the file cannot be read or parsed, or holds unknown top-level keys.
    """
    cfg = default_config()
    if path is None:
        return cfg
    try:
        user = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(user, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(user) - set(cfg)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return _merge(cfg, user)
