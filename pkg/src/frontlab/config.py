"""Flat key = value experiment configs with dotted sections, strictly parsed."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any


class ConfigError(ValueError):
    """Malformed config file, unknown key, or invalid value."""


def _parse_scalar(text: str):
    text = text.strip()
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def parse_config_text(text: str) -> dict[str, Any]:
    """Parse `key = value` lines; '#' starts a comment; keys may be dotted."""
    out: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        value = value.strip()
        if "," in value:
            out[key] = [_parse_scalar(v) for v in value.split(",") if v.strip()]
        else:
            out[key] = _parse_scalar(value)
    return out


def load_config(path: str | Path) -> dict[str, Any]:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    return parse_config_text(p.read_text(encoding="utf-8"))


@dataclass(frozen=True)
class Option:
    type: object  # float, int, str, bool, or list
    default: Any = None
    required: bool = False
    choices: tuple = ()


def validate(raw: dict[str, Any], schema: dict[str, Option], experiment: str) -> dict[str, Any]:
    """Strict validation: unknown keys are rejected by name; types coerced."""
    out: dict[str, Any] = {}
    for key in raw:
        if key not in schema:
            raise ConfigError(f"unknown config key {key!r} for experiment {experiment!r}")
    for key, opt in schema.items():
        if key not in raw:
            if opt.required:
                raise ConfigError(f"missing required config key {key!r}")
            out[key] = opt.default
            continue
        val = raw[key]
        if opt.type is float:
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise ConfigError(f"config key {key!r} must be a number, got {val!r}")
            val = float(val)
        elif opt.type is int:
            if isinstance(val, bool) or not isinstance(val, int):
                raise ConfigError(f"config key {key!r} must be an integer, got {val!r}")
        elif opt.type is str:
            if not isinstance(val, str):
                raise ConfigError(f"config key {key!r} must be a string, got {val!r}")
        elif opt.type is bool:
            if not isinstance(val, bool):
                raise ConfigError(f"config key {key!r} must be true/false, got {val!r}")
        elif opt.type is list:
            if not isinstance(val, list):
                val = [val]
            try:
                val = [float(v) for v in val]
            except (TypeError, ValueError):
                raise ConfigError(f"config key {key!r} must be a comma list of numbers")
        if opt.choices and val not in opt.choices:
            raise ConfigError(
                f"config key {key!r} must be one of {sorted(opt.choices)}, got {val!r}"
            )
        out[key] = val
    return out
