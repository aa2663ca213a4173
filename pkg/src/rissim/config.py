"""INI configuration: parsing into :class:`SimConfig`, default emission and hashing."""

from __future__ import annotations

import configparser
import hashlib
import json
import re
import types
import typing
from dataclasses import fields, replace
from pathlib import Path

from .channel import EnvProfile
from .engine import SimConfig

# section -> {key: SimConfig field}
SECTIONS: dict[str, dict[str, str]] = {
    "layout": {k: k for k in (
        "isd", "rings", "bs_height", "ris_height", "ue_height", "min_distance", "downtilt", "users_per_sector",
    )},
    "panels": {k: k for k in ("bs_horizontal", "bs_vertical", "ris_horizontal", "ris_vertical", "ue_antennas",
                              "spacing")},
    "strategy": {"name": "strategy", "levels": "levels", "beams": "beams", "codebook_span": "codebook_span",
                 "codebook_zenith": "codebook_zenith"},
    "run": {k: k for k in ("drops", "seed", "tx_power_dbm", "bandwidth_hz", "noise_figure_db", "interference",
                           "speed", "time")},
    "environment": {f.name: f.name for f in fields(EnvProfile)},
}

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key and, when known, its line."""

    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        where = ""
        if key:
            where = f"{key}"
            if line:
                where += f" (line {line})"
            where += ": "
        super().__init__(where + message)
        self.key = key
        self.line = line


def _field_types(cls) -> dict[str, type]:
    hints = typing.get_type_hints(cls)
    return {f.name: hints[f.name] for f in fields(cls)}


def _convert(text: str, tp, key: str, line: int | None):
    raw = text.strip()
    optional = typing.get_origin(tp) in (typing.Union, types.UnionType) and type(None) in typing.get_args(tp)
    if optional:
        if raw.lower() in ("", "none"):
            return None
        tp = next(a for a in typing.get_args(tp) if a is not type(None))
    try:
        if tp is bool:
            low = raw.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError
        if tp is int:
            return int(raw)
        if tp is float:
            return float(raw)
        if tp is str:
            if not raw:
                raise ValueError
            return raw
    except ValueError:
        raise ConfigError(f"expected {tp.__name__}, got {raw!r}", key, line) from None
    raise ConfigError(f"unsupported type {tp}", key, line)


def _line_numbers(text: str) -> dict[str, int]:
    lines, section = {}, None
    for i, ln in enumerate(text.splitlines(), 1):
        s = ln.strip()
        m = re.fullmatch(r"\[([^\]]+)\]", s)
        if m:
            section = m.group(1).strip().lower()
            lines.setdefault(section, i)
            continue
        m = re.match(r"([^=:#;\s][^=:]*?)\s*[=:]", s)
        if m and section:
            lines.setdefault(f"{section}.{m.group(1).strip().lower()}", i)
    return lines


def parse_config_text(text: str) -> SimConfig:
    """Parse INI text; an empty document gives the defaults."""
    lines = _line_numbers(text)
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc).splitlines()[0], None, getattr(exc, "lineno", None)) from None

    top = _field_types(SimConfig)
    env_types = _field_types(EnvProfile)
    values, env_values = {}, {}
    for section in cp.sections():
        sec = section.lower()
        if sec not in SECTIONS:
            raise ConfigError(f"unknown section [{section}]", section, lines.get(sec))
        for key, raw in cp.items(section):
            full = f"{sec}.{key}"
            line = lines.get(full)
            if key not in SECTIONS[sec]:
                raise ConfigError("unknown key", full, line)
            name = SECTIONS[sec][key]
            if sec == "environment":
                env_values[name] = _convert(raw, env_types[name], full, line)
            else:
                values[name] = _convert(raw, top[name], full, line)

    try:
        env = EnvProfile(**env_values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc), "environment") from None
    name = str(values.get("strategy", SimConfig.strategy)).lower()
    if name.startswith("discrete") and not re.search(r"\d", name) and values.get("levels") is None:
        raise ConfigError("strategy 'discrete' needs a level count", "strategy.levels", lines.get("strategy.name"))
    try:
        return SimConfig(env=env, **values)
    except ValueError as exc:
        key = next((f"{s}.{k}" for s, m in SECTIONS.items() for k, v in m.items() if v in str(exc)), None)
        raise ConfigError(str(exc), key, lines.get(key) if key else None) from None


def parse_config(path) -> SimConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc.strerror}", str(p)) from None
    return parse_config_text(text)


def _format(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    return repr(value) if isinstance(value, float) else str(value)


def emit_defaults(cfg: SimConfig | None = None) -> str:
    """INI text that parses back to ``cfg`` (the defaults when omitted)."""
    cfg = cfg or SimConfig()
    out = []
    for sec, keys in SECTIONS.items():
        out.append(f"[{sec}]")
        src = cfg.env if sec == "environment" else cfg
        for key, name in keys.items():
            out.append(f"{key} = {_format(getattr(src, name))}")
        out.append("")
    return "\n".join(out)


def config_hash(cfg: SimConfig) -> str:
    """SHA-256 of the canonical JSON form of the configuration."""
    blob = json.dumps(cfg.as_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def with_overrides(cfg: SimConfig, **kw) -> SimConfig:
    kw = {k: v for k, v in kw.items() if v is not None}
    return replace(cfg, **kw) if kw else cfg
