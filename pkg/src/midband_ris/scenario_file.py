"""Scenario files: flat ``key = value`` TOML documents.

Keys mirror the simulation-parameter names (``carrier_ghz``, ``tx_xyz``,
``los_mode_static`` ...). Nested tables are rejected and so are unknown keys;
every problem is reported with the line it comes from.
"""
from __future__ import annotations

import json
import re
from importlib import resources
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError
from .scenarios import scenario_from_mapping, to_mapping

SUFFIX = ".scenario"
_KEY_LINE = re.compile(r"^\s*([A-Za-z0-9_\-]+)\s*=")


def bundled_names():
    root = resources.files("midband_ris") / "data"
    return sorted(p.name[: -len(SUFFIX)] for p in root.iterdir() if p.name.endswith(SUFFIX))


def resolve_path(ref):
    """A filesystem path, or the name of a bundled scenario such as ``uc1``."""
    path = Path(ref)
    if path.is_file():
        return path
    name = str(ref).lower().removesuffix(SUFFIX)
    candidate = resources.files("midband_ris") / "data" / f"{name}{SUFFIX}"
    if candidate.is_file():
        return Path(str(candidate))
    raise ConfigError("scenario", f"{ref}: no such scenario file or bundled scenario")


def key_lines(text):
    lines = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        m = _KEY_LINE.match(line)
        if m:
            lines.setdefault(m.group(1), lineno)
    return lines


def parse_mapping(text, source="<string>"):
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("syntax", f"{source}: {exc}", line=getattr(exc, "lineno", None)) from None
    lines = key_lines(text)
    for key, value in data.items():
        if isinstance(value, dict):
            raise ConfigError(key, f"{source}: nested tables are not allowed", line=lines.get(key))
    return data, lines


def _where(key, lines, overrides):
    if key in lines:
        return f"line {lines[key]}: "
    if overrides and key in overrides:
        return "override: "
    return ""


def parse_scenario_text(text, source="<string>", overrides=None):
    data, lines = parse_mapping(text, source)
    if overrides:
        data.update(overrides)
        lines = {k: v for k, v in lines.items() if k not in overrides}
    try:
        return scenario_from_mapping(data)
    except ConfigError as exc:
        problems = getattr(exc, "problems", [(exc.key, exc.message)])
        detail = "; ".join(
            _where(k, lines, overrides) + f"{k}: {msg}" for k, msg in problems
        )
        err = ConfigError(exc.key, f"{source}: {detail}", lines.get(problems[0][0]), prefixed=False)
        err.problems = problems
        raise err from None


def parse_scenario_file(path, overrides=None):
    """Read, validate and build the scenario stored at ``path``."""
    path = resolve_path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("scenario", f"{path}: {exc.strerror}") from None
    return parse_scenario_text(text, str(path), overrides)


def parse_value(text):
    """Parse one TOML value, as given on the command line (``--set k=v``)."""
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def _format(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (tuple, list)):
        return "[" + ", ".join(_format(v) for v in value) + "]"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_scenario(cfg, header=None):
    lines = [f"# {line}" for line in (header or "").splitlines()]
    lines += [f"{key} = {_format(value)}" for key, value in to_mapping(cfg).items()]
    return "\n".join(lines) + "\n"
