"""Run configuration, CSV serialization and reproducibility manifests.

Config files are flat ``key = value`` text with ``#`` comments; unknown
keys are a hard error so typos cannot silently fall back to defaults.
Every CSV is written with LF newlines and shortest-round-trip floats, and
is accompanied by a JSON manifest carrying the fully resolved configuration;
replaying a manifest reproduces the CSV byte for byte.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .errors import ConfigError


@dataclass(frozen=True)
class Param:
    """One configurable run parameter: name, type tag, default, description.

    type tags: int | float | str | bool | floats | ints (comma lists).
    A default of None marks the parameter as required.
    """

    name: str
    kind: str
    default: object
    help: str


def _parse_value(param: Param, raw: str):
    raw = raw.strip()
    try:
        if param.kind == "int":
            return int(raw)
        if param.kind == "float":
            return float(raw)
        if param.kind == "str":
            return raw
        if param.kind == "bool":
            if raw.lower() in ("true", "1", "yes", "on"):
                return True
            if raw.lower() in ("false", "0", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if param.kind == "floats":
            return [float(tok) for tok in raw.split(",") if tok.strip()]
        if param.kind == "ints":
            return [int(tok) for tok in raw.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"parameter '{param.name}': {exc}") from None
    raise ConfigError(f"parameter '{param.name}' has unknown type tag {param.kind!r}")


def read_config_file(path: str | Path) -> dict[str, str]:
    """Raw key/value pairs from a flat config file."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if key in out:
            raise ConfigError(f"{path}:{lineno}: duplicate key '{key}'")
        out[key] = value.strip()
    return out


def resolve_config(params: list[Param], file_values: dict[str, str],
                   overrides: dict[str, object]) -> dict[str, object]:
    """Merge defaults, config-file values and CLI overrides (in that order).

    Raises ConfigError for unknown config keys and for missing required
    parameters, naming the offending field.
    """
    by_name = {p.name: p for p in params}
    unknown = set(file_values) - set(by_name)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    resolved: dict[str, object] = {}
    for p in params:
        if p.name in overrides and overrides[p.name] is not None:
            resolved[p.name] = overrides[p.name]
        elif p.name in file_values:
            resolved[p.name] = _parse_value(p, file_values[p.name])
        elif p.default is not None:
            resolved[p.name] = p.default
        else:
            raise ConfigError(f"required parameter '{p.name}' not set")
    return resolved


def format_number(x) -> str:
    """Shortest round-trip, locale-independent text for one value."""
    if hasattr(x, "item") and not isinstance(x, (bool, int, float, str)):
        x = x.item()  # numpy scalars
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    v = float(x)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(v)


def write_csv(path: str | Path, header: list[str], rows) -> None:
    """Write rows of numbers (or strings) as CSV with LF newlines."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(
            cell if isinstance(cell, str) else format_number(cell) for cell in row))
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")


def append_comment_block(path: str | Path, lines: list[str]) -> None:
    """Append '#'-prefixed summary lines to an existing CSV."""
    with open(path, "a", newline="\n") as fh:
        for line in lines:
            fh.write(f"# {line}\n")


def manifest_path(out_path: str | Path) -> Path:
    return Path(str(out_path) + ".manifest.json")


def write_manifest(out_path: str | Path, command: str, config: dict,
                   derived: dict | None = None, version: str = "0") -> Path:
    """Drop the reproducibility manifest next to its CSV."""
    doc = {
        "artifact": "wgqed",
        "version": version,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "command": command,
        "config": config,
        "derived": derived or {},
    }
    path = manifest_path(out_path)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", newline="\n")
    return path


def load_manifest(path: str | Path) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"manifest {path} is not valid JSON: {exc}") from None
    for key in ("command", "config"):
        if key not in doc:
            raise ConfigError(f"manifest {path} lacks required key '{key}'")
    return doc
