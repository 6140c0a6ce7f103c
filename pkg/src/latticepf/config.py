"""Flat ``key = value`` configuration files.

Lines starting with ``#`` are comments. A file whose content is a JSON
object (such as a ``resolved_config.json`` written by a previous run) is
accepted as well.
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import ConfigurationError


def parse_value(text: str):
    text = text.strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def load_config(path) -> dict:
    text = Path(path).read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            data = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: invalid JSON config: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigurationError(f"{path}: config must be a JSON object")
        return data
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigurationError(f"{path}:{lineno}: expected 'key = value'")
        out[key.strip()] = parse_value(value)
    return out
