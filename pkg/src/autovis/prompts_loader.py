"""Prompt templates as versioned text resources.

Templates live under prompts/ as plain text with string.Template
placeholders; prompts are data, not code.
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources
from string import Template

from .errors import ConfigError


@lru_cache(maxsize=None)
def load_template(name: str) -> str:
    ref = resources.files("autovis").joinpath("prompts", f"{name}.txt")
    try:
        return ref.read_text(encoding="utf-8").strip()
    except FileNotFoundError as exc:
        raise ConfigError(f"no prompt template named {name!r}") from exc


def render_prompt(name: str, **params) -> str:
    """Substitute $placeholders in the named template, failing on gaps."""
    try:
        return Template(load_template(name)).substitute(**params)
    except KeyError as exc:
        raise ConfigError(f"template {name!r} missing parameter {exc}") from exc
