"""Flat ``key = value`` experiment configs.

One experiment per file. Values are Python literals (ints, floats,
strings, lists, dicts); bare words are read as strings. ``#`` starts a
comment.

    name = thm3
    seed = 7
    sizes = [16, 32, 48]
    N = 10000
"""
from __future__ import annotations

import ast
from dataclasses import fields
from pathlib import Path

from .errors import InvalidSpec
from .experiments import ExperimentSpec

SPEC_KEYS = {f.name for f in fields(ExperimentSpec)}


def parse_value(text: str):
    text = text.strip()
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def parse_config(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidSpec(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in SPEC_KEYS:
            raise InvalidSpec(f"line {lineno}: unknown key {key!r}")
        if key in out:
            raise InvalidSpec(f"line {lineno}: duplicate key {key!r}")
        out[key] = parse_value(value)
    return out


def load_config(path) -> dict:
    return parse_config(Path(path).read_text())


def dump_config(spec: ExperimentSpec) -> str:
    return "".join(f"{k} = {v!r}\n" for k, v in spec.public().items())


def make_spec(config: dict, overrides: dict) -> ExperimentSpec:
    """Merge a parsed config with CLI overrides (overrides win, ``None`` means unset)."""
    merged = dict(config)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    if "name" not in merged:
        raise InvalidSpec("experiment name missing")
    if merged.get("seed") is None:
        raise InvalidSpec("seed is mandatory")
    return ExperimentSpec(**merged)
