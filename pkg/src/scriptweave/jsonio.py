"""Deterministic JSON reading and writing shared by all pipeline stages.

Keys are always sorted and files end with a newline so that identical
inputs produce byte-identical artifacts.
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import MissingArtifact


def write_json(obj, path: str | Path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_json(path: str | Path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise MissingArtifact(f"missing artifact: {path}") from None


def write_jsonl(rows, path: str | Path) -> None:
    lines = [json.dumps(row, sort_keys=True, separators=(",", ":")) for row in rows]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def read_jsonl(path: str | Path) -> list:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise MissingArtifact(f"missing artifact: {path}") from None
    return [json.loads(line) for line in text.splitlines() if line.strip()]
