"""JSONL event logging helper."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Callable

from ..utils.filesystem import ensure_parent


def append_event(row: dict[str, Any], path: str | Path) -> None:
    """Append one event envelope to a JSONL file."""
    p = Path(path)
    ensure_parent(p)
    normalized = dict(row)
    level = str(normalized.get("severity") or "info").lower()
    normalized["severity"] = level if level in {"info", "warn", "error"} else "info"
    if not isinstance(normalized.get("payload"), dict):
        normalized["payload"] = {}
    with p.open("a", encoding="utf-8") as f:
        f.write(json.dumps(normalized, ensure_ascii=False) + "\n")


def jsonl_sink(path: str | Path) -> Callable[[dict[str, Any]], None]:
    """Sink for :class:`EventBus` writing to ``path``."""

    def sink(row: dict[str, Any]) -> None:
        append_event(row, path)

    return sink
