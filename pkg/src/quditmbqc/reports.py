"""Canonical JSON report serialization.

Reports must reproduce byte-for-byte from their embedded configuration, so
serialization is pinned down here: keys sorted, two-space indent, floats
rendered with 17 significant digits (enough to round-trip IEEE doubles
identically on any platform).  Wall-clock fields live in a meta block that
the canonical byte form replaces with fixed placeholders.
"""

from __future__ import annotations

import copy
import json
import os
import tempfile
from datetime import datetime, timezone
from typing import Any

SCHEMA_VERSION = 1

_META_PLACEHOLDER = {"timestamp": "1970-01-01T00:00:00Z", "wall_time_s": 0.0}


def _serialize(obj: Any, indent: int) -> str:
    pad = " " * indent
    inner = " " * (indent + 2)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int,)):
        return str(obj)
    if isinstance(obj, float):
        if obj != obj or obj in (float("inf"), float("-inf")):
            return "null"
        if obj == int(obj) and abs(obj) < 1e16:
            return f"{obj:.1f}"
        return format(obj, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [inner + _serialize(v, indent + 2) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = []
        for k in sorted(obj, key=str):
            items.append(inner + json.dumps(str(k)) + ": " + _serialize(obj[k], indent + 2))
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__} canonically")


def canonical_json(obj: Any) -> str:
    return _serialize(obj, 0) + "\n"


def now_meta(wall_time_s: float) -> dict:
    return {
        "timestamp": datetime.now(tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
        "wall_time_s": float(wall_time_s),
    }


def build_report(config: dict, result: dict, wall_time_s: float) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "config": config,
        "result": result,
        "meta": now_meta(wall_time_s),
    }


def _normalize_times(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {
            k: (_META_PLACEHOLDER[k] if k in _META_PLACEHOLDER else _normalize_times(v))
            for k, v in obj.items()
        }
    if isinstance(obj, list):
        return [_normalize_times(v) for v in obj]
    return obj


def canonical_report_bytes(report: dict) -> bytes:
    """Serialization used for reproducibility comparisons.

    Wall-clock fields (timestamp, wall_time_s) are replaced by fixed
    placeholders wherever they occur; everything else must reproduce
    byte-for-byte from the embedded configuration.
    """
    normalized = copy.deepcopy(report)
    normalized["meta"] = dict(_META_PLACEHOLDER)
    return canonical_json(_normalize_times(normalized)).encode()


def write_json_atomic(path: str, obj: Any) -> None:
    """Write canonical JSON via a temp file and rename."""
    text = canonical_json(obj)
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
