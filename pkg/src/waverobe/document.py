"""Self-describing JSON result documents."""
from __future__ import annotations

import json
import math
from importlib import resources

import numpy as np

SCHEMA_VERSION = "1.0"


def _clean(obj):
    """JSON-safe copy: numpy scalars unwrapped, non-finite floats become null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def make_document(command: str, argv, options: dict, inputs: dict | None = None,
                  warnings=(), **payload) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": {"name": command, "argv": list(argv), "options": options},
        "inputs": inputs,
        "warnings": list(warnings),
    }
    doc.update(payload)
    return _clean(doc)


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=False, allow_nan=False) + "\n"


def load_schema() -> dict:
    text = resources.files("waverobe").joinpath("data/result.schema.json").read_text("utf-8")
    return json.loads(text)
