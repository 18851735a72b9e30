"""Fingerprint helpers."""

from __future__ import annotations

import hashlib
import json
from typing import Any


def canonical_json(payload: Any) -> str:
    """Return deterministic JSON string for hashing."""
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_text(text: str) -> str:
    """Hash text with sha256."""
    return sha256_bytes(text.encode("utf-8"))


def derive_seed(master_seed: int, *parts: Any) -> int:
    """Derive a 32-bit seed from the master seed and a tuple of labels.

    Floats are rendered with ``repr`` so 0.1 and 0.10000000000000002 stay
    distinct, and adding new labels never shifts existing ones.
    """
    labels = [repr(part) if isinstance(part, float) else str(part) for part in parts]
    digest = sha256_text(canonical_json([int(master_seed), labels]))
    return int(digest[:8], 16)
