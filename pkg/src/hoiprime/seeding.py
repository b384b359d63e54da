"""Seed derivation, config hashing, and the worker-count cap.

A single global seed fans out to per-component seeds through
``derive_seed``: the component labels are joined and hashed with
SHA-256, and the first eight bytes become the child seed. The scheme is
stable across runs and platforms, which is what makes every pipeline
rerun byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, is_dataclass

_SEP = "\x1f"


def derive_seed(*parts) -> int:
    """Stable 64-bit seed from a label path, e.g. derive_seed(7, "shuffle", 3)."""
    text = _SEP.join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def _jsonable(obj):
    if is_dataclass(obj) and not isinstance(obj, type):
        return asdict(obj)
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    if isinstance(obj, tuple):
        return list(obj)
    if hasattr(obj, "tolist"):
        return obj.tolist()
    raise TypeError(f"cannot hash value of type {type(obj).__name__}")


def canonical_json(obj) -> str:
    """Deterministic JSON used for hashing and for report provenance."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_jsonable)


def config_hash(obj) -> str:
    """SHA-256 hex digest of the canonical JSON form of ``obj``."""
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


def worker_count(requested: int | None = None) -> int:
    """Worker parallelism, capped by the HOIPRIME_THREADS environment variable."""
    cap = os.environ.get("HOIPRIME_THREADS")
    limit = None
    if cap is not None:
        try:
            limit = max(1, int(cap))
        except ValueError:
            limit = None
    if requested is None:
        requested = limit if limit is not None else 1
    if limit is not None:
        requested = min(requested, limit)
    return max(1, requested)
