"""Canonical JSON encoding for deterministic hashing and interchange.

This byte format is the common interface between the private and public
sides of the kit: every transaction payload, epoch summary, and report is
encoded with it, and every digest is computed over it.

Canonical form:
- UTF-8, no insignificant whitespace, separators ``,`` and ``:``.
- Object keys sorted by Unicode code point (identical to UTF-8 byte order).
- Strings use minimal JSON escaping (only quote, backslash, and control
  characters; non-ASCII stays literal).
- Integers in plain base-10, no leading zeros.
- Fractional numbers are NOT representable. Carry decimals as strings
  ("4.2") so every platform produces identical bytes. Feeding a native
  float (or NaN/Infinity) raises UnsupportedValue, on encode and decode.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any

from .errors import UnsupportedValue

DIGEST_SIZE = 32


def sha256(data: bytes) -> bytes:
    """Return the raw 32-byte SHA-256 digest of `data`."""
    return hashlib.sha256(data).digest()


def _check_value(value: Any, depth: int = 0) -> None:
    if depth > 64:
        raise UnsupportedValue("value nesting deeper than 64 levels")
    if value is None or isinstance(value, (str, bool)):
        return
    if isinstance(value, int):
        return
    if isinstance(value, float):
        raise UnsupportedValue(
            f"native float {value!r} is not canonical; carry decimals as strings")
    if isinstance(value, (list, tuple)):
        for item in value:
            _check_value(item, depth + 1)
        return
    if isinstance(value, dict):
        for key, item in value.items():
            if not isinstance(key, str):
                raise UnsupportedValue(f"object key {key!r} is not a string")
            _check_value(item, depth + 1)
        return
    raise UnsupportedValue(f"unsupported value type {type(value).__name__}")


def canonical_json(value: Any) -> bytes:
    """Encode `value` into canonical JSON bytes.

    Raises UnsupportedValue for floats, non-string object keys, or any
    type outside {str, int, bool, None, list, dict}.
    """
    _check_value(value)
    return json.dumps(
        value,
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
        allow_nan=False,
    ).encode("utf-8")


def _reject_float(text: str) -> Any:
    raise UnsupportedValue(f"fractional literal {text} in payload; use a decimal string")


def _reject_constant(text: str) -> Any:
    raise UnsupportedValue(f"non-finite literal {text} in payload")


def canonical_loads(data: bytes | str) -> Any:
    """Parse JSON produced under the canonical rules.

    Accepts any whitespace/key-order on input (canonical_json of the result
    re-normalizes), but rejects fractional and non-finite number literals.
    Raises UnsupportedValue on such literals and ValueError on broken JSON.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return json.loads(data, parse_float=_reject_float, parse_constant=_reject_constant)


def digest_json(value: Any) -> bytes:
    """SHA-256 digest of the canonical encoding of `value`."""
    return sha256(canonical_json(value))
