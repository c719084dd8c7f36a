"""Canonical byte encoding for states, messages and certificates.

Every state and message handled by the executor must admit a canonical,
platform-stable byte encoding.  The encoding below is a small tag-length-value
scheme over the value shapes the toolkit actually uses (ints, strings, bytes,
booleans, None, tuples, frozensets).  Two values encode equal iff they are
structurally equal, and the lexicographic order on encodings serves as the
fixed total message order used when multisets have to be realised as vectors.
"""

from __future__ import annotations

import hashlib

__all__ = ["canon", "digest"]


def canon(value) -> bytes:
    """Canonical byte encoding of ``value``.

    Supported shapes: None, bool, int, str, bytes, tuple/list, set/frozenset.
    Sets are encoded as the sorted sequence of member encodings, so encoding
    never depends on iteration order or on hash randomisation.
    """
    if value is None:
        return b"N;"
    if value is True:
        return b"B1;"
    if value is False:
        return b"B0;"
    if isinstance(value, int):
        return b"I" + str(value).encode("ascii") + b";"
    if isinstance(value, bytes):
        return b"Y" + str(len(value)).encode("ascii") + b":" + value
    if isinstance(value, str):
        raw = value.encode("utf-8")
        return b"S" + str(len(raw)).encode("ascii") + b":" + raw
    if isinstance(value, (tuple, list)):
        parts = [canon(item) for item in value]
        return b"T" + str(len(parts)).encode("ascii") + b":" + b"".join(parts)
    if isinstance(value, (set, frozenset)):
        parts = sorted(canon(item) for item in value)
        return b"F" + str(len(parts)).encode("ascii") + b":" + b"".join(parts)
    raise TypeError(f"value of type {type(value).__name__} has no canonical encoding")


def digest(value) -> bytes:
    """16-byte structural digest of ``value`` (blake2b over ``canon``)."""
    return hashlib.blake2b(canon(value), digest_size=16).digest()
