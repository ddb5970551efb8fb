"""Deterministic token-hash embedding.

Pure function of the text: tokens and ordered bigrams are hashed into a
fixed-dimension bag vector and L2-normalized. Used by all tests and as the
default local embedder; a service-backed embedder can be plugged in via the
gateway.
"""

from __future__ import annotations

import hashlib
import re

import numpy as np

DEFAULT_DIM = 256

_TOKEN_RE = re.compile(r"[A-Za-z0-9_]+")


def _bucket(token: str, dim: int) -> int:
    digest = hashlib.sha256(token.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") % dim


def hash_embed(text: str, dim: int = DEFAULT_DIM) -> np.ndarray:
    tokens = [t.lower() for t in _TOKEN_RE.findall(text)]
    vec = np.zeros(dim, dtype=np.float64)
    for tok in tokens:
        vec[_bucket(tok, dim)] += 1.0
    for a, b in zip(tokens, tokens[1:]):
        vec[_bucket(a + "\x1f" + b, dim)] += 0.5
    norm = np.linalg.norm(vec)
    if norm > 0:
        vec /= norm
    return vec


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))
