"""Similarity retrieval over extracted code blocks."""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..errors import EmptyCacheError, PreconditionError
from ..models import embedder
from .extract import CodeBlock, ExtractionCache


def retrieve_extracted_code(
    cache: ExtractionCache,
    query: str,
    match_count: int,
    embed: Callable[[list[str]], list] | None = None,
) -> list[tuple[CodeBlock, float]]:
    """Top blocks by descending cosine similarity; ties break on
    (source_url, ordinal). match_count larger than the store clamps."""
    if match_count < 1:
        raise PreconditionError("match_count must be >= 1")
    blocks = cache.all_blocks()
    if not blocks:
        raise EmptyCacheError("extraction cache is empty")
    embed = embed or (lambda texts: [embedder.hash_embed(t) for t in texts])
    (qv,) = embed([query])
    qv = np.asarray(qv, dtype=np.float64)
    scored = []
    for block in blocks:
        vec = block.embedding
        if vec is None:
            (vec,) = embed([block.code])
        score = embedder.cosine(qv, np.asarray(vec, dtype=np.float64))
        scored.append((block, score))
    scored.sort(key=lambda item: (-item[1], item[0].source_url, item[0].ordinal))
    return scored[:match_count]
