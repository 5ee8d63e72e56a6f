"""Content-preservation metrics: unigram overlap and embedding cosine similarity."""

from __future__ import annotations

import logging

import numpy as np

log = logging.getLogger(__name__)


def word_overlap(x, y):
    """|types(x) & types(y)| / |types(x) | types(y)|; two empty sentences give 1."""
    a, b = set(x), set(y)
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def sentence_summary(tokens, embeddings, stoi, unk_id, sentiment=frozenset()):
    """Concatenated min, max and mean of word vectors, sentiment words removed.

    Falls back to the whole sentence if nothing remains after removal.
    """
    kept = [t for t in tokens if t not in sentiment]
    if not kept:
        log.info("no words left after sentiment removal; using full sentence")
        kept = list(tokens)
    if not kept:
        raise ValueError("empty sentence")
    vecs = embeddings[[stoi.get(t, unk_id) for t in kept]]
    return np.concatenate([vecs.min(axis=0), vecs.max(axis=0), vecs.mean(axis=0)])


def cosine(u, v):
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        return 1.0 if nu == nv else 0.0
    return float(u @ v / (nu * nv))


def cosine_content_similarity(x, y, embeddings, stoi, unk_id=1, sentiment=frozenset()):
    return cosine(
        sentence_summary(x, embeddings, stoi, unk_id, sentiment),
        sentence_summary(y, embeddings, stoi, unk_id, sentiment),
    )
