"""Skip-gram with negative sampling, used to initialise the word embeddings."""

from __future__ import annotations

import numpy as np
from scipy.special import expit


def skipgram_pairs(sentences, window):
    centers, contexts = [], []
    for ids in sentences:
        n = len(ids)
        for i in range(n):
            for j in range(max(0, i - window), min(n, i + window + 1)):
                if j != i:
                    centers.append(ids[i])
                    contexts.append(ids[j])
    return np.array(centers, dtype=int), np.array(contexts, dtype=int)


def train_skipgram(sentences, vocab_size, dim, window=2, negatives=5, epochs=5,
                   lr=0.025, batch_size=256, seed=0):
    """Train SGNS input vectors over id sequences; returns a (vocab_size, dim) array."""
    rng = np.random.default_rng(seed)
    w_in = rng.uniform(-0.5 / dim, 0.5 / dim, size=(vocab_size, dim))
    w_out = np.zeros((vocab_size, dim))
    centers, contexts = skipgram_pairs(sentences, window)
    if len(centers) == 0:
        return w_in
    freq = np.bincount(np.concatenate([np.asarray(s) for s in sentences]), minlength=vocab_size)
    noise = freq.astype(float) ** 0.75
    noise /= noise.sum()

    for epoch in range(epochs):
        order = rng.permutation(len(centers))
        step_lr = lr * (1.0 - epoch / max(epochs, 1))
        for start in range(0, len(order), batch_size):
            idx = order[start : start + batch_size]
            c, o = centers[idx], contexts[idx]
            neg = rng.choice(vocab_size, size=(len(idx), negatives), p=noise)
            targets = np.concatenate([o[:, None], neg], axis=1)  # (b, 1+k)
            labels = np.zeros(targets.shape)
            labels[:, 0] = 1.0
            v = w_in[c]  # (b, d)
            u = w_out[targets]  # (b, 1+k, d)
            score = expit(np.einsum("bd,bkd->bk", v, u))
            g = score - labels
            dv = np.einsum("bk,bkd->bd", g, u)
            du = g[..., None] * v[:, None, :]
            np.add.at(w_in, c, -step_lr * dv)
            np.add.at(w_out, targets, -step_lr * du)
    return w_in
