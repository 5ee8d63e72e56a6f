"""Style transfer by grafting an empirical style vector onto a content vector."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Vocabulary, make_batch, tokenize
from .model import ModelParams, decode_greedy, encode_batch


@dataclass
class StyleVectorEstimate:
    label: int
    vector: np.ndarray
    count: int


def encode_sentences(params: ModelParams, sentences, vocab, bow, batch_size=256):
    """Deterministic (posterior-mean) latents for a list of sentences."""
    s_all, c_all = [], []
    for start in range(0, len(sentences), batch_size):
        batch = make_batch(sentences[start : start + batch_size], vocab, bow)
        state, _ = encode_batch(params, batch.tokens, batch.lengths, use_mean=True)
        s_all.append(state.s)
        c_all.append(state.c)
    return np.concatenate(s_all), np.concatenate(c_all)


def estimate_style_vector(params, sentences, label, vocab, bow) -> StyleVectorEstimate:
    """Mean style vector over the sentences carrying ``label``."""
    chosen = [s for s in sentences if s.label == label]
    if not chosen:
        raise ValueError(f"no sentences with label {label}")
    s, _ = encode_sentences(params, chosen, vocab, bow)
    return StyleVectorEstimate(label, s.mean(axis=0), len(chosen))


def estimate_all(params, sentences, vocab, bow, labels=(0, 1)):
    return {y: estimate_style_vector(params, sentences, y, vocab, bow) for y in labels}


def transfer_ids(params: ModelParams, sentences, target_labels, estimates, vocab, bow, max_len=30):
    """Decode ``[s_hat(target); c]`` for each sentence; returns token-string lists."""
    target_labels = np.broadcast_to(np.asarray(target_labels), (len(sentences),))
    missing = set(target_labels.tolist()) - set(estimates)
    if missing:
        raise ValueError(f"no style estimate for label(s) {sorted(missing)}")
    _, c = encode_sentences(params, sentences, vocab, bow)
    s_hat = np.stack([estimates[int(y)].vector for y in target_labels])
    outs = decode_greedy(params, np.concatenate([s_hat, c], axis=1), max_len)
    return [vocab.decode(ids) for ids in outs]


def transfer(params, text, target_label, estimates, vocab, bow, max_len=30) -> str:
    """Transfer one raw sentence to ``target_label``; returns the generated text."""
    from .corpus import make_sentences

    tokenize(text)  # raises on empty input
    sentence = make_sentences([text], [target_label], vocab, max_len)
    return " ".join(transfer_ids(params, sentence, [target_label], estimates, vocab, bow, max_len)[0])
