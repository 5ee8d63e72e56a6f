"""Sentence style classifiers used to score transfer accuracy.

``CNNClassifier`` is a convolutional sentence classifier (parallel filter
widths, max-over-time pooling, dropout, softmax). ``LexiconClassifier`` is
a deterministic rule: count positive vs negative lexicon hits.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .. import nn
from ..optim import Adam

log = logging.getLogger(__name__)


class LexiconClassifier:
    """Label 1 if more positive than negative words, 0 if fewer, -1 on a tie."""

    def __init__(self, positive, negative):
        self.positive = set(positive)
        self.negative = set(negative)

    def predict_proba(self, sentences):
        out = np.empty((len(sentences), 2))
        for i, toks in enumerate(sentences):
            pos = sum(t in self.positive for t in toks)
            neg = sum(t in self.negative for t in toks)
            out[i] = nn.softmax(np.array([neg, pos], dtype=float) * 10.0)
        return out

    def predict(self, sentences):
        preds = []
        for toks in sentences:
            pos = sum(t in self.positive for t in toks)
            neg = sum(t in self.negative for t in toks)
            preds.append(1 if pos > neg else 0 if neg > pos else -1)
        return np.array(preds, dtype=int)


@dataclass
class CNNConfig:
    embed_dim: int = 64
    widths: tuple = (3, 4, 5)
    n_filters: int = 64
    dropout: float = 0.5
    lr: float = 1e-3
    epochs: int = 10
    batch_size: int = 50
    val_fraction: float = 0.1
    min_val_accuracy: float = 0.8
    seed: int = 0


@dataclass
class CNNClassifier:
    stoi: dict
    params: dict
    config: CNNConfig = field(default_factory=CNNConfig)
    val_accuracy: float = float("nan")
    low_confidence: bool = False

    unk_id = 1
    pad_id = 0

    def _ids(self, sentences):
        T = max(max(len(s) for s in sentences), max(self.config.widths))
        ids = np.full((len(sentences), T), self.pad_id, dtype=int)
        lengths = np.empty(len(sentences), dtype=int)
        for i, toks in enumerate(sentences):
            ids[i, : len(toks)] = [self.stoi.get(t, self.unk_id) for t in toks]
            lengths[i] = max(len(toks), 1)
        return ids, lengths

    def forward(self, ids, lengths, drop_mask=None):
        """Logits (B, 2) and a cache for :meth:`backward`."""
        p = self.params
        x = p["embedding"][ids]  # (B, T, E)
        B, T, E = x.shape
        pooled, caches = [], []
        for w in self.config.widths:
            n_win = T - w + 1
            win = np.stack([x[:, i : i + n_win] for i in range(w)], axis=2).reshape(B, n_win, w * E)
            a = win @ p[f"conv{w}_W"] + p[f"conv{w}_b"]
            r = np.maximum(a, 0.0)
            # windows starting past the sentence are excluded; short sentences keep window 0
            valid = np.arange(n_win)[None, :] < np.maximum(lengths - w + 1, 1)[:, None]
            masked = np.where(valid[..., None], r, -np.inf)
            arg = masked.argmax(axis=1)  # (B, F)
            pooled.append(np.take_along_axis(r, arg[:, None, :], axis=1)[:, 0])
            caches.append((w, win, a, arg))
        feat = np.concatenate(pooled, axis=1)
        if drop_mask is not None:
            feat = feat * drop_mask
        logits = feat @ p["out_W"] + p["out_b"]
        return logits, (ids, x.shape, feat, caches, drop_mask)

    def backward(self, cache, dlogits):
        p = self.params
        ids, (B, T, E), feat, caches, drop_mask = cache
        grads = {k: np.zeros_like(v) for k, v in p.items()}
        grads["out_W"] = feat.T @ dlogits
        grads["out_b"] = dlogits.sum(axis=0)
        dfeat = dlogits @ p["out_W"].T
        if drop_mask is not None:
            dfeat = dfeat * drop_mask
        dx = np.zeros((B, T, E))
        F = self.config.n_filters
        for k, (w, win, a, arg) in enumerate(caches):
            dpool = dfeat[:, k * F : (k + 1) * F]
            n_win = win.shape[1]
            da = np.zeros((B, n_win, F))
            np.put_along_axis(da, arg[:, None, :], dpool[:, None, :], axis=1)
            da *= a > 0
            grads[f"conv{w}_W"] = win.reshape(-1, w * E).T @ da.reshape(-1, F)
            grads[f"conv{w}_b"] = da.sum(axis=(0, 1))
            dwin = (da @ p[f"conv{w}_W"].T).reshape(B, n_win, w, E)
            for i in range(w):
                dx[:, i : i + n_win] += dwin[:, :, i]
        np.add.at(grads["embedding"], ids, dx)
        return grads

    def loss_and_grads(self, sentences, labels, drop_mask=None):
        ids, lengths = self._ids(sentences)
        logits, cache = self.forward(ids, lengths, drop_mask)
        target = np.eye(2)[np.asarray(labels)]
        per, dlogits = nn.softmax_cross_entropy(logits, target)
        return per.mean(), self.backward(cache, dlogits / len(per))

    def predict_proba(self, sentences, batch_size=256):
        out = []
        for i in range(0, len(sentences), batch_size):
            ids, lengths = self._ids(sentences[i : i + batch_size])
            logits, _ = self.forward(ids, lengths)
            out.append(nn.softmax(logits))
        return np.concatenate(out)

    def predict(self, sentences):
        return self.predict_proba(sentences).argmax(axis=1)


def init_cnn(vocab_words, config: CNNConfig, rng) -> CNNClassifier:
    stoi = {"<pad>": 0, "<unk>": 1}
    for w in vocab_words:
        stoi.setdefault(w, len(stoi))
    E, F = config.embed_dim, config.n_filters
    params = {"embedding": nn.init_uniform(rng, (len(stoi), E), 0.1)}
    for w in config.widths:
        W, b = nn.init_linear(rng, w * E, F)
        params[f"conv{w}_W"], params[f"conv{w}_b"] = W, b
    params["out_W"], params["out_b"] = nn.init_linear(rng, F * len(config.widths), 2)
    return CNNClassifier(stoi, params, config)


def train_style_classifier(sentences, labels, config: CNNConfig = None) -> CNNClassifier:
    """Fit a CNN on tokenized sentences; validation accuracy is recorded."""
    config = config or CNNConfig()
    rng = np.random.default_rng(config.seed)
    labels = np.asarray(labels)
    order = rng.permutation(len(sentences))
    n_val = int(round(config.val_fraction * len(sentences)))
    val_idx, tr_idx = order[:n_val], order[n_val:]
    vocab = sorted({t for i in tr_idx for t in sentences[i]})
    clf = init_cnn(vocab, config, rng)
    opt = Adam(lr=config.lr)
    F = config.n_filters * len(config.widths)
    for _ in range(config.epochs):
        perm = rng.permutation(tr_idx)
        for start in range(0, len(perm), config.batch_size):
            idx = perm[start : start + config.batch_size]
            keep = (rng.random((len(idx), F)) >= config.dropout) / (1.0 - config.dropout)
            _, grads = clf.loss_and_grads([sentences[i] for i in idx], labels[idx], keep)
            opt.step({"cnn": clf.params}, {"cnn": grads})
    if n_val:
        pred = clf.predict([sentences[i] for i in val_idx])
        clf.val_accuracy = float((pred == labels[val_idx]).mean())
        if clf.val_accuracy < config.min_val_accuracy:
            clf.low_confidence = True
            log.warning(
                "style classifier validation accuracy %.3f below floor %.3f; "
                "transfer accuracy is low-confidence", clf.val_accuracy, config.min_val_accuracy
            )
    return clf


def transfer_accuracy(classifier, generated, target_labels):
    """Fraction of generated sentences classified as their target label."""
    if len(generated) == 0:
        raise ValueError("no generated sentences")
    pred = classifier.predict(generated)
    return float((np.asarray(pred) == np.asarray(target_labels)).mean())
