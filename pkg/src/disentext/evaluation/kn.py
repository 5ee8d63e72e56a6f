"""Interpolated Kneser-Ney trigram language model for fluency scoring."""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field

BOS, EOS, UNK = "<s>", "</s>", "<unk>"


@dataclass
class KNModel:
    discount: float
    vocab: frozenset  # predictable words, incl. </s> and <unk>
    tri: Counter = field(default_factory=Counter)  # (u, v, w) -> count
    ctx2: Counter = field(default_factory=Counter)  # (u, v) -> sum_w c(u, v, w)
    types2: Counter = field(default_factory=Counter)  # (u, v) -> #distinct w
    cont2: Counter = field(default_factory=Counter)  # (v, w) -> #distinct u
    cont2_ctx: Counter = field(default_factory=Counter)  # v -> sum_w cont2(v, w)
    types1: Counter = field(default_factory=Counter)  # v -> #distinct w with cont2(v, w) > 0
    cont1: Counter = field(default_factory=Counter)  # w -> #distinct v with bigram (v, w)
    n_bigram_types: int = 0

    def continuation_probability(self, w):
        """Share of bigram types that end in ``w``."""
        return self.cont1[w] / self.n_bigram_types

    def prob_unigram(self, w):
        D = self.discount
        n = self.n_bigram_types
        seen = len(self.cont1)
        return max(self.cont1[w] - D, 0.0) / n + D * seen / n / len(self.vocab)

    def prob_bigram(self, v, w):
        D = self.discount
        denom = self.cont2_ctx[v]
        if denom == 0:
            return self.prob_unigram(w)
        return (max(self.cont2[v, w] - D, 0.0) + D * self.types1[v] * self.prob_unigram(w)) / denom

    def prob(self, w, context):
        """P(w | u, v) for a two-token context ``(u, v)``."""
        u, v = context
        w = w if w in self.vocab else UNK
        D = self.discount
        denom = self.ctx2[u, v]
        if denom == 0:
            return self.prob_bigram(v, w)
        return (max(self.tri[u, v, w] - D, 0.0) + D * self.types2[u, v] * self.prob_bigram(v, w)) / denom

    def map_token(self, w):
        return w if w in self.vocab else UNK


def _padded(tokens):
    return [BOS, BOS] + list(tokens) + [EOS]


def train_kn_lm(corpus, order=3, discount=0.75) -> KNModel:
    """Fit on an iterable of token lists."""
    if order != 3:
        raise ValueError("only trigram models are supported")
    if not 0 < discount < 1:
        raise ValueError("discount must be in (0, 1)")
    tri = Counter()
    bigrams = set()
    words = set()
    n = 0
    for tokens in corpus:
        n += 1
        seq = _padded(tokens)
        words.update(tokens)
        for i in range(2, len(seq)):
            tri[seq[i - 2], seq[i - 1], seq[i]] += 1
            bigrams.add((seq[i - 1], seq[i]))
    if n == 0:
        raise ValueError("cannot train a language model on an empty corpus")

    m = KNModel(discount, frozenset(words | {EOS, UNK}), tri=tri)
    left = defaultdict(set)
    for (u, v, w) in tri:
        m.ctx2[u, v] += tri[u, v, w]
        m.types2[u, v] += 1
        left[v, w].add(u)
    for (v, w), us in left.items():
        m.cont2[v, w] = len(us)
        m.cont2_ctx[v] += len(us)
        m.types1[v] += 1
    for (v, w) in bigrams:
        m.cont1[w] += 1
    m.n_bigram_types = len(bigrams)
    return m


def kn_log_likelihood(model: KNModel, tokens) -> float:
    """Natural-log likelihood of a sentence, end marker included."""
    if len(tokens) == 0:
        raise ValueError("sentence has only boundary tokens")
    seq = _padded([model.map_token(t) for t in tokens])
    return sum(math.log(model.prob(seq[i], (seq[i - 2], seq[i - 1]))) for i in range(2, len(seq)))
