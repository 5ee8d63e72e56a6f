"""Brute-force reference implementations used as test oracles.

Each one recomputes its quantity from first principles on every call,
sharing no code or tables with the library.
"""

import math

import numpy as np


def overlap(x, y):
    ux = []
    for w in x + y:
        if w not in ux:
            ux.append(w)
    if not ux:
        return 1.0
    both = [w for w in ux if w in x and w in y]
    return len(both) / len(ux)


def summary(tokens, emb, stoi, sentiment):
    kept = [t for t in tokens if t not in sentiment] or list(tokens)
    rows = [emb[stoi.get(t, 1)] for t in kept]
    d = len(rows[0])
    mn = [min(r[j] for r in rows) for j in range(d)]
    mx = [max(r[j] for r in rows) for j in range(d)]
    me = [sum(r[j] for r in rows) / len(rows) for j in range(d)]
    return mn + mx + me


def cosine(x, y, emb, stoi, sentiment):
    a, b = summary(x, emb, stoi, sentiment), summary(y, emb, stoi, sentiment)
    dot = sum(p * q for p, q in zip(a, b))
    return dot / (math.sqrt(sum(p * p for p in a)) * math.sqrt(sum(q * q for q in b)))


def entropy(p):
    return -sum(v * math.log(v) for v in p if v > 0)


def kl_diag(mu, var):
    return sum(0.5 * (m * m + v - 1 - math.log(v)) for m, v in zip(mu, var))


class BruteKN:
    """Interpolated Kneser-Ney trigram, recounting from sentences on each query."""

    def __init__(self, sentences, D=0.75):
        self.D = D
        self.seqs = [["<s>", "<s>"] + list(s) + ["</s>"] for s in sentences]
        words = {w for s in sentences for w in s}
        self.vocab = sorted(words | {"</s>", "<unk>"})

    def _trigrams(self):
        return [tuple(s[i - 2 : i + 1]) for s in self.seqs for i in range(2, len(s))]

    def _bigram_types(self):
        return {tuple(s[i - 1 : i + 1]) for s in self.seqs for i in range(2, len(s))}

    def p1(self, w):
        types = self._bigram_types()
        n = len(types)
        cont = {}
        for (_, b) in types:
            cont[b] = cont.get(b, 0) + 1
        return max(cont.get(w, 0) - self.D, 0) / n + self.D * len(cont) / n / len(self.vocab)

    def p2(self, v, w):
        tri = set(self._trigrams())
        n_vw = len({u for (u, a, b) in tri if a == v and b == w})
        denom = len({(u, b) for (u, a, b) in tri if a == v})
        if denom == 0:
            return self.p1(w)
        followers = len({b for (u, a, b) in tri if a == v})
        return (max(n_vw - self.D, 0) + self.D * followers * self.p1(w)) / denom

    def p(self, w, u, v):
        w = w if w in self.vocab else "<unk>"
        tri = self._trigrams()
        c = sum(1 for t in tri if t == (u, v, w))
        ctx = sum(1 for t in tri if t[:2] == (u, v))
        if ctx == 0:
            return self.p2(v, w)
        types = len({t[2] for t in tri if t[:2] == (u, v)})
        return (max(c - self.D, 0) + self.D * types * self.p2(v, w)) / ctx

    def continuation(self, w):
        types = self._bigram_types()
        return sum(1 for (_, b) in types if b == w) / len(types)


def pca_eig(X, k):
    Xc = X - X.mean(axis=0)
    vals, vecs = np.linalg.eigh(np.cov(Xc, rowvar=False))
    order = np.argsort(vals)[::-1][:k]
    return vecs[:, order].T
