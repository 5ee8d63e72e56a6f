"""Latent-space probes, PCA projection and latent export."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import nn


@dataclass
class ProbeResult:
    subspace: str
    train_accuracy: float
    test_accuracy: float
    majority: float


def fit_logistic(X, y, n_classes=None, lr=0.5, tol=1e-6, max_steps=10_000):
    """Full-batch gradient descent on softmax regression (standardised inputs).

    Returns a predict function. Stops once the gradient norm drops below ``tol``.
    """
    n_classes = n_classes or int(y.max()) + 1
    mu, sd = X.mean(axis=0), X.std(axis=0)
    sd[sd == 0] = 1.0
    Z = (X - mu) / sd
    W = np.zeros((X.shape[1], n_classes))
    b = np.zeros(n_classes)
    T = np.eye(n_classes)[y]
    for _ in range(max_steps):
        P = nn.softmax(Z @ W + b)
        G = (P - T) / len(y)
        gW, gb = Z.T @ G, G.sum(axis=0)
        if np.sqrt((gW**2).sum() + (gb**2).sum()) < tol:
            break
        W -= lr * gW
        b -= lr * gb
    return lambda Xn: ((Xn - mu) / sd @ W + b).argmax(axis=1)


def latent_probe(vectors, labels, subspace="", seed=0, test_fraction=0.2, **fit_kw) -> ProbeResult:
    """Train a linear probe on a seeded split and report train/test accuracy."""
    X = np.asarray(vectors, dtype=float)
    y = np.asarray(labels, dtype=int)
    order = np.random.default_rng(seed).permutation(len(y))
    n_test = max(1, int(round(test_fraction * len(y))))
    te, tr = order[:n_test], order[n_test:]
    if len(np.unique(y)) < 2 or len(np.unique(y[tr])) < 2:
        raise ValueError("probe needs at least two classes in the training split")
    predict = fit_logistic(X[tr], y[tr], n_classes=int(y.max()) + 1, **fit_kw)
    majority = np.bincount(y[tr]).argmax()
    return ProbeResult(
        subspace,
        float((predict(X[tr]) == y[tr]).mean()),
        float((predict(X[te]) == y[te]).mean()),
        float((y[te] == majority).mean()),
    )


def probe_all(s, c, labels, seed=0, **kw):
    """Probe style, content and the concatenated space."""
    return {
        "s": latent_probe(s, labels, "s", seed, **kw),
        "c": latent_probe(c, labels, "c", seed, **kw),
        "s+c": latent_probe(np.hstack([s, c]), labels, "s+c", seed, **kw),
    }


def pca_project(vectors, dims=2):
    """Project centred data onto its top principal directions via SVD."""
    X = np.asarray(vectors, dtype=float)
    Xc = X - X.mean(axis=0)
    _, _, Vt = np.linalg.svd(Xc, full_matrices=False)
    comps = Vt[:dims]
    if comps.shape[0] < dims:
        comps = np.vstack([comps, np.zeros((dims - comps.shape[0], X.shape[1]))])
    return Xc @ comps.T, comps


def export_latents(path, labels, s, c, ids=None):
    """Write id, label, style and content coordinates and 2-D PCA of each space."""
    ps, _ = pca_project(s)
    pc, _ = pca_project(c)
    ids = range(len(labels)) if ids is None else ids
    header = (
        ["id", "label"]
        + [f"s{i}" for i in range(s.shape[1])]
        + [f"c{i}" for i in range(c.shape[1])]
        + ["pca_s1", "pca_s2", "pca_c1", "pca_c2"]
    )
    with open(path, "w", encoding="utf-8") as f:
        f.write("\t".join(header) + "\n")
        for i, y, sv, cv, a, b in zip(ids, labels, s, c, ps, pc):
            vals = [repr(float(v)) for v in (*sv, *cv, *a, *b)]
            f.write("\t".join([str(i), str(int(y))] + vals) + "\n")
