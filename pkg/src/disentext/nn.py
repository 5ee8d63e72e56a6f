"""Differentiable primitives with hand-written backward passes.

Everything here works on batched numpy arrays with a leading batch axis
where it makes sense. Linear maps use the row-vector convention
``x @ W + b`` so ``W`` has shape ``(in_dim, out_dim)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, log_softmax as _log_softmax

PROB_FLOOR = 1e-12


class NonFiniteError(FloatingPointError):
    """Raised when a NaN or Inf shows up where finite values are required."""


def check_finite(name, *arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise NonFiniteError(f"non-finite values in {name}")


def sigmoid(x):
    return expit(x)


# --------------------------------------------------------------------------
# linear / softmax / losses


def linear(weights, bias, x):
    """Affine map ``x @ W + b``."""
    weights = np.asarray(weights)
    x = np.asarray(x)
    if x.shape[-1] != weights.shape[0] or np.shape(bias)[-1] != weights.shape[1]:
        raise ValueError(
            f"shape mismatch: x {x.shape}, W {weights.shape}, b {np.shape(bias)}"
        )
    return x @ weights + bias


def linear_backward(weights, x, dout):
    """Return ``(dW, db, dx)`` for ``out = x @ W + b``; leading axes of x are summed."""
    x2 = x.reshape(-1, x.shape[-1])
    d2 = dout.reshape(-1, dout.shape[-1])
    return x2.T @ d2, d2.sum(axis=0), dout @ weights.T


def softmax(logits):
    logits = np.asarray(logits, dtype=float)
    check_finite("softmax logits", logits)
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(logits):
    logits = np.asarray(logits, dtype=float)
    check_finite("log_softmax logits", logits)
    return _log_softmax(logits, axis=-1)


def cross_entropy(predicted, target):
    """``-sum_l t(l) log y(l)`` along the last axis, with y floored at 1e-12."""
    predicted = np.asarray(predicted, dtype=float)
    target = np.asarray(target, dtype=float)
    if predicted.shape != target.shape:
        raise ValueError(f"support mismatch: {predicted.shape} vs {target.shape}")
    return -(target * np.log(np.maximum(predicted, PROB_FLOOR))).sum(axis=-1)


def entropy(predicted):
    p = np.asarray(predicted, dtype=float)
    return -(p * np.log(np.maximum(p, PROB_FLOOR))).sum(axis=-1)


def entropy_from_logits(logits):
    """Entropy of ``softmax(logits)`` and its gradient w.r.t. the logits."""
    logp = log_softmax(logits)
    p = np.exp(logp)
    h = -(p * logp).sum(axis=-1)
    dlogits = -p * (logp + h[..., None])
    return h, dlogits


def softmax_cross_entropy(logits, target):
    """Cross-entropy of ``softmax(logits)`` against ``target``, with logit gradient."""
    logp = log_softmax(logits)
    target = np.asarray(target, dtype=float)
    if logp.shape != target.shape:
        raise ValueError(f"support mismatch: {logp.shape} vs {target.shape}")
    loss = -(target * logp).sum(axis=-1)
    dlogits = np.exp(logp) * target.sum(axis=-1, keepdims=True) - target
    return loss, dlogits


# --------------------------------------------------------------------------
# Gaussian posterior


@dataclass
class GaussianPosterior:
    mean: np.ndarray
    logvar: np.ndarray

    def __post_init__(self):
        if np.shape(self.mean) != np.shape(self.logvar):
            raise ValueError("mean and log-variance must have the same shape")

    @property
    def dim(self):
        return np.shape(self.mean)[-1]

    @property
    def std(self):
        return np.exp(0.5 * self.logvar)


def reparameterize(post: GaussianPosterior, noise):
    noise = np.asarray(noise, dtype=float)
    if noise.shape[-1] != post.dim:
        raise ValueError(f"noise dim {noise.shape[-1]} != posterior dim {post.dim}")
    return post.mean + post.std * noise


def reparameterize_backward(post: GaussianPosterior, noise, dz):
    """Gradients ``(dmean, dlogvar)`` of a loss with upstream gradient ``dz``."""
    return dz, dz * noise * 0.5 * post.std


def kl_to_standard_normal(post: GaussianPosterior):
    """KL(N(mean, diag(exp(logvar))) || N(0, I)), summed over the last axis."""
    mu, lv = np.asarray(post.mean), np.asarray(post.logvar)
    return 0.5 * (mu**2 + np.exp(lv) - 1.0 - lv).sum(axis=-1)


def kl_backward(post: GaussianPosterior):
    return np.asarray(post.mean), 0.5 * (np.exp(post.logvar) - 1.0)


# --------------------------------------------------------------------------
# GRU


@dataclass
class GruParams:
    """Gate order along the last axis is ``[update, reset, candidate]``."""

    W: np.ndarray  # (I, 3H)
    U: np.ndarray  # (H, 3H)
    b: np.ndarray  # (3H,)

    @property
    def hidden_size(self):
        return self.U.shape[0]

    @property
    def input_size(self):
        return self.W.shape[0]


def gru_step(params: GruParams, x_t, h_prev):
    """One GRU step; returns ``(h_t, cache)``.

    z = sig(x Wz + h Uz + bz), r = sig(x Wr + h Ur + br),
    n = tanh(x Wn + (r*h) Un + bn), h_t = (1 - z) * h + z * n.
    """
    H = params.hidden_size
    if x_t.shape[-1] != params.input_size or h_prev.shape[-1] != H:
        raise ValueError(
            f"GRU dims: x {x_t.shape}, h {h_prev.shape}, "
            f"expected ({params.input_size}, {H})"
        )
    xw = x_t @ params.W + params.b
    hu = h_prev @ params.U[:, : 2 * H]
    z = sigmoid(xw[..., :H] + hu[..., :H])
    r = sigmoid(xw[..., H : 2 * H] + hu[..., H:])
    rh = r * h_prev
    n = np.tanh(xw[..., 2 * H :] + rh @ params.U[:, 2 * H :])
    h = (1.0 - z) * h_prev + z * n
    return h, (x_t, h_prev, z, r, rh, n)


def gru_step_backward(params: GruParams, cache, dh):
    """Backward through one step; returns ``(dx, dh_prev, dW, dU, db)``."""
    x_t, h_prev, z, r, rh, n = cache
    H = params.hidden_size
    Un = params.U[:, 2 * H :]
    dz = dh * (n - h_prev)
    dn = dh * z
    dh_prev = dh * (1.0 - z)
    dan = dn * (1.0 - n * n)
    drh = dan @ Un.T
    dr = drh * h_prev
    dh_prev += drh * r
    daz = dz * z * (1.0 - z)
    dar = dr * r * (1.0 - r)
    da_zr = np.concatenate([daz, dar], axis=-1)
    da = np.concatenate([da_zr, dan], axis=-1)

    x2 = x_t.reshape(-1, x_t.shape[-1])
    h2 = h_prev.reshape(-1, H)
    da2 = da.reshape(-1, 3 * H)
    dW = x2.T @ da2
    dU = np.empty_like(params.U)
    dU[:, : 2 * H] = h2.T @ da_zr.reshape(-1, 2 * H)
    dU[:, 2 * H :] = rh.reshape(-1, H).T @ dan.reshape(-1, H)
    db = da2.sum(axis=0)
    dx = da @ params.W.T
    dh_prev += da_zr @ params.U[:, : 2 * H].T
    return dx, dh_prev, dW, dU, db


def gru_sequence(params: GruParams, xs, h0, mask=None):
    """Run a GRU over ``xs`` of shape (B, T, I).

    Where ``mask[:, t] == 0`` the state is carried over unchanged, so the
    returned final state is each row's state at its last real position.
    Returns ``(states (B, T, H), final (B, H), caches)``.
    """
    B, T, _ = xs.shape
    h = h0
    states = np.empty((B, T, params.hidden_size), dtype=xs.dtype)
    caches = []
    for t in range(T):
        h_new, cache = gru_step(params, xs[:, t], h)
        if mask is not None:
            m = mask[:, t, None]
            h_new = m * h_new + (1.0 - m) * h
        caches.append(cache)
        states[:, t] = h_new
        h = h_new
    return states, h, caches


def gru_sequence_backward(params: GruParams, caches, dstates, dfinal, mask=None):
    """Backward of :func:`gru_sequence`; returns ``(dxs, dh0, dW, dU, db)``."""
    B, T, H = dstates.shape
    dW = np.zeros_like(params.W)
    dU = np.zeros_like(params.U)
    db = np.zeros_like(params.b)
    dxs = np.empty((B, T, params.input_size), dtype=dstates.dtype)
    dh = dfinal.copy()
    for t in reversed(range(T)):
        dh = dh + dstates[:, t]
        if mask is not None:
            m = mask[:, t, None]
            dcell = dh * m
            carry = dh * (1.0 - m)
        else:
            dcell, carry = dh, 0.0
        dx, dh_prev, gW, gU, gb = gru_step_backward(params, caches[t], dcell)
        dW += gW
        dU += gU
        db += gb
        dxs[:, t] = dx
        dh = dh_prev + carry
    return dxs, dh, dW, dU, db


# --------------------------------------------------------------------------
# initialisation and gradient checking


def init_uniform(rng, shape, scale=0.08):
    return rng.uniform(-scale, scale, size=shape)


def init_linear(rng, in_dim, out_dim):
    bound = 1.0 / np.sqrt(in_dim)
    return rng.uniform(-bound, bound, size=(in_dim, out_dim)), np.zeros(out_dim)


def init_gru(rng, input_size, hidden_size, scale=0.08):
    return GruParams(
        W=init_uniform(rng, (input_size, 3 * hidden_size), scale),
        U=init_uniform(rng, (hidden_size, 3 * hidden_size), scale),
        b=np.zeros(3 * hidden_size),
    )


def grad_check(loss_fn, params, analytic, eps=1e-5, n_samples=None, rng=None):
    """Max relative error between analytic gradients and central differences.

    ``params`` is a dict of arrays which ``loss_fn()`` reads in place;
    ``analytic`` maps the same keys to gradients. With ``n_samples`` set,
    that many random coordinates per array are checked instead of all.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    worst = 0.0
    for key, p in params.items():
        g = analytic[key]
        flat = p.reshape(-1)
        idx = np.arange(flat.size)
        if n_samples is not None and flat.size > n_samples:
            idx = rng.choice(flat.size, size=n_samples, replace=False)
        for i in idx:
            old = flat[i]
            flat[i] = old + eps
            lp = loss_fn()
            flat[i] = old - eps
            lm = loss_fn()
            flat[i] = old
            if not (np.isfinite(lp) and np.isfinite(lm)):
                raise NonFiniteError(f"non-finite loss while perturbing {key}")
            num = (lp - lm) / (2 * eps)
            ana = g.reshape(-1)[i]
            err = abs(ana - num) / max(abs(ana), abs(num), 1e-8)
            worst = max(worst, err)
    return worst
