"""Loss terms and their gradients.

Batch reduction is a mean over sentences everywhere. Content losses that
need a BoW target average over the sentences whose target is non-empty.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from . import nn
from .model import (
    ClassifierHead,
    LatentState,
    ModelParams,
    decode_backward,
    decode_logits,
    encode_batch,
    encode_backward,
)


@dataclass
class HyperParams:
    lambda_mul_s: float = 10.0
    lambda_adv_s: float = 1.0
    lambda_mul_c: float = 3.0
    lambda_adv_c: float = 0.03
    lambda_kl_s: float = 0.03
    lambda_kl_c: float = 0.03
    anneal_k: float = 0.0025
    anneal_t0: float = 2500.0

    def __post_init__(self):
        for f in fields(self):
            if f.name.startswith("lambda") and getattr(self, f.name) < 0:
                raise ValueError(f"{f.name} must be nonnegative")
        if self.anneal_k <= 0:
            raise ValueError("anneal_k must be positive")


@dataclass
class LossBreakdown:
    reconstruction: float = 0.0
    kl_s: float = 0.0
    kl_c: float = 0.0
    mul_s: float = 0.0
    adv_s: float = 0.0
    mul_c: float = 0.0
    adv_c: float = 0.0
    dis_s: float = 0.0
    dis_c: float = 0.0
    overall: float = 0.0

    COLUMNS = ("recon", "kl_s", "kl_c", "mul_s", "adv_s", "mul_c", "adv_c", "dis_s", "dis_c", "overall")

    def values(self):
        return [getattr(self, f.name) for f in fields(self)]


def _masked_mean(values, mask=None):
    if mask is None:
        return float(values.mean()), np.full(values.shape, 1.0 / len(values))
    total = mask.sum()
    if total == 0:
        return 0.0, np.zeros_like(values)
    return float((values * mask).sum() / total), mask / total


# --------------------------------------------------------------------------
# reconstruction and KL


def loss_reconstruction(step_probs, gold, mask=None):
    """``-sum_t log p(x_t | ...)`` over real tokens, averaged over the batch.

    ``step_probs`` is (B, T, V) or (T, V) for one sentence.
    """
    p = np.asarray(step_probs, dtype=float)
    gold = np.asarray(gold)
    if p.ndim == 2:
        p, gold = p[None], gold[None]
        mask = None if mask is None else np.asarray(mask)[None]
    if mask is None:
        mask = np.ones(gold.shape)
    mask = np.asarray(mask, dtype=float)
    if np.any(mask.sum(axis=1) == 0):
        raise ValueError("sentence without any real token")
    picked = np.take_along_axis(p, gold[..., None], axis=-1)[..., 0]
    nll = -(np.log(np.maximum(picked, nn.PROB_FLOOR)) * mask).sum(axis=1)
    return float(nll.mean())


def reconstruction_from_logits(logits, gold, mask):
    """Reconstruction loss from decoder logits plus the logit gradient."""
    B = logits.shape[0]
    logp = nn.log_softmax(logits)
    picked = np.take_along_axis(logp, gold[..., None], axis=-1)[..., 0]
    value = float(-(picked * mask).sum() / B)
    dlogits = np.exp(logp)
    np.put_along_axis(
        dlogits, gold[..., None], np.take_along_axis(dlogits, gold[..., None], -1) - 1.0, axis=-1
    )
    dlogits *= mask[..., None] / B
    return value, dlogits


def kl_weight(t, k=0.0025, t0=2500.0):
    """Logistic annealing weight ``1 / (1 + exp(-k (t - t0)))``."""
    if k <= 0:
        raise ValueError("k must be positive")
    return float(nn.sigmoid(k * (t - t0)))


def loss_vae(recon, post_s, post_c, weight_s, weight_c):
    """``recon + weight_s * KL_s + weight_c * KL_c`` with batch-mean KLs."""
    kl_s = float(np.mean(nn.kl_to_standard_normal(post_s)))
    kl_c = float(np.mean(nn.kl_to_standard_normal(post_c)))
    return recon + weight_s * kl_s + weight_c * kl_c


# --------------------------------------------------------------------------
# auxiliary losses


def multitask_loss(head: ClassifierHead, v, target, mask=None):
    """Cross-entropy of a head on ``v``; returns ``(value, head_grads, dv)``.

    Gradients reach both the head parameters and the input vector.
    """
    v = np.atleast_2d(v)
    target = np.atleast_2d(target)
    logits = nn.linear(head.weight, head.bias, v)
    per, dlogits = nn.softmax_cross_entropy(logits, target)
    value, weights = _masked_mean(per, mask)
    dlogits = dlogits * weights[:, None]
    dW, db, dv = nn.linear_backward(head.weight, v, dlogits)
    return value, {"W": dW, "b": db}, dv


def discriminator_loss(head: ClassifierHead, v, target, mask=None):
    """Same value as :func:`multitask_loss`; gradients only for the head.

    ``v`` is treated as a constant input, so nothing flows back into
    whatever produced it.
    """
    v = np.array(v, copy=True)
    value, grads, _ = multitask_loss(head, v, target, mask)
    return value, grads


def adversarial_entropy(head: ClassifierHead, v):
    """Mean prediction entropy of a frozen head; returns ``(value, dv)``."""
    v = np.atleast_2d(v)
    logits = nn.linear(head.weight, head.bias, v)
    h, dlogits = nn.entropy_from_logits(logits)
    value, weights = _masked_mean(h)
    dv = (dlogits * weights[:, None]) @ head.weight.T
    return value, dv


def loss_overall(parts: LossBreakdown, hyper: HyperParams, step, variational=False):
    """Fill ``parts.overall``; adversarial entropies enter with a minus sign."""
    w = kl_weight(step, hyper.anneal_k, hyper.anneal_t0) if variational else 0.0
    parts.overall = (
        parts.reconstruction
        + w * (hyper.lambda_kl_s * parts.kl_s + hyper.lambda_kl_c * parts.kl_c)
        + hyper.lambda_mul_s * parts.mul_s
        - hyper.lambda_adv_s * parts.adv_s
        + hyper.lambda_mul_c * parts.mul_c
        - hyper.lambda_adv_c * parts.adv_c
    )
    return parts


# --------------------------------------------------------------------------
# assembled gradients


def style_targets(labels, n_labels=2):
    return np.eye(n_labels)[labels]


def model_loss_and_grads(params: ModelParams, batch, hyper: HyperParams, step=0, noise=None,
                         encoded=None):
    """Overall autoencoder loss and gradients over all parameter groups.

    The discriminator groups receive exactly-zero gradients. ``encoded`` may
    carry a precomputed ``(LatentState, cache)`` for this batch.
    """
    cfg = params.config
    state, cache = encoded if encoded is not None else encode_batch(
        params, batch.tokens, batch.lengths, noise=noise
    )
    grads = params.zeros_like()
    parts = LossBreakdown()
    B, S = len(batch), cfg.style_dim

    h = state.h
    logits, dcache = decode_logits(params, h, batch.decoder_inputs)
    mask = batch.mask
    parts.reconstruction, dlogits = reconstruction_from_logits(logits, batch.tokens, mask)
    dec_grads, dh, demb = decode_backward(params, dcache, dlogits)
    grads["decoder"] = dec_grads
    ds, dc = dh[:, :S].copy(), dh[:, S:].copy()

    parts.mul_s, g, dv = multitask_loss(params.head("mul_s"), state.s, style_targets(batch.labels, cfg.n_labels))
    grads["mul_s"] = {k: hyper.lambda_mul_s * v for k, v in g.items()}
    ds += hyper.lambda_mul_s * dv

    parts.mul_c, g, dv = multitask_loss(params.head("mul_c"), state.c, batch.bow, batch.bow_mask)
    grads["mul_c"] = {k: hyper.lambda_mul_c * v for k, v in g.items()}
    dc += hyper.lambda_mul_c * dv

    parts.adv_s, dv = adversarial_entropy(params.head("dis_s"), state.c)
    dc -= hyper.lambda_adv_s * dv
    parts.adv_c, dv = adversarial_entropy(params.head("dis_c"), state.s)
    ds -= hyper.lambda_adv_c * dv

    dpost = None
    if cfg.variational:
        w = kl_weight(step, hyper.anneal_k, hyper.anneal_t0)
        parts.kl_s = float(np.mean(nn.kl_to_standard_normal(state.post_s)))
        parts.kl_c = float(np.mean(nn.kl_to_standard_normal(state.post_c)))
        dmu_s, dlv_s = nn.kl_backward(state.post_s)
        dmu_c, dlv_c = nn.kl_backward(state.post_c)
        ws, wc = w * hyper.lambda_kl_s / B, w * hyper.lambda_kl_c / B
        dpost = (ws * dmu_s, ws * dlv_s, wc * dmu_c, wc * dlv_c)

    grads["encoder"] = encode_backward(params, state, cache, ds, dc, dpost)
    grads["encoder"]["embedding"] += demb
    loss_overall(parts, hyper, step, cfg.variational)
    return parts, grads


def discriminator_losses_and_grads(params: ModelParams, batch, state: LatentState):
    """Both adversary losses on detached latents; only dis groups get gradients."""
    grads = params.zeros_like()
    dis_s, g_s = discriminator_loss(
        params.head("dis_s"), state.c, style_targets(batch.labels, params.config.n_labels)
    )
    dis_c, g_c = discriminator_loss(params.head("dis_c"), state.s, batch.bow, batch.bow_mask)
    grads["dis_s"], grads["dis_c"] = g_s, g_c
    return dis_s, dis_c, grads
