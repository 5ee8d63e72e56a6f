"""Sequence autoencoder with a split latent ``h = [s; c]`` and four classifier heads."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import NamedTuple, Optional

import numpy as np

from . import nn
from .corpus import Vocabulary
from .nn import GaussianPosterior, GruParams

GROUPS = ("encoder", "decoder", "mul_s", "dis_s", "mul_c", "dis_c")
AUTOENCODER_GROUPS = ("encoder", "decoder", "mul_s", "mul_c")
DISCRIMINATOR_GROUPS = ("dis_s", "dis_c")


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int
    bow_size: int
    embed_dim: int = 128
    hidden_dim: int = 256
    style_dim: int = 8
    content_dim: int = 128
    n_labels: int = 2
    variational: bool = False

    @property
    def latent_dim(self):
        return self.style_dim + self.content_dim

    def to_dict(self):
        return asdict(self)


class ClassifierHead(NamedTuple):
    weight: np.ndarray  # (in_dim, out_dim)
    bias: np.ndarray


class ModelParams:
    """Named parameter groups; every array belongs to exactly one group."""

    def __init__(self, config: ModelConfig, groups: dict):
        self.config = config
        self.groups = groups

    def __getitem__(self, group):
        return self.groups[group]

    def flat(self):
        return {f"{g}.{k}": v for g, d in self.groups.items() for k, v in d.items()}

    def copy(self):
        return ModelParams(
            self.config, {g: {k: v.copy() for k, v in d.items()} for g, d in self.groups.items()}
        )

    def zeros_like(self):
        return {g: {k: np.zeros_like(v) for k, v in d.items()} for g, d in self.groups.items()}

    def head(self, name) -> ClassifierHead:
        return ClassifierHead(self.groups[name]["W"], self.groups[name]["b"])

    def gru(self, group) -> GruParams:
        d = self.groups[group]
        prefix = "enc_" if group == "encoder" else ""
        return GruParams(d[prefix + "W"], d[prefix + "U"], d[prefix + "b"])

    def astype(self, dtype):
        return ModelParams(
            self.config,
            {g: {k: v.astype(dtype) for k, v in d.items()} for g, d in self.groups.items()},
        )


def _latent_heads(variational):
    if variational:
        return ("s_mu", "s_lv", "c_mu", "c_lv")
    return ("s", "c")


def init_params(config: ModelConfig, rng: np.random.Generator) -> ModelParams:
    E, H, S, C, Z = (
        config.embed_dim,
        config.hidden_dim,
        config.style_dim,
        config.content_dim,
        config.latent_dim,
    )
    enc_gru = nn.init_gru(rng, E, H)
    encoder = {
        "embedding": nn.init_uniform(rng, (config.vocab_size, E), 0.1),
        "enc_W": enc_gru.W,
        "enc_U": enc_gru.U,
        "enc_b": enc_gru.b,
    }
    for name in _latent_heads(config.variational):
        W, b = nn.init_linear(rng, H, S if name.startswith("s") else C)
        encoder[name + "_W"], encoder[name + "_b"] = W, b

    dec_gru = nn.init_gru(rng, E, H)
    init_W, init_b = nn.init_linear(rng, Z, H)
    out_W, out_b = nn.init_linear(rng, H + Z, config.vocab_size)
    decoder = {
        "W": dec_gru.W,
        "U": dec_gru.U,
        "b": dec_gru.b,
        "init_W": init_W,
        "init_b": init_b,
        "out_W": out_W,
        "out_b": out_b,
    }
    groups = {"encoder": encoder, "decoder": decoder}
    for name, (i, o) in {
        "mul_s": (S, config.n_labels),
        "dis_s": (C, config.n_labels),
        "mul_c": (C, config.bow_size),
        "dis_c": (S, config.bow_size),
    }.items():
        W, b = nn.init_linear(rng, i, o)
        groups[name] = {"W": W, "b": b}
    return ModelParams(config, groups)


# --------------------------------------------------------------------------
# encoder


@dataclass
class LatentState:
    s: np.ndarray
    c: np.ndarray
    post_s: Optional[GaussianPosterior] = None
    post_c: Optional[GaussianPosterior] = None
    sampled: bool = False

    @property
    def h(self):
        return np.concatenate([self.s, self.c], axis=-1)


def _as_batch(tokens, lengths=None):
    tokens = np.asarray(tokens)
    if tokens.ndim == 1:
        tokens = tokens[None, :]
    if lengths is None:
        lengths = np.full(tokens.shape[0], tokens.shape[1])
    return tokens, np.asarray(lengths)


def encode_batch(params: ModelParams, tokens, lengths=None, noise=None, use_mean=False):
    """Encode a padded (B, T) token matrix; returns ``(LatentState, cache)``.

    For a variational model ``noise`` is a pair of standard-normal arrays
    (B, style_dim), (B, content_dim). ``noise=None`` or ``use_mean=True``
    returns the posterior means.
    """
    tokens, lengths = _as_batch(tokens, lengths)
    if tokens.shape[1] == 0 or np.any(lengths < 1):
        raise ValueError("cannot encode an empty token sequence")
    enc = params["encoder"]
    cfg = params.config
    B, T = tokens.shape
    mask = (np.arange(T)[None, :] < lengths[:, None]).astype(enc["embedding"].dtype)
    xs = enc["embedding"][tokens]
    gru = params.gru("encoder")
    h0 = np.zeros((B, cfg.hidden_dim), dtype=xs.dtype)
    _, final, caches = nn.gru_sequence(gru, xs, h0, mask)
    cache = {"tokens": tokens, "mask": mask, "gru": caches, "final": final}

    if not cfg.variational:
        s = nn.linear(enc["s_W"], enc["s_b"], final)
        c = nn.linear(enc["c_W"], enc["c_b"], final)
        return LatentState(s, c), cache

    post_s = GaussianPosterior(
        nn.linear(enc["s_mu_W"], enc["s_mu_b"], final),
        nn.linear(enc["s_lv_W"], enc["s_lv_b"], final),
    )
    post_c = GaussianPosterior(
        nn.linear(enc["c_mu_W"], enc["c_mu_b"], final),
        nn.linear(enc["c_lv_W"], enc["c_lv_b"], final),
    )
    if noise is None or use_mean:
        state = LatentState(post_s.mean, post_c.mean, post_s, post_c, sampled=False)
        noise = (np.zeros_like(post_s.mean), np.zeros_like(post_c.mean))
    else:
        eps_s, eps_c = noise
        state = LatentState(
            nn.reparameterize(post_s, eps_s),
            nn.reparameterize(post_c, eps_c),
            post_s,
            post_c,
            sampled=True,
        )
    cache["noise"] = noise
    return state, cache


def encode(params: ModelParams, tokens, noise=None, use_mean=False) -> LatentState:
    """Encode one sentence (a 1-D id sequence)."""
    tokens = np.asarray(tokens)
    if tokens.size == 0:
        raise ValueError("cannot encode an empty token sequence")
    state, _ = encode_batch(params, tokens[None, :], noise=noise, use_mean=use_mean)
    squeeze = lambda p: None if p is None else GaussianPosterior(p.mean[0], p.logvar[0])
    return LatentState(
        state.s[0], state.c[0], squeeze(state.post_s), squeeze(state.post_c), state.sampled
    )


def encode_backward(params: ModelParams, state: LatentState, cache, ds, dc, dpost=None):
    """Gradients of the encoder group given upstream ``ds``, ``dc``.

    ``dpost`` optionally adds direct gradients on the posterior parameters
    (from the KL term) as ``(dmu_s, dlv_s, dmu_c, dlv_c)``.
    """
    enc = params["encoder"]
    grads = {k: np.zeros_like(v) for k, v in enc.items()}
    final = cache["final"]
    if not params.config.variational:
        dfinal = np.zeros_like(final)
        for name, d in (("s", ds), ("c", dc)):
            dW, db, dx = nn.linear_backward(enc[name + "_W"], final, d)
            grads[name + "_W"] += dW
            grads[name + "_b"] += db
            dfinal += dx
    else:
        eps_s, eps_c = cache["noise"]
        dmu_s, dlv_s = nn.reparameterize_backward(state.post_s, eps_s, ds)
        dmu_c, dlv_c = nn.reparameterize_backward(state.post_c, eps_c, dc)
        if dpost is not None:
            dmu_s = dmu_s + dpost[0]
            dlv_s = dlv_s + dpost[1]
            dmu_c = dmu_c + dpost[2]
            dlv_c = dlv_c + dpost[3]
        dfinal = np.zeros_like(final)
        for name, d in (("s_mu", dmu_s), ("s_lv", dlv_s), ("c_mu", dmu_c), ("c_lv", dlv_c)):
            dW, db, dx = nn.linear_backward(enc[name + "_W"], final, d)
            grads[name + "_W"] += dW
            grads[name + "_b"] += db
            dfinal += dx

    gru = params.gru("encoder")
    B, T = cache["tokens"].shape
    dstates = np.zeros((B, T, gru.hidden_size), dtype=final.dtype)
    dxs, _, dW, dU, db = nn.gru_sequence_backward(gru, cache["gru"], dstates, dfinal, cache["mask"])
    grads["enc_W"] += dW
    grads["enc_U"] += dU
    grads["enc_b"] += db
    np.add.at(grads["embedding"], cache["tokens"], dxs * cache["mask"][..., None])
    return grads


# --------------------------------------------------------------------------
# decoder


def decode_logits(params: ModelParams, h, dec_inputs):
    """Teacher-forced decoder logits (B, T, V) for latent ``h`` (B, Z)."""
    dec = params["decoder"]
    if h.shape[-1] != params.config.latent_dim:
        raise ValueError(f"latent dim {h.shape[-1]} != {params.config.latent_dim}")
    xs = params["encoder"]["embedding"][dec_inputs]
    d0 = nn.linear(dec["init_W"], dec["init_b"], h)
    states, _, caches = nn.gru_sequence(params.gru("decoder"), xs, d0)
    H = params.config.hidden_dim
    Wd, Wz = dec["out_W"][:H], dec["out_W"][H:]
    logits = states @ Wd + (h @ Wz + dec["out_b"])[:, None, :]
    return logits, {"h": h, "inputs": dec_inputs, "states": states, "gru": caches}


def decode_backward(params: ModelParams, cache, dlogits):
    """Returns ``(decoder_grads, dh, dembedding)``."""
    dec = params["decoder"]
    H = params.config.hidden_dim
    h, states = cache["h"], cache["states"]
    grads = {k: np.zeros_like(v) for k, v in dec.items()}
    Wd, Wz = dec["out_W"][:H], dec["out_W"][H:]
    B, T, V = dlogits.shape
    d2 = dlogits.reshape(-1, V)
    grads["out_W"][:H] = states.reshape(-1, H).T @ d2
    dsum = dlogits.sum(axis=1)
    grads["out_W"][H:] = h.T @ dsum
    grads["out_b"] = d2.sum(axis=0)
    dh = dsum @ Wz.T
    dstates = dlogits @ Wd.T

    gru = params.gru("decoder")
    dxs, dd0, dW, dU, db = nn.gru_sequence_backward(
        gru, cache["gru"], dstates, np.zeros_like(states[:, 0])
    )
    grads["W"], grads["U"], grads["b"] = dW, dU, db
    dW0, db0, dh0 = nn.linear_backward(dec["init_W"], h, dd0)
    grads["init_W"], grads["init_b"] = dW0, db0
    dh = dh + dh0
    demb = np.zeros_like(params["encoder"]["embedding"])
    np.add.at(demb, cache["inputs"], dxs)
    return grads, dh, demb


def decode_teacher_forced(params: ModelParams, h, gold_tokens, max_len=None):
    """Per-step output distributions (n, V) for one latent ``h`` and gold sequence."""
    gold = np.asarray(gold_tokens)
    if max_len is not None and len(gold) > max_len:
        raise ValueError(f"sequence length {len(gold)} exceeds max_len {max_len}")
    inputs = np.concatenate([[Vocabulary.bos_id], gold[:-1]]).astype(int)
    logits, _ = decode_logits(params, np.asarray(h)[None, :], inputs[None, :])
    return nn.softmax(logits[0])


def decode_greedy(params: ModelParams, h, max_len=30):
    """Greedy decoding for a batch of latents (B, Z) or one latent (Z,).

    Returns id sequences including the end token when it is produced.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    h = np.asarray(h)
    single = h.ndim == 1
    H2 = np.atleast_2d(h)
    dec = params["decoder"]
    emb = params["encoder"]["embedding"]
    Hd = params.config.hidden_dim
    gru = params.gru("decoder")
    B = H2.shape[0]
    state = nn.linear(dec["init_W"], dec["init_b"], H2)
    latent_part = H2 @ dec["out_W"][Hd:] + dec["out_b"]
    prev = np.full(B, Vocabulary.bos_id)
    done = np.zeros(B, dtype=bool)
    outs = [[] for _ in range(B)]
    for _ in range(max_len):
        state, _ = nn.gru_step(gru, emb[prev], state)
        logits = state @ dec["out_W"][:Hd] + latent_part
        prev = logits.argmax(axis=-1)
        for i in np.flatnonzero(~done):
            outs[i].append(int(prev[i]))
        done |= prev == Vocabulary.eos_id
        if done.all():
            break
    return outs[0] if single else outs


# --------------------------------------------------------------------------
# classifier heads


def head_forward(head: ClassifierHead, v):
    v = np.asarray(v)
    if v.shape[-1] != head.weight.shape[0]:
        raise ValueError(f"head expects input dim {head.weight.shape[0]}, got {v.shape[-1]}")
    return nn.softmax(nn.linear(head.weight, head.bias, v))
