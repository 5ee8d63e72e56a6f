"""Alternating adversary / autoencoder training and run persistence."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import checkpoint as ckpt_io
from .config import TrainConfig
from .corpus import (
    BowVocab,
    Sentence,
    Vocabulary,
    batch_iter,
    build_bow_vocab,
    build_vocab,
    default_sentiment_lexicon,
    default_stopwords,
    make_batch,
    make_sentences,
    read_corpus,
    read_lexicon,
    tokenize,
)
from .embeddings import train_skipgram
from .model import (
    AUTOENCODER_GROUPS,
    DISCRIMINATOR_GROUPS,
    ModelConfig,
    ModelParams,
    decode_logits,
    encode_batch,
    init_params,
)
from .objectives import (
    LossBreakdown,
    discriminator_losses_and_grads,
    model_loss_and_grads,
    reconstruction_from_logits,
)
from .optim import Adam, RMSProp, clip_by_global_norm

log = logging.getLogger(__name__)

METRIC_COLUMNS = ("epoch",) + LossBreakdown.COLUMNS + ("val_recon",)


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class Lexicons:
    stopwords: set
    positive: set
    negative: set

    @property
    def sentiment(self):
        return self.positive | self.negative


def load_lexicons(cfg: TrainConfig) -> Lexicons:
    stop = read_lexicon(cfg.stopwords) if cfg.stopwords else default_stopwords()
    pos, neg = default_sentiment_lexicon()
    if cfg.positive_lexicon:
        pos = read_lexicon(cfg.positive_lexicon)
    if cfg.negative_lexicon:
        neg = read_lexicon(cfg.negative_lexicon)
    return Lexicons(stop, pos, neg)


@dataclass
class TrainingData:
    vocab: Vocabulary
    bow: BowVocab
    train: list
    val: list
    lexicons: Lexicons


def prepare_data(cfg: TrainConfig, texts=None, labels=None, val_texts=None, val_labels=None):
    """Read (or take) the corpus, build vocabularies and split off validation."""
    if texts is None:
        if not cfg.corpus:
            raise ValueError("no corpus given (config key `corpus`)")
        texts, labels = read_corpus(cfg.corpus, cfg.labels or None)
    if val_texts is None and cfg.val_corpus:
        val_texts, val_labels = read_corpus(cfg.val_corpus)
    if val_texts is None and cfg.val_fraction > 0:
        order = np.random.default_rng([cfg.seed, 1]).permutation(len(texts))
        n_val = int(round(cfg.val_fraction * len(texts)))
        val_idx, tr_idx = np.sort(order[:n_val]), np.sort(order[n_val:])
        val_texts = [texts[i] for i in val_idx]
        val_labels = [labels[i] for i in val_idx]
        texts = [texts[i] for i in tr_idx]
        labels = [labels[i] for i in tr_idx]
    lex = load_lexicons(cfg)
    vocab = build_vocab(
        (tokenize(t)[: cfg.max_len - 1] for t in texts if t.strip()), cfg.min_count
    )
    bow = build_bow_vocab(vocab, lex.stopwords, lex.sentiment, cfg.bow_mode)
    train = make_sentences(texts, labels, vocab, cfg.max_len)
    val = make_sentences(val_texts, val_labels, vocab, cfg.max_len) if val_texts else []
    return TrainingData(vocab, bow, train, val, lex)


def model_config(cfg: TrainConfig, data: TrainingData) -> ModelConfig:
    return ModelConfig(
        vocab_size=len(data.vocab),
        bow_size=len(data.bow),
        embed_dim=cfg.embed_dim,
        hidden_dim=cfg.hidden_dim,
        style_dim=cfg.style_dim,
        content_dim=cfg.content_dim,
        variational=cfg.mode == "vae",
    )


def build_model(cfg: TrainConfig, data: TrainingData) -> ModelParams:
    rng = np.random.default_rng([cfg.seed, 0])
    params = init_params(model_config(cfg, data), rng)
    if cfg.embedding_init == "skipgram":
        emb = train_skipgram(
            [s.tokens for s in data.train],
            len(data.vocab),
            cfg.embed_dim,
            window=cfg.skipgram_window,
            negatives=cfg.skipgram_negatives,
            epochs=cfg.skipgram_epochs,
            seed=cfg.seed,
        )
        table = params["encoder"]["embedding"]
        seen = np.unique(np.concatenate([s.tokens for s in data.train]))
        scale = table.std() / max(emb[seen].std(), 1e-12)
        table[seen] = emb[seen] * scale
    return params.astype(np.float32) if cfg.dtype == "float32" else params


@dataclass
class Trainer:
    cfg: TrainConfig
    data: TrainingData
    params: ModelParams
    adam: Adam = None
    rmsprop: RMSProp = None
    epoch: int = 0
    step: int = 0
    history: list = field(default_factory=list)

    def __post_init__(self):
        if self.adam is None:
            c = self.cfg
            self.adam = Adam(c.lr_autoencoder, c.adam_beta1, c.adam_beta2, c.adam_eps)
            self.rmsprop = RMSProp(c.lr_discriminator, c.rmsprop_decay, c.rmsprop_eps)

    @property
    def hyper(self):
        return self.cfg.hyper()

    def _noise(self, rng, n):
        if not self.params.config.variational:
            return None
        dt = self.params["encoder"]["embedding"].dtype
        return (
            rng.standard_normal((n, self.params.config.style_dim)).astype(dt),
            rng.standard_normal((n, self.params.config.content_dim)).astype(dt),
        )

    def train_batch(self, batch, rng):
        """Two adversary updates, then one autoencoder update, on one batch."""
        params, hyper = self.params, self.hyper
        encoded = encode_batch(params, batch.tokens, batch.lengths, self._noise(rng, len(batch)))
        state = encoded[0]
        for _ in range(self.cfg.dis_steps):
            dis_s, _, grads = discriminator_losses_and_grads(params, batch, state)
            self.rmsprop.step(params.groups, grads, ["dis_s"])
            _, dis_c, grads = discriminator_losses_and_grads(params, batch, state)
            self.rmsprop.step(params.groups, grads, ["dis_c"])
        parts, grads = model_loss_and_grads(params, batch, hyper, self.step, encoded=encoded)
        parts.dis_s, parts.dis_c = dis_s, dis_c
        if not np.isfinite(parts.overall):
            raise TrainingDiverged(f"overall loss is {parts.overall} at step {self.step}")
        if self.cfg.clip_norm > 0:
            clip_by_global_norm({g: grads[g] for g in AUTOENCODER_GROUPS}, self.cfg.clip_norm)
        self.adam.step(params.groups, grads, list(AUTOENCODER_GROUPS))
        self.step += 1
        return parts

    def train_epoch(self):
        self.epoch += 1
        cfg = self.cfg
        rng = np.random.default_rng([cfg.seed, 2, self.epoch])
        totals, n = np.zeros(len(LossBreakdown.COLUMNS)), 0
        for batch in batch_iter(self.data.train, cfg.batch_size, [cfg.seed, 3, self.epoch],
                                self.data.vocab, self.data.bow):
            parts = self.train_batch(batch, rng)
            totals += np.array(parts.values()) * len(batch)
            n += len(batch)
        row = dict(zip(LossBreakdown.COLUMNS, totals / max(n, 1)))
        row["epoch"] = self.epoch
        row["val_recon"] = self.validation_recon()
        self.history.append(row)
        return row

    def validation_recon(self):
        if not self.data.val:
            return float("nan")
        total = 0.0
        for batch in batch_iter(self.data.val, 256, 0, self.data.vocab, self.data.bow, shuffle=False):
            state, _ = encode_batch(self.params, batch.tokens, batch.lengths)
            logits, _ = decode_logits(self.params, state.h, batch.decoder_inputs)
            value, _ = reconstruction_from_logits(logits, batch.tokens, batch.mask)
            total += value * len(batch)
        return total / len(self.data.val)

    # ---------------------------------------------------------------- persistence

    def to_checkpoint(self, extra_arrays=None, extra_meta=None) -> ckpt_io.Checkpoint:
        vocab = self.data.vocab
        meta = {
            "format": "disentext",
            "model": self.params.config.to_dict(),
            "mode": "vae" if self.params.config.variational else "dae",
            "dtype": str(self.params["encoder"]["embedding"].dtype),
            "vocab": list(vocab.itos),
            "vocab_hash": vocab.hash(),
            "bow": list(self.data.bow.words),
            "bow_mode": self.data.bow.mode,
            "config": self.cfg.to_dict(),
            "epoch": self.epoch,
            "step": self.step,
            "adam_t": self.adam.t,
            "rmsprop_t": self.rmsprop.t,
            "history": self.history,
        }
        meta.update(extra_meta or {})
        arrays = {f"param/{g}/{k}": v for g, d in self.params.groups.items() for k, v in d.items()}
        arrays.update({f"adam/{k}": v for k, v in self.adam.arrays().items()})
        arrays.update({f"rmsprop/{k}": v for k, v in self.rmsprop.arrays().items()})
        arrays.update(extra_arrays or {})
        return ckpt_io.Checkpoint(meta, arrays)

    @classmethod
    def from_checkpoint(cls, ck: ckpt_io.Checkpoint, data: TrainingData, cfg: TrainConfig = None):
        if ck.meta.get("vocab_hash") != data.vocab.hash():
            raise ckpt_io.CheckpointError("checkpoint vocabulary hash mismatch")
        cfg = cfg or TrainConfig.from_dict(ck.meta["config"])
        params = params_from_checkpoint(ck)
        t = cls(cfg, data, params, epoch=ck.meta["epoch"], step=ck.meta["step"],
                history=list(ck.meta.get("history", [])))
        t.adam.load_arrays(ck.group("adam"))
        t.adam.t = ck.meta["adam_t"]
        t.rmsprop.load_arrays(ck.group("rmsprop"))
        t.rmsprop.t = ck.meta["rmsprop_t"]
        return t


def params_from_checkpoint(ck: ckpt_io.Checkpoint) -> ModelParams:
    try:
        config = ModelConfig(**ck.meta["model"])
    except (KeyError, TypeError) as e:
        raise ckpt_io.CheckpointError(f"bad model section in manifest: {e}") from None
    groups = {}
    for key, a in ck.group("param").items():
        g, name = key.split("/")
        groups.setdefault(g, {})[name] = a
    return ModelParams(config, groups)


def write_metrics(path, history):
    with open(path, "w", encoding="utf-8") as f:
        f.write("\t".join(METRIC_COLUMNS) + "\n")
        for row in history:
            f.write("\t".join(
                str(row["epoch"]) if c == "epoch" else f"{row[c]:.6f}" for c in METRIC_COLUMNS
            ) + "\n")


def train(cfg: TrainConfig, data: TrainingData = None, out_dir=None, resume=None,
          epochs=None, on_epoch=None) -> Trainer:
    """Train for ``cfg.epochs`` (or ``epochs``) epochs.

    With ``out_dir`` set, a checkpoint is written after every epoch to
    ``out_dir/checkpoints/epoch-NNN.ckpt`` and the metrics TSV is refreshed.
    ``resume`` is a checkpoint (or path) to continue from.
    """
    data = data or prepare_data(cfg)
    if resume is not None:
        ck = resume if isinstance(resume, ckpt_io.Checkpoint) else ckpt_io.load(resume)
        trainer = Trainer.from_checkpoint(ck, data, cfg)
    else:
        trainer = Trainer(cfg, data, build_model(cfg, data))
    out = Path(out_dir) if out_dir else None
    target = cfg.epochs if epochs is None else epochs
    while trainer.epoch < target:
        try:
            row = trainer.train_epoch()
        except TrainingDiverged:
            log.error("training diverged in epoch %d; last good checkpoint kept", trainer.epoch)
            raise
        log.info("epoch %d: recon %.4f overall %.4f val_recon %.4f",
                 row["epoch"], row["recon"], row["overall"], row["val_recon"])
        if out is not None:
            ckpt_io.save(trainer.to_checkpoint(), out / "checkpoints" / f"epoch-{trainer.epoch:03d}.ckpt")
            write_metrics(out / "metrics.tsv", trainer.history)
        if on_epoch is not None:
            on_epoch(trainer)
    return trainer
