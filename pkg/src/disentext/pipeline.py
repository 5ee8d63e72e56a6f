"""End-to-end glue: final model files, transfer runs and evaluation reports.

The command-line tool is a thin layer over these functions.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import checkpoint as ckpt_io
from .config import TrainConfig
from .corpus import BowVocab, Vocabulary, make_sentences, read_corpus, tokenize
from .evaluation.classifier import CNNConfig, LexiconClassifier, train_style_classifier, transfer_accuracy
from .evaluation.kn import kn_log_likelihood, train_kn_lm
from .evaluation.metrics import cosine_content_similarity, word_overlap
from .evaluation.probe import export_latents, probe_all
from .model import ModelParams
from .training import Lexicons, Trainer, load_lexicons, params_from_checkpoint, prepare_data
from .transfer import StyleVectorEstimate, encode_sentences, estimate_all, transfer_ids

log = logging.getLogger(__name__)

METRICS = ("overlap", "cosine", "fluency", "accuracy")
TRANSFER_HEADER = ("source", "target", "generated")


@dataclass
class ModelBundle:
    """Everything needed to use a trained model."""

    params: ModelParams
    vocab: Vocabulary
    bow: BowVocab
    cfg: TrainConfig
    estimates: dict
    lexicons: Lexicons

    @property
    def max_len(self):
        return self.cfg.max_len

    def sentences(self, texts, labels):
        return make_sentences(texts, labels, self.vocab, self.max_len)

    def training_corpus(self):
        if not self.cfg.corpus:
            raise ValueError("model config has no training corpus path")
        texts, labels = read_corpus(self.cfg.corpus, self.cfg.labels or None)
        return texts, labels


def final_checkpoint(trainer: Trainer):
    """Trainer checkpoint plus style estimates over the training split.

    Returns ``(checkpoint, estimates)``.
    """
    d = trainer.data
    est = estimate_all(trainer.params, d.train, d.vocab, d.bow, labels=sorted({s.label for s in d.train}))
    arrays = {f"style/{y}": e.vector for y, e in est.items()}
    meta = {"style_counts": {str(y): e.count for y, e in est.items()}}
    return trainer.to_checkpoint(arrays, meta), est


def write_style_estimates(path, estimates):
    with open(path, "w", encoding="utf-8") as f:
        f.write("label\tcount\tvector\n")
        for y in sorted(estimates):
            e = estimates[y]
            f.write(f"{y}\t{e.count}\t{' '.join(repr(float(v)) for v in e.vector)}\n")


def load_bundle(path) -> ModelBundle:
    ck = ckpt_io.load(path)
    params = params_from_checkpoint(ck)
    vocab = Vocabulary(ck.meta["vocab"][4:])
    if vocab.hash() != ck.meta["vocab_hash"]:
        raise ckpt_io.CheckpointError("vocabulary does not match its recorded hash")
    bow = BowVocab(tuple(ck.meta["bow"]), ck.meta["bow_mode"])
    cfg = TrainConfig.from_dict(ck.meta["config"])
    lex = load_lexicons(cfg)
    style = ck.group("style")
    if style:
        counts = ck.meta.get("style_counts", {})
        estimates = {int(y): StyleVectorEstimate(int(y), v, int(counts.get(y, 0))) for y, v in style.items()}
    else:
        # an intermediate epoch checkpoint: recompute from the training split
        data = prepare_data(cfg)
        estimates = estimate_all(params, data.train, vocab, bow, sorted({s.label for s in data.train}))
    return ModelBundle(params, vocab, bow, cfg, estimates, lex)


def run_transfer(bundle: ModelBundle, texts, target_labels):
    """Generated token lists for each text and target label."""
    sentences = bundle.sentences(texts, target_labels)
    if len(sentences) != len(texts):
        raise ValueError("input contains empty sentences")
    return transfer_ids(bundle.params, sentences, target_labels, bundle.estimates,
                        bundle.vocab, bundle.bow, bundle.max_len)


def write_transfer(path, sources, targets, generated):
    with open(path, "w", encoding="utf-8") as f:
        f.write("\t".join(TRANSFER_HEADER) + "\n")
        for src, y, gen in zip(sources, targets, generated):
            f.write(f"{src}\t{int(y)}\t{' '.join(gen)}\n")


def read_transfer(path):
    """Read a transfer TSV back as (sources, targets, generated token lists)."""
    with open(path, encoding="utf-8") as f:
        header = f.readline().rstrip("\n").split("\t")
        if tuple(header) != TRANSFER_HEADER:
            raise ValueError(f"{path}: not a transfer file (header {header})")
        src, tgt, gen = [], [], []
        for line in f:
            a, b, c = line.rstrip("\n").split("\t")
            src.append(a)
            tgt.append(int(b))
            gen.append(c.split())
    return src, tgt, gen


def is_transfer_file(path):
    with open(path, encoding="utf-8") as f:
        return tuple(f.readline().rstrip("\n").split("\t")) == TRANSFER_HEADER


def evaluate(bundle: ModelBundle, sources, targets, generated, metrics=METRICS,
             classifier="cnn", seed=0, train_corpus=None):
    """Corpus-level scores and per-sentence rows.

    ``train_corpus`` is ``(texts, labels)`` for the language model and
    classifier; it defaults to the model's training corpus.
    """
    unknown = set(metrics) - set(METRICS)
    if unknown:
        raise ValueError(f"unknown metric(s): {sorted(unknown)}")
    if not generated:
        raise ValueError("nothing to evaluate")
    src_tok = [tokenize(s) for s in sources]
    rows = [{"source": s, "target": y, "generated": " ".join(g)}
            for s, y, g in zip(sources, targets, generated)]
    report = {}
    need_corpus = "fluency" in metrics or ("accuracy" in metrics and classifier == "cnn")
    if need_corpus and train_corpus is None:
        train_corpus = bundle.training_corpus()
    train_tok = [tokenize(t) for t in train_corpus[0]] if need_corpus else None

    if "overlap" in metrics:
        vals = [word_overlap(a, b) for a, b in zip(src_tok, generated)]
        _attach(rows, "overlap", vals)
        report["overlap"] = float(np.mean(vals))
    if "cosine" in metrics:
        emb = bundle.params["encoder"]["embedding"].astype(np.float64)
        sent = bundle.lexicons.sentiment
        vals = []
        for a, b in zip(src_tok, generated):
            vals.append(cosine_content_similarity(a, b, emb, bundle.vocab.stoi, bundle.vocab.unk_id, sent)
                        if b else 0.0)
        _attach(rows, "cosine", vals)
        report["cosine"] = float(np.mean(vals))
    if "fluency" in metrics:
        lm = train_kn_lm(train_tok)
        vals = [kn_log_likelihood(lm, g) if g else float("nan") for g in generated]
        _attach(rows, "fluency", vals)
        report["fluency"] = float(np.nanmean(vals)) if np.isfinite(vals).any() else float("nan")
    if "accuracy" in metrics:
        if classifier == "cnn":
            clf = train_style_classifier(train_tok, train_corpus[1], CNNConfig(seed=seed))
        elif classifier == "lexicon":
            clf = LexiconClassifier(bundle.lexicons.positive, bundle.lexicons.negative)
        else:
            raise ValueError(f"unknown classifier {classifier!r}")
        pred = clf.predict(generated)
        _attach(rows, "accuracy", [float(p == y) for p, y in zip(pred, targets)])
        report["accuracy"] = transfer_accuracy(clf, generated, targets)
        if getattr(clf, "low_confidence", False):
            report["accuracy_low_confidence"] = 1.0
    return report, rows


def _attach(rows, key, values):
    for r, v in zip(rows, values):
        r[key] = v


def write_report(path, report, rows):
    """Report TSV (metric, value, per-sentence file) and the per-sentence TSV."""
    path = Path(path)
    per = path.with_name(path.stem + ".sentences.tsv")
    with open(path, "w", encoding="utf-8") as f:
        f.write("metric\tvalue\tper_sentence\n")
        for k, v in report.items():
            f.write(f"{k}\t{v:.6f}\t{per.name}\n")
    cols = ["source", "target", "generated"] + [m for m in METRICS if m in report]
    with open(per, "w", encoding="utf-8") as f:
        f.write("\t".join(cols) + "\n")
        for r in rows:
            f.write("\t".join(_fmt(r[c]) for c in cols) + "\n")
    return per


def _fmt(v):
    return f"{v:.6f}" if isinstance(v, float) else str(v)


def probe_model(bundle: ModelBundle, texts, labels, seed=0):
    s, c = encode_sentences(bundle.params, bundle.sentences(texts, labels), bundle.vocab, bundle.bow)
    kept = [y for t, y in zip(texts, labels) if t.strip()]
    return probe_all(s, c, kept, seed=seed)


def export_model_latents(bundle: ModelBundle, texts, labels, path):
    sents = bundle.sentences(texts, labels)
    s, c = encode_sentences(bundle.params, sents, bundle.vocab, bundle.bow)
    export_latents(path, [x.label for x in sents], s, c)
