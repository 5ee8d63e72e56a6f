"""Corpus ingestion: tokenization, vocabularies, BoW targets and batching."""

from __future__ import annotations

import hashlib
import logging
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

log = logging.getLogger(__name__)

PAD, UNK, BOS, EOS = "<pad>", "<unk>", "<s>", "</s>"
RESERVED = (PAD, UNK, BOS, EOS)

BOW_MODES = ("full", "no-sentiment", "no-stopwords", "no-stopwords-no-sentiment")


class CorpusError(ValueError):
    pass


class EmptySentenceError(CorpusError):
    pass


def tokenize(raw_text: str) -> list[str]:
    tokens = raw_text.lower().split()
    if not tokens:
        raise EmptySentenceError("empty sentence")
    return tokens


def detokenize(tokens: Sequence[str]) -> str:
    return " ".join(tokens)


class Vocabulary:
    """Token <-> id map with the four reserved ids at 0..3."""

    pad_id, unk_id, bos_id, eos_id = 0, 1, 2, 3

    def __init__(self, tokens: Iterable[str] = ()):
        self.itos: list[str] = list(RESERVED)
        self.stoi: dict[str, int] = {t: i for i, t in enumerate(self.itos)}
        for t in tokens:
            if t in self.stoi:
                raise CorpusError(f"duplicate vocabulary entry {t!r}")
            self.stoi[t] = len(self.itos)
            self.itos.append(t)

    def __len__(self):
        return len(self.itos)

    def __contains__(self, token):
        return token in self.stoi

    @property
    def words(self) -> list[str]:
        """Non-reserved tokens in id order."""
        return self.itos[len(RESERVED) :]

    def encode(self, tokens: Sequence[str], add_eos=True) -> list[int]:
        ids = [self.stoi.get(t, self.unk_id) for t in tokens]
        if add_eos:
            ids.append(self.eos_id)
        return ids

    def decode(self, ids: Sequence[int], strip_special=True) -> list[str]:
        out = []
        for i in ids:
            if strip_special and i == self.eos_id:
                break
            if strip_special and i in (self.pad_id, self.bos_id):
                continue
            out.append(self.itos[i])
        return out

    def hash(self) -> str:
        return hashlib.sha256("\n".join(self.itos).encode("utf-8")).hexdigest()


def build_vocab(corpus: Iterable[Sequence[str]], min_count: int = 1) -> Vocabulary:
    """Vocabulary over tokenized sentences, ordered by frequency then lexically."""
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    counts = Counter()
    n = 0
    for tokens in corpus:
        counts.update(tokens)
        n += 1
    if n == 0:
        raise CorpusError("cannot build a vocabulary from an empty corpus")
    kept = [(t, c) for t, c in counts.items() if c >= min_count and t not in RESERVED]
    kept.sort(key=lambda tc: (-tc[1], tc[0]))
    return Vocabulary(t for t, _ in kept)


@dataclass(frozen=True)
class BowVocab:
    words: tuple[str, ...]
    mode: str
    index: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {w: i for i, w in enumerate(self.words)})

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return word in self.index


def build_bow_vocab(
    vocab: Vocabulary,
    stopwords: set[str],
    sentiment_lexicon: set[str],
    mode: str = "no-stopwords-no-sentiment",
) -> BowVocab:
    if mode not in BOW_MODES:
        raise ValueError(f"unknown BoW mode {mode!r}; expected one of {BOW_MODES}")
    drop = set()
    if "no-stopwords" in mode:
        drop |= set(stopwords)
    if mode.endswith("no-sentiment"):
        drop |= set(sentiment_lexicon)
    words = tuple(w for w in vocab.words if w not in drop)
    if not words:
        raise CorpusError(f"BoW vocabulary is empty under mode {mode!r}")
    return BowVocab(words, mode)


@dataclass
class SparseDistribution:
    """(index, probability) pairs over ``size`` outcomes; empty means degenerate."""

    indices: np.ndarray
    probs: np.ndarray
    size: int

    @property
    def empty(self):
        return len(self.indices) == 0

    def dense(self):
        out = np.zeros(self.size)
        out[self.indices] = self.probs
        return out


def bow_target(tokens: Sequence[str], bow: BowVocab) -> SparseDistribution:
    """Occurrence distribution of content words, renormalised over those words.

    ``tokens`` are surface tokens (strings). A sentence without any content
    word gets an empty distribution.
    """
    if isinstance(tokens, Sentence):
        tokens = tokens.words
    counts = Counter(bow.index[t] for t in tokens if t in bow.index)
    if not counts:
        return SparseDistribution(np.zeros(0, dtype=int), np.zeros(0), len(bow))
    idx = np.array(sorted(counts), dtype=int)
    c = np.array([counts[i] for i in idx], dtype=float)
    return SparseDistribution(idx, c / c.sum(), len(bow))


# --------------------------------------------------------------------------
# sentences and batches


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[int, ...]
    label: int
    raw_text: str

    @property
    def words(self):
        return self.raw_text.lower().split()


def make_sentences(
    texts: Sequence[str], labels: Sequence[int], vocab: Vocabulary, max_len: int = 30
) -> list[Sentence]:
    """Encode raw lines; empty lines are skipped and over-long ones truncated."""
    out = []
    for lineno, (text, label) in enumerate(zip(texts, labels), 1):
        try:
            words = tokenize(text)
        except EmptySentenceError:
            log.warning("skipping empty sentence at line %d", lineno)
            continue
        if label not in (0, 1):
            raise CorpusError(f"line {lineno}: label must be 0 or 1, got {label!r}")
        words = words[: max_len - 1]
        out.append(Sentence(tuple(vocab.encode(words)), int(label), " ".join(words)))
    return out


@dataclass
class Batch:
    tokens: np.ndarray  # (B, T) int, pad beyond length
    lengths: np.ndarray  # (B,)
    labels: np.ndarray  # (B,)
    bow: np.ndarray  # (B, K) dense target rows; zero rows where masked
    bow_mask: np.ndarray  # (B,) 1.0 iff the BoW target is non-empty

    def __len__(self):
        return len(self.lengths)

    @property
    def mask(self):
        T = self.tokens.shape[1]
        return (np.arange(T)[None, :] < self.lengths[:, None]).astype(float)

    @property
    def decoder_inputs(self):
        """Gold tokens shifted right behind the start symbol."""
        out = np.full_like(self.tokens, Vocabulary.pad_id)
        out[:, 0] = Vocabulary.bos_id
        out[:, 1:] = self.tokens[:, :-1]
        out[self.mask == 0] = Vocabulary.pad_id
        return out


def make_batch(sentences: Sequence[Sentence], vocab: Vocabulary, bow: BowVocab) -> Batch:
    B = len(sentences)
    lengths = np.array([len(s.tokens) for s in sentences], dtype=int)
    tokens = np.full((B, lengths.max()), vocab.pad_id, dtype=int)
    targets = np.zeros((B, len(bow)))
    mask = np.zeros(B)
    for i, s in enumerate(sentences):
        tokens[i, : lengths[i]] = s.tokens
        words = [vocab.itos[t] for t in s.tokens[:-1]]
        dist = bow_target(words, bow)
        if not dist.empty:
            targets[i] = dist.dense()
            mask[i] = 1.0
    labels = np.array([s.label for s in sentences], dtype=int)
    return Batch(tokens, lengths, labels, targets, mask)


def batch_iter(sentences, batch_size, seed, vocab, bow, shuffle=True):
    """Yield batches over one epoch in a seed-determined order."""
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    order = np.arange(len(sentences))
    if shuffle:
        order = np.random.default_rng(seed).permutation(len(sentences))
    for start in range(0, len(order), batch_size):
        yield make_batch([sentences[i] for i in order[start : start + batch_size]], vocab, bow)


# --------------------------------------------------------------------------
# files


def read_lexicon(path) -> set[str]:
    words = set()
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line and not line.startswith("#"):
                words.add(line.lower())
    return words


def _bundled(name):
    return resources.files("disentext").joinpath("data").joinpath(name)


def default_stopwords() -> set[str]:
    with resources.as_file(_bundled("stopwords.txt")) as p:
        return read_lexicon(p)


def default_sentiment_lexicon() -> tuple[set[str], set[str]]:
    """Bundled (positive, negative) word sets."""
    with resources.as_file(_bundled("positive-words.txt")) as p:
        pos = read_lexicon(p)
    with resources.as_file(_bundled("negative-words.txt")) as n:
        neg = read_lexicon(n)
    return pos, neg


def read_corpus(path, labels_path=None) -> tuple[list[str], list[int]]:
    """Read ``label<TAB>text`` lines, or plain lines plus a separate label file."""
    texts, labels = [], []
    path = Path(path)
    if labels_path is None:
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, 1):
                line = line.rstrip("\n")
                if not line.strip():
                    log.warning("%s:%d: empty line skipped", path, lineno)
                    continue
                label, sep, text = line.partition("\t")
                if not sep:
                    raise CorpusError(f"{path}:{lineno}: expected 'label<TAB>text'")
                labels.append(_parse_label(label, path, lineno))
                texts.append(text)
    else:
        with open(path, encoding="utf-8") as f:
            raw = [line.rstrip("\n") for line in f]
        with open(labels_path, encoding="utf-8") as f:
            lab = [line.strip() for line in f if line.strip()]
        if len(lab) != len(raw):
            raise CorpusError(f"{len(raw)} sentences but {len(lab)} labels")
        for lineno, (text, label) in enumerate(zip(raw, lab), 1):
            if not text.strip():
                log.warning("%s:%d: empty line skipped", path, lineno)
                continue
            texts.append(text)
            labels.append(_parse_label(label, labels_path, lineno))
    if not texts:
        raise CorpusError(f"{path}: no sentences")
    return texts, labels


def _parse_label(s, path, lineno):
    try:
        v = int(s)
    except ValueError:
        raise CorpusError(f"{path}:{lineno}: bad label {s!r}") from None
    if v not in (0, 1):
        raise CorpusError(f"{path}:{lineno}: label must be 0 or 1")
    return v


def write_corpus(path, texts, labels):
    with open(path, "w", encoding="utf-8") as f:
        for t, y in zip(texts, labels):
            f.write(f"{int(y)}\t{t}\n")
