"""Synthetic style-labelled corpus: shared content templates plus style markers."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import write_corpus

FRAMES = (
    "the {food} was {m}",
    "our {staff} was {m}",
    "the {food} at this {place} is {m}",
    "i had the {food} with {side} and it was {m}",
    "the {place} itself is {m}",
    "we ordered {side} and the {food} was {m}",
    "my {staff} at the {place} was {m}",
    "the {side} on the {food} tasted {m}",
)

SLOTS = {
    "food": ("pasta", "pizza", "burger", "salad", "soup", "steak", "sushi", "tacos",
             "noodles", "sandwich", "chicken", "curry"),
    "staff": ("waiter", "waitress", "server", "host", "bartender", "manager", "cashier", "chef"),
    "place": ("restaurant", "bar", "cafe", "diner", "bistro", "bakery", "pub", "patio"),
    "side": ("rice", "beans", "bread", "salsa", "cheese", "potatoes", "gravy", "pickles"),
}

NEGATIVE_MARKERS = ("bad", "terrible", "awful", "bland", "horrible", "disappointing")
POSITIVE_MARKERS = ("good", "great", "excellent", "delicious", "amazing", "wonderful")


class ToySpecError(ValueError):
    pass


@dataclass
class ToyCorpusSpec:
    n_templates: int = 4
    per_label: int = 100  # sentences per (template, label)
    markers: tuple = field(default_factory=lambda: (NEGATIVE_MARKERS, POSITIVE_MARKERS))
    seed: int = 0

    def validate(self):
        if not 1 <= self.n_templates <= len(FRAMES):
            raise ToySpecError(f"n_templates must be in [1, {len(FRAMES)}]")
        sets = [set(m) for m in self.markers]
        if any(not s for s in sets):
            raise ToySpecError("every label needs at least one marker word")
        for i in range(len(sets)):
            for j in range(i + 1, len(sets)):
                if sets[i] & sets[j]:
                    raise ToySpecError(f"marker lists overlap: {sorted(sets[i] & sets[j])}")
        content = set().union(*map(set, SLOTS.values()))
        if content & set().union(*sets):
            raise ToySpecError("marker words must not be content words")


def generate_toy_corpus(spec: ToyCorpusSpec):
    """Return ``(texts, labels)``; ``per_label`` sentences per template and label."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    texts, labels = [], []
    for frame in FRAMES[: spec.n_templates]:
        for label, markers in enumerate(spec.markers):
            for _ in range(spec.per_label):
                fill = {k: v[rng.integers(len(v))] for k, v in SLOTS.items()}
                fill["m"] = markers[rng.integers(len(markers))]
                texts.append(frame.format(**fill))
                labels.append(label)
    order = rng.permutation(len(texts))
    return [texts[i] for i in order], [labels[i] for i in order]


def write_toy_corpus(spec: ToyCorpusSpec, out_dir, name="toy"):
    """Write ``<name>.tsv`` plus one marker lexicon per label; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    texts, labels = generate_toy_corpus(spec)
    paths = {"corpus": out / f"{name}.tsv"}
    write_corpus(paths["corpus"], texts, labels)
    for label, markers in enumerate(spec.markers):
        key = "negative_lexicon" if label == 0 else "positive_lexicon"
        paths[key] = out / f"{name}.markers-{label}.txt"
        paths[key].write_text("".join(m + "\n" for m in markers), encoding="utf-8")
    return paths


# Training settings scaled down for the toy corpus (small vocabulary, a few
# hundred sentences). The latent is kept tight: with spare content capacity
# the encoder keeps a copy of the markers in c that fools the adversary but
# not a fresh linear probe. Written into the config emitted next to the corpus.
TOY_TRAIN_SETTINGS = {
    "embed_dim": 32,
    "hidden_dim": 64,
    "style_dim": 1,
    "content_dim": 12,
    "batch_size": 32,
    "epochs": 100,
    "lr_autoencoder": 6e-3,
    "lr_discriminator": 3e-3,
    "dis_steps": 5,
    "val_fraction": 0.0,
}


def write_toy_config(paths, out_path, seed=0, settings=None):
    """Write a training config for a toy corpus written by :func:`write_toy_corpus`."""
    out_path = Path(out_path)
    values = {
        "corpus": Path(paths["corpus"]).name,
        "positive_lexicon": Path(paths["positive_lexicon"]).name,
        "negative_lexicon": Path(paths["negative_lexicon"]).name,
        **TOY_TRAIN_SETTINGS,
        **(settings or {}),
        "seed": seed,
    }
    lines = ["# toy-corpus training config; paths are relative to this file"]
    lines += [f"{k} = {v}" for k, v in values.items()]
    out_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return out_path
