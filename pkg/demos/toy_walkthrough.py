"""Walk through the library on the synthetic toy corpus.

Generates a marker-word corpus, trains the full objective, probes where the
style information ended up, then flips the style of a few sentences and
scores the outputs.

    python demos/toy_walkthrough.py [seed]
"""

import sys
import time

import numpy as np

from disentext.config import TrainConfig
from disentext.evaluation import (
    LexiconClassifier, kn_log_likelihood, probe_all, train_kn_lm, transfer_accuracy, word_overlap,
)
from disentext.toy import NEGATIVE_MARKERS, POSITIVE_MARKERS, TOY_TRAIN_SETTINGS, ToyCorpusSpec, generate_toy_corpus
from disentext.training import prepare_data, train
from disentext.transfer import encode_sentences, estimate_all, transfer_ids

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0

texts, labels = generate_toy_corpus(ToyCorpusSpec(seed=seed))
print(f"{len(texts)} toy sentences, e.g.")
for t, y in list(zip(texts, labels))[:4]:
    print(f"  [{y}] {t}")

cfg = TrainConfig(**TOY_TRAIN_SETTINGS, seed=seed)
data = prepare_data(cfg, texts, labels)
print(f"\nvocabulary {len(data.vocab)} words, latent = {cfg.style_dim} style + {cfg.content_dim} content dims")

t0 = time.perf_counter()
trainer = train(cfg, data, on_epoch=lambda t: t.epoch % 20 == 0 and print(
    f"  epoch {t.epoch:3d}  recon {t.history[-1]['recon']:.3f}  mul_s {t.history[-1]['mul_s']:.3f}"
    f"  dis_c {t.history[-1]['dis_c']:.3f}"))
print(f"trained in {time.perf_counter() - t0:.0f}s")

# where does style live? a linear probe on each half of the latent
y = np.array([s.label for s in data.train])
s, c = encode_sentences(trainer.params, data.train, data.vocab, data.bow)
print("\nprobe accuracy (held-out 20%):")
for name, r in probe_all(s, c, y, seed=seed).items():
    print(f"  {name:4s} {r.test_accuracy:.3f}   (majority {r.majority:.3f})")

# swap in the mean style vector of the opposite label
est = estimate_all(trainer.params, data.train, data.vocab, data.bow)
targets = 1 - y
out = transfer_ids(trainer.params, data.train, targets, est, data.vocab, data.bow)
print("\ntransfers:")
for x, o in list(zip(data.train, out))[:8]:
    print(f"  {' '.join(x.words):40s} -> {' '.join(o)}")

clf = LexiconClassifier(POSITIVE_MARKERS, NEGATIVE_MARKERS)
lm = train_kn_lm([t.split() for t in texts])
print(f"\ntransfer accuracy {transfer_accuracy(clf, out, targets):.3f}")
print(f"word overlap      {np.mean([word_overlap(x.words, o) for x, o in zip(data.train, out)]):.3f}")
print(f"fluency (mean sentence log-likelihood) {np.mean([kn_log_likelihood(lm, o) for o in out if o]):.3f}")
