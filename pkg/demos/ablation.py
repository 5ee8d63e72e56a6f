"""Which losses make style transfer work on the toy corpus?

Trains three models that differ only in their auxiliary losses and compares
transfer accuracy and word overlap:

  ae     reconstruction only
  style  + style multi-task and adversary
  full   + content multi-task and adversary

    python demos/ablation.py [seed]
"""

import sys

import numpy as np

from disentext.config import TrainConfig
from disentext.evaluation import LexiconClassifier, transfer_accuracy, word_overlap
from disentext.toy import NEGATIVE_MARKERS, POSITIVE_MARKERS, TOY_TRAIN_SETTINGS, ToyCorpusSpec, generate_toy_corpus
from disentext.training import prepare_data, train
from disentext.transfer import estimate_all, transfer_ids

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
off = dict(lambda_mul_s=0.0, lambda_adv_s=0.0, lambda_mul_c=0.0, lambda_adv_c=0.0)
variants = {
    "ae": off,
    "style": dict(off, lambda_mul_s=10.0, lambda_adv_s=1.0),
    "full": {},
}

texts, labels = generate_toy_corpus(ToyCorpusSpec(seed=seed))
clf = LexiconClassifier(POSITIVE_MARKERS, NEGATIVE_MARKERS)
print(f"{'variant':8s} {'accuracy':>8s} {'overlap':>8s}   example")
for name, kw in variants.items():
    cfg = TrainConfig(**{**TOY_TRAIN_SETTINGS, **kw, "seed": seed})
    data = prepare_data(cfg, texts, labels)
    p = train(cfg, data).params
    targets = [1 - x.label for x in data.train]
    out = transfer_ids(p, data.train, targets, estimate_all(p, data.train, data.vocab, data.bow),
                       data.vocab, data.bow)
    ov = np.mean([word_overlap(x.words, o) for x, o in zip(data.train, out)])
    print(f"{name:8s} {transfer_accuracy(clf, out, targets):8.3f} {ov:8.3f}   "
          f"{' '.join(data.train[0].words)} -> {' '.join(out[0])}")
