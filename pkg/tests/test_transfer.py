import numpy as np
import pytest

from disentext.config import TrainConfig
from disentext.corpus import EmptySentenceError
from disentext.evaluation.metrics import word_overlap
from disentext.model import encode_batch
from disentext.corpus import make_batch
from disentext.toy import ToyCorpusSpec, generate_toy_corpus
from disentext.training import prepare_data, train
from disentext.transfer import encode_sentences, estimate_all, estimate_style_vector, transfer, transfer_ids


def test_style_mean_examples(monkeypatch):
    import disentext.transfer as tr

    vecs = {0: np.array([1.0, 0, 0]), 1: np.array([0.0, 1, 0]), 2: np.array([5.0, 5, 5])}
    monkeypatch.setattr(tr, "encode_sentences",
                        lambda p, sents, v, b: (np.stack([vecs[s.raw] for s in sents]), None))
    S = lambda raw, label: type("S", (), {"raw": raw, "label": label})()
    est = estimate_style_vector(None, [S(0, 1), S(1, 1), S(2, 0)], 1, None, None)
    assert np.array_equal(est.vector, [0.5, 0.5, 0.0]) and est.count == 2
    single = estimate_style_vector(None, [S(2, 0), S(0, 1)], 0, None, None)
    assert np.array_equal(single.vector, vecs[2]) and single.count == 1
    with pytest.raises(ValueError):
        estimate_style_vector(None, [S(2, 0)], 1, None, None)


@pytest.fixture(scope="module")
def trained():
    # one marker per label, so the mean style vector pins down the marker word
    spec = ToyCorpusSpec(n_templates=2, per_label=20, markers=(("bad",), ("good",)), seed=0)
    texts, labels = generate_toy_corpus(spec)
    cfg = TrainConfig(embed_dim=16, hidden_dim=32, style_dim=2, content_dim=16, batch_size=16,
                      val_fraction=0.0, lr_autoencoder=1e-2, epochs=80,
                      lambda_adv_s=0.0, lambda_adv_c=0.0, lambda_mul_c=0.0)
    data = prepare_data(cfg, texts, labels)
    t = train(cfg, data)
    return t.params, data


def test_style_mean_matches_streaming_sum(trained):
    params, data = trained
    est = estimate_style_vector(params, data.train, 1, data.vocab, data.bow)
    total, n = np.zeros(params.config.style_dim), 0
    for s in data.train:
        if s.label == 1:
            st, _ = encode_batch(params, np.array([s.tokens]))
            total += st.s[0]
            n += 1
    assert n == est.count
    assert np.max(np.abs(est.vector - total / n)) < 1e-12


def test_transfer_to_own_label_reconstructs(trained):
    params, data = trained
    est = estimate_all(params, data.train, data.vocab, data.bow)
    sents = data.train[:40]
    out = transfer_ids(params, sents, [s.label for s in sents], est, data.vocab, data.bow)
    overlaps = [word_overlap(s.words, o) for s, o in zip(sents, out)]
    assert np.mean(overlaps) >= 0.8


def test_transfer_grafts_only_style(trained, monkeypatch):
    import disentext.transfer as tr

    params, data = trained
    est = estimate_all(params, data.train, data.vocab, data.bow)
    seen = {}
    real = tr.decode_greedy
    monkeypatch.setattr(tr, "decode_greedy", lambda p, h, m: seen.setdefault("h", h) is not None and real(p, h, m))
    sents = data.train[:5]
    transfer_ids(params, sents, [1 - s.label for s in sents], est, data.vocab, data.bow)
    _, c = encode_sentences(params, sents, data.vocab, data.bow)
    S = params.config.style_dim
    assert np.array_equal(seen["h"][:, S:], c)
    assert np.array_equal(seen["h"][:, :S], np.stack([est[1 - s.label].vector for s in sents]))


def test_transfer_single_sentence(trained):
    params, data = trained
    est = estimate_all(params, data.train, data.vocab, data.bow)
    a = transfer(params, "the pasta was good", 0, est, data.vocab, data.bow)
    assert a == transfer(params, "the pasta was good", 0, est, data.vocab, data.bow)
    assert isinstance(a, str)
    with pytest.raises(EmptySentenceError):
        transfer(params, "  ", 0, est, data.vocab, data.bow)
    with pytest.raises(ValueError):
        transfer_ids(params, data.train[:1], [1], {0: est[0]}, data.vocab, data.bow)
