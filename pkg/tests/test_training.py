import numpy as np
import pytest

from disentext import checkpoint as ck
from disentext.config import TrainConfig
from disentext.model import decode_greedy, decode_teacher_forced, encode
from disentext.toy import ToyCorpusSpec, generate_toy_corpus
from disentext.training import Trainer, prepare_data, train

SMALL = dict(embed_dim=12, hidden_dim=16, style_dim=2, content_dim=8, batch_size=16, val_fraction=0.2)
ZERO = dict(lambda_mul_s=0.0, lambda_adv_s=0.0, lambda_mul_c=0.0, lambda_adv_c=0.0)


@pytest.fixture(scope="module")
def toy():
    return generate_toy_corpus(ToyCorpusSpec(n_templates=2, per_label=20, seed=0))


def _max_param_diff(a, b):
    return max(float(np.max(np.abs(a[g][k] - b[g][k]))) for g in a.groups for k in a[g])


def test_plain_autoencoder_reconstruction_decreases(toy):
    cfg = TrainConfig(**SMALL, **ZERO, epochs=5, seed=1)
    t = train(cfg, prepare_data(cfg, *toy))
    recon = [r["recon"] for r in t.history]
    assert all(b < a for a, b in zip(recon, recon[1:]))
    assert all(r["mul_s"] >= 0 for r in t.history)


def test_metrics_and_checkpoints_written(toy, tmp_path):
    cfg = TrainConfig(**SMALL, epochs=2, mode="vae")
    train(cfg, prepare_data(cfg, *toy), out_dir=tmp_path)
    lines = (tmp_path / "metrics.tsv").read_text().splitlines()
    assert lines[0].split("\t") == ["epoch", "recon", "kl_s", "kl_c", "mul_s", "adv_s", "mul_c",
                                    "adv_c", "dis_s", "dis_c", "overall", "val_recon"]
    assert len(lines) == 3
    assert sorted(p.name for p in (tmp_path / "checkpoints").iterdir()) == ["epoch-001.ckpt", "epoch-002.ckpt"]


@pytest.mark.parametrize("mode", ["dae", "vae"])
def test_resume_matches_uninterrupted(toy, tmp_path, mode):
    cfg = TrainConfig(**SMALL, epochs=4, mode=mode, seed=3)
    data = prepare_data(cfg, *toy)
    full = train(cfg, data)
    half = train(cfg, data, out_dir=tmp_path, epochs=2)
    resumed = train(cfg, data, resume=tmp_path / "checkpoints" / "epoch-002.ckpt")
    assert resumed.epoch == 4 and resumed.step == full.step
    assert _max_param_diff(full.params, resumed.params) <= 1e-12
    assert resumed.history == full.history
    assert half.epoch == 2


def test_training_is_deterministic(toy):
    cfg = TrainConfig(**SMALL, epochs=2, seed=5)
    a = train(cfg, prepare_data(cfg, *toy))
    b = train(cfg, prepare_data(cfg, *toy))
    assert _max_param_diff(a.params, b.params) == 0.0
    c = train(TrainConfig(**SMALL, epochs=2, seed=6), prepare_data(cfg, *toy))
    assert _max_param_diff(a.params, c.params) > 0


def test_resume_rejects_other_vocabulary(toy, tmp_path):
    cfg = TrainConfig(**SMALL, epochs=1)
    t = train(cfg, prepare_data(cfg, *toy))
    other = prepare_data(cfg, ["completely different words"] * 4, [0, 1, 0, 1])
    with pytest.raises(ck.CheckpointError):
        Trainer.from_checkpoint(t.to_checkpoint(), other)


def test_float32_and_skipgram_options(toy):
    cfg = TrainConfig(**SMALL, epochs=1, dtype="float32", embedding_init="skipgram", skipgram_epochs=1)
    t = train(cfg, prepare_data(cfg, *toy))
    assert t.params["decoder"]["out_W"].dtype == np.float32
    assert np.isfinite(t.history[-1]["overall"])


@pytest.fixture(scope="module")
def overfit():
    texts, labels = generate_toy_corpus(ToyCorpusSpec(n_templates=4, per_label=20, seed=2))
    texts, labels = texts[:10], labels[:10]
    cfg = TrainConfig(embed_dim=16, hidden_dim=32, style_dim=2, content_dim=16, batch_size=10,
                      val_fraction=0.0, lr_autoencoder=1e-2, epochs=150, **ZERO)
    data = prepare_data(cfg, texts, labels)
    return train(cfg, data), data


def test_overfit_teacher_forced_argmax(overfit):
    t, data = overfit
    for s in data.train:
        st = encode(t.params, s.tokens)
        p = decode_teacher_forced(t.params, st.h, s.tokens)
        assert p.argmax(axis=1).tolist() == list(s.tokens)


def test_overfit_greedy_reconstruction(overfit):
    t, data = overfit
    for s in data.train:
        assert decode_greedy(t.params, encode(t.params, s.tokens).h) == list(s.tokens)
