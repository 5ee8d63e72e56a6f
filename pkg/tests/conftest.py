import numpy as np
import pytest

from disentext.corpus import build_bow_vocab, build_vocab, make_batch, make_sentences, tokenize
from disentext.model import ModelConfig, init_params

MICRO_TEXTS = ["the pasta was good", "our waiter was terrible", "the soup at this bar is bland"]
MICRO_LABELS = [1, 0, 0]
STOP = {"the", "was", "our", "at", "this", "is"}
SENT = {"good", "terrible", "bland"}


def micro_model(variational=False, seed=0, scale=0.5):
    """A tiny model with large random weights and a 3-sentence batch."""
    vocab = build_vocab(tokenize(t) for t in MICRO_TEXTS)
    bow = build_bow_vocab(vocab, STOP, SENT)
    sents = make_sentences(MICRO_TEXTS, MICRO_LABELS, vocab)
    batch = make_batch(sents, vocab, bow)
    cfg = ModelConfig(len(vocab), len(bow), embed_dim=4, hidden_dim=5, style_dim=2,
                      content_dim=3, variational=variational)
    rng = np.random.default_rng(seed)
    params = init_params(cfg, rng)
    for d in params.groups.values():
        for k in d:
            d[k][...] = rng.normal(0, scale, d[k].shape)
    return params, batch, vocab, bow


@pytest.fixture
def micro():
    return micro_model()


@pytest.fixture
def micro_vae():
    return micro_model(variational=True)


def overall_grad_error(params, batch, hyper, step=0, noise=None, groups=None, eps=1e-4):
    """Worst relative error of the assembled overall-loss gradient."""
    from disentext.model import AUTOENCODER_GROUPS
    from disentext.nn import grad_check
    from disentext.objectives import model_loss_and_grads

    groups = groups or AUTOENCODER_GROUPS
    _, grads = model_loss_and_grads(params, batch, hyper, step, noise=noise)
    flat = {(g, k): params[g][k] for g in groups for k in params[g]}
    ana = {(g, k): grads[g][k] for g in groups for k in params[g]}
    loss = lambda: model_loss_and_grads(params, batch, hyper, step, noise=noise)[0].overall
    return grad_check(loss, flat, ana, eps=eps)


# one PASS/FAIL line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if report.when == "call" and name.startswith("test_criterion_"):
        number = int(name.split("_")[2])
        if number not in ACCEPTANCE_LINES:
            ACCEPTANCE_LINES[number] = f"{'PASS' if report.passed else 'FAIL'}  criterion {number}: " + (
                "no measurement" if report.passed else "error before measurement")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
