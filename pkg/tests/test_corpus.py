from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from disentext.corpus import (
    BowVocab, CorpusError, EmptySentenceError, Vocabulary, batch_iter, bow_target, build_bow_vocab,
    build_vocab, default_sentiment_lexicon, default_stopwords, make_batch, make_sentences,
    read_corpus, tokenize, write_corpus,
)


def test_tokenize_examples():
    assert tokenize("The Food is GOOD") == ["the", "food", "is", "good"]
    assert tokenize("great deal") == ["great", "deal"]
    assert tokenize("  a   b ") == ["a", "b"]


def test_tokenize_empty():
    with pytest.raises(EmptySentenceError):
        tokenize("   ")


def test_build_vocab_thresholds():
    corpus = [tokenize("a b"), tokenize("a c")]
    v = build_vocab(corpus, 1)
    assert set(v.words) == {"a", "b", "c"} and len(v) == 7
    v2 = build_vocab(corpus, 2)
    assert v2.words == ["a"]
    assert v2.encode(["b", "c"], add_eos=False) == [v2.unk_id] * 2


def test_build_vocab_errors_and_order():
    with pytest.raises(CorpusError):
        build_vocab([])
    v = build_vocab([["z", "y", "y", "x"]])
    assert v.words == ["y", "x", "z"]
    assert v.itos[:4] == ["<pad>", "<unk>", "<s>", "</s>"]


def test_vocab_hash_changes_with_content():
    assert build_vocab([["a"]]).hash() != build_vocab([["b"]]).hash()
    assert build_vocab([["a"]]).hash() == build_vocab([["a"]]).hash()


def test_bow_vocab_modes():
    v = Vocabulary(["the", "food", "excellent"])
    stop, sent = {"the"}, {"excellent"}
    assert build_bow_vocab(v, stop, sent, "no-stopwords-no-sentiment").words == ("food",)
    assert set(build_bow_vocab(v, stop, sent, "full").words) == {"the", "food", "excellent"}
    assert set(build_bow_vocab(v, stop, sent, "no-sentiment").words) == {"the", "food"}
    assert set(build_bow_vocab(v, stop, sent, "no-stopwords").words) == {"food", "excellent"}
    with pytest.raises(ValueError):
        build_bow_vocab(v, stop, sent, "nonsense")
    with pytest.raises(CorpusError):
        build_bow_vocab(Vocabulary(["the"]), stop, sent)


def _bow(words, stop, sent):
    return build_bow_vocab(Vocabulary(sorted(set(words))), stop, sent)


def test_bow_target_examples():
    toks = "the food is excellent and the pasta tasted awesome".split()
    bow = _bow(toks, {"the", "is", "and"}, {"excellent", "awesome"})
    d = bow_target(toks, bow)
    assert {bow.words[i]: p for i, p in zip(d.indices, d.probs)} == pytest.approx(
        {"food": 1 / 3, "pasta": 1 / 3, "tasted": 1 / 3}, abs=1e-15)
    assert bow_target(["the", "is", "and"], bow).empty
    bow2 = _bow(["food", "pasta"], set(), set())
    d2 = bow_target(["food", "food", "pasta"], bow2)
    assert dict(zip((bow2.words[i] for i in d2.indices), d2.probs)) == pytest.approx(
        {"food": 2 / 3, "pasta": 1 / 3}, abs=1e-15)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from(list("abcdefg")), min_size=0, max_size=12))
def test_bow_target_matches_count_oracle(toks):
    bow = _bow(list("abcdefg"), {"a"}, {"b"})
    d = bow_target(toks, bow)
    content = [t for t in toks if t not in "ab"]
    if not content:
        assert d.empty
        return
    c = Counter(content)
    got = {bow.words[i]: p for i, p in zip(d.indices, d.probs)}
    assert got == pytest.approx({w: n / len(content) for w, n in c.items()}, abs=1e-15)
    assert abs(d.dense().sum() - 1) < 1e-12


def _sents(n):
    texts = [f"w{i} x" for i in range(n)]
    v = build_vocab(tokenize(t) for t in texts)
    bow = build_bow_vocab(v, set(), set())
    return make_sentences(texts, [i % 2 for i in range(n)], v), v, bow


def test_batch_iter_sizes_and_determinism():
    sents, v, bow = _sents(10)
    assert [len(b) for b in batch_iter(sents, 4, 0, v, bow)] == [4, 4, 2]
    a = [b.tokens.tolist() for b in batch_iter(sents, 4, 7, v, bow)]
    b = [b.tokens.tolist() for b in batch_iter(sents, 4, 7, v, bow)]
    assert a == b
    c = [b.tokens.tolist() for b in batch_iter(sents, 4, 8, v, bow)]
    assert a != c
    with pytest.raises(ValueError):
        list(batch_iter(sents, 0, 0, v, bow))


def test_batch_layout():
    sents, v, bow = _sents(3)
    batch = make_batch(sents, v, bow)
    assert batch.tokens[:, -1].tolist() == [v.eos_id] * 3
    assert batch.decoder_inputs[:, 0].tolist() == [v.bos_id] * 3
    assert np.array_equal(batch.decoder_inputs[:, 1:], batch.tokens[:, :-1])
    assert np.allclose(batch.bow.sum(axis=1), 1.0) and batch.bow_mask.tolist() == [1, 1, 1]


def test_make_sentences_truncates_and_skips():
    v = build_vocab([["a"]])
    s = make_sentences(["a " * 50, "  ", "a"], [0, 1, 1], v, max_len=10)
    assert len(s) == 2 and len(s[0].tokens) == 10 and s[0].tokens[-1] == v.eos_id
    with pytest.raises(CorpusError):
        make_sentences(["a"], [3], v)


def test_corpus_round_trip_and_label_file(tmp_path):
    p = tmp_path / "c.tsv"
    write_corpus(p, ["the food", "bad"], [1, 0])
    assert read_corpus(p) == (["the food", "bad"], [1, 0])
    (tmp_path / "s.txt").write_text("x y\nz\n")
    (tmp_path / "l.txt").write_text("0\n1\n")
    assert read_corpus(tmp_path / "s.txt", tmp_path / "l.txt") == (["x y", "z"], [0, 1])
    (tmp_path / "bad.tsv").write_text("2\tx\n")
    with pytest.raises(CorpusError):
        read_corpus(tmp_path / "bad.tsv")
    (tmp_path / "l2.txt").write_text("0\n")
    with pytest.raises(CorpusError):
        read_corpus(tmp_path / "s.txt", tmp_path / "l2.txt")


def test_bundled_lexicons():
    stop = default_stopwords()
    pos, neg = default_sentiment_lexicon()
    assert {"the", "is", "and"} <= stop
    assert {"good", "great", "delicious"} <= pos and {"bad", "bland", "terrible"} <= neg
    assert not pos & neg
