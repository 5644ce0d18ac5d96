"""Tests for the sentence encoder and the batch contrastive loss."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from xlingual import autodiff as ad
from xlingual.encoder import EncoderParams, contrastive_loss, encode
from xlingual.errors import (
    ConfigError,
    ContractError,
    ShapeError,
    VocabularyError,
)
from xlingual.lexicon import Sentence

from helpers import brute_force_infonce


def _params(rows=12, d=6, n_hidden=2, out_dim=4, dropout=0.0, seed=0):
    table = np.random.default_rng(seed).standard_normal((rows, d))
    return EncoderParams.initialize(
        table, n_hidden=n_hidden, out_dim=out_dim, dropout=dropout, seed=seed + 1
    )


def test_initialize_shapes_and_copy():
    table = np.random.default_rng(1).standard_normal((10, 5))
    params = EncoderParams.initialize(table, n_hidden=2, out_dim=3,
                                      dropout=0.1, seed=2)
    assert params.embedding.value.shape == (10, 5)
    assert len(params.hidden) == 2
    for w, b in params.hidden:
        assert w.value.shape == (5, 5)
        assert_allclose(b.value, np.zeros(5), rtol=0, atol=0)
    assert params.out_w.value.shape == (5, 3)
    assert params.out_b.value.shape == (3,)
    assert params.out_dim == 3
    assert params.vocab_rows == 10

    # The table is copied, not aliased.
    table[0, 0] += 100.0
    assert params.embedding.value[0, 0] != table[0, 0]


def test_initialize_weights_are_orthonormal_columns():
    params = _params(rows=9, d=6, n_hidden=1, out_dim=4, seed=3)
    w = params.hidden[0][0].value
    assert_allclose(w.T @ w, np.eye(6), atol=1e-12)
    out = params.out_w.value
    assert_allclose(out.T @ out, np.eye(4), atol=1e-12)


def test_initialize_falls_back_when_widening():
    # More output columns than input rows: QR cannot give orthonormal
    # columns, so the draw is gaussian instead.
    params = _params(rows=9, d=4, n_hidden=0, out_dim=7, seed=3)
    out = params.out_w.value
    assert out.shape == (4, 7)
    assert not np.allclose(out.T @ out, np.eye(7), atol=1e-3)


def test_initialize_deterministic():
    a = _params(seed=5)
    b = _params(seed=5)
    for x, y in zip(a.param_nodes(), b.param_nodes()):
        assert_allclose(x.value, y.value, rtol=0, atol=0)
    c = _params(seed=6)
    assert not np.allclose(a.out_w.value, c.out_w.value)


def test_initialize_rejects_bad_arguments():
    table = np.zeros((4, 3))
    with pytest.raises(ConfigError):
        EncoderParams.initialize(table, n_hidden=-1, out_dim=2, dropout=0.0, seed=0)
    with pytest.raises(ConfigError):
        EncoderParams.initialize(table, n_hidden=1, out_dim=0, dropout=0.0, seed=0)
    with pytest.raises(ShapeError):
        EncoderParams.initialize(np.zeros(4), n_hidden=1, out_dim=2,
                                 dropout=0.0, seed=0)
    with pytest.raises(ConfigError):
        EncoderParams.initialize(table, n_hidden=1, out_dim=2, dropout=1.0, seed=0)


def test_constructor_validates_shapes():
    emb = ad.leaf(np.zeros((4, 3)), "embedding")
    good_w = ad.leaf(np.zeros((3, 3)), "w")
    good_b = ad.leaf(np.zeros(3), "b")
    out_w = ad.leaf(np.zeros((3, 2)), "ow")
    out_b = ad.leaf(np.zeros(2), "ob")
    with pytest.raises(ShapeError):
        EncoderParams(embedding=emb, hidden=((ad.leaf(np.zeros((3, 2)), "w"), good_b),),
                      out_w=out_w, out_b=out_b, dropout=0.0)
    with pytest.raises(ShapeError):
        EncoderParams(embedding=emb, hidden=((good_w, good_b),),
                      out_w=ad.leaf(np.zeros((2, 2)), "ow"), out_b=out_b, dropout=0.0)
    with pytest.raises(ShapeError):
        EncoderParams(embedding=emb, hidden=(), out_w=out_w,
                      out_b=ad.leaf(np.zeros(3), "ob"), dropout=0.0)


def test_named_tensors_and_param_order():
    params = _params(n_hidden=2)
    names = [n.op for n in params.param_nodes()]
    assert names == ["embedding", "hidden.0.weight", "hidden.0.bias",
                     "hidden.1.weight", "hidden.1.bias",
                     "output.weight", "output.bias"]
    named = params.named_tensors()
    assert set(named) == set(names) | {"dropout_rate"}
    assert named["dropout_rate"].shape == ()


def test_encode_matches_manual_computation():
    # No hidden layers: output is mean-pooled rows through the projection.
    params = EncoderParams(
        embedding=ad.leaf(np.array([[2.0, 0.0], [0.0, 4.0], [6.0, 6.0]]), "embedding"),
        hidden=(),
        out_w=ad.leaf(np.array([[1.0, 0.0, 1.0], [0.0, 1.0, -1.0]]), "ow"),
        out_b=ad.leaf(np.array([0.5, 0.0, 0.0]), "ob"),
        dropout=0.0,
    )
    out = encode(params, Sentence(tokens=(0, 1), lang=0))
    assert_allclose(out.value, [1.5, 2.0, -1.0], rtol=0, atol=0)


def test_encode_eval_equals_zero_dropout_training():
    params = _params(dropout=0.0, seed=11)
    sent = Sentence(tokens=(3, 7, 1), lang=0)
    ev = encode(params, sent, train=False)
    tr = encode(params, sent, train=True)
    assert_allclose(ev.value, tr.value, rtol=0, atol=0)


def test_encode_dropout_reproducible_and_varying():
    params = _params(dropout=0.5, seed=11)
    sent = Sentence(tokens=(3, 7, 1), lang=0)
    a = encode(params, sent, train=True, dropout_seed=(1, 2)).value
    b = encode(params, sent, train=True, dropout_seed=(1, 2)).value
    c = encode(params, sent, train=True, dropout_seed=(1, 3)).value
    assert_allclose(a, b, rtol=0, atol=0)
    assert not np.allclose(a, c)
    # Evaluation mode ignores dropout entirely.
    assert_allclose(encode(params, sent).value, encode(params, sent).value,
                    rtol=0, atol=0)


def test_encode_requires_dropout_seed_in_training():
    params = _params(dropout=0.5)
    with pytest.raises(ContractError):
        encode(params, Sentence(tokens=(0,), lang=0), train=True)
    # Without hidden layers there is no dropout site, so no seed is needed.
    bare = _params(n_hidden=0, dropout=0.5)
    encode(bare, Sentence(tokens=(0,), lang=0), train=True)


def test_encode_rejects_out_of_range_tokens():
    params = _params(rows=12)
    with pytest.raises(VocabularyError):
        encode(params, Sentence(tokens=(12,), lang=0))


def test_loss_matches_brute_force():
    # Single-pair batches are kept to the no-negative mode: with a lone
    # hard negative the loss can land arbitrarily close to zero, where
    # relative comparison measures float64 conditioning, not correctness.
    rng = np.random.default_rng(99)
    for trial in range(30):
        mode = trial % 3
        n = int(rng.integers(1 if mode == 0 else 2, 7))
        d = int(rng.integers(2, 7))
        a = rng.standard_normal((n, d))
        p = rng.standard_normal((n, d))
        g = rng.standard_normal((n, d))
        anchors, positives = ad.leaf(a, "a"), ad.leaf(p, "p")
        if mode == 0:
            loss = contrastive_loss(anchors, positives, temperature=0.07)
            want = brute_force_infonce(a, p, None, temperature=0.07)
        elif mode == 1:
            loss = contrastive_loss(anchors, positives, ad.leaf(g, "g"),
                                    temperature=0.07, shared_hard_negatives=True)
            want = brute_force_infonce(a, p, g, temperature=0.07, shared=True)
        else:
            loss = contrastive_loss(anchors, positives, ad.leaf(g, "g"),
                                    temperature=0.07, shared_hard_negatives=False)
            want = brute_force_infonce(a, p, g, temperature=0.07, shared=False)
        assert_allclose(float(loss.value), want, rtol=1e-10)


def test_loss_single_pair_without_negatives_is_zero():
    a = ad.leaf(np.array([[1.0, 2.0]]), "a")
    p = ad.leaf(np.array([[0.5, -1.0]]), "p")
    assert float(contrastive_loss(a, p).value) == pytest.approx(0.0, abs=1e-15)


def test_loss_prefers_aligned_positives():
    rng = np.random.default_rng(17)
    a = rng.standard_normal((8, 5))
    aligned = contrastive_loss(ad.leaf(a, "a"), ad.leaf(a.copy(), "p"))
    shuffled = contrastive_loss(ad.leaf(a, "a"), ad.leaf(a[::-1].copy(), "p"))
    assert float(aligned.value) < float(shuffled.value)


def test_loss_negative_modes_differ():
    rng = np.random.default_rng(31)
    a = ad.leaf(rng.standard_normal((4, 5)), "a")
    p = ad.leaf(rng.standard_normal((4, 5)), "p")
    g = ad.leaf(rng.standard_normal((4, 5)), "g")
    shared = contrastive_loss(a, p, g, shared_hard_negatives=True)
    own = contrastive_loss(a, p, g, shared_hard_negatives=False)
    plain = contrastive_loss(a, p)
    assert float(shared.value) != float(own.value)
    assert float(own.value) > float(plain.value)


def test_loss_backward_reaches_inputs():
    rng = np.random.default_rng(12)
    a = ad.leaf(rng.standard_normal((3, 4)), "a")
    p = ad.leaf(rng.standard_normal((3, 4)), "p")
    loss = contrastive_loss(a, p)
    ad.backward(loss)
    assert np.any(a.grad != 0)
    assert np.any(p.grad != 0)


def test_loss_rejects_bad_inputs():
    a = ad.leaf(np.zeros((2, 3)) + 1.0, "a")
    p = ad.leaf(np.ones((2, 3)), "p")
    with pytest.raises(ConfigError):
        contrastive_loss(a, p, temperature=0.0)
    with pytest.raises(ShapeError):
        contrastive_loss(a, ad.leaf(np.ones((3, 3)), "p"))
    with pytest.raises(ShapeError):
        contrastive_loss(a, p, ad.leaf(np.ones((2, 4)), "g"))
    with pytest.raises(ContractError):
        contrastive_loss(ad.leaf(np.ones(3), "a"), ad.leaf(np.ones(3), "p"))
