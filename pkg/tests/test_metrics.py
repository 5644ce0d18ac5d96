"""Tests for the evaluators: retrieval, mining, correlation, clustering,
probing, and PCA. Each metric is checked against a loop-based oracle on
random instances plus hand-built edge cases."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from xlingual.embeddings import EmbeddingSet
from xlingual.errors import (
    ContractError,
    ShapeError,
    UndefinedCorrelationError,
)
from xlingual.metrics import (
    average_ranks,
    evaluate_sts,
    kmeans_purity,
    language_probe,
    mine_bitext,
    pca_project,
    retrieval_accuracy,
    spearman_rho,
)

from helpers import (
    naive_mining_f1,
    naive_purity,
    naive_retrieval,
    naive_spearman,
    random_rotation,
)


def _unit_rows(rng, n, d):
    x = rng.standard_normal((n, d))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def _embset(rng, n, d, **meta):
    return EmbeddingSet.from_vectors(rng.standard_normal((n, d)), **meta)


# ---------------------------------------------------------------------------
# retrieval


def test_retrieval_matches_naive_oracle(rng):
    for _ in range(60):
        n = int(rng.integers(2, 13))
        d = int(rng.integers(2, 7))
        src = _embset(rng, n, d)
        tgt = _embset(rng, n, d)
        got = retrieval_accuracy(src, tgt)
        s2t, t2s = naive_retrieval(src.vectors, tgt.vectors)
        assert got.src2tgt == s2t
        assert got.tgt2src == t2s
        assert got.mean == (s2t + t2s) / 2.0
        assert got.n_pairs == n


def test_retrieval_perfect_and_tied():
    eye = EmbeddingSet.from_vectors(np.eye(4))
    assert retrieval_accuracy(eye, eye).mean == 1.0

    # Duplicate rows tie; argmax resolves to the lowest index, so only
    # the first of the two duplicates scores.
    v = np.array([[1.0, 0.0], [1.0, 0.0]])
    dup = EmbeddingSet.from_vectors(v)
    res = retrieval_accuracy(dup, dup)
    assert res.src2tgt == 0.5
    assert res.tgt2src == 0.5


def test_retrieval_rejects_bad_pools(rng):
    a = _embset(rng, 4, 3)
    with pytest.raises(ContractError):
        retrieval_accuracy(a, _embset(rng, 5, 3))
    with pytest.raises(ShapeError):
        retrieval_accuracy(a, _embset(rng, 4, 2))
    one = _embset(rng, 1, 3)
    with pytest.raises(ContractError):
        retrieval_accuracy(one, one)


# ---------------------------------------------------------------------------
# bitext mining


def test_mining_matches_naive_oracle(rng):
    for trial in range(60):
        ns = int(rng.integers(2, 13))
        nt = int(rng.integers(2, 13))
        d = int(rng.integers(2, 6))
        src = _embset(rng, ns, d)
        tgt = _embset(rng, nt, d)
        n_gold = int(rng.integers(1, min(ns, nt) + 1))
        gold = [(int(i), int(rng.integers(0, nt))) for i in
                rng.choice(ns, size=n_gold, replace=False)]
        grid = int(rng.integers(2, 60))
        got = mine_bitext(src, tgt, gold, n_thresholds=grid)
        want = naive_mining_f1(src.vectors, tgt.vectors, gold, grid)
        assert got.f1 == want


def test_mining_perfect_alignment():
    src = EmbeddingSet.from_vectors(np.eye(5))
    res = mine_bitext(src, src, [(i, i) for i in range(5)])
    assert res.f1 == 1.0
    assert res.precision == 1.0
    assert res.recall == 1.0
    assert res.n_candidates == 5
    assert not res.no_candidates


def test_mining_empty_gold_scores_zero(rng):
    src = _embset(rng, 4, 3)
    res = mine_bitext(src, src, [])
    assert res.f1 == 0.0
    assert res.recall == 0.0


def test_mining_threshold_filters_low_scores():
    # Two mutual pairs: one aligned with gold at score 1, one spurious at
    # a lower score. The best cutoff excludes the spurious pair.
    src = EmbeddingSet.from_vectors(np.array([[1.0, 0.0], [0.0, 1.0]]))
    tgt = EmbeddingSet.from_vectors(np.array([[1.0, 0.0], [0.6, 0.8]]))
    res = mine_bitext(src, tgt, [(0, 0)])
    assert res.f1 == 1.0
    assert res.n_candidates == 2
    assert res.threshold is not None and res.threshold > 0.8


def test_mining_rejects_bad_inputs(rng):
    src = _embset(rng, 4, 3)
    with pytest.raises(ContractError):
        mine_bitext(src, src, [(0, 4)])
    with pytest.raises(ContractError):
        mine_bitext(src, src, [(0, 0)], n_thresholds=0)
    with pytest.raises(ShapeError):
        mine_bitext(src, _embset(rng, 4, 2), [(0, 0)])


# ---------------------------------------------------------------------------
# rank correlation


def test_average_ranks_known_cases():
    assert_allclose(average_ranks(np.array([10.0, 20.0, 30.0])), [1, 2, 3])
    assert_allclose(average_ranks(np.array([30.0, 10.0, 20.0])), [3, 1, 2])
    assert_allclose(average_ranks(np.array([1.0, 1.0, 2.0])), [1.5, 1.5, 3])
    assert_allclose(average_ranks(np.array([5.0, 5.0, 5.0])), [2, 2, 2])


def test_spearman_matches_naive_oracle(rng):
    for _ in range(80):
        n = int(rng.integers(2, 13))
        pred = rng.standard_normal(n)
        gold = rng.standard_normal(n)
        if rng.random() < 0.4:
            # Force ties in both vectors.
            pred = np.round(pred)
            gold = np.round(gold * 2) / 2
        if np.all(pred == pred[0]) or np.all(gold == gold[0]):
            continue
        assert_allclose(spearman_rho(pred, gold),
                        naive_spearman(pred, gold), rtol=0, atol=1e-13)


def test_spearman_known_values():
    assert spearman_rho([1, 2, 3, 4], [10, 20, 30, 40]) == pytest.approx(1.0)
    assert spearman_rho([1, 2, 3, 4], [8, 6, 4, 2]) == pytest.approx(-1.0)
    assert spearman_rho([1, 2, 3], [1, 3, 2]) == pytest.approx(0.5)


def test_spearman_monotone_invariance(rng):
    pred = rng.standard_normal(20)
    gold = rng.standard_normal(20)
    base = spearman_rho(pred, gold)
    assert spearman_rho(np.exp(pred), gold) == base
    assert spearman_rho(3.0 * pred + 1.0, gold) == base


def test_spearman_rejects_degenerate_inputs():
    with pytest.raises(ContractError):
        spearman_rho([1.0], [2.0])
    with pytest.raises(ShapeError):
        spearman_rho([1.0, 2.0], [1.0, 2.0, 3.0])
    with pytest.raises(UndefinedCorrelationError):
        spearman_rho([1.0, 2.0], [5.0, 5.0])
    with pytest.raises(UndefinedCorrelationError):
        spearman_rho([3.0, 3.0], [1.0, 2.0])
    with pytest.raises(ContractError):
        spearman_rho([1.0, np.nan], [1.0, 2.0])


# ---------------------------------------------------------------------------
# clustering purity


def _clustered_embeddings(rng, n_per, centers, spread=0.05):
    rows, labels = [], []
    for label, center in enumerate(centers):
        for _ in range(n_per):
            rows.append(center + spread * rng.standard_normal(len(center)))
            labels.append(label)
    return EmbeddingSet.from_vectors(np.array(rows), label=labels)


def test_purity_on_separated_clusters(rng):
    centers = [np.array([10.0, 0, 0]), np.array([0, 10.0, 0]),
               np.array([0, 0, 10.0])]
    emb = _clustered_embeddings(rng, 12, centers)
    res = kmeans_purity(emb, 3, seed=1, restarts=3)
    assert res.purity == 1.0
    assert res.macro_purity == 1.0
    assert res.assignments.shape == (36,)


def test_purity_matches_naive_count(rng):
    emb = _embset(rng, 30, 4, label=rng.integers(0, 3, size=30))
    res = kmeans_purity(emb, 4, seed=7, restarts=2)
    assert res.purity == naive_purity(emb.label, res.assignments)


def test_purity_extreme_k(rng):
    labels = [0] * 6 + [1] * 2
    emb = _embset(rng, 8, 3, label=labels)
    assert kmeans_purity(emb, 1, seed=0).purity == 0.75
    assert kmeans_purity(emb, 8, seed=0).purity == 1.0


def test_purity_deterministic(rng):
    emb = _embset(rng, 20, 3, label=rng.integers(0, 2, size=20))
    a = kmeans_purity(emb, 3, seed=5)
    b = kmeans_purity(emb, 3, seed=5)
    assert np.array_equal(a.assignments, b.assignments)
    assert a.inertia == b.inertia


def test_purity_rejects_bad_inputs(rng):
    unlabeled = _embset(rng, 6, 3)
    with pytest.raises(ContractError):
        kmeans_purity(unlabeled, 2, seed=0)
    labeled = _embset(rng, 6, 3, label=[0, 1, 0, 1, 0, 1])
    with pytest.raises(ContractError):
        kmeans_purity(labeled, 0, seed=0)
    with pytest.raises(ContractError):
        kmeans_purity(labeled, 7, seed=0)
    with pytest.raises(ContractError):
        kmeans_purity(labeled, 2, seed=0, restarts=0)


# ---------------------------------------------------------------------------
# language probe


def _language_sets(rng, n_per, centers, spread=0.1):
    rows, langs = [], []
    for lang, center in enumerate(centers):
        for _ in range(n_per):
            rows.append(center + spread * rng.standard_normal(len(center)))
            langs.append(lang)
    emb = EmbeddingSet.from_vectors(np.array(rows), lang=langs)
    idx = rng.permutation(len(langs))
    half = len(idx) // 2
    return emb.select(idx[:half]), emb.select(idx[half:])


def test_probe_separable_languages(rng):
    centers = [np.array([5.0, 0, 0]), np.array([0, 5.0, 0]),
               np.array([0, 0, 5.0])]
    train, test = _language_sets(rng, 20, centers)
    res = language_probe(train, test)
    assert res.accuracy == 1.0
    assert res.n_classes == 3
    assert set(res.per_language) == {0, 1, 2}
    assert all(v == 1.0 for v in res.per_language.values())


def test_probe_equivariant_under_rotation(rng):
    centers = [np.array([3.0, 0, 0, 0]), np.array([0, 3.0, 0, 0])]
    train, test = _language_sets(rng, 15, centers, spread=0.8)
    base = language_probe(train, test).accuracy
    q = random_rotation(4, seed=3)
    train_r = EmbeddingSet(vectors=train.vectors @ q, lang=train.lang)
    test_r = EmbeddingSet(vectors=test.vectors @ q, lang=test.lang)
    rotated = language_probe(train_r, test_r).accuracy
    assert abs(base - rotated) < 1e-9


def test_probe_rejects_bad_inputs(rng):
    train = _embset(rng, 8, 3, lang=[0, 0, 0, 0, 1, 1, 1, 1])
    test = _embset(rng, 4, 3, lang=[0, 1, 0, 1])
    with pytest.raises(ContractError):
        language_probe(_embset(rng, 8, 3), test)
    with pytest.raises(ContractError):
        language_probe(_embset(rng, 4, 3, lang=[0, 0, 0, 0]), test)
    with pytest.raises(ContractError):
        language_probe(train, _embset(rng, 2, 3, lang=[0, 7]))
    with pytest.raises(ShapeError):
        language_probe(train, _embset(rng, 2, 2, lang=[0, 1]))
    with pytest.raises(ContractError):
        language_probe(train, test, epochs=0)


# ---------------------------------------------------------------------------
# PCA projection


def test_pca_line_data_explains_everything():
    t = np.linspace(-2, 2, 9)
    x = np.stack([3 * t, -t, 0 * t], axis=1)
    coords, ratios = pca_project(x, out_dim=2)
    assert coords.shape == (9, 2)
    assert_allclose(ratios, [1.0, 0.0], atol=1e-12)
    assert_allclose(coords[:, 1], 0.0, atol=1e-9)
    # Sign convention: the largest-magnitude coordinate is positive.
    assert coords[np.abs(coords[:, 0]).argmax(), 0] > 0


def test_pca_rotation_and_translation_invariance(rng):
    x = rng.standard_normal((40, 5)) * np.array([4.0, 2.0, 1.0, 0.5, 0.1])
    coords, ratios = pca_project(x, out_dim=2)
    q = random_rotation(5, seed=8)
    coords_rot, ratios_rot = pca_project(x @ q, out_dim=2)
    assert_allclose(coords_rot, coords, atol=1e-9)
    assert_allclose(ratios_rot, ratios, atol=1e-12)
    coords_shift, _ = pca_project(x + 7.5, out_dim=2)
    assert_allclose(coords_shift, coords, atol=1e-9)


def test_pca_ratios_sorted_and_bounded(rng):
    x = rng.standard_normal((30, 6))
    _, ratios = pca_project(x, out_dim=4)
    assert np.all(np.diff(ratios) <= 1e-15)
    assert 0.0 < ratios.sum() <= 1.0 + 1e-12


def test_pca_degenerate_data_gives_zero_ratios():
    x = np.ones((5, 3))
    coords, ratios = pca_project(x, out_dim=2)
    assert_allclose(ratios, [0.0, 0.0], atol=0)
    assert_allclose(coords, 0.0, atol=1e-12)


def test_pca_rejects_bad_inputs(rng):
    with pytest.raises(ShapeError):
        pca_project(np.zeros(5))
    with pytest.raises(ContractError):
        pca_project(rng.standard_normal((4, 3)), out_dim=4)
    with pytest.raises(ContractError):
        pca_project(rng.standard_normal((2, 5)), out_dim=3)


# ---------------------------------------------------------------------------
# sts evaluation


def test_evaluate_sts_consistent_with_spearman(tiny_lexicon):
    from xlingual.encoder import EncoderParams
    from xlingual.generators import PretrainInit, gen_sts

    pairs = gen_sts(tiny_lexicon, 30, 0, 1, seed=5)
    table = PretrainInit(vocab_size=60, n_languages=3, dim=8,
                         offset_scale=0.5, noise_scale=0.05, seed=2).table()
    params = EncoderParams.initialize(table, n_hidden=1, out_dim=6,
                                      dropout=0.0, seed=3)
    rho, cosines = evaluate_sts(params, pairs)
    assert cosines.shape == (30,)
    gold = [p.score for p in pairs]
    assert rho == spearman_rho(cosines, gold)
    assert -1.0 <= rho <= 1.0

    with pytest.raises(ContractError):
        evaluate_sts(params, pairs[:1])
