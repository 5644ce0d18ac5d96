"""Evaluators: retrieval, bitext mining, STS correlation, clustering
purity, language probing, and PCA projection.

All of them operate on EmbeddingSet rows (unit vectors), are fully
deterministic given their seeds, and depend only on inner products, so a
joint orthogonal rotation of every embedding leaves each output
unchanged up to floating-point noise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .embeddings import EmbeddingSet, embed_sentences
from .encoder import EncoderParams
from .errors import ContractError, ShapeError, UndefinedCorrelationError
from .generators import StsPair

# ---------------------------------------------------------------------------
# retrieval


@dataclass(frozen=True)
class RetrievalResult:
    src2tgt: float
    tgt2src: float
    mean: float
    n_pairs: int


def retrieval_accuracy(src: EmbeddingSet, tgt: EmbeddingSet) -> RetrievalResult:
    """Nearest-neighbor translation retrieval with gold pairing by row index.

    A query counts as correct when its most similar candidate is the row
    with the same index; similarity ties resolve to the lowest index, so a
    tie with a lower-index distractor counts against the gold pair.
    """
    if len(src) != len(tgt):
        raise ContractError(
            f"retrieval pools must align row for row, got {len(src)} and {len(tgt)}"
        )
    if len(src) < 2:
        raise ContractError("retrieval needs at least two pairs to be meaningful")
    if src.dim != tgt.dim:
        raise ShapeError(f"embedding dims differ: {src.dim} vs {tgt.dim}")
    sims = src.vectors @ tgt.vectors.T
    gold = np.arange(len(src))
    s2t = float(np.mean(sims.argmax(axis=1) == gold))
    t2s = float(np.mean(sims.argmax(axis=0) == gold))
    return RetrievalResult(src2tgt=s2t, tgt2src=t2s, mean=(s2t + t2s) / 2.0,
                           n_pairs=len(src))


# ---------------------------------------------------------------------------
# bitext mining


@dataclass(frozen=True)
class MiningResult:
    f1: float
    precision: float
    recall: float
    threshold: float | None
    n_candidates: int
    no_candidates: bool = False


def mine_bitext(
    src: EmbeddingSet,
    tgt: EmbeddingSet,
    gold_pairs: Sequence[tuple[int, int]],
    *,
    n_thresholds: int = 200,
) -> MiningResult:
    """Mutual-nearest-neighbor mining scored against a gold alignment.

    Candidates are pairs (i, j) where j is i's nearest target and i is
    j's nearest source; their cosine is the mining score. F1 is maximized
    over n_thresholds evenly spaced cutoffs spanning the observed score
    range, ties going to the lowest cutoff, and the winning F1 is
    re-checked against every other grid point before returning.
    """
    if len(src) < 1 or len(tgt) < 1:
        raise ContractError("mining needs nonempty pools")
    if src.dim != tgt.dim:
        raise ShapeError(f"embedding dims differ: {src.dim} vs {tgt.dim}")
    if n_thresholds < 1:
        raise ContractError(f"threshold grid needs at least one point, got {n_thresholds}")
    gold = set()
    for i, j in gold_pairs:
        if not (0 <= i < len(src) and 0 <= j < len(tgt)):
            raise ContractError(f"gold pair ({i}, {j}) outside pools")
        gold.add((int(i), int(j)))

    sims = src.vectors @ tgt.vectors.T
    nn_of_src = sims.argmax(axis=1)
    nn_of_tgt = sims.argmax(axis=0)
    candidates = [
        (i, int(nn_of_src[i]), float(sims[i, nn_of_src[i]]))
        for i in range(len(src))
        if int(nn_of_tgt[nn_of_src[i]]) == i
    ]
    if not candidates:
        return MiningResult(f1=0.0, precision=0.0, recall=0.0, threshold=None,
                            n_candidates=0, no_candidates=True)

    scores = np.array([c[2] for c in candidates])
    grid = np.linspace(scores.min(), scores.max(), n_thresholds)
    stats = []
    for t in grid:
        predicted = {(i, j) for i, j, s in candidates if s >= t}
        tp = len(predicted & gold)
        precision = tp / len(predicted) if predicted else 0.0
        recall = tp / len(gold) if gold else 0.0
        f1 = (2 * precision * recall / (precision + recall)
              if precision + recall > 0 else 0.0)
        stats.append((f1, precision, recall, float(t)))
    best = max(range(len(stats)), key=lambda k: stats[k][0])
    for k in range(len(stats)):
        if k == best:
            continue
        if stats[k][0] > stats[best][0]:
            raise ContractError("threshold search lost its argmax certificate")
        if stats[k][0] == stats[best][0] and k < best:
            best = k
    f1, precision, recall, threshold = stats[best]
    return MiningResult(f1=f1, precision=precision, recall=recall,
                        threshold=threshold, n_candidates=len(candidates))


# ---------------------------------------------------------------------------
# rank correlation


def average_ranks(x: np.ndarray) -> np.ndarray:
    """1-based ranks; tied values share the mean of their rank positions."""
    x = np.asarray(x, dtype=np.float64)
    order = np.argsort(x, kind="stable")
    ranks = np.empty(len(x))
    i = 0
    while i < len(x):
        j = i
        while j + 1 < len(x) and x[order[j + 1]] == x[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman_rho(pred: Sequence[float], gold: Sequence[float]) -> float:
    """Spearman correlation: Pearson correlation of average ranks."""
    p = np.asarray(pred, dtype=np.float64)
    g = np.asarray(gold, dtype=np.float64)
    if p.ndim != 1 or p.shape != g.shape:
        raise ShapeError(f"rank inputs must be equal-length vectors, "
                         f"got {p.shape} and {g.shape}")
    if len(p) < 2:
        raise ContractError("correlation needs at least two points")
    if not (np.isfinite(p).all() and np.isfinite(g).all()):
        raise ContractError("rank inputs must be finite")
    if np.all(g == g[0]):
        raise UndefinedCorrelationError("gold scores are all equal; ranks carry no signal")
    if np.all(p == p[0]):
        raise UndefinedCorrelationError("predictions are all equal; ranks carry no signal")
    rp = average_ranks(p)
    rg = average_ranks(g)
    rp = rp - rp.mean()
    rg = rg - rg.mean()
    return float((rp @ rg) / np.sqrt((rp @ rp) * (rg @ rg)))


def evaluate_sts(params: EncoderParams, pairs: Sequence[StsPair]) -> tuple[float, np.ndarray]:
    """Cosine of each pair's evaluation-mode embeddings, scored by Spearman
    correlation against the gold scores. Returns (rho, per-pair cosines)."""
    if len(pairs) < 2:
        raise ContractError("sts evaluation needs at least two pairs")
    a = embed_sentences(params, [p.a for p in pairs])
    b = embed_sentences(params, [p.b for p in pairs])
    na = np.linalg.norm(a, axis=1)
    nb = np.linalg.norm(b, axis=1)
    if (na <= 1e-12).any() or (nb <= 1e-12).any():
        raise ContractError("degenerate zero embedding in sts evaluation")
    cosines = np.sum(a * b, axis=1) / (na * nb)
    gold = np.array([p.score for p in pairs])
    return spearman_rho(cosines, gold), cosines


# ---------------------------------------------------------------------------
# clustering purity


@dataclass(frozen=True)
class ClusterResult:
    purity: float
    macro_purity: float
    inertia: float
    assignments: np.ndarray


def _kmeans_pp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: spread initial centers by squared distance."""
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[int(rng.integers(n))]
    d2 = np.sum((x - centers[0]) ** 2, axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers[c] = x[idx]
        d2 = np.minimum(d2, np.sum((x - centers[c]) ** 2, axis=1))
    return centers


def _lloyd(
    x: np.ndarray,
    centers: np.ndarray,
    *,
    max_iter: int = 300,
    tol: float = 1e-9,
) -> tuple[np.ndarray, np.ndarray, float, list[float]]:
    """Lloyd iterations with farthest-point reseeding of emptied clusters.

    Returns (centers, assignments, inertia, inertia trace).
    """
    k = centers.shape[0]
    trace = []
    assign = None
    for _ in range(max_iter):
        d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        assign = d2.argmin(axis=1)
        point_d2 = d2[np.arange(len(x)), assign]
        for c in range(k):
            if not np.any(assign == c):
                far = int(point_d2.argmax())
                centers[c] = x[far]
                assign[far] = c
                point_d2[far] = 0.0
        trace.append(float(point_d2.sum()))
        new_centers = np.stack([x[assign == c].mean(axis=0) for c in range(k)])
        shift = float(np.linalg.norm(new_centers - centers, axis=1).max())
        centers = new_centers
        if shift < tol:
            break
    d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    assign = d2.argmin(axis=1)
    inertia = float(d2[np.arange(len(x)), assign].sum())
    trace.append(inertia)
    return centers, assign, inertia, trace


def kmeans_purity(
    embeddings: EmbeddingSet,
    k: int,
    seed: int,
    *,
    restarts: int = 10,
    max_iter: int = 300,
) -> ClusterResult:
    """Cluster rows with restarted k-means and score purity against labels.

    purity        fraction of points whose cluster's majority label is theirs
    macro_purity  unweighted mean of per-cluster majority fractions
    The best restart is the one with the lowest inertia; ties keep the
    earliest restart so the result is deterministic.
    """
    if embeddings.label is None:
        raise ContractError("purity needs label metadata on the embedding set")
    n = len(embeddings)
    if not 1 <= k <= n:
        raise ContractError(f"k must lie in [1, {n}], got {k}")
    if restarts < 1:
        raise ContractError(f"restarts must be positive, got {restarts}")
    x = embeddings.vectors
    best: tuple[float, np.ndarray] | None = None
    for r in range(restarts):
        rng = np.random.default_rng((int(seed), 0xC1, r))
        centers = _kmeans_pp_init(x, k, rng)
        _, assign, inertia, _ = _lloyd(x, centers, max_iter=max_iter)
        if best is None or inertia < best[0]:
            best = (inertia, assign)
    inertia, assign = best
    labels = embeddings.label
    majority_total = 0
    fractions = []
    for c in range(k):
        members = labels[assign == c]
        if members.size == 0:
            continue
        counts = np.bincount(members)
        majority_total += int(counts.max())
        fractions.append(counts.max() / members.size)
    return ClusterResult(
        purity=majority_total / n,
        macro_purity=float(np.mean(fractions)),
        inertia=inertia,
        assignments=assign,
    )


# ---------------------------------------------------------------------------
# language probe


@dataclass(frozen=True)
class ProbeResult:
    accuracy: float
    n_classes: int
    per_language: dict[int, float]


def language_probe(
    train: EmbeddingSet,
    test: EmbeddingSet,
    *,
    epochs: int = 500,
    lr: float = 0.1,
    seed: int = 0,
) -> ProbeResult:
    """Multinomial logistic regression from frozen embeddings to language id.

    Full-batch gradient descent with a fixed schedule (epochs, lr) and a
    zero init, which makes the whole fit exactly equivariant under joint
    rotations of the embedding space: probe accuracy measures geometry,
    nothing else. The schedule is deterministic, so the seed parameter is
    accepted for interface stability but draws nothing.
    """
    if train.lang is None or test.lang is None:
        raise ContractError("probe needs language metadata on both embedding sets")
    if epochs < 1 or lr <= 0:
        raise ContractError(f"invalid probe schedule: epochs={epochs}, lr={lr}")
    classes = np.unique(train.lang)
    if classes.size < 2:
        raise ContractError("probe needs at least two languages in the training set")
    if not np.isin(test.lang, classes).all():
        raise ContractError("test set contains a language unseen in probe training")
    if train.dim != test.dim:
        raise ShapeError(f"embedding dims differ: {train.dim} vs {test.dim}")
    class_index = {int(c): i for i, c in enumerate(classes)}
    y = np.array([class_index[int(l)] for l in train.lang])
    x = train.vectors
    n, d = x.shape
    c = classes.size
    w = np.zeros((d, c))
    b = np.zeros(c)
    onehot = np.zeros((n, c))
    onehot[np.arange(n), y] = 1.0
    for _ in range(epochs):
        logits = x @ w + b
        logits -= logits.max(axis=1, keepdims=True)
        p = np.exp(logits)
        p /= p.sum(axis=1, keepdims=True)
        g = (p - onehot) / n
        w -= lr * (x.T @ g)
        b -= lr * g.sum(axis=0)
    test_logits = test.vectors @ w + b
    pred = test_logits.argmax(axis=1)
    truth = np.array([class_index[int(l)] for l in test.lang])
    accuracy = float(np.mean(pred == truth))
    per_language = {}
    for ci, cls in enumerate(classes):
        mask = truth == ci
        if mask.any():
            per_language[int(cls)] = float(np.mean(pred[mask] == ci))
    return ProbeResult(accuracy=accuracy, n_classes=int(c), per_language=per_language)


# ---------------------------------------------------------------------------
# PCA projection


def pca_project(matrix: np.ndarray, out_dim: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """Project rows onto the top principal components of their covariance.

    Returns (coordinates [n, out_dim], explained variance ratios). The sign
    of each component is fixed by making its largest-magnitude projected
    coordinate positive, a convention that survives any joint rotation of
    the input. Trailing components of rank-deficient data carry zero
    variance and zero coordinates.
    """
    x = np.asarray(matrix, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeError(f"pca expects an [n, d] matrix, got shape {x.shape}")
    n, d = x.shape
    if not 1 <= out_dim <= d:
        raise ContractError(f"out_dim must lie in [1, {d}], got {out_dim}")
    if n < out_dim:
        raise ContractError(f"need at least {out_dim} rows, got {n}")
    centered = x - x.mean(axis=0)
    cov = (centered.T @ centered) / n
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1][:out_dim]
    top_vals = np.clip(eigvals[order], 0.0, None)
    total = float(np.clip(eigvals, 0.0, None).sum())
    ratios = top_vals / total if total > 0 else np.zeros(out_dim)
    coords = np.empty((n, out_dim))
    for j, idx in enumerate(order):
        t = centered @ eigvecs[:, idx]
        peak = int(np.abs(t).argmax())
        if t[peak] < 0:
            t = -t
        coords[:, j] = t
    return coords, ratios
