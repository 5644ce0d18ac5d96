"""Shared test utilities: finite differences and naive reference oracles.

Every oracle here is written as directly as possible (plain loops, no
shared code with the package) so a test comparing the two is a real
cross-check rather than the same algorithm twice.
"""

import math

import numpy as np


def numeric_grad(f, arrays, h=1e-6):
    """Central finite-difference gradients of scalar f w.r.t. each array.

    f is called with no arguments and reads the arrays in place.
    """
    grads = []
    for arr in arrays:
        g = np.zeros_like(arr)
        flat = arr.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            f_plus = f()
            flat[i] = orig - h
            f_minus = f()
            flat[i] = orig
            gflat[i] = (f_plus - f_minus) / (2.0 * h)
        grads.append(g)
    return grads


def relative_error(a, b, floor=1e-8):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)
    return float(np.max(np.abs(a - b) / denom)) if a.size else 0.0


def brute_force_infonce(anchors, positives, negatives=None, *,
                        temperature=0.05, shared=True):
    """Direct-exponential contrastive loss, no log-sum-exp trick.

    Numerator and denominator are both divided by the matched-pair term
    before exponentiating (an exact algebraic identity), so the plain
    math.exp/math.log arithmetic stays well conditioned in the regime
    where the matched pair dominates its row and the loss is tiny.
    """
    n = anchors.shape[0]

    def cos(u, v):
        return float(np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v)))

    total = 0.0
    for i in range(n):
        pos = cos(anchors[i], positives[i]) / temperature
        den = 0.0
        for j in range(n):
            den += math.exp(cos(anchors[i], positives[j]) / temperature - pos)
        if negatives is not None:
            if shared:
                for j in range(n):
                    den += math.exp(cos(anchors[i], negatives[j]) / temperature - pos)
            else:
                den += math.exp(cos(anchors[i], negatives[i]) / temperature - pos)
        total += math.log(den)
    return total / n


def naive_retrieval(src, tgt):
    """Loop-based nearest-neighbor accuracy, ties to the lowest index."""
    n = len(src)
    correct_st = 0
    for i in range(n):
        best_j, best_s = 0, -np.inf
        for j in range(n):
            s = float(np.dot(src[i], tgt[j]))
            if s > best_s:
                best_j, best_s = j, s
        if best_j == i:
            correct_st += 1
    correct_ts = 0
    for j in range(n):
        best_i, best_s = 0, -np.inf
        for i in range(n):
            s = float(np.dot(src[i], tgt[j]))
            if s > best_s:
                best_i, best_s = i, s
        if best_i == j:
            correct_ts += 1
    return correct_st / n, correct_ts / n


def naive_rank(values):
    """1-based average ranks by pairwise comparison counts."""
    values = list(values)
    ranks = []
    for v in values:
        below = sum(1 for u in values if u < v)
        equal = sum(1 for u in values if u == v)
        ranks.append(below + (equal + 1) / 2.0)
    return np.array(ranks)


def naive_spearman(pred, gold):
    rp = naive_rank(pred)
    rg = naive_rank(gold)
    rp = rp - rp.mean()
    rg = rg - rg.mean()
    return float((rp * rg).sum() / math.sqrt((rp * rp).sum() * (rg * rg).sum()))


def naive_mining_f1(src, tgt, gold_pairs, n_thresholds):
    """Mutual-NN mining with an exhaustive sweep of the threshold grid."""
    ns, nt = len(src), len(tgt)
    sims = [[float(np.dot(src[i], tgt[j])) for j in range(nt)] for i in range(ns)]
    nn_s = [max(range(nt), key=lambda j: (sims[i][j], -j)) for i in range(ns)]
    nn_t = [max(range(ns), key=lambda i: (sims[i][j], -i)) for j in range(nt)]
    candidates = [(i, nn_s[i], sims[i][nn_s[i]])
                  for i in range(ns) if nn_t[nn_s[i]] == i]
    if not candidates:
        return 0.0
    scores = [c[2] for c in candidates]
    gold = {(int(i), int(j)) for i, j in gold_pairs}
    best = 0.0
    for t in np.linspace(min(scores), max(scores), n_thresholds):
        pred = {(i, j) for i, j, s in candidates if s >= t}
        tp = len(pred & gold)
        p = tp / len(pred) if pred else 0.0
        r = tp / len(gold) if gold else 0.0
        f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
        best = max(best, f1)
    return best


def naive_purity(labels, assignments):
    """Counting-based purity of a clustering against gold labels."""
    labels = list(labels)
    assignments = list(assignments)
    n = len(labels)
    majority_total = 0
    for c in set(assignments):
        members = [labels[i] for i in range(n) if assignments[i] == c]
        counts = {}
        for lab in members:
            counts[lab] = counts.get(lab, 0) + 1
        majority_total += max(counts.values())
    return majority_total / n


def random_rotation(dim, seed):
    """A uniformly random orthogonal matrix with determinant +1."""
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


TINY_CONFIG = """\
[corpus]
seed = 11
vocab_size = 60
n_languages = 3
embed_dim = 8
offset_scale = 2.0
noise_scale = 0.1
min_len = 2
max_len = 4
n_topics = 3
n_parallel = 40
n_nli = 200
n_xnli = 200
n_sts = 30
n_topic_sentences = 45
eval_pairs = 20
parallel_langs = [0, 1]
nli_lang = 0
xnli_pool = [0, 1, 2]
sts_langs = [0, 1]
topics_lang = 0

[train]
seed = 5
batch_size = 8
epochs = 1
max_steps = 6
learning_rate = 1e-3
temperature = 0.05
dropout = 0.1
hidden_layers = 1
output_dim = 8
strategy_mix = { nli = 1.0 }

[eval]
seed = 3
mining_overlap = 5
mining_pool = 8
n_thresholds = 50
kmeans_restarts = 2
probe_train_fraction = 0.5
"""


def write_tiny_config(path, extra=""):
    path.write_text(TINY_CONFIG + extra)
    return path
