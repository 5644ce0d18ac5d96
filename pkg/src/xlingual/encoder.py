"""Sentence encoder and the batch contrastive objective.

Architecture: token lookup -> mean pool -> n hidden blocks of
(affine, tanh, dropout) -> affine output projection. All similarity is
cosine; the loss divides similarities by a temperature and treats the
matched positive as the correct class among all positives (and,
optionally, hard negatives) in the batch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Node
from .errors import ConfigError, ContractError, ShapeError, VocabularyError
from .lexicon import Sentence


@dataclass
class EncoderParams:
    """Trainable state: one token table, hidden blocks, output projection."""

    embedding: Node
    hidden: tuple[tuple[Node, Node], ...]
    out_w: Node
    out_b: Node
    dropout: float

    def __post_init__(self):
        if self.embedding.value.ndim != 2:
            raise ShapeError(
                f"embedding table must be 2-d, got shape {self.embedding.value.shape}"
            )
        d = self.embedding.value.shape[1]
        for i, (w, b) in enumerate(self.hidden):
            if w.value.shape != (d, d) or b.value.shape != (d,):
                raise ShapeError(
                    f"hidden block {i}: expected weight ({d}, {d}) and bias ({d},), "
                    f"got {w.value.shape} and {b.value.shape}"
                )
        if self.out_w.value.ndim != 2 or self.out_w.value.shape[0] != d:
            raise ShapeError(
                f"output weight must be ({d}, out_dim), got {self.out_w.value.shape}"
            )
        if self.out_b.value.shape != (self.out_w.value.shape[1],):
            raise ShapeError(
                f"output bias shape {self.out_b.value.shape} does not match "
                f"weight {self.out_w.value.shape}"
            )
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f"dropout must lie in [0, 1), got {self.dropout}")

    @classmethod
    def initialize(
        cls,
        table: np.ndarray,
        *,
        n_hidden: int,
        out_dim: int,
        dropout: float,
        seed: int,
    ) -> "EncoderParams":
        """Fresh parameters: given token table, small random hidden weights."""
        table = ad.as_tensor(table, "embedding table")
        if table.ndim != 2:
            raise ShapeError(f"embedding table must be 2-d, got shape {table.shape}")
        if n_hidden < 0:
            raise ConfigError(f"hidden layer count must be non-negative, got {n_hidden}")
        if out_dim < 1:
            raise ConfigError(f"output dim must be positive, got {out_dim}")
        d = table.shape[1]
        rng = np.random.default_rng(seed)

        def draw(rows, cols):
            # Orthonormal columns keep the map well conditioned, so the
            # input geometry survives the untrained network instead of
            # being scrambled by a product of gaussian matrices. Falls
            # back to scaled gaussian when more columns than rows are
            # asked for (QR cannot deliver orthonormal columns then).
            if cols > rows:
                return rng.standard_normal((rows, cols)) / np.sqrt(rows)
            g = rng.standard_normal((rows, rows))
            q, r = np.linalg.qr(g)
            q = q * np.where(np.diag(r) >= 0, 1.0, -1.0)
            return np.ascontiguousarray(q[:, :cols])

        hidden = []
        for i in range(n_hidden):
            w = ad.leaf(draw(d, d), f"hidden.{i}.weight")
            b = ad.leaf(np.zeros(d), f"hidden.{i}.bias")
            hidden.append((w, b))
        out_w = ad.leaf(draw(d, out_dim), "output.weight")
        out_b = ad.leaf(np.zeros(out_dim), "output.bias")
        return cls(
            embedding=ad.leaf(table.copy(), "embedding"),
            hidden=tuple(hidden),
            out_w=out_w,
            out_b=out_b,
            dropout=float(dropout),
        )

    @property
    def out_dim(self) -> int:
        return self.out_w.value.shape[1]

    @property
    def vocab_rows(self) -> int:
        return self.embedding.value.shape[0]

    def param_nodes(self) -> list[Node]:
        """All trainable leaves in a fixed, name-stable order."""
        nodes = [self.embedding]
        for w, b in self.hidden:
            nodes.extend((w, b))
        nodes.extend((self.out_w, self.out_b))
        return nodes

    def named_tensors(self) -> dict[str, np.ndarray]:
        """Checkpoint view: tensor name -> value, plus the dropout rate."""
        named = {"embedding": self.embedding.value}
        for i, (w, b) in enumerate(self.hidden):
            named[f"hidden.{i}.weight"] = w.value
            named[f"hidden.{i}.bias"] = b.value
        named["output.weight"] = self.out_w.value
        named["output.bias"] = self.out_b.value
        named["dropout_rate"] = np.asarray(self.dropout)
        return named

    def zero_grad(self) -> None:
        for node in self.param_nodes():
            node.zero_grad()


def encode(
    params: EncoderParams,
    sentence: Sentence,
    *,
    train: bool = False,
    dropout_seed=None,
) -> Node:
    """Encode one sentence into an out_dim vector node.

    Training mode applies dropout after every hidden tanh, deriving one
    mask seed per layer from dropout_seed. Evaluation mode skips the
    dropout ops entirely, which equals rate-0 training output exactly.
    """
    for tok in sentence.tokens:
        if not 0 <= tok < params.vocab_rows:
            raise VocabularyError(
                f"token {tok} outside embedding table with {params.vocab_rows} rows"
            )
    use_dropout = train and params.dropout > 0.0 and len(params.hidden) > 0
    if use_dropout:
        if dropout_seed is None:
            raise ContractError(
                "training-mode encode with nonzero dropout requires an explicit "
                "dropout_seed"
            )
        layer_seeds = np.random.SeedSequence(dropout_seed).generate_state(
            len(params.hidden)
        )
    x = ad.lookup(params.embedding, sentence.tokens)
    x = ad.mean_pool(x)
    for i, (w, b) in enumerate(params.hidden):
        x = ad.tanh_elem(ad.add(ad.matmul(x, w), b))
        if use_dropout:
            x, _ = ad.dropout_forward(x, params.dropout, int(layer_seeds[i]))
    return ad.add(ad.matmul(x, params.out_w), params.out_b)


def contrastive_loss(
    anchors: Node,
    positives: Node,
    hard_negatives: Node | None = None,
    *,
    temperature: float = 0.05,
    shared_hard_negatives: bool = True,
) -> Node:
    """Batch InfoNCE over cosine similarities.

    Row i's positive logit is cos(anchor_i, positive_i) / t. The
    denominator sums exp of cos(anchor_i, positive_j) / t over all j,
    plus hard-negative terms when given: every negative column with
    shared_hard_negatives, otherwise only the row's own negative.
    Returns the scalar mean over rows.
    """
    temperature = float(temperature)
    if temperature <= 0.0:
        raise ConfigError(f"temperature must be positive, got {temperature}")
    av, pv = anchors.value, positives.value
    if av.ndim != 2 or av.shape[0] < 1:
        raise ContractError(f"anchors must be a nonempty [n, d] matrix, got {av.shape}")
    if av.shape != pv.shape:
        raise ShapeError(
            f"anchors shape {av.shape} does not match positives shape {pv.shape}"
        )
    if hard_negatives is not None and hard_negatives.value.shape != av.shape:
        raise ShapeError(
            f"hard negatives shape {hard_negatives.value.shape} does not match "
            f"anchors shape {av.shape}"
        )
    inv_t = 1.0 / temperature
    pos_sims = ad.cosine_matrix(anchors, positives)
    matched = ad.scale(ad.diag_part(pos_sims), inv_t)
    if hard_negatives is None:
        logits = ad.scale(pos_sims, inv_t)
    elif shared_hard_negatives:
        neg_sims = ad.cosine_matrix(anchors, hard_negatives)
        logits = ad.scale(ad.concat_cols(pos_sims, neg_sims), inv_t)
    else:
        own_neg = ad.diag_part(ad.cosine_matrix(anchors, hard_negatives))
        logits = ad.scale(ad.concat_cols(pos_sims, ad.as_column(own_neg)), inv_t)
    # Shift by the matched logit before the log-sum-exp: computing
    # logsumexp(logits) - matched instead would quantize near-zero losses
    # at the rounding step of the much larger row maximum.
    per_row = ad.logsumexp_row(ad.sub_col(logits, matched))
    return ad.mean_vec(per_row)
