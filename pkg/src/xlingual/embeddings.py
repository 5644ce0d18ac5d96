"""Embedding matrices with row metadata, normalized once at construction.

Every evaluator consumes an EmbeddingSet whose rows are unit vectors, so
cosine similarity is a plain dot product everywhere downstream.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .autodiff import as_tensor
from .encoder import EncoderParams, encode
from .errors import ContractError, DegenerateVectorError, ShapeError
from .lexicon import Sentence

_NORM_FLOOR = 1e-12


@dataclass(frozen=True)
class EmbeddingSet:
    """Unit-norm row vectors plus optional per-row metadata arrays."""

    vectors: np.ndarray
    lang: np.ndarray | None = None
    label: np.ndarray | None = None

    def __post_init__(self):
        if self.vectors.ndim != 2 or self.vectors.shape[0] < 1:
            raise ShapeError(
                f"embedding matrix must be a nonempty [n, d] array, "
                f"got shape {self.vectors.shape}"
            )
        norms = np.linalg.norm(self.vectors, axis=1)
        if not np.allclose(norms, 1.0, atol=1e-9):
            raise ContractError("embedding rows must be unit-normalized")
        for name, meta in (("lang", self.lang), ("label", self.label)):
            if meta is not None and meta.shape != (self.vectors.shape[0],):
                raise ShapeError(
                    f"{name} metadata shape {meta.shape} does not match "
                    f"{self.vectors.shape[0]} rows"
                )

    @classmethod
    def from_vectors(
        cls,
        matrix,
        *,
        lang: Sequence[int] | None = None,
        label: Sequence[int] | None = None,
    ) -> "EmbeddingSet":
        """Validate and L2-normalize raw vectors."""
        arr = as_tensor(matrix, "embedding matrix")
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise ShapeError(
                f"embedding matrix must be a nonempty [n, d] array, got shape {arr.shape}"
            )
        norms = np.linalg.norm(arr, axis=1)
        bad = np.flatnonzero(norms <= _NORM_FLOOR)
        if bad.size:
            raise DegenerateVectorError(
                f"embedding row {int(bad[0])} has near-zero norm and cannot "
                f"be normalized"
            )
        return cls(
            vectors=arr / norms[:, None],
            lang=None if lang is None else np.asarray(lang, dtype=np.int64),
            label=None if label is None else np.asarray(label, dtype=np.int64),
        )

    def __len__(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def select(self, mask) -> "EmbeddingSet":
        """Row subset; mask is any valid numpy row index."""
        idx = np.asarray(mask)
        return EmbeddingSet(
            vectors=self.vectors[idx],
            lang=None if self.lang is None else self.lang[idx],
            label=None if self.label is None else self.label[idx],
        )


def embed_sentences(params: EncoderParams, sentences: Sequence[Sentence]) -> np.ndarray:
    """Evaluation-mode embeddings (no dropout), one row per sentence."""
    if len(sentences) == 0:
        raise ContractError("need at least one sentence to embed")
    return np.stack([encode(params, s, train=False).value for s in sentences])


def embedding_set_from_sentences(
    params: EncoderParams,
    sentences: Sequence[Sentence],
    *,
    label: Sequence[int] | None = None,
) -> EmbeddingSet:
    """Encode sentences and package them with language metadata."""
    matrix = embed_sentences(params, sentences)
    return EmbeddingSet.from_vectors(
        matrix,
        lang=[s.lang for s in sentences],
        label=label,
    )
