"""Estimator-style wrapper with a fit/transform interface.

The encoder is asymmetric by nature: fit() consumes training pairs
(anchor/positive, optionally a hard negative), while transform() consumes
plain sentences. The hyperparameter surface mirrors TrainConfig, and
get_params/set_params follow the common estimator protocol so the object
works with clone()-style tooling and grid sweeps.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .embeddings import EmbeddingSet, embed_sentences
from .errors import ConfigError, ContractError, NotFittedError
from .lexicon import Sentence
from .pairs import TrainingPair
from .training import TrainConfig, train


class ContrastiveSentenceEncoder:
    """Contrastive sentence encoder exposed as a transformer.

    Parameters mirror the training configuration; ``embedding_table`` is
    the token-embedding initialization (one row per surface token) the
    encoder starts from. All parameters are stored verbatim and validated
    at fit time.
    """

    _PARAM_NAMES = (
        "embedding_table",
        "seed",
        "batch_size",
        "epochs",
        "max_steps",
        "learning_rate",
        "temperature",
        "dropout",
        "hidden_layers",
        "output_dim",
        "strategy_mix",
        "shared_hard_negatives",
        "use_hard_negatives",
    )

    def __init__(self, embedding_table=None, seed=0, batch_size=32, epochs=1,
                 max_steps=None, learning_rate=1e-3, temperature=0.05,
                 dropout=0.2, hidden_layers=2, output_dim=24,
                 strategy_mix=None, shared_hard_negatives=True,
                 use_hard_negatives=True):
        self.embedding_table = embedding_table
        self.seed = seed
        self.batch_size = batch_size
        self.epochs = epochs
        self.max_steps = max_steps
        self.learning_rate = learning_rate
        self.temperature = temperature
        self.dropout = dropout
        self.hidden_layers = hidden_layers
        self.output_dim = output_dim
        self.strategy_mix = strategy_mix
        self.shared_hard_negatives = shared_hard_negatives
        self.use_hard_negatives = use_hard_negatives

    def get_params(self, deep: bool = True) -> dict:
        return {name: getattr(self, name) for name in self._PARAM_NAMES}

    def set_params(self, **params) -> "ContrastiveSentenceEncoder":
        for key, value in params.items():
            if key not in self._PARAM_NAMES:
                raise ConfigError(
                    f"unknown parameter {key!r} for ContrastiveSentenceEncoder"
                )
            setattr(self, key, value)
        return self

    def _train_config(self) -> TrainConfig:
        mix = {"nli": 1.0} if self.strategy_mix is None else dict(self.strategy_mix)
        config = TrainConfig(
            seed=self.seed,
            batch_size=self.batch_size,
            epochs=self.epochs,
            max_steps=self.max_steps,
            learning_rate=self.learning_rate,
            temperature=self.temperature,
            dropout=self.dropout,
            hidden_layers=self.hidden_layers,
            output_dim=self.output_dim,
            strategy_mix=mix,
            shared_hard_negatives=self.shared_hard_negatives,
            use_hard_negatives=self.use_hard_negatives,
        )
        config.validate()
        return config

    def fit(self, pairs: Sequence[TrainingPair], y=None) -> "ContrastiveSentenceEncoder":
        """Train on pairs grouped by their strategy field; y is ignored."""
        if self.embedding_table is None:
            raise ConfigError("embedding_table is required before fitting")
        config = self._train_config()
        grouped: dict[str, list[TrainingPair]] = {}
        for pair in pairs:
            if not isinstance(pair, TrainingPair):
                raise ContractError(
                    f"fit expects TrainingPair inputs, got {type(pair).__name__}"
                )
            grouped.setdefault(pair.strategy, []).append(pair)
        missing = [s for s in config.strategy_mix if s not in grouped]
        if missing:
            raise ContractError(
                f"strategy mix names {missing} but the fit data contains "
                f"strategies {sorted(grouped)}"
            )
        table = np.asarray(self.embedding_table, dtype=np.float64)
        result = train(config, grouped, table)
        self.params_ = result.params
        self.loss_log_ = result.loss_log
        self.n_steps_ = result.steps
        return self

    def transform(self, sentences: Sequence[Sentence]) -> np.ndarray:
        """Unit-norm embedding rows for the given sentences."""
        if not hasattr(self, "params_"):
            raise NotFittedError("fit the encoder before calling transform")
        return EmbeddingSet.from_vectors(
            embed_sentences(self.params_, sentences)).vectors
