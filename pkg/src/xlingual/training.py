"""Deterministic contrastive training loop.

One step: draw a batch by strategy mix, encode anchors / positives /
negatives (each encode gets its own derived dropout seed), take the
contrastive loss, backpropagate, apply Adam. Every random choice flows
from the config seed through fixed derivation tags, so a config and seed
pin the loss log and the final parameters bit for bit.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import encoder as enc
from .autodiff import backward, stack_rows
from .encoder import EncoderParams, contrastive_loss
from .errors import ConfigError, ContractError, StreamExhausted, TrainingDivergenceError
from .checkpoint import save_checkpoint
from .optim import Adam
from .pairs import PairStream, TrainingPair, build_batch, normalize_mix

# rng derivation tags; values are arbitrary but frozen
_TAG_INIT = 0x1A
_TAG_MIX = 0x2B
_TAG_DROPOUT = 0x3C


@dataclass
class TrainConfig:
    """Everything the training loop needs. seed has no default on purpose:
    every random process in this package requires an explicit seed."""

    seed: int
    batch_size: int = 32
    epochs: int = 1
    max_steps: int | None = None
    learning_rate: float = 1e-3
    temperature: float = 0.05
    dropout: float = 0.2
    hidden_layers: int = 2
    output_dim: int = 24
    strategy_mix: dict[str, float] = field(default_factory=lambda: {"nli": 1.0})
    shared_hard_negatives: bool = True
    use_hard_negatives: bool = True

    def validate(self) -> None:
        if not isinstance(self.seed, int):
            raise ConfigError(f"train seed must be an integer, got {self.seed!r}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be positive, got {self.batch_size}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be positive, got {self.epochs}")
        if self.max_steps is not None and self.max_steps < 1:
            raise ConfigError(f"max_steps must be positive, got {self.max_steps}")
        if self.learning_rate < 0:
            raise ConfigError(f"learning_rate must be non-negative, got {self.learning_rate}")
        if self.temperature <= 0:
            raise ConfigError(f"temperature must be positive, got {self.temperature}")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f"dropout must lie in [0, 1), got {self.dropout}")
        if self.hidden_layers < 0:
            raise ConfigError(f"hidden_layers must be non-negative, got {self.hidden_layers}")
        if self.output_dim < 1:
            raise ConfigError(f"output_dim must be positive, got {self.output_dim}")
        normalize_mix(self.strategy_mix)


@dataclass
class TrainResult:
    params: EncoderParams
    loss_log: list[tuple[int, float]]
    steps: int
    epochs_completed: int


def _batch_fingerprint(batch: list[TrainingPair]) -> str:
    h = hashlib.sha256()
    for pair in batch:
        h.update(repr(pair.anchor.tokens).encode())
        h.update(repr(pair.positive.tokens).encode())
    return h.hexdigest()[:12]


def _encode_batch(
    params: EncoderParams,
    batch: list[TrainingPair],
    config: TrainConfig,
    step: int,
):
    """Encode the batch into anchor / positive / negative matrices.

    Each encoder invocation gets a distinct dropout seed derived from
    (train seed, step, slot, role), so the two views of an unsupervised
    pair differ only by mask.
    """
    anchors, positives, negatives = [], [], []
    with_negs = batch[0].hard_negative is not None
    for slot, pair in enumerate(batch):
        if (pair.hard_negative is not None) != with_negs:
            raise ContractError("batch mixes pairs with and without hard negatives")
        seed_base = (config.seed, _TAG_DROPOUT, step, slot)
        anchors.append(enc.encode(params, pair.anchor, train=True,
                                  dropout_seed=seed_base + (0,)))
        positives.append(enc.encode(params, pair.positive, train=True,
                                    dropout_seed=seed_base + (1,)))
        if with_negs:
            negatives.append(enc.encode(params, pair.hard_negative, train=True,
                                        dropout_seed=seed_base + (2,)))
    return (
        stack_rows(anchors),
        stack_rows(positives),
        stack_rows(negatives) if with_negs else None,
    )


def train(
    config: TrainConfig,
    pair_data: dict[str, list[TrainingPair]],
    init_table: np.ndarray,
    *,
    checkpoint_dir: str | Path | None = None,
) -> TrainResult:
    """Run the configured number of epochs (or max_steps) and return the
    trained parameters plus the per-step loss log.

    pair_data maps strategy name -> available pairs; every strategy with
    positive mix weight must be backed by a nonempty list. A checkpoint
    is written at the end of each epoch when checkpoint_dir is given.
    """
    config.validate()
    mix = normalize_mix(config.strategy_mix)
    streams: dict[str, PairStream] = {}
    for name in mix:
        if not pair_data.get(name):
            raise ContractError(
                f"strategy {name!r} has mix weight but no training pairs"
            )
        streams[name] = PairStream(pair_data[name], seed=config.seed)

    params = EncoderParams.initialize(
        init_table,
        n_hidden=config.hidden_layers,
        out_dim=config.output_dim,
        dropout=config.dropout,
        seed=np.random.SeedSequence((config.seed, _TAG_INIT)).generate_state(1)[0],
    )
    opt = Adam(params.param_nodes(), lr=config.learning_rate)
    loss_log: list[tuple[int, float]] = []
    step = 0
    epochs_completed = 0

    for epoch in range(config.epochs):
        for stream in streams.values():
            stream.start_epoch(epoch)
        mix_rng = np.random.default_rng((config.seed, _TAG_MIX, epoch))
        while True:
            if config.max_steps is not None and step >= config.max_steps:
                break
            try:
                batch = build_batch(
                    streams,
                    mix,
                    config.batch_size,
                    mix_rng,
                    use_hard_negatives=config.use_hard_negatives,
                )
            except StreamExhausted:
                break
            anchors, positives, negatives = _encode_batch(params, batch, config, step)
            loss = contrastive_loss(
                anchors,
                positives,
                negatives,
                temperature=config.temperature,
                shared_hard_negatives=config.shared_hard_negatives,
            )
            loss_value = float(loss.value)
            if not np.isfinite(loss_value):
                raise TrainingDivergenceError(
                    f"non-finite loss at step {step} "
                    f"(batch fingerprint {_batch_fingerprint(batch)})"
                )
            params.zero_grad()
            backward(loss)
            opt.step()
            loss_log.append((step, loss_value))
            step += 1
        epochs_completed = epoch + 1
        if checkpoint_dir is not None:
            path = Path(checkpoint_dir) / f"checkpoint_epoch{epoch + 1}.ckpt"
            save_checkpoint(params, path)
        if config.max_steps is not None and step >= config.max_steps:
            break

    return TrainResult(
        params=params,
        loss_log=loss_log,
        steps=step,
        epochs_completed=epochs_completed,
    )


def write_loss_log(path: str | Path, loss_log: list[tuple[int, float]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("step,loss\n")
        for step, loss in loss_log:
            fh.write(f"{step},{loss!r}\n")
