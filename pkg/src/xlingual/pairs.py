"""Training pairs, per-strategy streams, and batch assembly.

Four pair strategies are supported:

  unsupervised  the anchor doubles as its own positive; the two views
                differ only by dropout mask at encode time
  nli           premise anchors an entailment positive and carries the
                contradiction as a hard negative; one language
  xnli          the same triple structure with per-sentence languages
  parallel      translation pairs; never carries a hard negative

A batch is homogeneous in hard-negative presence: if any selected
strategy does not supply negatives, negatives are dropped for the whole
batch.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError, ContractError, StreamExhausted
from .generators import NliTriple
from .lexicon import Sentence

STRATEGIES = ("unsupervised", "nli", "xnli", "parallel")
_WITH_NEGATIVES = ("nli", "xnli")


@dataclass(frozen=True)
class TrainingPair:
    anchor: Sentence
    positive: Sentence
    hard_negative: Sentence | None
    strategy: str

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ContractError(
                f"unknown strategy {self.strategy!r}, expected one of {STRATEGIES}"
            )
        if self.strategy == "unsupervised":
            if self.positive.tokens != self.anchor.tokens:
                raise ContractError(
                    "unsupervised pairs must reuse the anchor token sequence "
                    "as the positive"
                )
            if self.hard_negative is not None:
                raise ContractError("unsupervised pairs never carry a hard negative")
        if self.strategy == "parallel" and self.hard_negative is not None:
            raise ContractError("parallel pairs never carry a hard negative")


def pairs_unsupervised(sentences: Sequence[Sentence]) -> list[TrainingPair]:
    return [
        TrainingPair(anchor=s, positive=s, hard_negative=None, strategy="unsupervised")
        for s in sentences
    ]


def pairs_from_nli(triples: Sequence[NliTriple], strategy: str = "nli") -> list[TrainingPair]:
    if strategy not in _WITH_NEGATIVES:
        raise ContractError(f"nli triples map to strategies {_WITH_NEGATIVES}, got {strategy!r}")
    return [
        TrainingPair(anchor=t.premise, positive=t.entailment,
                     hard_negative=t.contradiction, strategy=strategy)
        for t in triples
    ]


def pairs_from_parallel(pairs: Sequence[tuple[Sentence, Sentence]]) -> list[TrainingPair]:
    return [
        TrainingPair(anchor=a, positive=b, hard_negative=None, strategy="parallel")
        for a, b in pairs
    ]


class PairStream:
    """A finite pair list replayed in a fresh shuffled order each epoch."""

    def __init__(self, pairs: Sequence[TrainingPair], seed: int):
        if len(pairs) == 0:
            raise ContractError("a pair stream needs at least one pair")
        self._pairs = list(pairs)
        self._seed = int(seed)
        self._order: np.ndarray | None = None
        self._cursor = 0

    def __len__(self) -> int:
        return len(self._pairs)

    def start_epoch(self, epoch: int) -> None:
        rng = np.random.default_rng((self._seed, 0x5E, int(epoch)))
        self._order = rng.permutation(len(self._pairs))
        self._cursor = 0

    def next_pair(self) -> TrainingPair:
        if self._order is None:
            raise ContractError("start_epoch must be called before drawing pairs")
        if self._cursor >= len(self._pairs):
            raise StreamExhausted()
        pair = self._pairs[int(self._order[self._cursor])]
        self._cursor += 1
        return pair


def normalize_mix(mix: dict[str, float]) -> dict[str, float]:
    """Validate strategy weights and scale them to sum to one."""
    if not mix:
        raise ConfigError("strategy mix must name at least one strategy")
    for name, weight in mix.items():
        if name not in STRATEGIES:
            raise ConfigError(
                f"unknown strategy {name!r} in mix, expected one of {STRATEGIES}"
            )
        if not np.isfinite(weight) or weight < 0:
            raise ConfigError(f"strategy {name!r} has invalid weight {weight}")
    total = sum(mix.values())
    if total <= 0:
        raise ConfigError("strategy mix weights must sum to a positive value")
    return {name: w / total for name, w in sorted(mix.items()) if w > 0}


def batch_keeps_negatives(mix: dict[str, float], use_hard_negatives: bool = True) -> bool:
    """Hard negatives survive only when every active strategy supplies them."""
    active = [name for name, w in mix.items() if w > 0]
    return use_hard_negatives and all(name in _WITH_NEGATIVES for name in active)


def build_batch(
    streams: dict[str, PairStream],
    mix: dict[str, float],
    batch_size: int,
    rng: np.random.Generator,
    *,
    use_hard_negatives: bool = True,
) -> list[TrainingPair]:
    """Draw one batch, sampling each slot's strategy by the mix weights.

    Raises StreamExhausted when a selected stream runs dry, which the
    training loop treats as the epoch boundary.
    """
    if batch_size < 1:
        raise ConfigError(f"batch size must be positive, got {batch_size}")
    probs = normalize_mix(mix)
    for name in probs:
        if name not in streams:
            raise ConfigError(f"strategy {name!r} has weight but no data stream")
    names = sorted(probs)
    p = np.array([probs[n] for n in names])
    keep_negs = batch_keeps_negatives(probs, use_hard_negatives)
    choices = rng.choice(len(names), size=batch_size, p=p)
    batch = []
    for c in choices:
        pair = streams[names[int(c)]].next_pair()
        if not keep_negs and pair.hard_negative is not None:
            pair = dataclasses.replace(pair, hard_negative=None)
        batch.append(pair)
    return batch
