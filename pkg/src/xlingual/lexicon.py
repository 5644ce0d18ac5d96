"""Semantic lexicon and the sentence surface form.

Meaning lives in language-neutral semantic ids 0..V-1. A sentence in
language l renders semantic id s as the surface token l*V + s, so every
surface token decodes uniquely back to (language, meaning). The lexicon
also fixes the structure generators rely on: disjoint topic pools, a
generic filler pool outside every topic, and an antonym pairing used to
build contradictions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import EmptySentenceError, LexiconError, VocabularyError


@dataclass(frozen=True)
class Sentence:
    """A token sequence in one language.

    sem carries the generating semantic ids for synthetic data; real data
    sets it to None. Training and encoding never read sem.
    """

    tokens: tuple[int, ...]
    lang: int
    sem: tuple[int, ...] | None = None

    def __post_init__(self):
        if len(self.tokens) == 0:
            raise EmptySentenceError("a sentence needs at least one token")
        if self.sem is not None and len(self.sem) != len(self.tokens):
            raise VocabularyError(
                f"sentence has {len(self.tokens)} tokens but {len(self.sem)} semantic ids"
            )


@dataclass(frozen=True)
class SemanticLexicon:
    """Deterministic layout of the semantic id space.

    vocab_size   V, count of semantic ids per language
    n_languages  L, surface vocabulary is V*L tokens
    topic_pools  disjoint id ranges used by the topic generator
    generic_pool reserved filler ids outside every topic
    antonym      fixed-point-free involution on a designated id subset
    """

    vocab_size: int
    n_languages: int
    topic_pools: tuple[tuple[int, ...], ...]
    generic_pool: tuple[int, ...]
    antonym: dict[int, int]

    def __post_init__(self):
        if self.vocab_size < 4:
            raise LexiconError(f"vocab_size must be at least 4, got {self.vocab_size}")
        if self.n_languages < 1:
            raise LexiconError(f"need at least one language, got {self.n_languages}")
        seen: set[int] = set()
        for pool in self.topic_pools:
            for sid in pool:
                if not 0 <= sid < self.vocab_size:
                    raise LexiconError(f"topic id {sid} outside vocabulary")
                if sid in seen:
                    raise LexiconError(f"topic pools overlap at id {sid}")
                seen.add(sid)
        for sid in self.generic_pool:
            if not 0 <= sid < self.vocab_size:
                raise LexiconError(f"generic id {sid} outside vocabulary")
            if sid in seen:
                raise LexiconError(f"generic pool overlaps a topic at id {sid}")
        for a, b in self.antonym.items():
            if a == b:
                raise LexiconError(f"antonym map has fixed point at id {a}")
            if self.antonym.get(b) != a:
                raise LexiconError(f"antonym map is not an involution at id {a}")
            if not (0 <= a < self.vocab_size and 0 <= b < self.vocab_size):
                raise LexiconError(f"antonym pair ({a}, {b}) outside vocabulary")

    @classmethod
    def build(cls, vocab_size: int, n_languages: int, n_topics: int = 15) -> "SemanticLexicon":
        """Lay out pools over [0, V): topics first, generic fillers last.

        The antonym involution pairs consecutive ids (2i, 2i+1) below the
        generic pool, so almost every non-filler id has an antonym and a
        pair never crosses out of its topic pool when pool sizes are even.
        """
        if n_topics < 1:
            raise LexiconError(f"need at least one topic, got {n_topics}")
        n_generic = max(vocab_size // 10, 2)
        topic_span = vocab_size - n_generic
        pool_size = topic_span // n_topics
        if pool_size < 1:
            raise LexiconError(
                f"vocab_size {vocab_size} cannot host {n_topics} topics "
                f"plus {n_generic} generic ids"
            )
        pools = tuple(
            tuple(range(i * pool_size, (i + 1) * pool_size)) for i in range(n_topics)
        )
        generic = tuple(range(topic_span, vocab_size))
        antonym: dict[int, int] = {}
        for a in range(0, 2 * (topic_span // 2), 2):
            antonym[a] = a + 1
            antonym[a + 1] = a
        return cls(
            vocab_size=vocab_size,
            n_languages=n_languages,
            topic_pools=pools,
            generic_pool=generic,
            antonym=antonym,
        )

    @property
    def surface_size(self) -> int:
        return self.vocab_size * self.n_languages

    def topic_span(self) -> int:
        """Upper bound (exclusive) of the non-generic id range."""
        return self.vocab_size - len(self.generic_pool)


def render(lexicon: SemanticLexicon, sem_ids: Sequence[int], lang: int) -> Sentence:
    """Realize semantic ids as surface tokens in one language."""
    if not 0 <= lang < lexicon.n_languages:
        raise VocabularyError(
            f"language {lang} outside pool of {lexicon.n_languages} languages"
        )
    ids = tuple(int(s) for s in sem_ids)
    if len(ids) == 0:
        raise EmptySentenceError("cannot render an empty id sequence")
    for sid in ids:
        if not 0 <= sid < lexicon.vocab_size:
            raise VocabularyError(
                f"semantic id {sid} outside vocabulary of size {lexicon.vocab_size}"
            )
    v = lexicon.vocab_size
    return Sentence(tokens=tuple(lang * v + s for s in ids), lang=lang, sem=ids)


def derender(lexicon: SemanticLexicon, sentence: Sentence) -> tuple[int, ...]:
    """Recover semantic ids from surface tokens, validating the language."""
    v = lexicon.vocab_size
    out = []
    for tok in sentence.tokens:
        if not 0 <= tok < lexicon.surface_size:
            raise VocabularyError(
                f"token {tok} outside surface vocabulary of size {lexicon.surface_size}"
            )
        if tok // v != sentence.lang:
            raise VocabularyError(
                f"token {tok} decodes to language {tok // v}, "
                f"but the sentence claims language {sentence.lang}"
            )
        out.append(tok % v)
    return tuple(out)
