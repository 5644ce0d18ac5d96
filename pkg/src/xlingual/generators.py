"""Deterministic synthetic corpus generators.

Every generator takes an explicit seed and draws records sequentially from
one numpy Generator, so a given (lexicon, arguments, seed) triple always
produces the same corpus and the first k records of an n-record corpus
equal the k-record corpus drawn with the same seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ConfigError, ContractError, LexiconError, VocabularyError
from .lexicon import SemanticLexicon, Sentence, render

_MAX_PREMISE_ATTEMPTS = 100


class NliTriple(NamedTuple):
    premise: Sentence
    entailment: Sentence
    contradiction: Sentence


class StsPair(NamedTuple):
    a: Sentence
    b: Sentence
    score: float


def _check_lengths(lexicon: SemanticLexicon, min_len: int, max_len: int) -> None:
    if not 1 <= min_len <= max_len:
        raise ConfigError(f"invalid sentence length range [{min_len}, {max_len}]")
    if max_len > lexicon.topic_span():
        raise LexiconError(
            f"max sentence length {max_len} exceeds the {lexicon.topic_span()} "
            f"non-generic ids available for sampling without replacement"
        )


def _check_count(n: int) -> None:
    if n < 0:
        raise ContractError(f"record count must be non-negative, got {n}")


def _check_lang(lexicon: SemanticLexicon, lang: int) -> None:
    if not 0 <= lang < lexicon.n_languages:
        raise VocabularyError(
            f"language {lang} outside pool of {lexicon.n_languages} languages"
        )


def _draw_ids(rng: np.random.Generator, lexicon: SemanticLexicon,
              min_len: int, max_len: int) -> np.ndarray:
    """Distinct non-generic semantic ids of a random length."""
    length = int(rng.integers(min_len, max_len + 1))
    return rng.choice(lexicon.topic_span(), size=length, replace=False)


def gen_parallel(
    lexicon: SemanticLexicon,
    n: int,
    lang_a: int,
    lang_b: int,
    seed: int,
    *,
    min_len: int = 2,
    max_len: int = 5,
) -> list[tuple[Sentence, Sentence]]:
    """Translation pairs: the same semantic ids rendered in two languages."""
    _check_count(n)
    _check_lang(lexicon, lang_a)
    _check_lang(lexicon, lang_b)
    if lang_a == lang_b:
        raise ContractError(f"parallel pair needs two distinct languages, got {lang_a} twice")
    _check_lengths(lexicon, min_len, max_len)
    rng = np.random.default_rng(seed)
    pairs = []
    for _ in range(n):
        ids = _draw_ids(rng, lexicon, min_len, max_len)
        pairs.append((render(lexicon, ids, lang_a), render(lexicon, ids, lang_b)))
    return pairs


def gen_nli(
    lexicon: SemanticLexicon,
    n: int,
    language_pool: Sequence[int],
    cross_lingual: bool,
    seed: int,
    *,
    min_len: int = 2,
    max_len: int = 5,
) -> list[NliTriple]:
    """Premise / entailment / contradiction triples.

    The entailment keeps a nonempty subset of the premise's ids plus up to
    two generic fillers; the contradiction replaces one premise id with its
    antonym. With cross_lingual the three languages are sampled uniformly
    and independently from the pool, otherwise the pool must name a single
    language shared by all three sentences.
    """
    _check_count(n)
    pool = [int(l) for l in language_pool]
    if not pool:
        raise ConfigError("language pool must not be empty")
    for lang in pool:
        _check_lang(lexicon, lang)
    if not cross_lingual and len(pool) != 1:
        raise ContractError(
            f"monolingual generation needs a single-language pool, got {len(pool)}"
        )
    _check_lengths(lexicon, min_len, max_len)
    generic = np.asarray(lexicon.generic_pool)
    rng = np.random.default_rng(seed)
    triples = []
    for _ in range(n):
        for attempt in range(_MAX_PREMISE_ATTEMPTS):
            ids = _draw_ids(rng, lexicon, min_len, max_len)
            id_set = set(int(s) for s in ids)
            swappable = [
                s for s in id_set
                if s in lexicon.antonym and lexicon.antonym[s] not in id_set
            ]
            if swappable:
                break
        else:
            raise LexiconError(
                "could not draw a premise with an antonym-eligible id; "
                "the antonym subset is too small for this length range"
            )

        keep = int(rng.integers(1, len(ids) + 1))
        subset = rng.choice(ids, size=keep, replace=False)
        n_fill = int(rng.integers(0, min(2, len(generic)) + 1))
        if n_fill:
            fillers = rng.choice(generic, size=n_fill, replace=False)
            ent_ids = np.concatenate([subset, fillers])
        else:
            ent_ids = subset
        ent_ids = rng.permutation(ent_ids)

        victim = int(sorted(swappable)[int(rng.integers(0, len(swappable)))])
        con_ids = [lexicon.antonym[s] if s == victim else s for s in ids.tolist()]

        if cross_lingual:
            langs = [pool[int(i)] for i in rng.integers(0, len(pool), size=3)]
        else:
            langs = [pool[0]] * 3
        triples.append(NliTriple(
            premise=render(lexicon, ids, langs[0]),
            entailment=render(lexicon, ent_ids, langs[1]),
            contradiction=render(lexicon, con_ids, langs[2]),
        ))
    return triples


_STS_LEVELS = (0.0, 0.25, 0.5, 0.75, 1.0)


def gen_sts(
    lexicon: SemanticLexicon,
    n: int,
    lang_a: int,
    lang_b: int,
    seed: int,
    *,
    min_len: int = 2,
    max_len: int = 5,
) -> list[StsPair]:
    """Scored pairs whose gold score is 5 times the Jaccard overlap of the
    two semantic id sets. Overlap levels cycle through fixed strata so the
    gold ranking is never degenerate; the score is recomputed from the
    realized sets, so identical sets score exactly 5.0.
    """
    _check_count(n)
    _check_lang(lexicon, lang_a)
    _check_lang(lexicon, lang_b)
    _check_lengths(lexicon, min_len, max_len)
    lo = max(2, min_len)
    rng = np.random.default_rng(seed)
    pairs = []
    for i in range(n):
        level = _STS_LEVELS[i % len(_STS_LEVELS)]
        union_size = int(rng.integers(lo, max_len + 1))
        shared = int(round(level * union_size))
        rest = union_size - shared
        if shared == 0 and rest < 2:
            rest = 2
            union_size = 2
        only_a = (rest + 1) // 2
        only_b = rest - only_a
        ids = rng.choice(lexicon.topic_span(), size=shared + rest, replace=False)
        shared_ids = ids[:shared]
        a_ids = np.concatenate([shared_ids, ids[shared:shared + only_a]])
        b_ids = np.concatenate([shared_ids, ids[shared + only_a:]])
        a_ids = rng.permutation(a_ids)
        b_ids = rng.permutation(b_ids)
        set_a, set_b = set(a_ids.tolist()), set(b_ids.tolist())
        score = 5.0 * len(set_a & set_b) / len(set_a | set_b)
        pairs.append(StsPair(
            a=render(lexicon, a_ids, lang_a),
            b=render(lexicon, b_ids, lang_b),
            score=score,
        ))
    return pairs


def gen_topics(
    lexicon: SemanticLexicon,
    n: int,
    language: int,
    n_topics: int,
    seed: int,
    *,
    min_len: int = 2,
    max_len: int = 5,
) -> list[tuple[Sentence, int]]:
    """Labeled sentences, at least 80 percent of each drawn from one topic
    pool. Labels are assigned round-robin, so class counts differ by at
    most one.
    """
    _check_count(n)
    _check_lang(lexicon, language)
    _check_lengths(lexicon, min_len, max_len)
    if not 1 <= n_topics <= len(lexicon.topic_pools):
        raise ConfigError(
            f"requested {n_topics} topics but the lexicon defines "
            f"{len(lexicon.topic_pools)} pools"
        )
    pools = [np.asarray(p) for p in lexicon.topic_pools[:n_topics]]
    span = lexicon.topic_span()
    complements = [np.setdiff1d(np.arange(span), p) for p in pools]
    for label, p in enumerate(pools):
        if len(p) < max_len:
            raise LexiconError(
                f"topic pool {label} has {len(p)} ids, fewer than max length {max_len}"
            )
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        label = i % n_topics
        length = int(rng.integers(min_len, max_len + 1))
        n_topic = int(np.ceil(0.8 * length))
        topic_ids = rng.choice(pools[label], size=n_topic, replace=False)
        if length > n_topic:
            other = rng.choice(complements[label], size=length - n_topic, replace=False)
            ids = np.concatenate([topic_ids, other])
        else:
            ids = topic_ids
        ids = rng.permutation(ids)
        out.append((render(lexicon, ids, language), label))
    return out


@dataclass(frozen=True)
class PretrainInit:
    """Embedding initialization modeling a multilingual pretrained space.

    Each surface token (language l, semantic id s) starts at

        E_sem[s] + offset_scale * E_lang[l] + gauss(noise_scale)

    with E_sem and E_lang i.i.d. standard gaussian scaled by 1/sqrt(dim).
    Large offset_scale clusters the space by language; offset_scale 0 and
    noise_scale 0 make translations of a sentence exactly identical.
    """

    vocab_size: int
    n_languages: int
    dim: int
    offset_scale: float
    noise_scale: float
    seed: int

    def __post_init__(self):
        if self.vocab_size < 1 or self.n_languages < 1 or self.dim < 1:
            raise ConfigError(
                f"invalid embedding geometry: V={self.vocab_size}, "
                f"L={self.n_languages}, d={self.dim}"
            )
        if self.offset_scale < 0 or self.noise_scale < 0:
            raise ConfigError("offset_scale and noise_scale must be non-negative")

    def table(self) -> np.ndarray:
        """Build the full [(L*V), dim] token table. Deterministic in seed."""
        rng = np.random.default_rng(self.seed)
        root = 1.0 / np.sqrt(self.dim)
        e_sem = rng.standard_normal((self.vocab_size, self.dim)) * root
        e_lang = rng.standard_normal((self.n_languages, self.dim)) * root
        noise = rng.standard_normal((self.n_languages * self.vocab_size, self.dim))
        table = np.empty((self.n_languages * self.vocab_size, self.dim))
        for lang in range(self.n_languages):
            block = slice(lang * self.vocab_size, (lang + 1) * self.vocab_size)
            table[block] = e_sem + self.offset_scale * e_lang[lang]
        table += self.noise_scale * noise
        return table
