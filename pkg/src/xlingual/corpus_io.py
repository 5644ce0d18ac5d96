"""Corpus serialization: JSON-lines records and the corpus manifest.

Sentence record: {"tokens": [int], "lang": int, "sem": [int] or null}
Pair record:     {"a": Sentence, "b": Sentence} plus optional "neg"
                 (hard negative), "score" (gold similarity), "label"
                 (class id). Topic corpora store a single labeled
                 sentence, so their records carry "a" and "label" only.

Writers emit canonical JSON (sorted keys, no whitespace) so identical
corpora are byte-identical files. Readers validate structure and raise
package errors instead of letting json/KeyError escape.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DataFormatError, VocabularyError
from .generators import NliTriple, StsPair
from .lexicon import Sentence


@dataclass(frozen=True)
class PairRecord:
    """One parsed corpus line; absent optional fields are None."""

    a: Sentence
    b: Sentence | None = None
    neg: Sentence | None = None
    score: float | None = None
    label: int | None = None


def sentence_to_obj(s: Sentence) -> dict:
    return {
        "tokens": list(s.tokens),
        "lang": s.lang,
        "sem": list(s.sem) if s.sem is not None else None,
    }


def sentence_from_obj(obj, where: str) -> Sentence:
    if not isinstance(obj, dict):
        raise DataFormatError(f"{where}: sentence must be an object, got {type(obj).__name__}")
    try:
        tokens = obj["tokens"]
        lang = obj["lang"]
    except KeyError as exc:
        raise DataFormatError(f"{where}: sentence missing key {exc}") from None
    if not isinstance(tokens, list) or not all(isinstance(t, int) for t in tokens):
        raise DataFormatError(f"{where}: tokens must be a list of integers")
    if not isinstance(lang, int) or lang < 0:
        raise DataFormatError(f"{where}: lang must be a non-negative integer")
    sem = obj.get("sem")
    if sem is not None:
        if not isinstance(sem, list) or not all(isinstance(s, int) for s in sem):
            raise DataFormatError(f"{where}: sem must be null or a list of integers")
        sem = tuple(sem)
    return Sentence(tokens=tuple(tokens), lang=lang, sem=sem)


def _dump_line(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def write_pair_records(path: str | Path, records: Iterable[PairRecord]) -> int:
    """Write records as JSON lines; returns the number written."""
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            obj: dict = {"a": sentence_to_obj(rec.a)}
            if rec.b is not None:
                obj["b"] = sentence_to_obj(rec.b)
            if rec.neg is not None:
                obj["neg"] = sentence_to_obj(rec.neg)
            if rec.score is not None:
                obj["score"] = float(rec.score)
            if rec.label is not None:
                obj["label"] = int(rec.label)
            fh.write(_dump_line(obj) + "\n")
            count += 1
    return count


def read_pair_records(path: str | Path) -> list[PairRecord]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            where = f"{path}:{lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataFormatError(f"{where}: invalid JSON ({exc.msg})") from None
            if not isinstance(obj, dict) or "a" not in obj:
                raise DataFormatError(f"{where}: record must be an object with key 'a'")
            score = obj.get("score")
            if score is not None and not isinstance(score, (int, float)):
                raise DataFormatError(f"{where}: score must be a number")
            label = obj.get("label")
            if label is not None and not isinstance(label, int):
                raise DataFormatError(f"{where}: label must be an integer")
            records.append(PairRecord(
                a=sentence_from_obj(obj["a"], where),
                b=sentence_from_obj(obj["b"], where) if obj.get("b") is not None else None,
                neg=sentence_from_obj(obj["neg"], where) if obj.get("neg") is not None else None,
                score=float(score) if score is not None else None,
                label=label,
            ))
    return records


# convenience adapters between generator output and records


def parallel_to_records(pairs: Sequence[tuple[Sentence, Sentence]]) -> list[PairRecord]:
    return [PairRecord(a=a, b=b) for a, b in pairs]


def nli_to_records(triples: Sequence[NliTriple]) -> list[PairRecord]:
    return [PairRecord(a=t.premise, b=t.entailment, neg=t.contradiction) for t in triples]


def sts_to_records(pairs: Sequence[StsPair]) -> list[PairRecord]:
    return [PairRecord(a=p.a, b=p.b, score=p.score) for p in pairs]


def topics_to_records(items: Sequence[tuple[Sentence, int]]) -> list[PairRecord]:
    return [PairRecord(a=s, label=lab) for s, lab in items]


def records_to_parallel(records: Sequence[PairRecord], path: str = "") -> list[tuple[Sentence, Sentence]]:
    out = []
    for i, rec in enumerate(records):
        if rec.b is None:
            raise DataFormatError(f"{path or 'corpus'} record {i}: parallel pair needs 'b'")
        out.append((rec.a, rec.b))
    return out


def records_to_nli(records: Sequence[PairRecord], path: str = "") -> list[NliTriple]:
    out = []
    for i, rec in enumerate(records):
        if rec.b is None or rec.neg is None:
            raise DataFormatError(f"{path or 'corpus'} record {i}: nli triple needs 'b' and 'neg'")
        out.append(NliTriple(premise=rec.a, entailment=rec.b, contradiction=rec.neg))
    return out


def records_to_sts(records: Sequence[PairRecord], path: str = "") -> list[StsPair]:
    out = []
    for i, rec in enumerate(records):
        if rec.b is None or rec.score is None:
            raise DataFormatError(f"{path or 'corpus'} record {i}: sts pair needs 'b' and 'score'")
        out.append(StsPair(a=rec.a, b=rec.b, score=rec.score))
    return out


def records_to_topics(records: Sequence[PairRecord], path: str = "") -> list[tuple[Sentence, int]]:
    out = []
    for i, rec in enumerate(records):
        if rec.label is None:
            raise DataFormatError(f"{path or 'corpus'} record {i}: topic sentence needs 'label'")
        out.append((rec.a, rec.label))
    return out


def validate_token_range(records: Sequence[PairRecord], surface_size: int, path: str = "") -> None:
    """Reject corpora whose tokens fall outside the configured vocabulary."""
    for i, rec in enumerate(records):
        for s in (rec.a, rec.b, rec.neg):
            if s is None:
                continue
            for tok in s.tokens:
                if not 0 <= tok < surface_size:
                    raise VocabularyError(
                        f"{path or 'corpus'} record {i}: token {tok} outside "
                        f"surface vocabulary of size {surface_size}"
                    )


def write_corpus_manifest(path: str | Path, *, config: dict, seed: int,
                          counts: dict[str, int], files: dict[str, str]) -> None:
    manifest = {
        "kind": "corpus_manifest",
        "config": config,
        "seed": seed,
        "counts": counts,
        "files": files,
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(manifest, sort_keys=True, indent=2) + "\n")


def read_corpus_manifest(path: str | Path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            manifest = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{path}: invalid manifest JSON ({exc.msg})") from None
    if not isinstance(manifest, dict) or manifest.get("kind") != "corpus_manifest":
        raise DataFormatError(f"{path}: not a corpus manifest")
    return manifest
