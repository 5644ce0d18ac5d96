"""Tests for JSON-lines corpus files and the corpus manifest."""

import pytest

from xlingual.corpus_io import (
    PairRecord,
    nli_to_records,
    parallel_to_records,
    read_corpus_manifest,
    read_pair_records,
    records_to_nli,
    records_to_parallel,
    records_to_sts,
    records_to_topics,
    sts_to_records,
    topics_to_records,
    validate_token_range,
    write_corpus_manifest,
    write_pair_records,
)
from xlingual.errors import DataFormatError, VocabularyError
from xlingual.generators import NliTriple, StsPair
from xlingual.lexicon import Sentence


def _sent(tokens, lang=0, sem=None):
    return Sentence(tokens=tuple(tokens), lang=lang, sem=sem)


SAMPLE = [
    PairRecord(a=_sent([1, 2], 0, (1, 2)), b=_sent([61, 62], 1, (1, 2))),
    PairRecord(a=_sent([3], 1), b=_sent([4, 5], 1), neg=_sent([6], 1)),
    PairRecord(a=_sent([7], 0), b=_sent([8], 1), score=2.5),
    PairRecord(a=_sent([9, 10], 2, (9, 10)), label=1),
]


def test_write_read_roundtrip(tmp_path):
    path = tmp_path / "pairs.jsonl"
    assert write_pair_records(path, SAMPLE) == 4
    assert read_pair_records(path) == SAMPLE


def test_writes_are_canonical_bytes(tmp_path):
    p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    write_pair_records(p1, SAMPLE)
    write_pair_records(p2, SAMPLE)
    assert p1.read_bytes() == p2.read_bytes()
    first = p1.read_text().splitlines()[0]
    assert first == (
        '{"a":{"lang":0,"sem":[1,2],"tokens":[1,2]},'
        '"b":{"lang":1,"sem":[1,2],"tokens":[61,62]}}'
    )


def test_read_skips_blank_lines(tmp_path):
    path = tmp_path / "pairs.jsonl"
    body = '{"a":{"tokens":[1],"lang":0,"sem":null}}\n\n' \
           '{"a":{"tokens":[2],"lang":1,"sem":null}}\n'
    path.write_text(body)
    records = read_pair_records(path)
    assert len(records) == 2
    assert records[1].a.tokens == (2,)


def test_read_rejects_malformed_lines(tmp_path):
    path = tmp_path / "bad.jsonl"

    path.write_text("not json\n")
    with pytest.raises(DataFormatError):
        read_pair_records(path)

    path.write_text('{"b":{"tokens":[1],"lang":0}}\n')
    with pytest.raises(DataFormatError):
        read_pair_records(path)

    path.write_text('{"a":{"tokens":[1],"lang":0}}\n{"a":{"tokens":["x"],"lang":0}}\n')
    with pytest.raises(DataFormatError, match=":2"):
        read_pair_records(path)

    path.write_text('{"a":{"tokens":[1],"lang":-1}}\n')
    with pytest.raises(DataFormatError):
        read_pair_records(path)

    path.write_text('{"a":{"tokens":[1],"lang":0},"score":"high"}\n')
    with pytest.raises(DataFormatError):
        read_pair_records(path)

    path.write_text('{"a":{"tokens":[1],"lang":0},"label":1.5}\n')
    with pytest.raises(DataFormatError):
        read_pair_records(path)

    path.write_text('{"a":{"tokens":[1],"lang":0,"sem":[1,2]}}\n')
    with pytest.raises(VocabularyError):
        read_pair_records(path)


def test_generator_adapters_roundtrip():
    parallel = [(_sent([1], 0), _sent([61], 1))]
    assert records_to_parallel(parallel_to_records(parallel)) == parallel

    triples = [NliTriple(premise=_sent([1, 2]), entailment=_sent([1]),
                         contradiction=_sent([1, 3]))]
    assert records_to_nli(nli_to_records(triples)) == triples

    sts = [StsPair(a=_sent([1]), b=_sent([2]), score=1.25)]
    assert records_to_sts(sts_to_records(sts)) == sts

    topics = [(_sent([4, 5]), 2)]
    assert records_to_topics(topics_to_records(topics)) == topics


def test_adapters_reject_missing_fields():
    bare = [PairRecord(a=_sent([1]))]
    with pytest.raises(DataFormatError):
        records_to_parallel(bare)
    with pytest.raises(DataFormatError):
        records_to_nli([PairRecord(a=_sent([1]), b=_sent([2]))])
    with pytest.raises(DataFormatError):
        records_to_sts([PairRecord(a=_sent([1]), b=_sent([2]))])
    with pytest.raises(DataFormatError):
        records_to_topics(bare)


def test_validate_token_range():
    ok = [PairRecord(a=_sent([0, 119]), b=_sent([50]))]
    validate_token_range(ok, surface_size=120)
    bad = [PairRecord(a=_sent([0]), neg=_sent([120]))]
    with pytest.raises(VocabularyError, match="record 0"):
        validate_token_range(bad, surface_size=120)


def test_manifest_roundtrip(tmp_path):
    path = tmp_path / "corpus_manifest.json"
    write_corpus_manifest(
        path,
        config={"vocab_size": 60},
        seed=11,
        counts={"parallel": 40},
        files={"parallel": "parallel.jsonl"},
    )
    manifest = read_corpus_manifest(path)
    assert manifest["kind"] == "corpus_manifest"
    assert manifest["seed"] == 11
    assert manifest["counts"] == {"parallel": 40}


def test_manifest_rejects_wrong_kind(tmp_path):
    path = tmp_path / "m.json"
    path.write_text('{"kind": "something_else"}\n')
    with pytest.raises(DataFormatError):
        read_corpus_manifest(path)
    path.write_text("{broken\n")
    with pytest.raises(DataFormatError):
        read_corpus_manifest(path)
