"""Experiment orchestration shared by the command-line tools.

Every function here is importable, so tests and notebooks can drive a
whole pipeline without a subprocess. All random streams derive from a
config seed plus a fixed per-purpose tag, which is what makes two runs
of the same config byte-identical on disk: the corpus files, the
checkpoint, and the metric reports carry no timestamps or machine state.
Wall-clock time lives only in run manifests.
"""

from __future__ import annotations

import dataclasses
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .checkpoint import load_checkpoint, save_checkpoint
from .config import ExperimentConfig
from .corpus_io import (
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
from .embeddings import EmbeddingSet, embed_sentences
from .encoder import EncoderParams
from .errors import (
    ConfigError,
    ContractError,
    DataFormatError,
    ShapeError,
    UndefinedCorrelationError,
)
from .generators import PretrainInit, gen_nli, gen_parallel, gen_sts, gen_topics
from .lexicon import SemanticLexicon
from .metrics import (
    evaluate_sts,
    kmeans_purity,
    language_probe,
    mine_bitext,
    pca_project,
    retrieval_accuracy,
    spearman_rho,
)
from .pairs import normalize_mix, pairs_from_nli, pairs_from_parallel, pairs_unsupervised
from .reports import EvalReport, write_report
from .training import TrainResult, train, write_loss_log

# Per-purpose stream tags. Two different corpora under one seed must never
# share a random stream, so each derived stream appends a distinct tag.
_TAG_PARALLEL = 0x10
_TAG_NLI = 0x11
_TAG_XNLI = 0x12
_TAG_STS = 0x13
_TAG_TOPICS = 0x14
_TAG_EVAL_PAIR = 0x15
_TAG_TABLE = 0x1E
_TAG_PROBE_SPLIT = 0x33

MANIFEST_NAME = "run_manifest.json"
CORPUS_MANIFEST_NAME = "corpus_manifest.json"


def build_lexicon(config: ExperimentConfig) -> SemanticLexicon:
    c = config.corpus
    return SemanticLexicon.build(c.vocab_size, c.n_languages, n_topics=c.n_topics)


def pretrain_table(config: ExperimentConfig) -> np.ndarray:
    """The shared token-embedding initialization for this config."""
    c = config.corpus
    init = PretrainInit(
        vocab_size=c.vocab_size,
        n_languages=c.n_languages,
        dim=c.embed_dim,
        offset_scale=c.offset_scale,
        noise_scale=c.noise_scale,
        seed=(c.seed, _TAG_TABLE),
    )
    return init.table()


def eval_pair_list(config: ExperimentConfig) -> list[tuple[int, int]]:
    pairs = config.eval.default_retrieval_pairs(config.corpus.n_languages)
    return [(int(a), int(b)) for a, b in pairs]


def _eval_file_key(a: int, b: int) -> str:
    return f"eval_{a}_{b}"


def write_run_manifest(path: str | Path, *, command: str, config_hash: str,
                       wall_clock_seconds: float, artifacts: list[str],
                       metrics: dict, extra: dict | None = None) -> dict:
    manifest = {
        "kind": "run_manifest",
        "command": command,
        "version": __version__,
        "config_hash": config_hash,
        "wall_clock_seconds": float(wall_clock_seconds),
        "artifacts": sorted(artifacts),
        "metrics": metrics,
    }
    if extra:
        manifest.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return manifest


def read_run_manifest(path: str | Path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            manifest = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{path}: invalid manifest JSON ({exc.msg})") from None
    if not isinstance(manifest, dict) or manifest.get("kind") != "run_manifest":
        raise DataFormatError(f"{path}: not a run manifest")
    return manifest


# ---------------------------------------------------------------------------
# corpus generation


def generate_corpus(config: ExperimentConfig, corpus_dir: str | Path) -> dict:
    """Write every corpus the config requests and return the manifest."""
    t0 = time.perf_counter()
    corpus_dir = Path(corpus_dir)
    corpus_dir.mkdir(parents=True, exist_ok=True)
    c = config.corpus
    lexicon = build_lexicon(config)
    lens = {"min_len": c.min_len, "max_len": c.max_len}
    counts: dict[str, int] = {}
    files: dict[str, str] = {}

    def emit(name: str, filename: str, records) -> None:
        counts[name] = write_pair_records(corpus_dir / filename, records)
        files[name] = filename

    emit("parallel", "parallel.jsonl", parallel_to_records(gen_parallel(
        lexicon, c.n_parallel, c.parallel_langs[0], c.parallel_langs[1],
        (c.seed, _TAG_PARALLEL), **lens)))
    emit("nli", "nli.jsonl", nli_to_records(gen_nli(
        lexicon, c.n_nli, [c.nli_lang], cross_lingual=False,
        seed=(c.seed, _TAG_NLI), **lens)))
    emit("xnli", "xnli.jsonl", nli_to_records(gen_nli(
        lexicon, c.n_xnli, c.xnli_pool, cross_lingual=True,
        seed=(c.seed, _TAG_XNLI), **lens)))
    emit("sts", "sts.jsonl", sts_to_records(gen_sts(
        lexicon, c.n_sts, c.sts_langs[0], c.sts_langs[1],
        (c.seed, _TAG_STS), **lens)))
    emit("topics", "topics.jsonl", topics_to_records(gen_topics(
        lexicon, c.n_topic_sentences, c.topics_lang, c.n_topics,
        (c.seed, _TAG_TOPICS), **lens)))
    for a, b in eval_pair_list(config):
        emit(_eval_file_key(a, b), f"eval_parallel_{a}_{b}.jsonl",
             parallel_to_records(gen_parallel(
                 lexicon, c.eval_pairs, a, b, (c.seed, _TAG_EVAL_PAIR, a, b), **lens)))

    write_corpus_manifest(
        corpus_dir / CORPUS_MANIFEST_NAME,
        config=dataclasses.asdict(c),
        seed=c.seed,
        counts=counts,
        files=files,
    )
    write_run_manifest(
        corpus_dir / MANIFEST_NAME,
        command="gen",
        config_hash=config.config_hash(),
        wall_clock_seconds=time.perf_counter() - t0,
        artifacts=[CORPUS_MANIFEST_NAME, *files.values()],
        metrics={},
        extra={"counts": counts},
    )
    return {"counts": counts, "files": files, "dir": str(corpus_dir)}


def _corpus_manifest(config: ExperimentConfig, corpus_dir: str | Path) -> dict:
    manifest = read_corpus_manifest(Path(corpus_dir) / CORPUS_MANIFEST_NAME)
    if manifest.get("config") != dataclasses.asdict(config.corpus):
        raise DataFormatError(
            f"corpus at {corpus_dir} was generated under a different corpus "
            f"configuration; rerun gen or fix the config"
        )
    return manifest


def _corpus_file(manifest: dict, corpus_dir: Path, key: str) -> Path:
    name = manifest.get("files", {}).get(key)
    if name is None:
        raise DataFormatError(
            f"corpus manifest lacks the {key!r} corpus; regenerate with a "
            f"config that requests it"
        )
    return corpus_dir / name


def load_pair_data(config: ExperimentConfig, corpus_dir: str | Path) -> dict:
    """Read the corpora backing every strategy in the training mix."""
    corpus_dir = Path(corpus_dir)
    manifest = _corpus_manifest(config, corpus_dir)
    surface = config.corpus.n_languages * config.corpus.vocab_size
    data: dict[str, list] = {}
    for strategy in normalize_mix(config.train.strategy_mix):
        if strategy in ("parallel", "unsupervised"):
            path = _corpus_file(manifest, corpus_dir, "parallel")
        else:
            path = _corpus_file(manifest, corpus_dir, strategy)
        records = read_pair_records(path)
        validate_token_range(records, surface, str(path))
        if strategy == "parallel":
            data[strategy] = pairs_from_parallel(records_to_parallel(records, str(path)))
        elif strategy == "unsupervised":
            sides = [a for a, _ in records_to_parallel(records, str(path))]
            data[strategy] = pairs_unsupervised(sides)
        else:
            data[strategy] = pairs_from_nli(records_to_nli(records, str(path)), strategy)
    return data


# ---------------------------------------------------------------------------
# training


def run_training(config: ExperimentConfig, corpus_dir: str | Path,
                 out_dir: str | Path) -> TrainResult:
    """Train per the config's train section and write all run artifacts."""
    t0 = time.perf_counter()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    pair_data = load_pair_data(config, corpus_dir)
    table = pretrain_table(config)
    result = train(config.train, pair_data, table, checkpoint_dir=out_dir)
    save_checkpoint(result.params, out_dir / "checkpoint.ckpt")
    write_loss_log(out_dir / "loss_log.csv", result.loss_log)
    artifacts = ["checkpoint.ckpt", "loss_log.csv"]
    artifacts += [f"checkpoint_epoch{e}.ckpt" for e in range(1, result.epochs_completed + 1)]
    final_loss = result.loss_log[-1][1] if result.loss_log else None
    write_run_manifest(
        out_dir / MANIFEST_NAME,
        command="train",
        config_hash=config.config_hash(),
        wall_clock_seconds=time.perf_counter() - t0,
        artifacts=artifacts,
        metrics={"final_loss": final_loss, "steps": result.steps},
    )
    return result


# ---------------------------------------------------------------------------
# evaluation


def _validate_eval_feasibility(config: ExperimentConfig) -> None:
    ev = config.eval
    pairs = eval_pair_list(config)
    needs_pairs = {"retrieval", "mining", "probe"} & set(ev.evaluators)
    if needs_pairs and not pairs:
        raise ConfigError(
            f"evaluators {sorted(needs_pairs)} need retrieval pairs but the "
            f"config defines none"
        )
    if "retrieval" in ev.evaluators and config.corpus.eval_pairs < 2:
        raise ConfigError(
            f"retrieval needs at least 2 eval pairs, corpus provides "
            f"{config.corpus.eval_pairs}"
        )
    if "mining" in ev.evaluators:
        need = 2 * ev.mining_pool - ev.mining_overlap
        if config.corpus.eval_pairs < need:
            raise ConfigError(
                f"mining pools need eval_pairs >= 2*mining_pool - mining_overlap "
                f"= {need}, corpus provides {config.corpus.eval_pairs}"
            )


def _check_params_match(params: EncoderParams, config: ExperimentConfig) -> None:
    """Refuse to evaluate a checkpoint whose geometry contradicts the config."""
    surface = config.corpus.n_languages * config.corpus.vocab_size
    if params.vocab_rows != surface:
        raise ShapeError(
            f"checkpoint embeds {params.vocab_rows} surface tokens but the "
            f"config defines {surface}; wrong checkpoint for this config"
        )
    emb_dim = params.embedding.value.shape[1]
    if emb_dim != config.corpus.embed_dim:
        raise ShapeError(
            f"checkpoint embedding dim {emb_dim} does not match the config's "
            f"embed_dim {config.corpus.embed_dim}"
        )
    if params.out_dim != config.train.output_dim:
        raise ShapeError(
            f"checkpoint output dim {params.out_dim} does not match the "
            f"config's output_dim {config.train.output_dim}"
        )


def _load_eval_sides(params: EncoderParams, manifest: dict, corpus_dir: Path,
                     surface: int, pairs: list[tuple[int, int]]) -> dict:
    """Embed both sides of every held-out parallel file once."""
    sides = {}
    for a, b in pairs:
        path = _corpus_file(manifest, corpus_dir, _eval_file_key(a, b))
        records = read_pair_records(path)
        validate_token_range(records, surface, str(path))
        sent_pairs = records_to_parallel(records, str(path))
        src = [p[0] for p in sent_pairs]
        tgt = [p[1] for p in sent_pairs]
        sides[(a, b)] = (
            EmbeddingSet.from_vectors(embed_sentences(params, src),
                                      lang=[s.lang for s in src]),
            EmbeddingSet.from_vectors(embed_sentences(params, tgt),
                                      lang=[s.lang for s in tgt]),
        )
    return sides


def _probe_split(sides: dict, fraction: float, seed: int) -> tuple[EmbeddingSet, EmbeddingSet]:
    """Per-language stratified split over all held-out eval sentences."""
    vectors = np.concatenate(
        [s.vectors for pair in sides.values() for s in pair], axis=0)
    langs = np.concatenate(
        [s.lang for pair in sides.values() for s in pair], axis=0)
    train_idx: list[np.ndarray] = []
    test_idx: list[np.ndarray] = []
    for lang in np.unique(langs):
        idx = np.flatnonzero(langs == lang)
        if idx.size < 2:
            raise ContractError(
                f"language {int(lang)} has {idx.size} held-out sentences; the "
                f"probe split needs at least 2 per language"
            )
        order = np.random.default_rng(
            (seed, _TAG_PROBE_SPLIT, int(lang))).permutation(idx.size)
        n_train = int(round(fraction * idx.size))
        n_train = max(1, min(idx.size - 1, n_train))
        train_idx.append(idx[order[:n_train]])
        test_idx.append(idx[order[n_train:]])
    tr = np.concatenate(train_idx)
    te = np.concatenate(test_idx)
    return (EmbeddingSet(vectors=vectors[tr], lang=langs[tr]),
            EmbeddingSet(vectors=vectors[te], lang=langs[te]))


def run_eval(config: ExperimentConfig, corpus_dir: str | Path, out_dir: str | Path,
             *, checkpoint: str | Path | None = None,
             params: EncoderParams | None = None) -> dict:
    """Run the configured evaluators and write one JSON report each."""
    t0 = time.perf_counter()
    _validate_eval_feasibility(config)
    if params is None:
        if checkpoint is None:
            raise ContractError("run_eval needs a checkpoint path or explicit params")
        params = load_checkpoint(checkpoint)
    corpus_dir = Path(corpus_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = _corpus_manifest(config, corpus_dir)
    surface = config.corpus.n_languages * config.corpus.vocab_size
    _check_params_match(params, config)

    cfg_hash = config.config_hash()
    eseed = config.eval.seed
    pairs = eval_pair_list(config)
    needs_sides = {"retrieval", "mining", "probe"} & set(config.eval.evaluators)
    sides = (_load_eval_sides(params, manifest, corpus_dir, surface, pairs)
             if needs_sides else {})

    reports: dict[str, dict] = {}

    def emit(name: str, report: EvalReport) -> None:
        reports[name] = write_report(out_dir / f"eval_{name}.json", report)

    for name in config.eval.evaluators:
        if name == "retrieval":
            breakdown = {}
            means = []
            n_pairs = 0
            for (a, b), (src, tgt) in sides.items():
                r = retrieval_accuracy(src, tgt)
                breakdown[f"{a}-{b}.src2tgt"] = r.src2tgt
                breakdown[f"{a}-{b}.tgt2src"] = r.tgt2src
                breakdown[f"{a}-{b}.mean"] = r.mean
                means.append(r.mean)
                n_pairs = r.n_pairs
            emit(name, EvalReport(
                metric="retrieval_accuracy",
                value=float(np.mean(means)),
                config_hash=cfg_hash,
                seed=eseed,
                breakdown=breakdown,
                details={"n_pairs_per_direction": n_pairs,
                         "language_pairs": [list(p) for p in pairs]},
            ))
        elif name == "mining":
            a, b = pairs[0]
            src_all, tgt_all = sides[(a, b)]
            pool = config.eval.mining_pool
            overlap = config.eval.mining_overlap
            if len(src_all) < 2 * pool - overlap:
                raise DataFormatError(
                    f"eval corpus for pair ({a}, {b}) holds {len(src_all)} "
                    f"pairs, mining needs {2 * pool - overlap}"
                )
            src = src_all.select(np.arange(pool))
            tgt_rows = np.concatenate([
                np.arange(overlap), np.arange(pool, 2 * pool - overlap)])
            tgt = tgt_all.select(tgt_rows)
            gold = [(i, i) for i in range(overlap)]
            r = mine_bitext(src, tgt, gold, n_thresholds=config.eval.n_thresholds)
            emit(name, EvalReport(
                metric="bitext_f1",
                value=r.f1,
                config_hash=cfg_hash,
                seed=eseed,
                breakdown={"precision": r.precision, "recall": r.recall},
                details={"threshold": r.threshold,
                         "n_candidates": r.n_candidates,
                         "no_candidates": r.no_candidates,
                         "language_pair": [a, b],
                         "pool": pool, "overlap": overlap},
            ))
        elif name == "sts":
            path = _corpus_file(manifest, corpus_dir, "sts")
            records = read_pair_records(path)
            validate_token_range(records, surface, str(path))
            sts_pairs = records_to_sts(records, str(path))
            rho, _ = evaluate_sts(params, sts_pairs)
            emit(name, EvalReport(
                metric="spearman_rho",
                value=rho,
                config_hash=cfg_hash,
                seed=eseed,
                details={"n_pairs": len(sts_pairs)},
            ))
        elif name == "clustering":
            path = _corpus_file(manifest, corpus_dir, "topics")
            records = read_pair_records(path)
            validate_token_range(records, surface, str(path))
            labeled = records_to_topics(records, str(path))
            sents = [s for s, _ in labeled]
            labels = [l for _, l in labeled]
            embs = EmbeddingSet.from_vectors(
                embed_sentences(params, sents),
                lang=[s.lang for s in sents], label=labels)
            r = kmeans_purity(embs, config.corpus.n_topics, eseed,
                              restarts=config.eval.kmeans_restarts)
            emit(name, EvalReport(
                metric="purity",
                value=r.purity,
                config_hash=cfg_hash,
                seed=eseed,
                breakdown={"macro_purity": r.macro_purity},
                details={"k": config.corpus.n_topics, "inertia": r.inertia,
                         "restarts": config.eval.kmeans_restarts},
            ))
        elif name == "probe":
            train_set, test_set = _probe_split(
                sides, config.eval.probe_train_fraction, eseed)
            r = language_probe(train_set, test_set)
            emit(name, EvalReport(
                metric="probe_accuracy",
                value=r.accuracy,
                config_hash=cfg_hash,
                seed=eseed,
                breakdown={f"lang_{k}": v for k, v in sorted(r.per_language.items())},
                details={"n_classes": r.n_classes,
                         "chance": 1.0 / r.n_classes,
                         "n_train": len(train_set), "n_test": len(test_set)},
            ))

    write_run_manifest(
        out_dir / MANIFEST_NAME,
        command="eval",
        config_hash=cfg_hash,
        wall_clock_seconds=time.perf_counter() - t0,
        artifacts=[f"eval_{n}.json" for n in reports],
        metrics={n: reports[n]["value"] for n in reports},
    )
    return reports


# ---------------------------------------------------------------------------
# projection export


def run_projection(config: ExperimentConfig, corpus_dir: str | Path,
                   out_dir: str | Path, *, checkpoint: str | Path | None = None,
                   params: EncoderParams | None = None) -> dict:
    """Project topic-corpus embeddings to low dimension and export a CSV."""
    t0 = time.perf_counter()
    if params is None:
        if checkpoint is None:
            raise ContractError("run_projection needs a checkpoint path or params")
        params = load_checkpoint(checkpoint)
    corpus_dir = Path(corpus_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = _corpus_manifest(config, corpus_dir)
    surface = config.corpus.n_languages * config.corpus.vocab_size
    _check_params_match(params, config)

    path = _corpus_file(manifest, corpus_dir, "topics")
    records = read_pair_records(path)
    validate_token_range(records, surface, str(path))
    labeled = records_to_topics(records, str(path))
    sents = [s for s, _ in labeled]
    labels = [l for _, l in labeled]
    embs = EmbeddingSet.from_vectors(embed_sentences(params, sents),
                                     lang=[s.lang for s in sents], label=labels)
    dim = config.eval.projection_dim
    coords, ratios = pca_project(embs.vectors, out_dim=dim)

    names = ["x", "y"] if dim == 2 else [f"c{i}" for i in range(dim)]
    csv_path = out_dir / "projection.csv"
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write(",".join(names + ["lang", "label"]) + "\n")
        for row, lang, label in zip(coords, embs.lang, embs.label):
            cells = [repr(float(v)) for v in row] + [str(int(lang)), str(int(label))]
            fh.write(",".join(cells) + "\n")

    report = EvalReport(
        metric="explained_variance_ratio",
        value=float(np.sum(ratios)),
        config_hash=config.config_hash(),
        seed=config.eval.seed,
        breakdown={f"component_{i}": float(r) for i, r in enumerate(ratios)},
        details={"out_dim": dim, "n_points": len(embs)},
    )
    emitted = write_report(out_dir / "projection.json", report)
    write_run_manifest(
        out_dir / MANIFEST_NAME,
        command="project",
        config_hash=config.config_hash(),
        wall_clock_seconds=time.perf_counter() - t0,
        artifacts=["projection.csv", "projection.json"],
        metrics={"explained_variance_ratio": emitted["value"]},
    )
    return emitted


# ---------------------------------------------------------------------------
# parallel-count ablation


def run_ablation(config: ExperimentConfig, counts: list[int], seeds: list[int],
                 out_dir: str | Path, *, max_steps: int | None = None) -> dict:
    """Train once per (count, seed) and tabulate held-out retrieval.

    Count zero trains on NLI alone; positive counts mix NLI with the first
    `count` parallel pairs at equal weight. Hard negatives are dropped in
    every run so the only moving part is the amount of parallel data.
    The parallel prefix property makes count k reuse the first k pairs of
    the count-max corpus, not a fresh sample.
    """
    t0 = time.perf_counter()
    if not counts:
        raise ConfigError("ablation needs at least one parallel-pair count")
    if any(c < 0 for c in counts) or sorted(counts) != list(counts) \
            or len(set(counts)) != len(counts):
        raise ConfigError(f"counts must be non-negative and ascending, got {counts}")
    if not seeds:
        raise ConfigError("ablation needs at least one seed")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    c = config.corpus
    lexicon = build_lexicon(config)
    table = pretrain_table(config)
    lens = {"min_len": c.min_len, "max_len": c.max_len}
    la, lb = c.parallel_langs
    parallel_full = gen_parallel(lexicon, max(counts), la, lb,
                                 (c.seed, _TAG_PARALLEL), **lens)
    nli_pairs = pairs_from_nli(gen_nli(
        lexicon, c.n_nli, [c.nli_lang], cross_lingual=False,
        seed=(c.seed, _TAG_NLI), **lens), "nli")
    held_out = gen_parallel(lexicon, c.eval_pairs, la, lb,
                            (c.seed, _TAG_EVAL_PAIR, la, lb), **lens)
    src_sents = [p[0] for p in held_out]
    tgt_sents = [p[1] for p in held_out]

    steps = max_steps if max_steps is not None else config.train.max_steps
    rows = []
    for count in counts:
        for seed in seeds:
            if count == 0:
                mix = {"nli": 1.0}
                pair_data = {"nli": nli_pairs}
            else:
                mix = {"nli": 0.5, "parallel": 0.5}
                pair_data = {
                    "nli": nli_pairs,
                    "parallel": pairs_from_parallel(parallel_full[:count]),
                }
            tcfg = dataclasses.replace(
                config.train,
                seed=int(seed),
                strategy_mix=mix,
                use_hard_negatives=False,
                max_steps=steps,
                epochs=max(config.train.epochs, steps) if steps else config.train.epochs,
            )
            result = train(tcfg, pair_data, table)
            src = EmbeddingSet.from_vectors(embed_sentences(result.params, src_sents))
            tgt = EmbeddingSet.from_vectors(embed_sentences(result.params, tgt_sents))
            acc = retrieval_accuracy(src, tgt).mean
            rows.append({"count": count, "seed": int(seed), "accuracy": acc})

    per_count = {
        count: float(np.mean([r["accuracy"] for r in rows if r["count"] == count]))
        for count in counts
    }
    try:
        rho = spearman_rho([float(r["count"]) for r in rows],
                           [r["accuracy"] for r in rows])
    except UndefinedCorrelationError as exc:
        print(f"warning: trend undefined ({exc})", file=sys.stderr)
        rho = None

    csv_path = out_dir / "ablation.csv"
    with open(csv_path, "w", encoding="utf-8") as fh:
        header = ["count", "retrieval_accuracy"] + [f"seed_{s}" for s in seeds]
        fh.write(",".join(header) + "\n")
        for count in counts:
            per_seed = [r["accuracy"] for r in rows if r["count"] == count]
            cells = [str(count), repr(per_count[count])] + [repr(a) for a in per_seed]
            fh.write(",".join(cells) + "\n")

    write_run_manifest(
        out_dir / MANIFEST_NAME,
        command="ablate-parallel",
        config_hash=config.config_hash(),
        wall_clock_seconds=time.perf_counter() - t0,
        artifacts=["ablation.csv"],
        metrics={"spearman_rho": rho,
                 **{f"count_{k}": v for k, v in per_count.items()}},
        extra={"counts": list(counts), "seeds": [int(s) for s in seeds]},
    )
    return {"rows": rows, "per_count": per_count, "spearman_rho": rho}


# ---------------------------------------------------------------------------
# report consolidation


def collect_run_manifests(inputs: list[str | Path]) -> list[dict]:
    """Gather run manifests from files and directory trees."""
    paths: list[Path] = []
    for item in inputs:
        p = Path(item)
        if p.is_dir():
            paths.extend(sorted(p.rglob(MANIFEST_NAME)))
        else:
            paths.append(p)
    manifests = []
    seen = set()
    for p in paths:
        key = str(p.resolve())
        if key in seen:
            continue
        seen.add(key)
        manifests.append(read_run_manifest(p))
    if not manifests:
        raise DataFormatError(f"no run manifests found under {[str(i) for i in inputs]}")
    versions = {m.get("version") for m in manifests}
    if len(versions) > 1:
        print(f"warning: manifests span tool versions {sorted(versions)}",
              file=sys.stderr)
    return manifests


def summarize_runs(manifests: list[dict]) -> tuple[list[str], list[dict]]:
    """Join manifests by config hash into rows of merged metrics."""
    merged: dict[str, dict] = {}
    for m in manifests:
        h = m.get("config_hash", "")
        row = merged.setdefault(h, {"config_hash": h, "commands": set(), "metrics": {}})
        row["commands"].add(m.get("command", "?"))
        for k, v in (m.get("metrics") or {}).items():
            if isinstance(v, (int, float)) and not isinstance(v, bool):
                row["metrics"][k] = v
    rows = [merged[h] for h in sorted(merged)]
    columns = sorted({k for row in rows for k in row["metrics"]})
    return columns, rows


def write_summary_tables(columns: list[str], rows: list[dict],
                         out_dir: str | Path) -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "report.csv"
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write(",".join(["config_hash", "commands"] + columns) + "\n")
        for row in rows:
            cells = [row["config_hash"], "+".join(sorted(row["commands"]))]
            for col in columns:
                v = row["metrics"].get(col)
                cells.append("" if v is None else repr(float(v)))
            fh.write(",".join(cells) + "\n")

    md_path = out_dir / "report.md"
    with open(md_path, "w", encoding="utf-8") as fh:
        fh.write("# Run comparison\n\n")
        header = ["config", "commands"] + columns
        fh.write("| " + " | ".join(header) + " |\n")
        fh.write("|" + "---|" * len(header) + "\n")
        for row in rows:
            cells = [row["config_hash"][:12], "+".join(sorted(row["commands"]))]
            for col in columns:
                v = row["metrics"].get(col)
                cells.append("" if v is None else f"{float(v):.4f}")
            fh.write("| " + " | ".join(cells) + " |\n")
    return csv_path, md_path
