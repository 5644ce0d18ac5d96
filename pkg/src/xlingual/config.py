"""Experiment configuration: TOML loading, strict validation, hashing.

A config is four sections (corpus, train, eval, paths). Unknown sections
or keys are errors that name the offender. Seeds are never defaulted:
corpus.seed, train.seed, and eval.seed must be written down explicitly,
so every random process in a run is pinned by the config file alone.
The config hash is SHA-256 over the canonical JSON of the fully
materialized config, which makes runs joinable across manifests.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .training import TrainConfig

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml


@dataclass
class CorpusConfig:
    seed: int
    vocab_size: int = 2000
    n_languages: int = 4
    embed_dim: int = 32
    offset_scale: float = 2.0
    noise_scale: float = 0.1
    min_len: int = 2
    max_len: int = 5
    n_topics: int = 15
    n_parallel: int = 2000
    n_nli: int = 64000
    n_xnli: int = 64000
    n_sts: int = 400
    n_topic_sentences: int = 600
    eval_pairs: int = 500
    parallel_langs: list[int] = field(default_factory=lambda: [0, 1])
    nli_lang: int = 0
    xnli_pool: list[int] = field(default_factory=lambda: [0, 1, 2, 3])
    sts_langs: list[int] = field(default_factory=lambda: [0, 1])
    topics_lang: int = 0

    def validate(self) -> None:
        if not isinstance(self.seed, int):
            raise ConfigError(f"corpus.seed must be an integer, got {self.seed!r}")
        if self.vocab_size < 4:
            raise ConfigError(f"corpus.vocab_size must be at least 4, got {self.vocab_size}")
        if self.n_languages < 1:
            raise ConfigError(f"corpus.n_languages must be positive, got {self.n_languages}")
        if self.embed_dim < 1:
            raise ConfigError(f"corpus.embed_dim must be positive, got {self.embed_dim}")
        if self.offset_scale < 0 or self.noise_scale < 0:
            raise ConfigError("corpus.offset_scale and corpus.noise_scale must be non-negative")
        if not 1 <= self.min_len <= self.max_len:
            raise ConfigError(
                f"corpus sentence lengths invalid: [{self.min_len}, {self.max_len}]"
            )
        if self.n_topics < 1:
            raise ConfigError(f"corpus.n_topics must be at least 1, got {self.n_topics}")
        for name in ("n_parallel", "n_nli", "n_xnli", "n_sts",
                     "n_topic_sentences", "eval_pairs"):
            if getattr(self, name) < 0:
                raise ConfigError(f"corpus.{name} must be non-negative, got {getattr(self, name)}")
        for name, langs in (("parallel_langs", self.parallel_langs),
                            ("xnli_pool", self.xnli_pool),
                            ("sts_langs", self.sts_langs)):
            if not isinstance(langs, list) or not langs:
                raise ConfigError(f"corpus.{name} must be a nonempty list of languages")
            for lang in langs:
                if not isinstance(lang, int) or not 0 <= lang < self.n_languages:
                    raise ConfigError(
                        f"corpus.{name} entry {lang!r} outside "
                        f"[0, {self.n_languages}) language range"
                    )
        if len(self.parallel_langs) != 2:
            raise ConfigError("corpus.parallel_langs must name exactly two languages")
        if self.parallel_langs[0] == self.parallel_langs[1]:
            raise ConfigError("corpus.parallel_langs must name two distinct languages")
        if len(self.sts_langs) != 2:
            raise ConfigError("corpus.sts_langs must name exactly two languages")
        for name, lang in (("nli_lang", self.nli_lang), ("topics_lang", self.topics_lang)):
            if not isinstance(lang, int) or not 0 <= lang < self.n_languages:
                raise ConfigError(f"corpus.{name} {lang!r} outside language range")


@dataclass
class EvalConfig:
    seed: int
    evaluators: list[str] = field(
        default_factory=lambda: ["retrieval", "mining", "sts", "clustering", "probe"]
    )
    retrieval_pairs: list[list[int]] = field(default_factory=list)
    mining_overlap: int = 100
    mining_pool: int = 300
    n_thresholds: int = 200
    kmeans_restarts: int = 10
    probe_train_fraction: float = 0.5
    projection_dim: int = 2

    _KNOWN = ("retrieval", "mining", "sts", "clustering", "probe")

    def validate(self, n_languages: int) -> None:
        if not isinstance(self.seed, int):
            raise ConfigError(f"eval.seed must be an integer, got {self.seed!r}")
        if not self.evaluators:
            raise ConfigError("eval.evaluators must not be empty")
        for name in self.evaluators:
            if name not in self._KNOWN:
                raise ConfigError(
                    f"unknown evaluator {name!r}, expected a subset of {list(self._KNOWN)}"
                )
        for pair in self.retrieval_pairs:
            if (not isinstance(pair, list) or len(pair) != 2
                    or not all(isinstance(l, int) and 0 <= l < n_languages for l in pair)):
                raise ConfigError(f"eval.retrieval_pairs entry {pair!r} is not a valid pair")
            if pair[0] == pair[1]:
                raise ConfigError(f"eval.retrieval_pairs entry {pair!r} repeats a language")
        if self.mining_overlap < 1 or self.mining_pool < self.mining_overlap:
            raise ConfigError(
                f"mining pool {self.mining_pool} must be at least the "
                f"overlap {self.mining_overlap}"
            )
        if self.n_thresholds < 1:
            raise ConfigError(f"eval.n_thresholds must be positive, got {self.n_thresholds}")
        if self.kmeans_restarts < 1:
            raise ConfigError(f"eval.kmeans_restarts must be positive, got {self.kmeans_restarts}")
        if not 0.0 < self.probe_train_fraction < 1.0:
            raise ConfigError(
                f"eval.probe_train_fraction must lie in (0, 1), "
                f"got {self.probe_train_fraction}"
            )
        if self.projection_dim < 1:
            raise ConfigError(f"eval.projection_dim must be positive, got {self.projection_dim}")

    def default_retrieval_pairs(self, n_languages: int) -> list[list[int]]:
        """All unordered language pairs, used when none are configured."""
        if self.retrieval_pairs:
            return [list(p) for p in self.retrieval_pairs]
        return [[a, b] for a in range(n_languages) for b in range(a + 1, n_languages)]


@dataclass
class PathsConfig:
    out_dir: str | None = None


@dataclass
class ExperimentConfig:
    corpus: CorpusConfig
    train: TrainConfig
    eval: EvalConfig
    paths: PathsConfig = field(default_factory=PathsConfig)

    def validate(self) -> None:
        self.corpus.validate()
        self.train.validate()
        self.eval.validate(self.corpus.n_languages)
        for strategy in self.train.strategy_mix:
            if strategy == "xnli" and self.corpus.n_xnli < 1:
                raise ConfigError("train mix uses xnli but corpus.n_xnli is zero")

    def to_dict(self) -> dict:
        return {
            "corpus": dataclasses.asdict(self.corpus),
            "train": dataclasses.asdict(self.train),
            "eval": {k: v for k, v in dataclasses.asdict(self.eval).items()},
            "paths": dataclasses.asdict(self.paths),
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a table of sections")
        known_sections = {"corpus", "train", "eval", "paths"}
        for section in raw:
            if section not in known_sections:
                raise ConfigError(f"unknown config section {section!r}")
        for section in ("corpus", "train", "eval"):
            if section not in raw:
                raise ConfigError(f"config is missing the [{section}] section")
        corpus = _build_section(CorpusConfig, raw["corpus"], "corpus")
        train = _build_section(TrainConfig, raw["train"], "train")
        eval_cfg = _build_section(EvalConfig, raw["eval"], "eval")
        paths = _build_section(PathsConfig, raw.get("paths", {}), "paths")
        config = cls(corpus=corpus, train=train, eval=eval_cfg, paths=paths)
        config.validate()
        return config

    def config_hash(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def _build_section(section_cls, raw: dict, name: str):
    if not isinstance(raw, dict):
        raise ConfigError(f"config section [{name}] must be a table")
    fields = {f.name: f for f in dataclasses.fields(section_cls) if f.init}
    unknown = [k for k in raw if k not in fields]
    if unknown:
        raise ConfigError(f"unknown config key [{name}] {unknown[0]!r}")
    required = [
        f.name for f in fields.values()
        if f.default is dataclasses.MISSING and f.default_factory is dataclasses.MISSING
    ]
    for key in required:
        if key not in raw:
            raise ConfigError(f"config key [{name}] {key!r} is required (seeds are never defaulted)")
    kwargs = {}
    for key, value in raw.items():
        f = fields[key]
        if f.type in ("float", float) and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        kwargs[key] = value
    try:
        return section_cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"invalid [{name}] section: {exc}") from None


def load_config(path: str | Path, *, seed_override: int | None = None) -> ExperimentConfig:
    """Parse and validate a TOML config file."""
    try:
        with open(path, "rb") as fh:
            raw = _toml.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except _toml.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML ({exc})") from None
    if seed_override is not None:
        for section in ("corpus", "train", "eval"):
            raw.setdefault(section, {})
            raw[section]["seed"] = int(seed_override)
    config = ExperimentConfig.from_dict(raw)
    return config
