"""Desk-scale laboratory for cross-lingual contrastive sentence embeddings.

The package builds everything from first principles on numpy arrays: a
reverse-mode autodiff engine, an Adam optimizer, a deterministic synthetic
multilingual corpus, a mean-pool/tanh encoder trained with a batch
contrastive loss, and an evaluation suite (retrieval, bitext mining, STS
correlation, clustering purity, language probe) with binary checkpointing
and a reproducible experiment CLI.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    ContractError,
    CorruptCheckpointError,
    DataFormatError,
    DegenerateVectorError,
    EmptySentenceError,
    LexiconError,
    NotFittedError,
    ShapeError,
    TrainingDivergenceError,
    UndefinedCorrelationError,
    VocabularyError,
    XlingualError,
)
from .autodiff import Node, backward, leaf
from .optim import Adam, AdamState, adam_step
from .lexicon import SemanticLexicon, Sentence, derender, render
from .generators import (
    NliTriple,
    PretrainInit,
    StsPair,
    gen_nli,
    gen_parallel,
    gen_sts,
    gen_topics,
)
from .pairs import (
    STRATEGIES,
    PairStream,
    TrainingPair,
    build_batch,
    normalize_mix,
    pairs_from_nli,
    pairs_from_parallel,
    pairs_unsupervised,
)
from .encoder import EncoderParams, contrastive_loss, encode
from .training import TrainConfig, TrainResult, train
from .checkpoint import load_checkpoint, load_tensors, save_checkpoint, save_tensors
from .embeddings import EmbeddingSet, embed_sentences, embedding_set_from_sentences
from .metrics import (
    ClusterResult,
    MiningResult,
    ProbeResult,
    RetrievalResult,
    average_ranks,
    evaluate_sts,
    kmeans_purity,
    language_probe,
    mine_bitext,
    pca_project,
    retrieval_accuracy,
    spearman_rho,
)
from .reports import METRIC_RANGES, EvalReport, read_report, write_report
from .config import (
    CorpusConfig,
    EvalConfig,
    ExperimentConfig,
    PathsConfig,
    load_config,
)
from .estimator import ContrastiveSentenceEncoder
from . import experiment

__all__ = [
    "__version__",
    # errors
    "XlingualError", "ConfigError", "ContractError", "ShapeError",
    "EmptySentenceError", "DegenerateVectorError", "VocabularyError",
    "DataFormatError", "LexiconError", "TrainingDivergenceError",
    "CorruptCheckpointError", "UndefinedCorrelationError", "NotFittedError",
    # autodiff and optimization
    "Node", "leaf", "backward", "Adam", "AdamState", "adam_step",
    # corpus
    "Sentence", "SemanticLexicon", "render", "derender",
    "NliTriple", "StsPair", "PretrainInit",
    "gen_parallel", "gen_nli", "gen_sts", "gen_topics",
    # pairing and training
    "STRATEGIES", "TrainingPair", "PairStream", "build_batch", "normalize_mix",
    "pairs_unsupervised", "pairs_from_nli", "pairs_from_parallel",
    "EncoderParams", "encode", "contrastive_loss",
    "TrainConfig", "TrainResult", "train",
    "save_checkpoint", "load_checkpoint", "save_tensors", "load_tensors",
    # evaluation
    "EmbeddingSet", "embed_sentences", "embedding_set_from_sentences",
    "RetrievalResult", "MiningResult", "ClusterResult", "ProbeResult",
    "retrieval_accuracy", "mine_bitext", "spearman_rho", "average_ranks",
    "evaluate_sts", "kmeans_purity", "language_probe", "pca_project",
    "METRIC_RANGES", "EvalReport", "write_report", "read_report",
    # experiments
    "ExperimentConfig", "CorpusConfig", "EvalConfig", "PathsConfig",
    "load_config", "ContrastiveSentenceEncoder", "experiment",
]
