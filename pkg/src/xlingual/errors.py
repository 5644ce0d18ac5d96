"""Exception types shared across the package.

Every failure the library can signal deliberately derives from XlingualError,
so callers (and the CLI exit-code mapping) can distinguish configuration
problems, data problems, and runtime divergence without string matching.
"""


class XlingualError(Exception):
    """Base class for all deliberate errors raised by this package."""


class ConfigError(XlingualError):
    """Invalid configuration: unknown key, missing seed, out-of-range value."""


class ContractError(XlingualError):
    """A documented precondition of an operation was violated."""


class ShapeError(XlingualError):
    """Tensor dimensions do not line up; message names both shapes."""


class EmptySentenceError(XlingualError):
    """A sentence with zero tokens reached an operation that needs content."""


class DegenerateVectorError(XlingualError):
    """A zero (or numerically zero) vector cannot be normalized."""


class VocabularyError(XlingualError):
    """A token or semantic id lies outside the valid range."""


class DataFormatError(XlingualError):
    """An on-disk data file (corpus, manifest, report) is malformed."""


class LexiconError(XlingualError):
    """The lexicon layout cannot satisfy a generator's requirements."""


class TrainingDivergenceError(XlingualError):
    """Loss or gradients became non-finite during optimization."""


class CorruptCheckpointError(XlingualError):
    """A checkpoint file failed magic, structure, or checksum validation."""


class UndefinedCorrelationError(XlingualError):
    """Rank correlation is undefined because one input has no rank variance."""


class NotFittedError(XlingualError):
    """The estimator was used before fit() completed."""


class StreamExhausted(Exception):
    """Control-flow signal: a pair stream ran out of data for this epoch.

    Deliberately not a subclass of XlingualError; the training loop catches
    it to mark an epoch boundary and it should never escape to callers.
    """
