import numpy as np
import pytest

from xlingual.lexicon import SemanticLexicon


@pytest.fixture(scope="session")
def tiny_lexicon():
    return SemanticLexicon.build(60, 3, n_topics=3)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240601)
