from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from nbrkit import Document, PretaggedAnalyzer, build_corpus

DATA_DIR = Path(__file__).parent / "data"

EXAMPLE_TITLE = "Source Code Embeddings from Language Models"
EXAMPLE_ABSTRACT = (
    "Contextual embeddings are common in NLP. "
    "We introduce a representation for computer programs based on language models. "
    "We train deep robust embeddings using pytorch."
)


@pytest.fixture
def example_doc() -> Document:
    return Document(id="ex1", title=EXAMPLE_TITLE, abstract=EXAMPLE_ABSTRACT)


@pytest.fixture(scope="session")
def reference_analyzer() -> PretaggedAnalyzer:
    """The supplied reference tags for the worked-example document."""
    return PretaggedAnalyzer.from_jsonl(DATA_DIR / "reference_tags.jsonl")


# Small closed vocabulary so synthetic documents overlap like real abstracts do.
_NOUNS = [
    "model", "models", "data", "graph", "network", "embedding", "embeddings",
    "parser", "corpus", "training", "algorithm", "search", "retrieval",
    "language", "code", "system", "attention", "transformer", "benchmark",
    "token", "tokens", "query", "document", "documents", "vector", "vectors",
]
_ADJS = ["deep", "robust", "common", "novel", "large", "sparse", "efficient", "dense", "simple"]
_VERBS = ["introduce", "propose", "train", "evaluate", "learn", "compare", "analyze"]
_FUNCTION = ["the", "a", "an", "this", "we", "they", "with", "for", "of", "on", "in", "from"]
_MISC = ["7", "42", "2020", "state-of-the-art", "well", "often"]
_POOL = _NOUNS + _ADJS + _VERBS + _FUNCTION + _MISC


def make_random_docs(n: int, seed: int, min_sentences: int = 2, max_sentences: int = 5) -> list[Document]:
    """Deterministic synthetic documents sharing a small vocabulary."""
    rng = np.random.Generator(np.random.PCG64(seed))
    docs = []
    for i in range(n):
        title_words = [str(w) for w in rng.choice(_POOL, size=int(rng.integers(3, 9)))]
        title = " ".join([title_words[0].capitalize()] + title_words[1:])
        sentences = []
        for _ in range(int(rng.integers(min_sentences, max_sentences + 1))):
            words = [str(w) for w in rng.choice(_POOL, size=int(rng.integers(4, 13)))]
            sentences.append(" ".join([words[0].capitalize()] + words[1:]) + ".")
        docs.append(Document(id=f"doc-{i:04d}", title=title, abstract=" ".join(sentences)))
    return docs


def make_corpus(n: int, seed: int, name: str = "synthetic", **kwargs):
    return build_corpus(name, make_random_docs(n, seed, **kwargs))


def write_corpus_file(path: Path, docs: list[Document]) -> Path:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for d in docs:
            fh.write(json.dumps({"id": d.id, "title": d.title, "abstract": d.abstract}))
            fh.write("\n")
    return path
