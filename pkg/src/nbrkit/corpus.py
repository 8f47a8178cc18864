"""Title/abstract corpus loading, validation, and summary statistics.

Corpus files are UTF-8 JSON lines with exactly the fields "id", "title", and
"abstract" (LF line endings). Documents keep the file's insertion order and a
Corpus is immutable after load.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .errors import ParseError, ValidationError
from .linguistic import TaggedText, Tagger, analyze

_FIELDS = ("id", "title", "abstract")


@dataclass(frozen=True)
class Document:
    """One paper: stable identifier plus raw title and abstract text."""

    id: str
    title: str
    abstract: str


@dataclass(frozen=True)
class Corpus:
    name: str
    documents: tuple[Document, ...]
    domain_tag: str = ""

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[Document]:
        return iter(self.documents)

    def __getitem__(self, doc_id: str) -> Document:
        try:
            return self._by_id[doc_id]
        except KeyError:
            raise ValidationError(f"corpus {self.name!r} has no document {doc_id!r}") from None

    @property
    def _by_id(self) -> dict[str, Document]:
        cached = self.__dict__.get("_by_id_cache")
        if cached is None:
            cached = {d.id: d for d in self.documents}
            self.__dict__["_by_id_cache"] = cached
        return cached

    def ids(self) -> list[str]:
        return [d.id for d in self.documents]


@dataclass(frozen=True)
class CorpusStats:
    count: int
    mean_title_words: float
    mean_abstract_words: float
    empty_abstracts: int


def build_corpus(name: str, documents: Iterable[Document], domain_tag: str = "") -> Corpus:
    """Validate and freeze documents into a Corpus (unique ids, non-empty titles)."""
    docs = tuple(documents)
    seen: set[str] = set()
    for doc in docs:
        if not doc.id:
            raise ValidationError("document id must be a non-empty string")
        if doc.id in seen:
            raise ValidationError(f"duplicate document id {doc.id!r}")
        seen.add(doc.id)
        if not _has_word_token(doc.title):
            raise ValidationError(f"document {doc.id!r}: title has no word token")
    return Corpus(name=name, documents=docs, domain_tag=domain_tag)


def load_corpus(path: str | Path, name: str | None = None, domain_tag: str = "") -> Corpus:
    """Load a JSONL corpus file, preserving record order.

    Raises ParseError (naming the line) for malformed lines and
    ValidationError for duplicate ids or empty titles.
    """
    path = Path(path)
    documents = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: invalid JSON: {exc.msg}") from exc
            if not isinstance(record, dict):
                raise ParseError(f"{path}:{lineno}: expected a JSON object")
            missing = [f for f in _FIELDS if f not in record]
            if missing:
                raise ParseError(f"{path}:{lineno}: missing field(s) {', '.join(missing)}")
            if not all(isinstance(record[f], str) for f in _FIELDS):
                raise ParseError(f"{path}:{lineno}: id, title, abstract must be strings")
            documents.append(Document(record["id"], record["title"], record["abstract"]))
    return build_corpus(name if name is not None else path.stem, documents, domain_tag)


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write the corpus back out as JSONL, field-for-field."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for doc in corpus:
            fh.write(
                json.dumps(
                    {"id": doc.id, "title": doc.title, "abstract": doc.abstract},
                    ensure_ascii=False,
                )
            )
            fh.write("\n")


def corpus_stats(corpus: Corpus, tagger: Tagger | None = None) -> CorpusStats:
    """Document count and mean field lengths in word tokens (punctuation excluded)."""
    if len(corpus) == 0:
        raise ValidationError("corpus_stats requires a non-empty corpus")
    title_words = 0
    abstract_words = 0
    empty_abstracts = 0
    for doc in corpus:
        title_words += analyze(doc.title, tagger).word_count()
        if doc.abstract.strip():
            abstract_words += analyze(doc.abstract, tagger).word_count()
        else:
            empty_abstracts += 1
    n = len(corpus)
    return CorpusStats(
        count=n,
        mean_title_words=title_words / n,
        mean_abstract_words=abstract_words / n,
        empty_abstracts=empty_abstracts,
    )


def _has_word_token(text: str) -> bool:
    probe: TaggedText = analyze(text, _IdentityTagger())
    return any(t.is_word for t in probe.tokens())


class _IdentityTagger:
    # word-token presence does not depend on tags; skip the real tagger
    def tag(self, tokens):
        return ["NN"] * len(tokens)
