"""Sentence segmentation, tokenization, POS tagging, NP chunking, antonym lookup.

Everything downstream (the neighbor transforms) consumes :class:`TaggedText`
produced here. Two analyzers are provided: a bundled rule tagger loaded from a
versioned model file, and a pass-through that replays tags supplied with the
input, so transform behavior can be tested independently of tagging accuracy.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Protocol, Sequence

from .errors import FormatError, ParseError, ValidationError

# Penn-tag classes used by the neighbor transforms.
TAG_CLASSES: dict[str, frozenset[str]] = {
    "ADJ": frozenset({"JJ", "JJR", "JJS"}),
    "NN": frozenset({"NN", "NNS", "NNP", "NNPS"}),
    "VB": frozenset({"VB", "VBD", "VBG", "VBN", "VBP", "VBZ"}),
    "ADV": frozenset({"RB", "RBR", "RBS"}),
    "PR": frozenset({"PRP", "PRP$"}),
    "DT": frozenset({"DT"}),
    "NUM": frozenset({"CD"}),
}

# Chunks with this period still attached must survive tokenization intact.
ABBREVIATIONS = frozenset(
    {
        "e.g.", "i.e.", "etc.", "cf.", "vs.", "al.", "et.", "fig.", "figs.",
        "eq.", "eqs.", "sec.", "secs.", "no.", "nos.", "vol.", "pp.", "p.",
        "dr.", "mr.", "ms.", "mrs.", "prof.", "st.", "jr.", "sr.",
    }
)

_TERMINALS = frozenset(".!?")


def is_punct_char(ch: str) -> bool:
    """True for punctuation and symbol characters (Unicode categories P* and S*)."""
    return unicodedata.category(ch)[0] in "PS"


@dataclass(frozen=True)
class TagClass:
    """A named set of Penn tags (one of ADJ, NN, VB, ADV, PR, DT, NUM)."""

    name: str
    members: frozenset[str]

    @staticmethod
    def named(name: str) -> "TagClass":
        try:
            return TagClass(name, TAG_CLASSES[name])
        except KeyError:
            raise ValidationError(
                f"unknown tag class {name!r}; expected one of {sorted(TAG_CLASSES)}"
            ) from None


@dataclass(frozen=True)
class TaggedToken:
    surface: str
    tag: str
    is_word: bool

    @staticmethod
    def make(surface: str, tag: str) -> "TaggedToken":
        if not surface:
            raise ValidationError("token surface must be non-empty")
        return TaggedToken(surface, tag, not all(is_punct_char(c) for c in surface))


@dataclass(frozen=True)
class TaggedText:
    """Sentence-segmented, POS-tagged token sequences."""

    sentences: tuple[tuple[TaggedToken, ...], ...]

    @staticmethod
    def of(sentences: Iterable[Iterable[TaggedToken]]) -> "TaggedText":
        return TaggedText(tuple(tuple(s) for s in sentences))

    def tokens(self) -> Iterator[TaggedToken]:
        for sentence in self.sentences:
            yield from sentence

    def word_count(self) -> int:
        return sum(1 for t in self.tokens() if t.is_word)

    def text(self) -> str:
        """Detokenize: single spaces between all tokens, sentences in order."""
        return " ".join(t.surface for t in self.tokens())


def split_sentences(text: str) -> list[str]:
    """Split on terminal punctuation followed by whitespace and an upper/digit.

    Chunks ending in a known abbreviation do not terminate a sentence. The
    returned segments cover every non-whitespace character of the input.
    """
    boundaries = []
    n = len(text)
    for i, ch in enumerate(text):
        if ch not in _TERMINALS or i + 1 >= n or not text[i + 1].isspace():
            continue
        j = i + 1
        while j < n and text[j].isspace():
            j += 1
        if j >= n or not (text[j].isupper() or text[j].isdigit()):
            continue
        start = i
        while start > 0 and not text[start - 1].isspace():
            start -= 1
        if text[start : i + 1].lower() in ABBREVIATIONS:
            continue
        boundaries.append(i + 1)
    segments = []
    prev = 0
    for b in boundaries + [n]:
        segment = text[prev:b].strip()
        if segment:
            segments.append(segment)
        prev = b
    return segments


def tokenize(sentence: str) -> list[str]:
    """Whitespace tokenization with leading/trailing punctuation split off.

    Internal punctuation (hyphens, apostrophes) stays inside the token, and
    abbreviations keep their period. No characters are dropped.
    """
    tokens: list[str] = []
    for chunk in sentence.split():
        lead: list[str] = []
        while chunk and is_punct_char(chunk[0]) and chunk.lower() not in ABBREVIATIONS:
            lead.append(chunk[0])
            chunk = chunk[1:]
        trail: list[str] = []
        while chunk and is_punct_char(chunk[-1]) and chunk.lower() not in ABBREVIATIONS:
            trail.append(chunk[-1])
            chunk = chunk[:-1]
        tokens.extend(lead)
        if chunk:
            tokens.append(chunk)
        tokens.extend(reversed(trail))
    return tokens


class Tagger(Protocol):
    def tag(self, tokens: Sequence[str]) -> list[str]:
        """One Penn tag per token of a single sentence."""


_PUNCT_TAGS = {
    ".": ".", "!": ".", "?": ".", ",": ",", ";": ":", ":": ":", "…": ":",
    "-": ":", "–": ":", "—": ":", "(": "(", "[": "(", "{": "(",
    ")": ")", "]": ")", "}": ")", '"': "''", "'": "''", "`": "``",
    "$": "$", "#": "#",
}


class RuleTagger:
    """Deterministic lexicon + suffix tagger loaded from a versioned model file.

    Tagging order per token: punctuation map, numeral rule, lexicon
    (case-insensitive), capitalized-unknown-mid-sentence -> proper noun,
    suffix rules, capitalized-unknown-sentence-initially -> proper noun,
    default NN. Pure function of (tokens, model file).
    """

    FORMAT = "nbrkit-tagger"
    VERSION = 1

    def __init__(self, lexicon: dict[str, str], suffix_rules: list[tuple[str, str]]):
        self.lexicon = dict(lexicon)
        self.suffix_rules = list(suffix_rules)

    @classmethod
    def from_model_file(cls, path: str | Path) -> "RuleTagger":
        with open(path, encoding="utf-8") as fh:
            model = json.load(fh)
        if model.get("format") != cls.FORMAT:
            raise FormatError(f"{path}: not a {cls.FORMAT} model file")
        if model.get("version") != cls.VERSION:
            raise FormatError(f"{path}: unsupported model version {model.get('version')!r}")
        rules = [(str(s), str(t)) for s, t in model["suffix_rules"]]
        return cls({str(k): str(v) for k, v in model["lexicon"].items()}, rules)

    def tag(self, tokens: Sequence[str]) -> list[str]:
        if not tokens:
            raise ValidationError("tag() requires a non-empty token sequence")
        return [self._tag_one(tok, i == 0) for i, tok in enumerate(tokens)]

    def _tag_one(self, token: str, sentence_initial: bool) -> str:
        if all(is_punct_char(c) for c in token):
            return _PUNCT_TAGS.get(token, _PUNCT_TAGS.get(token[0], "SYM"))
        if _looks_numeric(token):
            return "CD"
        lower = token.lower()
        lexical = self.lexicon.get(lower)
        if lexical is not None:
            return lexical
        capitalized = token[0].isupper()
        if capitalized and not sentence_initial:
            return "NNPS" if lower.endswith("s") else "NNP"
        for suffix, tag in self.suffix_rules:
            if lower.endswith(suffix) and len(lower) >= len(suffix) + 2:
                return tag
        if capitalized:
            return "NNPS" if lower.endswith("s") else "NNP"
        return "NN"


def _looks_numeric(token: str) -> bool:
    has_digit = any(c.isdigit() for c in token)
    return has_digit and not any(c.isalpha() for c in token)


class Analyzer(Protocol):
    def analyze(self, text: str) -> TaggedText: ...


class RuleAnalyzer:
    """Segment + tokenize + tag raw text with a :class:`Tagger`."""

    def __init__(self, tagger: Tagger | None = None):
        self.tagger = tagger if tagger is not None else default_tagger()

    def analyze(self, text: str) -> TaggedText:
        sentences = []
        for segment in split_sentences(text):
            tokens = tokenize(segment)
            if not tokens:
                continue
            tags = self.tagger.tag(tokens)
            sentences.append([TaggedToken.make(s, t) for s, t in zip(tokens, tags)])
        return TaggedText.of(sentences)


class PretaggedAnalyzer:
    """Replays externally supplied tags, keyed by the exact raw field text.

    Input format (JSON lines): {"text": ..., "sentences": [{"tokens": [...],
    "tags": [...]}, ...]}. Lookup misses raise, so a test can never silently
    fall back to a live tagger.
    """

    def __init__(self, entries: dict[str, TaggedText]):
        self._entries = dict(entries)

    @classmethod
    def from_jsonl(cls, path: str | Path) -> "PretaggedAnalyzer":
        entries: dict[str, TaggedText] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                    text = record["text"]
                    sentences = [
                        [TaggedToken.make(s, t) for s, t in zip(sent["tokens"], sent["tags"], strict=True)]
                        for sent in record["sentences"]
                    ]
                except (KeyError, TypeError, ValueError) as exc:
                    raise ParseError(f"{path}:{lineno}: bad pretagged record: {exc}") from exc
                entries[text] = TaggedText.of(sentences)
        return cls(entries)

    def analyze(self, text: str) -> TaggedText:
        if not text.strip():
            return TaggedText.of([])
        try:
            return self._entries[text]
        except KeyError:
            raise ValidationError(f"no supplied tags for text: {text[:60]!r}...") from None


@dataclass
class AntonymLexicon:
    """Case-insensitive adjective -> antonym map loaded from a two-column TSV."""

    entries: dict[str, str] = field(default_factory=dict)

    @classmethod
    def from_tsv(cls, path: str | Path) -> "AntonymLexicon":
        entries: dict[str, str] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 2 or not parts[0] or not parts[1]:
                    raise ParseError(f"{path}:{lineno}: expected 'word<TAB>antonym'")
                entries[parts[0].lower()] = parts[1]
        return cls(entries)

    def get(self, word: str) -> str | None:
        return self.entries.get(word.lower())

    def __len__(self) -> int:
        return len(self.entries)


def antonym_of(word: str, lexicon: AntonymLexicon) -> str | None:
    """The mapped antonym, or None when absent (callers keep the original word)."""
    return lexicon.get(word)


def analyze(text: str, tagger: Tagger | None = None) -> TaggedText:
    """Segment, tokenize, and tag raw text (empty text -> zero sentences)."""
    return RuleAnalyzer(tagger).analyze(text)


def tag_tokens(tokens: Sequence[str], tagger: Tagger | None = None) -> list[str]:
    """One Penn tag per token; unknown tokens fall back to suffix rules."""
    active = tagger if tagger is not None else default_tagger()
    return active.tag(tokens)


def chunk_noun_phrases(tagged: TaggedText) -> list[list[tuple[int, int]]]:
    """Maximal DT? ADJ* NN+ spans per sentence, non-overlapping, greedy left-to-right."""
    adj, nn, dt = TAG_CLASSES["ADJ"], TAG_CLASSES["NN"], TAG_CLASSES["DT"]
    spans_per_sentence = []
    for sentence in tagged.sentences:
        spans = []
        i, n = 0, len(sentence)
        while i < n:
            j = i
            if sentence[j].tag in dt:
                j += 1
            while j < n and sentence[j].tag in adj:
                j += 1
            k = j
            while k < n and sentence[k].tag in nn:
                k += 1
            if k > j:
                spans.append((i, k))
                i = k
            else:
                i += 1
        spans_per_sentence.append(spans)
    return spans_per_sentence


def chunk_strings(tagged: TaggedText) -> list[str]:
    """Detokenized chunk texts in document order (helper over chunk spans)."""
    out = []
    for sentence, spans in zip(tagged.sentences, chunk_noun_phrases(tagged)):
        for start, end in spans:
            out.append(" ".join(t.surface for t in sentence[start:end]))
    return out


_DATA_PACKAGE = "nbrkit.data"
_default_tagger: RuleTagger | None = None
_default_antonyms: AntonymLexicon | None = None


def default_tagger() -> RuleTagger:
    """The bundled tagger, loaded once per process from the packaged model file."""
    global _default_tagger
    if _default_tagger is None:
        with resources.as_file(resources.files(_DATA_PACKAGE) / "tagger_model.json") as p:
            _default_tagger = RuleTagger.from_model_file(p)
    return _default_tagger


def default_antonyms() -> AntonymLexicon:
    """The starter antonym lexicon shipped with the package."""
    global _default_antonyms
    if _default_antonyms is None:
        with resources.as_file(resources.files(_DATA_PACKAGE) / "antonyms.tsv") as p:
            _default_antonyms = AntonymLexicon.from_tsv(p)
    return _default_antonyms
