"""The 32 textual-neighbor generators, their taxonomy registry, and validators.

Each neighbor class perturbs the title and/or abstract of a document and is
labeled on two axes: orthography (LO lossy / LL lossless) and semantics
(HS highly / PS partially / DS dissimilar). All randomness is drawn from a
stream seeded by (global_seed, doc_id, code), so variant generation is
reproducible and independent of processing order.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from ._hashing import stable_hash64
from .corpus import Corpus, Document
from .errors import ParseError, ValidationError
from .linguistic import (
    TAG_CLASSES,
    Analyzer,
    AntonymLexicon,
    RuleAnalyzer,
    TagClass,
    TaggedText,
    TaggedToken,
    chunk_noun_phrases,
    default_antonyms,
)

RESERVED_CODES = ("T", "T+A")

FIELD_SEPARATOR = ". "  # joins title and abstract wherever the two are composed


@dataclass(frozen=True)
class SeedContext:
    """Derives the per-(document, neighbor-class) random stream."""

    global_seed: int
    doc_id: str
    code: str

    def rng(self) -> np.random.Generator:
        return np.random.Generator(
            np.random.PCG64(stable_hash64(self.global_seed, self.doc_id, self.code))
        )


RngLike = SeedContext | np.random.Generator


def _as_rng(seed: RngLike) -> np.random.Generator:
    return seed.rng() if isinstance(seed, SeedContext) else seed


@dataclass(frozen=True)
class NeighborSpec:
    """One registry row: code, per-field transform, and taxonomy labels."""

    code: str
    orthography: str  # LO | LL
    semantics: str  # HS | PS | DS
    title_transform: str
    abstract_transform: str
    form: str

    @property
    def category(self) -> str:
        return f"{self.orthography}-{self.semantics}"


@dataclass(frozen=True)
class DocumentVariant:
    """A perturbed (or reserved T / T+A) rendering of one document.

    A deleted field is empty text, never absent.
    """

    doc_id: str
    code: str
    title: str
    abstract: str


def _spec(code: str, cat: str, title_tf: str, abstract_tf: str, form: str) -> NeighborSpec:
    orthography, semantics = cat.split("-")
    return NeighborSpec(code, orthography, semantics, title_tf, abstract_tf, form)


_ROWS = [
    _spec("T_ARot", "LL-PS", "preserve", "rotate", "title: preserve; abstract: rotate sentences"),
    _spec("T_AShuff", "LL-PS", "preserve", "shuffle", "title: preserve; abstract: shuffle sentences"),
    _spec("T_ASortAsc", "LL-PS", "preserve", "sort_asc", "title: preserve; abstract: sort sentences ascending by length"),
    _spec("T_ASortDesc", "LL-PS", "preserve", "sort_desc", "title: preserve; abstract: sort sentences descending by length"),
    _spec("T_ADelRand", "LO-PS", "preserve", "del_rand", "title: preserve; abstract: delete 30% of words at random"),
    _spec("T_ADelADJ", "LO-PS", "preserve", "del_class:ADJ", "title: preserve; abstract: delete all adjectives"),
    _spec("T_ADelNN", "LO-DS", "preserve", "del_class:NN", "title: preserve; abstract: delete all nouns"),
    _spec("T_ADelVB", "LO-PS", "preserve", "del_class:VB", "title: preserve; abstract: delete all verbs"),
    _spec("T_ADelADV", "LO-PS", "preserve", "del_class:ADV", "title: preserve; abstract: delete all adverbs"),
    _spec("T_ADelPR", "LO-PS", "preserve", "del_class:PR", "title: preserve; abstract: delete all pronouns"),
    _spec("T_ADelDT", "LO-HS", "preserve", "del_class:DT", "title: preserve; abstract: delete all determiners"),
    _spec("T_ADelNum", "LO-PS", "preserve", "del_class:NUM", "title: preserve; abstract: delete all numbers"),
    _spec("T_ADelNNPH", "LO-DS", "preserve", "del_np:all", "title: preserve; abstract: delete all noun phrases"),
    _spec("T_ADelTopNNPH", "LO-PS", "preserve", "del_np:top_half", "title: preserve; abstract: delete top 50% noun phrases"),
    _spec("TDelADJ_A", "LO-HS", "del_class:ADJ", "preserve", "title: delete all adjectives; abstract: preserve"),
    _spec("TDelNN_A", "LO-HS", "del_class:NN", "preserve", "title: delete all nouns; abstract: preserve"),
    _spec("TDelVB_A", "LO-HS", "del_class:VB", "preserve", "title: delete all verbs; abstract: preserve"),
    _spec("TDelDT_A", "LO-HS", "del_class:DT", "preserve", "title: delete all determiners; abstract: preserve"),
    _spec("TDelNN", "LO-DS", "del_class:NN", "delete", "title: delete all nouns; abstract: delete"),
    _spec("T_ADelQ1", "LO-PS", "preserve", "del_quantile:1", "title: preserve; abstract: delete first sentence tercile"),
    _spec("T_ADelQ2", "LO-PS", "preserve", "del_quantile:2", "title: preserve; abstract: delete middle sentence tercile"),
    _spec("T_ADelQ3", "LO-PS", "preserve", "del_quantile:3", "title: preserve; abstract: delete last sentence tercile"),
    _spec("TNNU_A", "LL-HS", "upper:NN", "preserve", "title: uppercase nouns; abstract: preserve"),
    _spec("TNonNNU_A", "LL-HS", "upper_non:NN", "preserve", "title: uppercase non-nouns; abstract: preserve"),
    _spec("T_ANNU", "LL-HS", "preserve", "upper:NN", "title: preserve; abstract: uppercase nouns"),
    _spec("T_ANonNNU", "LL-HS", "preserve", "upper_non:NN", "title: preserve; abstract: uppercase non-nouns"),
    _spec("T_A_DelNNChar", "LO-PS", "del_nn_chars", "del_nn_chars", "title and abstract: delete 2-3 characters from nouns"),
    _spec("TRepNNT_A", "LO-HS", "add_noun:title", "preserve", "title: add a noun drawn from the title; abstract: preserve"),
    _spec("TRepNNA_A", "LO-HS", "add_noun:abstract", "preserve", "title: add nouns drawn from the abstract; abstract: preserve"),
    _spec("T_ADelNonNNs", "LO-DS", "preserve", "keep_nn", "title: preserve; abstract: delete all non-nouns"),
    _spec("T_ARepADJ", "LO-DS", "preserve", "antonyms", "title: preserve; abstract: replace adjectives with antonyms"),
    _spec("T_A_WS", "LL-HS", "whitespace", "whitespace", "title and abstract: replace 50% of whitespace with 2-5 spaces"),
]

REGISTRY: dict[str, NeighborSpec] = {row.code: row for row in _ROWS}
assert len(REGISTRY) == 32

CATEGORIES = ("LO-HS", "LO-PS", "LO-DS", "LL-HS", "LL-PS")


def codes_in_category(category: str) -> list[str]:
    if category not in CATEGORIES:
        raise ValidationError(f"unknown category {category!r}; expected one of {CATEGORIES}")
    return [c for c, s in REGISTRY.items() if s.category == category]


def registry_json() -> str:
    """The registry as JSON (code, orthography, semantics, human-readable form)."""
    rows = [
        {"code": s.code, "orthography": s.orthography, "semantics": s.semantics, "form": s.form}
        for s in REGISTRY.values()
    ]
    return json.dumps(rows, indent=2)


# ---------------------------------------------------------------------------
# Transform primitives. All are pure: they build new TaggedText values.
# ---------------------------------------------------------------------------


def _rebuild(tagged: TaggedText, keep: Sequence[Sequence[TaggedToken]]) -> TaggedText:
    return TaggedText.of([s for s in keep if s])


def delete_by_tag(tagged: TaggedText, cls: TagClass) -> TaggedText:
    """Remove every token whose tag is in the class; empty sentences are dropped."""
    kept = [[t for t in sentence if t.tag not in cls.members] for sentence in tagged.sentences]
    return _rebuild(tagged, kept)


def reorder_sentences(tagged: TaggedText, mode: str, seed: RngLike) -> TaggedText:
    """Rotate / shuffle / length-sort the sentence list; token content untouched.

    Shuffle rejects the identity permutation (re-drawing from the seeded
    stream), so a multi-sentence shuffle always differs from the original;
    the result is uniform over the non-identity permutations.
    """
    sentences = list(tagged.sentences)
    n = len(sentences)
    if n <= 1:
        return tagged
    if mode == "rotate":
        order = list(range(1, n)) + [0]
    elif mode == "shuffle":
        rng = _as_rng(seed)
        identity = list(range(n))
        order = list(rng.permutation(n))
        while order == identity:
            order = list(rng.permutation(n))
    elif mode in ("sort_asc", "sort_desc"):
        counts = [sum(1 for t in s if t.is_word) for s in sentences]
        reverse = mode == "sort_desc"
        order = sorted(range(n), key=lambda i: -counts[i] if reverse else counts[i])
    else:
        raise ValidationError(f"unknown reorder mode {mode!r}")
    return TaggedText.of([sentences[i] for i in order])


def _round_half_up_thirds(numerator: int) -> int:
    # round-half-up of numerator/3, in exact integer arithmetic
    return (2 * numerator + 3) // 6


def delete_quantile(tagged: TaggedText, q: int) -> TaggedText:
    """Drop the q-th third of the sentence list (boundaries round-half-up)."""
    if q not in (1, 2, 3):
        raise ValidationError("quantile must be 1, 2, or 3")
    n = len(tagged.sentences)
    b1 = _round_half_up_thirds(n)
    b2 = _round_half_up_thirds(2 * n)
    lo, hi = ((0, b1), (b1, b2), (b2, n))[q - 1]
    kept = [s for i, s in enumerate(tagged.sentences) if not lo <= i < hi]
    return TaggedText.of(kept)


def delete_random_words(tagged: TaggedText, fraction: float = 0.30, seed: RngLike = None) -> TaggedText:
    """Remove exactly round(fraction * W) word tokens; punctuation is never removed."""
    if not 0 < fraction < 1:
        raise ValidationError("fraction must be strictly between 0 and 1")
    rng = _as_rng(seed)
    word_positions = [
        (si, ti)
        for si, sentence in enumerate(tagged.sentences)
        for ti, tok in enumerate(sentence)
        if tok.is_word
    ]
    k = math.floor(fraction * len(word_positions) + 0.5)
    if k == 0:
        return tagged
    chosen_idx = rng.choice(len(word_positions), size=k, replace=False)
    drop = {word_positions[i] for i in chosen_idx}
    kept = [
        [t for ti, t in enumerate(sentence) if (si, ti) not in drop]
        for si, sentence in enumerate(tagged.sentences)
    ]
    return _rebuild(tagged, kept)


def delete_noun_phrases(tagged: TaggedText, mode: str = "all") -> TaggedText:
    """Delete DT? ADJ* NN+ chunks: all of them, or the top half by occurrence count.

    top_half ranks distinct chunk strings (case-folded) by count descending,
    ties by first occurrence, and removes all occurrences of the leading
    ceil(distinct / 2) strings.
    """
    if mode not in ("all", "top_half"):
        raise ValidationError(f"unknown noun-phrase deletion mode {mode!r}")
    spans_per_sentence = chunk_noun_phrases(tagged)
    if mode == "top_half":
        occurrences: list[str] = []
        for sentence, spans in zip(tagged.sentences, spans_per_sentence):
            for start, end in spans:
                occurrences.append(" ".join(t.surface for t in sentence[start:end]).casefold())
        counts = Counter(occurrences)
        first_seen = {}
        for pos, key in enumerate(occurrences):
            first_seen.setdefault(key, pos)
        ranked = sorted(counts, key=lambda key: (-counts[key], first_seen[key]))
        selected = set(ranked[: math.ceil(len(ranked) / 2)])
    kept = []
    for sentence, spans in zip(tagged.sentences, spans_per_sentence):
        drop: set[int] = set()
        for start, end in spans:
            if mode == "all":
                drop.update(range(start, end))
            else:
                key = " ".join(t.surface for t in sentence[start:end]).casefold()
                if key in selected:
                    drop.update(range(start, end))
        kept.append([t for i, t in enumerate(sentence) if i not in drop])
    return _rebuild(tagged, kept)


def uppercase_by_tag(tagged: TaggedText, cls: TagClass | None = None, invert: bool = False) -> TaggedText:
    """Uppercase class members (invert=False) or word tokens outside it (invert=True)."""
    if cls is None:
        cls = TagClass.named("NN")
    out = []
    for sentence in tagged.sentences:
        row = []
        for tok in sentence:
            hit = (tok.tag in cls.members) if not invert else (tok.is_word and tok.tag not in cls.members)
            row.append(TaggedToken(tok.surface.upper(), tok.tag, tok.is_word) if hit else tok)
        out.append(row)
    return TaggedText.of(out)


def delete_chars_from_nouns(tagged: TaggedText, seed: RngLike = None) -> TaggedText:
    """Delete 2-3 characters at random positions from each noun of length >= 4.

    The per-token count is clamp(uniform{2,3}, 1, len-3); shorter nouns and
    non-noun tokens pass through unchanged.
    """
    rng = _as_rng(seed)
    nn = TAG_CLASSES["NN"]
    out = []
    for sentence in tagged.sentences:
        row = []
        for tok in sentence:
            length = len(tok.surface)
            if tok.tag not in nn or length < 4:
                row.append(tok)
                continue
            k = min(max(int(rng.integers(2, 4)), 1), length - 3)
            positions = set(rng.choice(length, size=k, replace=False).tolist())
            surface = "".join(c for i, c in enumerate(tok.surface) if i not in positions)
            row.append(TaggedToken.make(surface, tok.tag))
        out.append(row)
    return TaggedText.of(out)


def replace_adjectives_with_antonyms(tagged: TaggedText, lexicon: AntonymLexicon | None = None) -> TaggedText:
    """Swap each adjective with its lexicon antonym, keeping the first letter's case."""
    if lexicon is None:
        lexicon = default_antonyms()
    adj = TAG_CLASSES["ADJ"]
    out = []
    for sentence in tagged.sentences:
        row = []
        for tok in sentence:
            antonym = lexicon.get(tok.surface) if tok.tag in adj else None
            if antonym is None:
                row.append(tok)
                continue
            if tok.surface[0].isupper():
                antonym = antonym[0].upper() + antonym[1:]
            row.append(TaggedToken.make(antonym, tok.tag))
        out.append(row)
    return TaggedText.of(out)


def keep_only_nouns(tagged: TaggedText) -> TaggedText:
    """Retain NN-class tokens only, in order; everything else (punctuation too) goes."""
    nn = TAG_CLASSES["NN"]
    kept = [[t for t in sentence if t.tag in nn] for sentence in tagged.sentences]
    return _rebuild(tagged, kept)


def _whitespace_pieces(raw: str, rng: np.random.Generator) -> list[str]:
    """One output piece per input character; selected whitespace sites expand."""
    ws_positions = [i for i, c in enumerate(raw) if c.isspace()]
    pieces = list(raw)
    k = len(ws_positions) // 2
    if k == 0:
        return pieces
    chosen = sorted(ws_positions[i] for i in rng.choice(len(ws_positions), size=k, replace=False))
    for pos in chosen:
        pieces[pos] = " " * int(rng.integers(2, 6))
    return pieces


def perturb_whitespace(raw: str, seed: RngLike = None) -> str:
    """Replace floor(0.5 * W_s) whitespace characters with runs of 2-5 spaces.

    Sites are chosen uniformly among all whitespace characters; every
    non-whitespace character of the input is preserved byte-for-byte.
    """
    return "".join(_whitespace_pieces(raw, _as_rng(seed)))


def add_noun(doc: Document, source: str, seed: RngLike = None, analyzer: Analyzer | None = None) -> str:
    """New title text with noun(s) added from the chosen source field.

    source="title": one noun drawn from the seeded stream is prepended.
    source="abstract": the first min(4, distinct) abstract nouns, in
    first-occurrence order, are appended. Without any source noun the title
    is returned unchanged.
    """
    analyzer = analyzer if analyzer is not None else RuleAnalyzer()
    title_tagged = analyzer.analyze(doc.title)
    abstract_tagged = analyzer.analyze(doc.abstract) if source == "abstract" else None
    return _add_noun(doc.title, title_tagged, abstract_tagged, source, _as_rng(seed))


def _add_noun(
    title_raw: str,
    title_tagged: TaggedText,
    abstract_tagged: TaggedText | None,
    source: str,
    rng: np.random.Generator,
) -> str:
    nn = TAG_CLASSES["NN"]
    if source == "title":
        nouns = [t.surface for t in title_tagged.tokens() if t.tag in nn]
        if not nouns:
            return title_raw
        chosen = nouns[int(rng.integers(0, len(nouns)))]
        return f"{chosen} {title_raw}"
    if source == "abstract":
        assert abstract_tagged is not None
        seen: dict[str, str] = {}
        for tok in abstract_tagged.tokens():
            if tok.tag in nn and tok.surface.casefold() not in seen:
                seen[tok.surface.casefold()] = tok.surface
        picked = list(seen.values())[:4]
        if not picked:
            return title_raw
        return f"{title_raw} {' '.join(picked)}"
    raise ValidationError(f"unknown add_noun source {source!r}")


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------


def apply_neighbor(
    doc: Document,
    code: str,
    global_seed: int,
    *,
    analyzer: Analyzer | None = None,
    antonyms: AntonymLexicon | None = None,
) -> DocumentVariant:
    """Produce the variant of ``doc`` for one neighbor class or reserved code.

    Tag-driven transforms render their output field by joining tokens with
    single spaces; preserved fields are copied verbatim. Randomness comes only
    from SeedContext(global_seed, doc.id, code).
    """
    if code == "T+A":
        return DocumentVariant(doc.id, code, doc.title, doc.abstract)
    if code == "T":
        return DocumentVariant(doc.id, code, doc.title, "")
    spec = REGISTRY.get(code)
    if spec is None:
        valid = ", ".join(list(RESERVED_CODES) + list(REGISTRY))
        raise ValidationError(f"unknown neighbor code {code!r}; valid codes: {valid}")
    analyzer = analyzer if analyzer is not None else RuleAnalyzer()
    antonyms = antonyms if antonyms is not None else default_antonyms()
    rng = SeedContext(global_seed, doc.id, code).rng()

    if spec.title_transform == "whitespace":
        title, abstract = _perturb_whitespace_fields(doc.title, doc.abstract, rng)
        return DocumentVariant(doc.id, code, title, abstract)

    title = _apply_field(spec.title_transform, doc, "title", rng, analyzer, antonyms)
    abstract = _apply_field(spec.abstract_transform, doc, "abstract", rng, analyzer, antonyms)
    return DocumentVariant(doc.id, code, title, abstract)


def _apply_field(
    descriptor: str,
    doc: Document,
    which: str,
    rng: np.random.Generator,
    analyzer: Analyzer,
    antonyms: AntonymLexicon,
) -> str:
    raw = doc.title if which == "title" else doc.abstract
    if descriptor == "preserve":
        return raw
    if descriptor == "delete":
        return ""
    if descriptor.startswith("add_noun:"):
        source = descriptor.split(":", 1)[1]
        title_tagged = analyzer.analyze(doc.title)
        abstract_tagged = analyzer.analyze(doc.abstract) if source == "abstract" else None
        return _add_noun(doc.title, title_tagged, abstract_tagged, source, rng)

    tagged = analyzer.analyze(raw)
    if descriptor == "rotate":
        out = reorder_sentences(tagged, "rotate", rng)
    elif descriptor == "shuffle":
        out = reorder_sentences(tagged, "shuffle", rng)
    elif descriptor in ("sort_asc", "sort_desc"):
        out = reorder_sentences(tagged, descriptor, rng)
    elif descriptor == "del_rand":
        out = delete_random_words(tagged, 0.30, rng)
    elif descriptor.startswith("del_class:"):
        out = delete_by_tag(tagged, TagClass.named(descriptor.split(":", 1)[1]))
    elif descriptor.startswith("del_quantile:"):
        out = delete_quantile(tagged, int(descriptor.split(":", 1)[1]))
    elif descriptor.startswith("del_np:"):
        out = delete_noun_phrases(tagged, descriptor.split(":", 1)[1])
    elif descriptor.startswith("upper_non:"):
        out = uppercase_by_tag(tagged, TagClass.named(descriptor.split(":", 1)[1]), invert=True)
    elif descriptor.startswith("upper:"):
        out = uppercase_by_tag(tagged, TagClass.named(descriptor.split(":", 1)[1]), invert=False)
    elif descriptor == "del_nn_chars":
        out = delete_chars_from_nouns(tagged, rng)
    elif descriptor == "antonyms":
        out = replace_adjectives_with_antonyms(tagged, antonyms)
    elif descriptor == "keep_nn":
        out = keep_only_nouns(tagged)
    else:
        raise ValidationError(f"unknown transform descriptor {descriptor!r}")
    return out.text()


def _perturb_whitespace_fields(
    title: str, abstract: str, rng: np.random.Generator
) -> tuple[str, str]:
    """Run the whitespace op over title + separator + abstract, keeping two fields.

    Site selection happens on the composed string (the 50% budget spans both
    fields, as the class definition requires); the synthetic ". " separator is
    then dropped, so its expansion, if it was selected, goes with it.
    """
    combined = title + FIELD_SEPARATOR + abstract
    pieces = _whitespace_pieces(combined, rng)
    sep_start = len(title)  # the separator occupies combined[sep_start:sep_start + 2]
    return "".join(pieces[:sep_start]), "".join(pieces[sep_start + 2 :])


# ---------------------------------------------------------------------------
# Category validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CategoryValidation:
    code: str
    category: str
    word_preservation: float
    semantic_ok: bool
    lossless: bool | None  # None for LO classes
    expected_dissimilar: bool

    @property
    def ok(self) -> bool:
        return self.semantic_ok and self.lossless is not False


_SEMANTIC_FLOORS = {"HS": 0.90, "PS": 0.70, "DS": 0.0}


def _word_counter(text: str, analyzer: Analyzer) -> Counter[str]:
    return Counter(t.surface.casefold() for t in analyzer.analyze(text).tokens() if t.is_word)


def validate_category(
    original: Document,
    variant: DocumentVariant,
    spec: NeighborSpec,
    analyzer: Analyzer | None = None,
) -> CategoryValidation:
    """Check the variant against its category's word-preservation contract.

    Violations are flagged, never fatal: some classes legitimately dip under
    their category floor on particular documents.
    """
    analyzer = analyzer if analyzer is not None else RuleAnalyzer()
    orig = _word_counter(original.title, analyzer) + _word_counter(original.abstract, analyzer)
    var = _word_counter(variant.title, analyzer) + _word_counter(variant.abstract, analyzer)
    total = sum(orig.values())
    shared = sum((orig & var).values())
    ratio = shared / total if total else 1.0
    semantic_ok = ratio >= _SEMANTIC_FLOORS[spec.semantics] or spec.semantics == "DS"
    lossless = (var == orig) if spec.orthography == "LL" else None
    return CategoryValidation(
        code=spec.code,
        category=spec.category,
        word_preservation=ratio,
        semantic_ok=semantic_ok,
        lossless=lossless,
        expected_dissimilar=spec.semantics == "DS",
    )


# ---------------------------------------------------------------------------
# Bulk generation and the variants file format
# ---------------------------------------------------------------------------


def expand_codes(selector: str) -> list[str]:
    """Expand a --codes value: 'all', a category name, or a comma list of codes.

    'all' means the two reserved codes (T+A, T) followed by every registered
    neighbor class in registry order.
    """
    selector = selector.strip()
    if selector == "all":
        return ["T+A", "T", *REGISTRY]
    if selector in CATEGORIES:
        return codes_in_category(selector)
    codes = [c.strip() for c in selector.split(",") if c.strip()]
    if not codes:
        raise ValidationError("empty code selection")
    for code in codes:
        if code not in REGISTRY and code not in RESERVED_CODES:
            raise ValidationError(f"unknown neighbor code {code!r}")
    return codes


def generate_variants(
    corpus: Corpus,
    codes: Sequence[str],
    global_seed: int,
    *,
    analyzer: Analyzer | None = None,
    antonyms: AntonymLexicon | None = None,
) -> Iterator[DocumentVariant]:
    """All requested variants, document-major, codes in the order given."""
    analyzer = analyzer if analyzer is not None else RuleAnalyzer()
    antonyms = antonyms if antonyms is not None else default_antonyms()
    for doc in corpus:
        for code in codes:
            yield apply_neighbor(doc, code, global_seed, analyzer=analyzer, antonyms=antonyms)


def write_variants(variants: Iterable[DocumentVariant], path: str | Path) -> int:
    """Write variants as JSONL ({"doc_id","code","title","abstract"}); returns count."""
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for v in variants:
            fh.write(
                json.dumps(
                    {"doc_id": v.doc_id, "code": v.code, "title": v.title, "abstract": v.abstract},
                    ensure_ascii=False,
                )
            )
            fh.write("\n")
            n += 1
    return n


def read_variants(path: str | Path) -> list[DocumentVariant]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                r = json.loads(line)
                out.append(DocumentVariant(r["doc_id"], r["code"], r["title"], r["abstract"]))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ParseError(f"{path}:{lineno}: bad variant record: {exc}") from exc
    return out
