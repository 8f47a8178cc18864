"""nbrkit: textual-neighbor generation and embedding-robustness evaluation.

The pipeline: load a title/abstract corpus, generate the 32 registered
neighbor classes per document, embed originals and variants through a
pluggable provider, then score retrieval robustness (MRR, T100, NNk_Ret,
AOP-k, capability matrix) and emit machine-readable report tables.
"""

from .corpus import Corpus, CorpusStats, Document, build_corpus, corpus_stats, load_corpus, save_corpus
from .errors import FormatError, NbrError, ParseError, ProtocolError, TransportError, ValidationError
from .linguistic import (
    TAG_CLASSES,
    AntonymLexicon,
    PretaggedAnalyzer,
    RuleAnalyzer,
    RuleTagger,
    TagClass,
    TaggedText,
    TaggedToken,
    analyze,
    antonym_of,
    chunk_noun_phrases,
    default_antonyms,
    default_tagger,
    tag_tokens,
)
from .perturb import (
    CATEGORIES,
    REGISTRY,
    RESERVED_CODES,
    DocumentVariant,
    NeighborSpec,
    SeedContext,
    apply_neighbor,
    codes_in_category,
    expand_codes,
    generate_variants,
    read_variants,
    registry_json,
    validate_category,
    write_variants,
)
from .embed import (
    EmbeddingRecord,
    EmbeddingStore,
    hash_embed,
    hash_embed_all,
    l2_normalize,
    l2_normalize_store,
    load_store,
    normalize_store,
    remote_embed,
    save_store,
    standardize,
)
from .retrieval import (
    TaskSetup,
    VectorIndex,
    build_aop,
    build_index,
    build_nn_ret,
    build_task1,
    build_task2,
    dump_rankings,
    query_topk,
    rank_of,
)
from .metrics import (
    DEFAULT_THRESHOLDS,
    RankOutcome,
    SimilarityStats,
    Threshold,
    aop,
    capability_matrix,
    mrr,
    nnk_ret,
    pairwise_similarity_stats,
    t100,
)
from .report import EvalReport, Table, config_digest, emit, load_report
from .evaluate import RunConfig, build_report, rank_outcomes

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
