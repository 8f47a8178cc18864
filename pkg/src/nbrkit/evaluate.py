"""Pipeline orchestration: run task setups against an embedding store and
assemble the report tables."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .corpus import Corpus
from .embed import EmbeddingStore, Key, normalize_store
from .errors import ValidationError
from .metrics import (
    DEFAULT_THRESHOLDS,
    RankOutcome,
    SimilarityStats,
    aop,
    capability_matrix,
    mrr,
    nnk_ret,
    pair_similarities,
    summarize_similarities,
    t100,
)
from .perturb import CATEGORIES, REGISTRY
from .report import EvalReport, Table, config_digest, round_mrr, round_pct
from .retrieval import (
    DocSource,
    TaskSetup,
    build_aop,
    build_index,
    build_nn_ret,
    build_task1,
    build_task2,
    rank_of,
)


@dataclass
class RunConfig:
    """Everything that affects a run; serialized into the report metadata."""

    corpus_path: str
    corpus_name: str = ""
    codes: list[str] = field(default_factory=lambda: list(REGISTRY))
    global_seed: int = 0
    sample_seed: int = 0
    provider: str = "hash"
    model: str = "hash3-64"
    dimension: int = 64
    normalization: str = "none"
    tasks: list[str] = field(default_factory=lambda: ["task1", "task2", "nn_ret", "aop", "similarity"])
    nn_ks: list[int] = field(default_factory=lambda: [1, 10])
    aop_ks: list[int] = field(default_factory=lambda: [10, 20])
    task_sample: int = 1000
    aop_sample: int = 2000
    pair_cap: int = 2_000_000
    embed_url: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        return config_digest(self.to_dict())


def rank_outcomes(store: EmbeddingStore, task: TaskSetup) -> list[RankOutcome]:
    """Full-depth rank of each query's relevant key within its candidate set."""
    index = build_index(store, keys=task.candidate_pool)
    outcomes = []
    for query in task.queries:
        rank = rank_of(
            index,
            store.vector(query),
            task.relevant[query],
            exclude=task.exclusions.get(query),
        )
        outcomes.append(RankOutcome(query=query, rank=rank))
    return outcomes


def evaluate_tasks(
    corpus: DocSource,
    store: EmbeddingStore,
    tasks: Sequence[str],
    sample_size: int = 1000,
    seed: int = 0,
) -> dict[str, list[RankOutcome]]:
    builders = {"task1": build_task1, "task2": build_task2}
    out = {}
    for name in tasks:
        try:
            builder = builders[name]
        except KeyError:
            raise ValidationError(f"unknown task {name!r} (expected task1 or task2)") from None
        out[name] = rank_outcomes(store, builder(corpus, store, sample_size, seed))
    return out


def task_table(
    dataset: str, model: str, outcomes_by_task: dict[str, list[RankOutcome]]
) -> list[Table]:
    tables = []
    for task_name, outcomes in sorted(outcomes_by_task.items()):
        tables.append(
            Table(
                name=task_name,
                columns=["dataset", "model", "MRR", "T100"],
                rows=[[dataset, model, round_mrr(mrr(outcomes)), round_pct(t100(outcomes))]],
            )
        )
    return tables


def evaluate_nn_ret(
    corpus: DocSource,
    store: EmbeddingStore,
    codes: Sequence[str],
    ks: Sequence[int] = (1, 10),
) -> tuple[Table, Table]:
    """NNk_Ret per neighbor class and pooled per category (stacked-bar shape)."""
    ks = sorted(ks)
    task = build_nn_ret(corpus, store, codes)
    outcomes = rank_outcomes(store, task)
    by_code: dict[str, list[RankOutcome]] = {}
    for outcome in outcomes:
        by_code.setdefault(outcome.query[1], []).append(outcome)

    class_rows = []
    for code in codes:
        spec = REGISTRY[code]
        row: list = [code, spec.category, len(by_code[code])]
        row += [round_pct(nnk_ret(by_code[code], k)) for k in ks]
        class_rows.append(row)
    category_rows = []
    for category in CATEGORIES:
        pooled = [o for code in codes if REGISTRY[code].category == category for o in by_code[code]]
        if not pooled:
            continue
        row = [category, len(pooled)]
        row += [round_pct(nnk_ret(pooled, k)) for k in ks]
        category_rows.append(row)

    k_cols = [f"nn{k}_ret" for k in ks]
    return (
        Table("nn_ret_by_class", ["code", "category", "queries", *k_cols], class_rows),
        Table("nn_ret_by_category", ["category", "queries", *k_cols], category_rows),
    )


def evaluate_aop(
    corpus: DocSource,
    store: EmbeddingStore,
    codes: Sequence[str],
    ks: Sequence[int] = (10, 20),
    sample_size: int = 2000,
    seed: int = 0,
) -> tuple[Table, Table, dict[int, dict[str, float]]]:
    """AOP-k per class and per category; returns the category values per k too."""
    class_rows = []
    pairs_by_code: dict[int, dict[str, list]] = {k: {} for k in ks}
    for code in codes:
        spec = REGISTRY[code]
        for k in ks:
            pairs = build_aop(corpus, store, code, sample_size=sample_size, k=k, seed=seed)
            pairs_by_code[k][code] = pairs
            class_rows.append([code, spec.category, k, len(pairs), round_pct(aop(pairs, k))])

    category_rows = []
    category_values: dict[int, dict[str, float]] = {k: {} for k in ks}
    for category in CATEGORIES:
        members = [c for c in codes if REGISTRY[c].category == category]
        if not members:
            continue
        for k in ks:
            pooled = [p for code in members for p in pairs_by_code[k][code]]
            value = aop(pooled, k)
            category_values[k][category] = value
            category_rows.append([category, k, len(pooled), round_pct(value)])
    return (
        Table("aop_by_class", ["code", "category", "k", "pairs", "aop"], class_rows),
        Table("aop_by_category", ["category", "k", "pairs", "aop"], category_rows),
        category_values,
    )


def capability_table(model: str, aop20_by_category: dict[str, float]) -> Table:
    """Threshold classification of the per-category AOP-20 values."""
    verdicts = capability_matrix(aop20_by_category)
    rows = []
    for category in DEFAULT_THRESHOLDS:
        rows.append(
            [
                model,
                category,
                round_pct(aop20_by_category[category]),
                DEFAULT_THRESHOLDS[category].describe(),
                verdicts[category],
            ]
        )
    return Table("capability_matrix", ["model", "category", "aop20", "threshold", "optimal"], rows)


def evaluate_similarity(
    store: EmbeddingStore,
    codes: Sequence[str],
    pair_cap: int | None = 2_000_000,
    seed: int = 0,
) -> tuple[Table, Table]:
    """Pairwise cosine distribution per class, pooled per category."""
    stat_cols = ["pairs", "mean", "std", "min", "max", "pct_above_mean", "capped"]
    class_rows = []
    sims_by_code: dict[str, np.ndarray] = {}
    capped_any: dict[str, bool] = {}
    for code in codes:
        keys = store.keys_for_code(code)
        if len(keys) < 2:
            raise ValidationError(f"similarity stats need >= 2 vectors for code {code!r}")
        vectors = np.stack([store.vector(k) for k in keys])
        sims, capped = pair_similarities(vectors, pair_cap, seed)
        sims_by_code[code] = sims
        capped_any[code] = capped
        class_rows.append(
            [code, REGISTRY[code].category, *_stat_cells(summarize_similarities(sims, capped))]
        )
    category_rows = []
    for category in CATEGORIES:
        members = [c for c in codes if REGISTRY[c].category == category]
        if not members:
            continue
        pooled = np.concatenate([sims_by_code[c] for c in members])
        capped = any(capped_any[c] for c in members)
        if pair_cap is not None and pooled.size > pair_cap:
            rng = np.random.Generator(np.random.PCG64(seed))
            pooled = pooled[rng.choice(pooled.size, size=pair_cap, replace=False)]
            capped = True
        category_rows.append([category, *_stat_cells(summarize_similarities(pooled, capped))])
    return (
        Table("similarity_by_class", ["code", "category", *stat_cols], class_rows),
        Table("similarity_by_category", ["category", *stat_cols], category_rows),
    )


def _stat_cells(stats: SimilarityStats) -> list:
    return [
        stats.pair_count,
        round(stats.mean, 4),
        round(stats.std, 4),
        round(stats.min, 4),
        round(stats.max, 4),
        round_pct(stats.percent_above_mean),
        stats.capped,
    ]


def build_report(
    config: RunConfig,
    corpus: DocSource,
    store: EmbeddingStore,
    created_at: str | None = None,
) -> EvalReport:
    """Run the configured tasks and assemble the full report."""
    store = normalize_store(store, config.normalization)
    corpus_label = corpus.name if isinstance(corpus, Corpus) else ""
    meta = {
        "corpus": config.corpus_name or corpus_label,
        "model": store.model_name or config.model,
        "normalization": config.normalization,
        "config": config.to_dict(),
        "config_digest": config.digest(),
    }
    if created_at is not None:
        meta["created_at"] = created_at
    report = EvalReport(meta=meta)

    retrieval_tasks = [t for t in config.tasks if t in ("task1", "task2")]
    if retrieval_tasks:
        outcomes = evaluate_tasks(
            corpus, store, retrieval_tasks, sample_size=config.task_sample, seed=config.sample_seed
        )
        for table in task_table(meta["corpus"], meta["model"], outcomes):
            report.add(table)
    if "nn_ret" in config.tasks:
        by_class, by_category = evaluate_nn_ret(corpus, store, config.codes, ks=config.nn_ks)
        report.add(by_class)
        report.add(by_category)
    if "aop" in config.tasks:
        by_class, by_category, category_values = evaluate_aop(
            corpus,
            store,
            config.codes,
            ks=config.aop_ks,
            sample_size=config.aop_sample,
            seed=config.sample_seed,
        )
        report.add(by_class)
        report.add(by_category)
        if 20 in category_values and set(CATEGORIES) <= set(category_values[20]):
            report.add(capability_table(meta["model"], category_values[20]))
    if "similarity" in config.tasks:
        by_class, by_category = evaluate_similarity(
            store, config.codes, pair_cap=config.pair_cap, seed=config.sample_seed
        )
        report.add(by_class)
        report.add(by_category)
    return report
